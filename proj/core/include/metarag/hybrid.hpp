#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "metarag/corpus.hpp"
#include "metarag/lexical_index.hpp"
#include "metarag/vector_index.hpp"

namespace metarag {

struct HybridParams {
    double lambda = 0.5;             // weight of the dense score
    std::size_t candidate_pool = 25; // results requested from each scorer
    Bm25Params bm25;

    void validate() const;
};

/// Min-max normalization used for fusion. An all-equal (or single) list maps to 0.5.
[[nodiscard]] std::vector<double> min_max_normalize(std::span<const double> values);

/// Dense + sparse retrieval fused as lambda * dense_norm + (1 - lambda) * sparse_norm.
///
/// Both scorers return candidate_pool results under the same filter. Scores are
/// min-max normalized over the union; a chunk missing from one list takes that
/// scorer's observed minimum. Output keeps the raw scores that were observed.
class HybridRetriever {
public:
    HybridRetriever(const ChunkStore& store, const VectorIndex& dense, const LexicalIndex& sparse)
        : store_(store), dense_(dense), sparse_(sparse) {}

    /// Throws ConfigError if k > params.candidate_pool.
    [[nodiscard]] std::vector<ScoredChunk> search(std::string_view query, std::span<const float> query_vector,
                                                  const HybridParams& params, const MetadataFilter& filter,
                                                  std::size_t k) const;

    /// Fusion step alone, exposed for testing and for callers that already hold both lists.
    [[nodiscard]] static std::vector<ScoredChunk> fuse(const std::vector<ScoredChunk>& dense,
                                                       const std::vector<ScoredChunk>& sparse, double lambda,
                                                       std::size_t k);

private:
    const ChunkStore& store_;
    const VectorIndex& dense_;
    const LexicalIndex& sparse_;
};

} // namespace metarag
