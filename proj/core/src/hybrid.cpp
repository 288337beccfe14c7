#include "metarag/hybrid.hpp"

#include <algorithm>
#include <map>

#include "metarag/error.hpp"

namespace metarag {

void HybridParams::validate() const {
    if (!(lambda >= 0.0 && lambda <= 1.0)) {
        throw ConfigError("lambda must be in [0, 1]");
    }
    if (candidate_pool == 0) {
        throw ConfigError("candidate_pool must be positive");
    }
    bm25.validate();
}

std::vector<double> min_max_normalize(std::span<const double> values) {
    if (values.empty()) {
        return {};
    }
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    const double min = *lo;
    const double range = *hi - *lo;
    std::vector<double> out(values.size(), 0.5);
    if (range > 0.0) {
        for (std::size_t i = 0; i < values.size(); ++i) {
            out[i] = std::clamp((values[i] - min) / range, 0.0, 1.0);
        }
    }
    return out;
}

std::vector<ScoredChunk> HybridRetriever::fuse(const std::vector<ScoredChunk>& dense,
                                               const std::vector<ScoredChunk>& sparse, double lambda, std::size_t k) {
    struct Entry {
        std::optional<double> dense;
        std::optional<double> sparse;
    };
    std::map<std::string, Entry> merged;
    for (const auto& d : dense) {
        merged[d.chunk_id].dense = d.dense_score;
    }
    for (const auto& s : sparse) {
        merged[s.chunk_id].sparse = s.sparse_score;
    }
    if (merged.empty()) {
        return {};
    }

    auto observed_min = [](const std::vector<ScoredChunk>& list, auto member) {
        std::optional<double> m;
        for (const auto& r : list) {
            if (const auto& v = r.*member) {
                m = m ? std::min(*m, *v) : *v;
            }
        }
        return m;
    };
    const auto dense_min = observed_min(dense, &ScoredChunk::dense_score);
    const auto sparse_min = observed_min(sparse, &ScoredChunk::sparse_score);

    std::vector<double> dense_values;
    std::vector<double> sparse_values;
    dense_values.reserve(merged.size());
    sparse_values.reserve(merged.size());
    for (const auto& [id, e] : merged) {
        dense_values.push_back(e.dense ? *e.dense : dense_min.value_or(0.0));
        sparse_values.push_back(e.sparse ? *e.sparse : sparse_min.value_or(0.0));
    }
    // A scorer that returned nothing contributes 0 for every chunk.
    auto dense_norm = dense_min ? min_max_normalize(dense_values) : std::vector<double>(merged.size(), 0.0);
    auto sparse_norm = sparse_min ? min_max_normalize(sparse_values) : std::vector<double>(merged.size(), 0.0);

    std::vector<ScoredChunk> fused;
    fused.reserve(merged.size());
    std::size_t i = 0;
    for (const auto& [id, e] : merged) {
        ScoredChunk r;
        r.chunk_id = id;
        r.dense_score = e.dense;
        r.sparse_score = e.sparse;
        r.fused_score = std::clamp(lambda * dense_norm[i] + (1.0 - lambda) * sparse_norm[i], 0.0, 1.0);
        fused.push_back(std::move(r));
        ++i;
    }
    const std::size_t n = std::min(k, fused.size());
    std::partial_sort(fused.begin(), fused.begin() + static_cast<std::ptrdiff_t>(n), fused.end(),
                      [](const ScoredChunk& a, const ScoredChunk& b) {
                          if (*a.fused_score != *b.fused_score) {
                              return *a.fused_score > *b.fused_score;
                          }
                          return a.chunk_id < b.chunk_id;
                      });
    fused.resize(n);
    assign_ranks(fused);
    return fused;
}

std::vector<ScoredChunk> HybridRetriever::search(std::string_view query, std::span<const float> query_vector,
                                                 const HybridParams& params, const MetadataFilter& filter,
                                                 std::size_t k) const {
    params.validate();
    if (k == 0) {
        throw InputError("k must be >= 1");
    }
    if (k > params.candidate_pool) {
        throw ConfigError("k (" + std::to_string(k) + ") must not exceed candidate_pool (" +
                          std::to_string(params.candidate_pool) + ")");
    }
    const auto dense = dense_.search(query_vector, params.candidate_pool, filter, store_);
    const auto sparse = sparse_.search(params.bm25, query, params.candidate_pool, filter, store_);
    return fuse(dense, sparse, params.lambda, k);
}

} // namespace metarag
