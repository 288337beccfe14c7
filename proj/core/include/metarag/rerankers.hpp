#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "metarag/corpus.hpp"
#include "metarag/lexical_index.hpp"
#include "metarag/llm/gateway.hpp"

namespace metarag {

struct RerankWeights {
    double entity_freq = 0.25;
    double cluster_coherence = 0.25;
    double entity_query = 0.25;
    double retrieval = 0.25;

    /// Throws ConfigError unless every weight is >= 0 and they sum to 1 within 1e-9.
    void validate() const;
};

/// Component names as recorded in ScoredChunk::rerank_components.
inline constexpr const char* kEntityFreq = "entity_freq";
inline constexpr const char* kClusterCoherence = "cluster_coherence";
inline constexpr const char* kEntityQuery = "entity_query";
inline constexpr const char* kRetrieval = "retrieval";

/// Four-component metadata reranker.
///
/// Over the candidate set S (each candidate counts itself):
///   entity_freq(c)       mean over entities e of c of |{s : e in entities(s)}| / |S|
///   cluster_coherence(c) mean over parent clusters g of c of |{s : g in clusters(s)}| / |S|
///   entity_query(c)      share of c's entities whose normalized tokens occur as a
///                        contiguous run in the normalized query tokens
///   retrieval(c)         min-max of the incoming fused score over S (0.5 if all equal)
/// Labels are compared after normalization and deduplicated per chunk. The incoming
/// score is fused_score, else dense_score, else sparse_score, else 0.
///
/// Returns top_n by weighted composite, ties on ascending chunk id. Throws InputError
/// for an empty candidate list or top_n outside [1, |candidates|].
[[nodiscard]] std::vector<ScoredChunk> metadata_rerank(std::string_view query,
                                                       const std::vector<ScoredChunk>& candidates,
                                                       const ChunkStore& store, const RerankWeights& weights,
                                                       std::size_t top_n);

/// Sends the candidates' text for `field` to the gateway's reranker and maps the
/// returned indices back. rerank_score is the provider relevance; order is the
/// provider's, with equal relevance broken by candidate order.
[[nodiscard]] std::vector<ScoredChunk> external_rerank(llm::Gateway& gateway, std::string_view query,
                                                       const std::vector<ScoredChunk>& candidates,
                                                       const ChunkStore& store, TextField field, std::size_t top_n);

} // namespace metarag
