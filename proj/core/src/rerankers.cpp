#include "metarag/rerankers.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "metarag/error.hpp"
#include "metarag/hybrid.hpp"
#include "metarag/text.hpp"

namespace metarag {

void RerankWeights::validate() const {
    for (double w : {entity_freq, cluster_coherence, entity_query, retrieval}) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw ConfigError("rerank weights must be finite and non-negative");
        }
    }
    const double sum = entity_freq + cluster_coherence + entity_query + retrieval;
    if (std::abs(sum - 1.0) > 1e-9) {
        throw ConfigError("rerank weights must sum to 1");
    }
}

namespace {

std::set<std::string> normalized_set(const std::vector<std::string>& labels) {
    std::set<std::string> out;
    for (const auto& l : labels) {
        auto n = text::normalize_label(l);
        if (!n.empty()) {
            out.insert(std::move(n));
        }
    }
    return out;
}

double incoming_score(const ScoredChunk& s) {
    if (s.fused_score) {
        return *s.fused_score;
    }
    if (s.dense_score) {
        return *s.dense_score;
    }
    return s.sparse_score.value_or(0.0);
}

// Mean over labels of the share of candidates carrying that label.
double prevalence(const std::set<std::string>& labels, const std::map<std::string, std::size_t>& counts,
                  std::size_t n) {
    if (labels.empty()) {
        return 0.0;
    }
    double acc = 0.0;
    for (const auto& l : labels) {
        acc += static_cast<double>(counts.at(l)) / static_cast<double>(n);
    }
    return acc / static_cast<double>(labels.size());
}

} // namespace

std::vector<ScoredChunk> metadata_rerank(std::string_view query, const std::vector<ScoredChunk>& candidates,
                                         const ChunkStore& store, const RerankWeights& weights, std::size_t top_n) {
    weights.validate();
    if (candidates.empty()) {
        throw InputError("metadata_rerank: empty candidate list");
    }
    if (top_n == 0 || top_n > candidates.size()) {
        throw InputError("metadata_rerank: top_n must be in [1, " + std::to_string(candidates.size()) + "]");
    }
    const std::size_t n = candidates.size();
    std::vector<std::set<std::string>> entities(n);
    std::vector<std::set<std::string>> clusters(n);
    std::vector<std::string> entity_spellings;
    std::map<std::string, std::size_t> entity_counts;
    std::map<std::string, std::size_t> cluster_counts;
    std::vector<double> incoming(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Chunk& c = store.at(candidates[i].chunk_id);
        entities[i] = normalized_set(c.metadata.chunk_entities);
        clusters[i] = normalized_set(c.metadata.parent_clusters);
        for (const auto& e : entities[i]) {
            ++entity_counts[e];
        }
        for (const auto& g : clusters[i]) {
            ++cluster_counts[g];
        }
        incoming[i] = incoming_score(candidates[i]);
    }
    const auto retrieval = min_max_normalize(incoming);
    const auto query_tokens = text::label_tokens(query);

    std::vector<ScoredChunk> out = candidates;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t matched = 0;
        for (const auto& e : entities[i]) {
            if (text::contains_subsequence(query_tokens, text::label_tokens(e))) {
                ++matched;
            }
        }
        const double ef = prevalence(entities[i], entity_counts, n);
        const double cc = prevalence(clusters[i], cluster_counts, n);
        const double eq = static_cast<double>(matched) / static_cast<double>(std::max<std::size_t>(1, entities[i].size()));
        const double rt = retrieval[i];
        out[i].rerank_components = std::map<std::string, double>{
            {kEntityFreq, ef}, {kClusterCoherence, cc}, {kEntityQuery, eq}, {kRetrieval, rt}};
        out[i].rerank_score = weights.entity_freq * ef + weights.cluster_coherence * cc + weights.entity_query * eq +
                              weights.retrieval * rt;
    }
    std::sort(out.begin(), out.end(), [](const ScoredChunk& a, const ScoredChunk& b) {
        if (*a.rerank_score != *b.rerank_score) {
            return *a.rerank_score > *b.rerank_score;
        }
        return a.chunk_id < b.chunk_id;
    });
    out.resize(top_n);
    assign_ranks(out);
    return out;
}

std::vector<ScoredChunk> external_rerank(llm::Gateway& gateway, std::string_view query,
                                         const std::vector<ScoredChunk>& candidates, const ChunkStore& store,
                                         TextField field, std::size_t top_n) {
    if (candidates.empty()) {
        throw InputError("external_rerank: empty candidate list");
    }
    std::vector<std::string> texts;
    texts.reserve(candidates.size());
    for (const auto& c : candidates) {
        texts.push_back(field_text(store.at(c.chunk_id), field));
    }
    const auto hits = gateway.rerank(std::string(query), texts, top_n);
    std::vector<ScoredChunk> out;
    std::set<std::size_t> used;
    for (const auto& h : hits) {
        if (!used.insert(h.index).second) {
            continue;
        }
        auto s = candidates[h.index];
        s.rerank_score = h.relevance;
        s.rerank_components.reset();
        out.push_back(std::move(s));
    }
    assign_ranks(out);
    return out;
}

} // namespace metarag
