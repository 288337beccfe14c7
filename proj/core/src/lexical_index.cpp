#include "metarag/lexical_index.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "metarag/error.hpp"
#include "metarag/text.hpp"

namespace metarag {

namespace {

double bm25_idf(std::size_t n_docs, std::size_t df) {
    const double N = static_cast<double>(n_docs);
    const double n = static_cast<double>(df);
    return std::log((N - n + 0.5) / (n + 0.5) + 1.0);
}

double bm25_term(double idf, double freq, double len, double avgdl, const Bm25Params& p) {
    const double ratio = avgdl > 0.0 ? len / avgdl : 0.0;
    return idf * (freq * (p.k1 + 1.0)) / (freq + p.k1 * (1.0 - p.b + p.b * ratio));
}

bool better(const ScoredChunk& a, const ScoredChunk& b) {
    if (*a.sparse_score != *b.sparse_score) {
        return *a.sparse_score > *b.sparse_score;
    }
    return a.chunk_id < b.chunk_id;
}

} // namespace

const std::string& field_text(const Chunk& chunk, TextField field) {
    return field == TextField::Contextual ? chunk.contextual_text : chunk.text;
}

void Bm25Params::validate() const {
    if (!(k1 >= 0.0)) {
        throw ConfigError("bm25 k1 must be >= 0");
    }
    if (!(b >= 0.0 && b <= 1.0)) {
        throw ConfigError("bm25 b must be in [0, 1]");
    }
}

std::uint32_t LexicalStats::doc_number(std::string_view chunk_id) const {
    auto it = numbers_.find(std::string(chunk_id));
    if (it == numbers_.end()) {
        throw InputError("chunk not indexed: " + std::string(chunk_id));
    }
    return it->second;
}

std::size_t LexicalStats::doc_len(std::string_view chunk_id) const {
    return lengths_[doc_number(chunk_id)];
}

const std::vector<LexicalStats::Posting>* LexicalStats::postings(std::string_view term) const {
    auto it = postings_.find(std::string(term));
    return it == postings_.end() ? nullptr : &it->second;
}

std::size_t LexicalStats::df(std::string_view term) const {
    const auto* list = postings(term);
    return list ? list->size() : 0;
}

std::size_t LexicalStats::tf(std::string_view term, std::string_view chunk_id) const {
    const auto* list = postings(term);
    if (!list) {
        return 0;
    }
    const std::uint32_t doc = doc_number(chunk_id);
    auto it = std::lower_bound(list->begin(), list->end(), doc,
                               [](const Posting& p, std::uint32_t d) { return p.doc < d; });
    return (it != list->end() && it->doc == doc) ? it->freq : 0;
}

LexicalIndex LexicalIndex::build(std::span<const Chunk> chunks, TextField field) {
    if (chunks.empty()) {
        throw InputError("empty corpus");
    }
    LexicalIndex index;
    index.field_ = field;
    LexicalStats& s = index.stats_;
    s.ids_.reserve(chunks.size());
    s.lengths_.reserve(chunks.size());

    for (const auto& chunk : chunks) {
        const auto doc = static_cast<std::uint32_t>(s.ids_.size());
        if (!s.numbers_.emplace(chunk.chunk_id, doc).second) {
            throw InputError("duplicate chunk id: " + chunk.chunk_id);
        }
        s.ids_.push_back(chunk.chunk_id);

        const auto tokens = text::analyze(field_text(chunk, field));
        s.lengths_.push_back(static_cast<std::uint32_t>(tokens.size()));
        s.total_terms_ += tokens.size();

        std::map<std::string_view, std::uint32_t> counts;
        for (const auto& t : tokens) {
            ++counts[t];
        }
        for (const auto& [term, freq] : counts) {
            s.postings_[std::string(term)].push_back({doc, freq});
        }
    }
    s.avgdl_ = static_cast<double>(s.total_terms_) / static_cast<double>(s.ids_.size());
    return index;
}

double LexicalIndex::bm25_score(const Bm25Params& params, std::string_view query, std::string_view chunk_id) const {
    const std::size_t len = stats_.doc_len(chunk_id);
    double score = 0.0;
    for (const auto& term : text::analyze(query)) {
        const std::size_t f = stats_.tf(term, chunk_id);
        if (f == 0) {
            continue;
        }
        score += bm25_term(bm25_idf(stats_.num_docs(), stats_.df(term)), static_cast<double>(f),
                           static_cast<double>(len), stats_.avgdl(), params);
    }
    return score;
}

double LexicalIndex::tfidf_score(std::string_view query, std::string_view chunk_id) const {
    const std::size_t len = stats_.doc_len(chunk_id);
    if (len == 0) {
        return 0.0;
    }
    double score = 0.0;
    for (const auto& term : text::analyze(query)) {
        const std::size_t f = stats_.tf(term, chunk_id);
        if (f == 0) {
            continue;
        }
        const double tf = static_cast<double>(f) / static_cast<double>(len);
        const double idf = std::log(static_cast<double>(stats_.num_docs()) / (static_cast<double>(stats_.df(term)) + 1.0));
        score += tf * idf;
    }
    return score;
}

std::vector<double> LexicalIndex::score_all(const Bm25Params& params, std::string_view query) const {
    std::vector<double> scores(stats_.num_docs(), 0.0);
    // Accumulate term by term in query order so each chunk's sum is evaluated in the
    // same order as bm25_score().
    for (const auto& term : text::analyze(query)) {
        const auto* list = stats_.postings(term);
        if (!list) {
            continue;
        }
        const double idf = bm25_idf(stats_.num_docs(), list->size());
        for (const auto& p : *list) {
            scores[p.doc] += bm25_term(idf, static_cast<double>(p.freq), static_cast<double>(stats_.lengths_[p.doc]),
                                       stats_.avgdl(), params);
        }
    }
    return scores;
}

std::vector<ScoredChunk> LexicalIndex::search(const Bm25Params& params, std::string_view query, std::size_t k,
                                              const MetadataFilter& filter, const ChunkStore& store) const {
    if (k == 0) {
        throw InputError("k must be >= 1");
    }
    const auto scores = score_all(params, query);
    const bool trivial = filter.is_trivial();

    std::vector<ScoredChunk> hits;
    hits.reserve(scores.size());
    for (std::size_t doc = 0; doc < scores.size(); ++doc) {
        const std::string& id = stats_.ids_[doc];
        if (!trivial) {
            const Chunk* chunk = store.find(id);
            if (!chunk || !matches(filter, *chunk)) {
                continue;
            }
        }
        ScoredChunk hit;
        hit.chunk_id = id;
        hit.sparse_score = scores[doc];
        hits.push_back(std::move(hit));
    }
    const std::size_t n = std::min(k, hits.size());
    std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(n), hits.end(), better);
    hits.resize(n);
    assign_ranks(hits);
    return hits;
}

} // namespace metarag
