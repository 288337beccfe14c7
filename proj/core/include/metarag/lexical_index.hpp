#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "metarag/corpus.hpp"

namespace metarag {

/// Which chunk text an index is built over.
enum class TextField { Standard, Contextual };

[[nodiscard]] const std::string& field_text(const Chunk& chunk, TextField field);

struct Bm25Params {
    double k1 = 1.5;
    double b = 0.75;

    void validate() const;
};

/// Corpus statistics for the sparse scorers: N, avgdl, |d|, n_t and f(t,d).
/// Chunks are numbered densely in insertion order internally.
class LexicalStats {
public:
    struct Posting {
        std::uint32_t doc;
        std::uint32_t freq;
    };

    [[nodiscard]] std::size_t num_docs() const { return ids_.size(); }
    [[nodiscard]] double avgdl() const { return avgdl_; }
    [[nodiscard]] std::size_t doc_len(std::string_view chunk_id) const;
    [[nodiscard]] std::size_t df(std::string_view term) const;
    [[nodiscard]] std::size_t tf(std::string_view term, std::string_view chunk_id) const;
    [[nodiscard]] std::size_t total_terms() const { return total_terms_; }

    [[nodiscard]] const std::vector<std::string>& chunk_ids() const { return ids_; }
    [[nodiscard]] const std::vector<std::uint32_t>& lengths() const { return lengths_; }
    [[nodiscard]] const std::vector<Posting>* postings(std::string_view term) const;
    /// Dense number of `chunk_id`; throws InputError if the id was not indexed.
    [[nodiscard]] std::uint32_t doc_number(std::string_view chunk_id) const;

private:
    friend class LexicalIndex;

    std::vector<std::string> ids_;
    std::unordered_map<std::string, std::uint32_t> numbers_;
    std::vector<std::uint32_t> lengths_;
    std::unordered_map<std::string, std::vector<Posting>> postings_;  // sorted by doc
    std::size_t total_terms_ = 0;
    double avgdl_ = 0.0;
};

/// Inverted index over one text field of a chunk collection.
class LexicalIndex {
public:
    /// Throws InputError("empty corpus") for an empty span and on duplicate ids.
    [[nodiscard]] static LexicalIndex build(std::span<const Chunk> chunks, TextField field);

    [[nodiscard]] const LexicalStats& stats() const { return stats_; }
    [[nodiscard]] TextField field() const { return field_; }

    /// Okapi BM25 with IDF'(t) = ln((N - n_t + 0.5)/(n_t + 0.5) + 1). Each query
    /// token contributes once per occurrence. Unknown chunk ids throw InputError.
    [[nodiscard]] double bm25_score(const Bm25Params& params, std::string_view query, std::string_view chunk_id) const;

    /// sum over query tokens of f(t,d)/|d| * ln(N/(n_t+1)).
    [[nodiscard]] double tfidf_score(std::string_view query, std::string_view chunk_id) const;

    /// Top-k BM25 over chunks passing `filter` (resolved through `store`). Every
    /// admissible chunk is ranked, including zero scores; ties break on ascending chunk id.
    [[nodiscard]] std::vector<ScoredChunk> search(const Bm25Params& params, std::string_view query, std::size_t k,
                                                  const MetadataFilter& filter, const ChunkStore& store) const;

    /// BM25 for every indexed chunk, in dense-number order.
    [[nodiscard]] std::vector<double> score_all(const Bm25Params& params, std::string_view query) const;

private:
    LexicalStats stats_;
    TextField field_ = TextField::Standard;
};

} // namespace metarag
