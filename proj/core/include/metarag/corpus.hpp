#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace metarag {

struct SourcePeriod {
    std::optional<std::string> year;
    std::optional<std::string> quarter;

    friend bool operator==(const SourcePeriod&, const SourcePeriod&) = default;
};

/// One Markdown source file. doc_id is the file stem and unique within a corpus.
struct Document {
    std::string doc_id;
    std::string file_name;
    std::string markdown_text;
    SourcePeriod period;
};

/// Document-level enrichment. Produced once per document and kept in the master index.
struct DocumentMetadata {
    std::string doc_id;
    std::string one_liner;
    std::string summary;
    std::vector<std::string> clusters;

    friend bool operator==(const DocumentMetadata&, const DocumentMetadata&) = default;
};

struct ChunkMetadata {
    std::vector<std::string> parent_clusters;
    std::vector<std::string> chunk_entities;
    std::vector<std::string> answered_questions;
    std::vector<std::string> retrieval_nuggets;

    [[nodiscard]] bool empty() const {
        return parent_clusters.empty() && chunk_entities.empty() && answered_questions.empty() &&
               retrieval_nuggets.empty();
    }
    friend bool operator==(const ChunkMetadata&, const ChunkMetadata&) = default;
};

/// The retrieval unit. `text` is a verbatim slice of the source document starting at
/// byte `offset`; its first `overlap` bytes repeat the tail of the previous chunk.
struct Chunk {
    std::string chunk_id;
    std::string doc_id;
    std::size_t ordinal = 0;
    std::string text;
    ChunkMetadata metadata;
    std::string contextual_text;
    std::size_t offset = 0;
    std::size_t overlap = 0;

    friend bool operator==(const Chunk&, const Chunk&) = default;
};

/// "<doc_id>#<ordinal>"
[[nodiscard]] std::string make_chunk_id(std::string_view doc_id, std::size_t ordinal);

/// Conjunction of optional constraints. Absent fields impose nothing; cluster and
/// entity sets are match-any and compared after label normalization.
struct MetadataFilter {
    std::optional<std::set<std::string>> allowed_doc_ids;
    std::optional<std::set<std::string>> required_clusters;
    std::optional<std::set<std::string>> required_entities;
    std::set<std::string> excluded_chunk_ids;

    [[nodiscard]] bool is_trivial() const {
        return !allowed_doc_ids && !required_clusters && !required_entities && excluded_chunk_ids.empty();
    }
};

[[nodiscard]] bool matches(const MetadataFilter& filter, const Chunk& chunk);

/// A chunk reference with provenance-tagged scores. rank is 1-based and gapless per list.
struct ScoredChunk {
    std::string chunk_id;
    std::optional<double> dense_score;
    std::optional<double> sparse_score;
    std::optional<double> fused_score;
    std::optional<double> rerank_score;
    std::optional<std::map<std::string, double>> rerank_components;
    std::size_t rank = 0;

    friend bool operator==(const ScoredChunk&, const ScoredChunk&) = default;
};

/// Sets rank = position + 1 on every element.
void assign_ranks(std::vector<ScoredChunk>& results);

/// Owns the chunks of a corpus and resolves chunk ids. Immutable once built.
class ChunkStore {
public:
    ChunkStore() = default;
    explicit ChunkStore(std::vector<Chunk> chunks);

    [[nodiscard]] const std::vector<Chunk>& chunks() const { return chunks_; }
    [[nodiscard]] std::size_t size() const { return chunks_.size(); }
    [[nodiscard]] bool empty() const { return chunks_.empty(); }

    [[nodiscard]] const Chunk* find(std::string_view chunk_id) const;
    /// Throws InputError for unknown ids.
    [[nodiscard]] const Chunk& at(std::string_view chunk_id) const;

private:
    std::vector<Chunk> chunks_;
    std::unordered_map<std::string, std::size_t> by_id_;
};

struct CorpusLoad {
    std::vector<Document> documents;  // sorted by doc_id
    std::vector<std::string> warnings;
};

/// Name of the optional per-corpus attribute file: {"<doc_id>": {"year": "...", "quarter": "..."}}.
inline constexpr std::string_view kCorpusManifestName = "corpus_manifest.json";

/// Reads every *.md file in `dir` (non-recursive). Unreadable or empty files are skipped
/// with a warning. Throws InputError if `dir` is not a directory.
[[nodiscard]] CorpusLoad load_corpus(const std::filesystem::path& dir);

void to_json(nlohmann::json& j, const DocumentMetadata& m);
void from_json(const nlohmann::json& j, DocumentMetadata& m);
void to_json(nlohmann::json& j, const ChunkMetadata& m);
void from_json(const nlohmann::json& j, ChunkMetadata& m);
void to_json(nlohmann::json& j, const Chunk& c);
void from_json(const nlohmann::json& j, Chunk& c);
void to_json(nlohmann::json& j, const ScoredChunk& s);

} // namespace metarag
