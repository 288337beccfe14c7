#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "metarag/corpus.hpp"
#include "metarag/lexical_index.hpp"
#include "metarag/vector_index.hpp"

namespace metarag {

inline constexpr int kIndexFormatVersion = 1;

inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr const char* kChunksFile = "chunks.jsonl";
inline constexpr const char* kStandardVectorsFile = "vectors_std.f32";
inline constexpr const char* kContextualVectorsFile = "vectors_ctx.f32";
inline constexpr const char* kDocMetaFile = "docmeta.json";

struct IndexManifest {
    int format_version = kIndexFormatVersion;
    std::size_t documents = 0;
    std::size_t chunks = 0;
    std::size_t collections = 2;
    std::size_t dimension = 0;
    std::size_t max_tokens = 0;
    std::size_t overlap_tokens = 0;
    std::vector<std::string> separators;
    std::size_t doc_char_budget = 0;
    std::string analyzer;
    std::string provider;
    std::string embedder_model;
    std::map<std::string, std::string> prompt_versions;
    std::vector<std::string> failed_documents;
    std::vector<std::string> failed_chunks;
    std::size_t enriched_chunks = 0;
    std::vector<std::string> skipped_files;

    friend bool operator==(const IndexManifest&, const IndexManifest&) = default;
};

void to_json(nlohmann::json& j, const IndexManifest& m);
void from_json(const nlohmann::json& j, IndexManifest& m);

/// Everything the offline pipeline produces, before it is written to disk.
struct BuiltIndex {
    IndexManifest manifest;
    std::vector<Chunk> chunks;  // doc_id, then ordinal order
    std::map<std::string, DocumentMetadata> docmeta;
    std::vector<std::vector<float>> standard_vectors;    // row i embeds chunks[i].text
    std::vector<std::vector<float>> contextual_vectors;  // row i embeds chunks[i].contextual_text
    std::vector<std::string> warnings;
};

/// Writes the five index files into `dir` (created if needed). Output is a pure
/// function of `built`. Throws IndexError on I/O failure or inconsistent row counts.
void write_index(const std::filesystem::path& dir, const BuiltIndex& built);

/// A loaded index: chunk store, document metadata and, per collection, a vector index
/// and a lexical index rebuilt from the chunk texts. Immutable; safe to share.
class RagIndex {
public:
    struct Collection {
        TextField field;
        VectorIndex vectors;
        LexicalIndex lexical;
    };

    /// Throws IndexError if files are missing, truncated or inconsistent.
    [[nodiscard]] static std::shared_ptr<const RagIndex> load(const std::filesystem::path& dir);
    [[nodiscard]] static std::shared_ptr<const RagIndex> from_built(const BuiltIndex& built);

    [[nodiscard]] const IndexManifest& manifest() const { return manifest_; }
    [[nodiscard]] const ChunkStore& store() const { return store_; }
    [[nodiscard]] const std::map<std::string, DocumentMetadata>& docmeta() const { return docmeta_; }
    [[nodiscard]] const Collection& collection(TextField field) const {
        return field == TextField::Standard ? standard_ : contextual_;
    }

private:
    RagIndex(IndexManifest manifest, std::vector<Chunk> chunks, std::map<std::string, DocumentMetadata> docmeta,
             const std::vector<std::vector<float>>& standard, const std::vector<std::vector<float>>& contextual);

    IndexManifest manifest_;
    ChunkStore store_;
    std::map<std::string, DocumentMetadata> docmeta_;
    Collection standard_;
    Collection contextual_;
};

} // namespace metarag
