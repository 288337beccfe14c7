#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "metarag/chunker.hpp"
#include "metarag/corpus.hpp"
#include "metarag/index_store.hpp"
#include "metarag/llm/gateway.hpp"

namespace metarag {

struct EnrichmentOptions {
    ChunkingParams chunking;
    std::size_t doc_char_budget = 200000;  // head + tail characters sent for document metadata
    std::size_t max_parallel = 0;          // chunk workers; 0 means the gateway's max_parallel
};

/// `text` unchanged if it fits, else its first and last budget/2 bytes (cut on UTF-8
/// boundaries) joined by an omission marker line.
[[nodiscard]] std::string sample_head_tail(std::string_view text, std::size_t budget);

[[nodiscard]] const llm::Schema& document_metadata_schema();
[[nodiscard]] const llm::Schema& chunk_metadata_schema();

/// Document-level metadata through the enricher role. Throws StructuredOutputError or
/// TransportError when the provider cannot produce a valid record.
[[nodiscard]] DocumentMetadata enrich_document(llm::Gateway& gateway, const Document& doc,
                                               std::size_t doc_char_budget = 200000);

/// Keeps at most two parent clusters that belong to the document (compared after label
/// normalization, stored with the document's spelling); falls back to the first
/// document cluster when none survive.
[[nodiscard]] ChunkMetadata constrain_parent_clusters(ChunkMetadata meta, const DocumentMetadata& doc_meta);

/// Chunk-level metadata through the enricher role, already constrained. Throws like
/// enrich_document.
[[nodiscard]] ChunkMetadata enrich_chunk(llm::Gateway& gateway, const Chunk& chunk, const DocumentMetadata& doc_meta);

/// split -> enrich_document -> enrich_chunk -> contextual text -> embed both texts.
///
/// A document whose metadata fails keeps its chunks with empty metadata and gets no
/// docmeta entry; a failing chunk gets empty metadata. Both are listed in the manifest
/// and in warnings. Throws InputError when no document yields a chunk.
[[nodiscard]] BuiltIndex build_corpus_index(const CorpusLoad& corpus, llm::Gateway& gateway,
                                            const EnrichmentOptions& options);

} // namespace metarag
