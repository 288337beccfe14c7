#include "metarag/enrichment.hpp"

#include <atomic>
#include <optional>
#include <thread>

#include "metarag/error.hpp"
#include "metarag/prompts.hpp"
#include "metarag/text.hpp"

namespace metarag {

namespace {

std::string separator_name(const Separator& s) {
    switch (s.kind) {
    case Separator::Kind::Heading: return "heading";
    case Separator::Kind::BlankLine: return "blank_line";
    case Separator::Kind::Newline: return "newline";
    case Separator::Kind::Sentence: return "sentence";
    case Separator::Kind::Space: return "space";
    case Separator::Kind::Character: return "character";
    case Separator::Kind::Literal: return "literal:" + s.literal;
    }
    return "unknown";
}

} // namespace

std::string sample_head_tail(std::string_view s, std::size_t budget) {
    if (s.size() <= budget) {
        return std::string(s);
    }
    const std::size_t head = text::utf8_floor(s, budget / 2);
    const std::size_t tail = text::utf8_ceil(s, s.size() - (budget - budget / 2));
    return std::string(s.substr(0, head)) + "\n\n[... middle of document omitted ...]\n\n" + std::string(s.substr(tail));
}

const llm::Schema& document_metadata_schema() {
    static const llm::Schema schema = {llm::FieldSpec::string("one_liner"), llm::FieldSpec::string("summary"),
                                       llm::FieldSpec::list("clusters", 5, 20)};
    return schema;
}

const llm::Schema& chunk_metadata_schema() {
    static const llm::Schema schema = {llm::FieldSpec::list("parent_clusters"), llm::FieldSpec::list("chunk_entities"),
                                       llm::FieldSpec::list("answered_questions", 3, 10),
                                       llm::FieldSpec::list("retrieval_nuggets")};
    return schema;
}

DocumentMetadata enrich_document(llm::Gateway& gateway, const Document& doc, std::size_t doc_char_budget) {
    const auto& p = prompts::get(prompts::PromptId::DocumentMetadata);
    const std::string user = prompts::render(
        p.user, {{"file_name", doc.file_name}, {"document", sample_head_tail(doc.markdown_text, doc_char_budget)}});
    const auto record = gateway.chat_structured(llm::Role::Enricher, std::string(p.system), user,
                                                document_metadata_schema());
    DocumentMetadata m;
    m.doc_id = doc.doc_id;
    m.one_liner = record.string("one_liner");
    m.summary = record.string("summary");
    m.clusters = record.list("clusters");
    return m;
}

ChunkMetadata constrain_parent_clusters(ChunkMetadata meta, const DocumentMetadata& doc_meta) {
    std::vector<std::string> kept;
    for (const auto& label : meta.parent_clusters) {
        const auto key = text::normalize_label(label);
        for (const auto& c : doc_meta.clusters) {
            if (text::normalize_label(c) == key) {
                if (std::find(kept.begin(), kept.end(), c) == kept.end()) {
                    kept.push_back(c);
                }
                break;
            }
        }
        if (kept.size() == 2) {
            break;
        }
    }
    if (kept.empty() && !doc_meta.clusters.empty()) {
        kept.push_back(doc_meta.clusters.front());
    }
    meta.parent_clusters = std::move(kept);
    return meta;
}

ChunkMetadata enrich_chunk(llm::Gateway& gateway, const Chunk& chunk, const DocumentMetadata& doc_meta) {
    if (chunk.doc_id != doc_meta.doc_id) {
        throw InputError("chunk " + chunk.chunk_id + " does not belong to document " + doc_meta.doc_id);
    }
    const auto& p = prompts::get(prompts::PromptId::ChunkMetadata);
    const std::string user = prompts::render(
        p.user, {{"summary", doc_meta.summary}, {"clusters", text::join(doc_meta.clusters, "\n")}, {"chunk", chunk.text}});
    const auto record =
        gateway.chat_structured(llm::Role::Enricher, std::string(p.system), user, chunk_metadata_schema());
    ChunkMetadata m;
    m.parent_clusters = record.list("parent_clusters");
    m.chunk_entities = record.list("chunk_entities");
    m.answered_questions = record.list("answered_questions");
    m.retrieval_nuggets = record.list("retrieval_nuggets");
    return constrain_parent_clusters(std::move(m), doc_meta);
}

BuiltIndex build_corpus_index(const CorpusLoad& corpus, llm::Gateway& gateway, const EnrichmentOptions& options) {
    options.chunking.validate();
    if (corpus.documents.empty()) {
        throw InputError("empty corpus: no readable .md files");
    }
    BuiltIndex out;
    auto& m = out.manifest;
    m.max_tokens = options.chunking.max_tokens;
    m.overlap_tokens = options.chunking.overlap_tokens;
    for (const auto& s : options.chunking.separators) {
        m.separators.push_back(separator_name(s));
    }
    m.doc_char_budget = options.doc_char_budget;
    m.analyzer = std::string(text::kAnalyzerId);
    m.provider = std::string(llm::to_string(gateway.config().kind));
    m.embedder_model = gateway.model_for(llm::Role::Embedder);
    m.prompt_versions = prompts::versions();
    m.skipped_files = corpus.warnings;
    out.warnings = corpus.warnings;

    // (chunk position, document metadata) for every chunk that gets an enrichment call.
    std::vector<std::pair<std::size_t, const DocumentMetadata*>> jobs;
    for (const auto& doc : corpus.documents) {
        auto chunks = split(doc, options.chunking);
        const DocumentMetadata* meta = nullptr;
        try {
            auto dm = enrich_document(gateway, doc, options.doc_char_budget);
            meta = &out.docmeta.emplace(doc.doc_id, std::move(dm)).first->second;
        } catch (const Error& e) {
            m.failed_documents.push_back(doc.doc_id);
            out.warnings.push_back("document metadata failed for " + doc.doc_id + ": " + e.what());
        }
        for (auto& c : chunks) {
            if (meta != nullptr) {
                jobs.emplace_back(out.chunks.size(), meta);
            }
            out.chunks.push_back(std::move(c));
        }
    }
    if (out.chunks.empty()) {
        throw InputError("empty corpus: no chunks produced");
    }
    m.documents = corpus.documents.size();
    m.chunks = out.chunks.size();

    std::vector<std::optional<ChunkMetadata>> results(jobs.size());
    std::vector<std::string> errors(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t j = next++; j < jobs.size(); j = next++) {
            const auto& [pos, meta] = jobs[j];
            try {
                results[j] = enrich_chunk(gateway, out.chunks[pos], *meta);
            } catch (const Error& e) {
                errors[j] = e.what();
            }
        }
    };
    const std::size_t workers =
        std::max<std::size_t>(1, std::min(options.max_parallel == 0 ? gateway.config().max_parallel : options.max_parallel,
                                           jobs.size()));
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 1; w < workers; ++w) {
            pool.emplace_back(worker);
        }
        worker();
    }

    std::vector<bool> enriched(out.chunks.size(), false);
    for (std::size_t j = 0; j < jobs.size(); ++j) {
        auto& chunk = out.chunks[jobs[j].first];
        if (results[j]) {
            chunk.metadata = std::move(*results[j]);
            enriched[jobs[j].first] = true;
        } else {
            out.warnings.push_back("chunk metadata failed for " + chunk.chunk_id + ": " + errors[j]);
        }
    }
    for (std::size_t i = 0; i < out.chunks.size(); ++i) {
        auto& chunk = out.chunks[i];
        if (enriched[i]) {
            ++m.enriched_chunks;
        } else {
            m.failed_chunks.push_back(chunk.chunk_id);
        }
        chunk.contextual_text = build_contextual_text(chunk);
    }

    std::vector<std::string> texts;
    texts.reserve(out.chunks.size());
    for (const auto& c : out.chunks) {
        texts.push_back(c.text);
    }
    out.standard_vectors = gateway.embed(texts);
    texts.clear();
    for (const auto& c : out.chunks) {
        texts.push_back(c.contextual_text);
    }
    out.contextual_vectors = gateway.embed(texts);
    m.dimension = out.standard_vectors.front().size();
    if (out.contextual_vectors.front().size() != m.dimension) {
        throw llm::ProviderError("embedding dimension differs between collections");
    }
    return out;
}

} // namespace metarag
