#pragma once

#include <chrono>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "metarag/hybrid.hpp"
#include "metarag/index_store.hpp"
#include "metarag/llm/gateway.hpp"
#include "metarag/rerankers.hpp"

namespace metarag {

enum class RerankerKind { None, External, Metadata };

[[nodiscard]] std::string_view to_string(RerankerKind kind);
/// "none" | "external" | "metadata"; throws ConfigError otherwise.
[[nodiscard]] RerankerKind parse_reranker(std::string_view name);
/// "std" | "standard" | "ctx" | "contextual"; throws ConfigError otherwise.
[[nodiscard]] TextField parse_collection(std::string_view name);
[[nodiscard]] std::string_view collection_name(TextField field);  // "std" or "ctx"

struct ExpansionParams {
    std::size_t initial_k = 4;
    std::size_t expand_k = 3;
};

struct PipelineConfig {
    std::string label;
    int architecture = 1;
    TextField collection = TextField::Standard;
    std::size_t k = 7;
    std::size_t candidate_pool = 25;
    HybridParams hybrid;                   // hybrid.candidate_pool is replaced by candidate_pool
    std::optional<RerankerKind> reranker;  // nullopt: the architecture's default
    ExpansionParams expansion;
    RerankWeights weights;

    /// Reranker in effect: the configured one, else none (1-2), external (3, 4, 6) or metadata (5).
    [[nodiscard]] RerankerKind effective_reranker() const;
    /// Throws ConfigError for an unknown architecture, k > candidate_pool, an
    /// incompatible reranker (1-2 take none, 5 takes metadata) or invalid parameters.
    void validate() const;
    /// "a<arch>-<std|ctx>-<reranker>" unless label is set.
    [[nodiscard]] std::string display_name() const;
};

struct StageLatency {
    std::string stage;
    double seconds = 0.0;
};

struct ContextBlock {
    std::string chunk_id;
    std::string text;
};

struct AnswerTrace {
    std::string original_query;
    int architecture = 0;
    TextField collection = TextField::Standard;
    RerankerKind reranker = RerankerKind::None;
    std::optional<std::string> rewritten_query;
    std::optional<std::vector<std::string>> selected_files;
    std::vector<ScoredChunk> retrieved;
    std::optional<std::vector<ScoredChunk>> expansion_added;
    std::size_t reranker_input_size = 0;
    std::vector<ContextBlock> context;
    std::string answer_text;
    std::vector<std::string> warnings;
    std::vector<StageLatency> stages;  // in execution order
    double total_seconds = 0.0;

    [[nodiscard]] std::optional<double> stage_seconds(std::string_view stage) const;
};

void to_json(nlohmann::json& j, const AnswerTrace& t);

/// Time source for latency accounting. Wall time is real; logical time advances by a
/// fixed quantum on every reading so traces are reproducible.
enum class ClockKind { Wall, Logical };

struct FileSelection {
    std::vector<std::string> doc_ids;  // validated, catalog order
    bool filtered = false;             // false: fail-open, search everything
    std::optional<std::string> warning;
};

/// Asks the pipeline helper which documents are relevant, based on their one-liners.
/// Unknown names are dropped; an empty or failed selection fails open.
[[nodiscard]] FileSelection filter_files(llm::Gateway& gateway, std::string_view query,
                                         const std::map<std::string, DocumentMetadata>& doc_index);

struct Rewrite {
    std::string query;
    std::optional<std::string> warning;  // set when the original query was kept
};

/// Reformulates the query with the summaries and clusters of the selected documents.
/// Any failure or empty reply keeps the original query.
[[nodiscard]] Rewrite rewrite_query(llm::Gateway& gateway, std::string_view query,
                                    const std::vector<DocumentMetadata>& selected);

/// Chunks sharing the most frequent clusters or entities of `initial`, excluding the
/// initial chunks and chunks outside `allowed_docs` (when given). Ranked by the number
/// of core labels matched, ties on ascending chunk id; at most expand_k ids.
[[nodiscard]] std::vector<std::string> expand_chunks(const std::vector<const Chunk*>& initial, const ChunkStore& store,
                                                     std::size_t expand_k,
                                                     const std::optional<std::set<std::string>>& allowed_docs = {});

/// Runs Architectures 1-6 over a loaded index. Thread-safe; one instance can serve
/// concurrent answer() calls.
class Pipeline {
public:
    Pipeline(std::shared_ptr<const RagIndex> index, llm::Gateway& gateway, ClockKind clock = ClockKind::Wall);

    /// Retrieval and generation for one question. Helper-LLM failures degrade (warnings
    /// in the trace); embedding, retrieval and generation failures throw.
    [[nodiscard]] AnswerTrace answer(const std::string& query, const PipelineConfig& config) const;

    [[nodiscard]] const RagIndex& index() const { return *index_; }
    [[nodiscard]] ClockKind clock() const { return clock_; }

private:
    std::shared_ptr<const RagIndex> index_;
    llm::Gateway& gateway_;
    ClockKind clock_;
};

/// Builds the generator prompt's context section: "[chunk_id]" line, then the text.
[[nodiscard]] std::string render_context(const std::vector<ContextBlock>& blocks);

} // namespace metarag
