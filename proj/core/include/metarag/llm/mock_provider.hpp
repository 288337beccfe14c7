#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "metarag/llm/provider.hpp"
#include "metarag/prompts.hpp"

namespace metarag::llm {

/// Offline provider with deterministic, content-derived behavior.
///
/// Chat requests are answered by the first matching scripted rule, otherwise by a
/// heuristic handler chosen from the catalog prompt the system message belongs to.
/// Unknown system prompts are echoed back. Embeddings are 64-dimensional unit vectors
/// built from a content hash plus a bag-of-words component; reranking scores by the
/// share of query content tokens present in each document.
///
/// Rules must be added before the provider is shared across threads.
class MockProvider final : public Provider {
public:
    static constexpr std::size_t kDimension = 64;

    struct Rule {
        std::optional<prompts::PromptId> task;  // nullopt: any system prompt
        std::string user_contains;              // empty: any user prompt
        std::string response;
        bool fail = false;                      // throw a (retryable) TransportError instead
    };

    void add_rule(Rule rule) { rules_.push_back(std::move(rule)); }
    /// Shorthand for a scripted reply.
    void respond(std::optional<prompts::PromptId> task, std::string user_contains, std::string response);
    /// Shorthand for an injected transport failure.
    void fail(std::optional<prompts::PromptId> task, std::string user_contains);

    std::string chat(const std::string& model, const std::string& system_prompt,
                     const std::string& user_prompt) override;
    std::vector<std::vector<float>> embed(const std::string& model, std::span<const std::string> texts) override;
    std::vector<RerankHit> rerank(const std::string& model, const std::string& query,
                                  std::span<const std::string> documents, std::size_t top_n) override;

private:
    std::vector<Rule> rules_;
};

/// Words ignored by the mock judge, reranker and embedder.
[[nodiscard]] const std::set<std::string>& mock_stopwords();

/// Analyzer tokens of `s` minus mock_stopwords(), in order.
[[nodiscard]] std::vector<std::string> content_tokens(std::string_view s);

/// Deterministic embedding used by MockProvider.
[[nodiscard]] std::vector<float> mock_embedding(std::string_view text);

/// Splits prose into sentences on '.', '!' or '?' followed by whitespace, and on line
/// breaks. Terminal punctuation is kept; empty pieces are dropped.
[[nodiscard]] std::vector<std::string> split_sentences(std::string_view text);

} // namespace metarag::llm
