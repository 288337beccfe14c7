#pragma once

#include <string>

#include "metarag/llm/provider.hpp"

namespace metarag::llm {

/// Pieces of an http(s) base URL. `path` has no trailing slash ("" or "/v1").
struct BaseUrl {
    std::string scheme;
    std::string host;
    int port = 0;
    std::string path;
};

/// Throws ConfigError for anything that is not http:// or https://.
[[nodiscard]] BaseUrl parse_base_url(const std::string& url);

/// Talks to an OpenAI-compatible HTTP API: /chat/completions, /embeddings and a
/// Cohere-style /rerank endpoint. The API key is read from the environment variable
/// named by the config at construction and is never logged.
class OpenAiProvider final : public Provider {
public:
    explicit OpenAiProvider(const ProviderConfig& config);

    std::string chat(const std::string& model, const std::string& system_prompt,
                     const std::string& user_prompt) override;
    std::vector<std::vector<float>> embed(const std::string& model, std::span<const std::string> texts) override;
    std::vector<RerankHit> rerank(const std::string& model, const std::string& query,
                                  std::span<const std::string> documents, std::size_t top_n) override;

private:
    std::string post(const BaseUrl& base, const std::string& endpoint, const std::string& body) const;

    BaseUrl base_;
    BaseUrl rerank_base_;
    std::string api_key_;
    std::chrono::milliseconds timeout_;
};

} // namespace metarag::llm
