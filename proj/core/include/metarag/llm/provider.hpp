#pragma once

#include <chrono>
#include <cstddef>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace metarag::llm {

/// What a model is used for. Each role maps to one model id.
enum class Role { Generator, PipelineHelper, Enricher, Judge, Embedder, Reranker };

inline constexpr Role kAllRoles[] = {Role::Generator, Role::PipelineHelper, Role::Enricher,
                                     Role::Judge,     Role::Embedder,       Role::Reranker};

[[nodiscard]] std::string_view to_string(Role role);
/// Throws ConfigError for unknown names. Accepts snake_case ("pipeline_helper").
[[nodiscard]] Role parse_role(std::string_view name);

enum class ProviderKind { Mock, OpenAiCompatible };

[[nodiscard]] std::string_view to_string(ProviderKind kind);
[[nodiscard]] ProviderKind parse_provider_kind(std::string_view name);

struct RetryPolicy {
    int max_attempts = 3;
    std::chrono::milliseconds backoff_base{250};
};

struct ProviderConfig {
    ProviderKind kind = ProviderKind::Mock;
    std::string base_url = "https://api.openai.com/v1";
    std::string rerank_base_url;  // empty: same as base_url
    std::string api_key_env = "LLM_API_KEY";
    std::map<Role, std::string> model_names;
    std::chrono::milliseconds timeout{60000};
    std::size_t max_parallel = 4;
    std::size_t embed_batch_size = 64;
    RetryPolicy retry;

    /// Throws ConfigError when max_parallel, batch size or retry attempts are zero.
    void validate() const;

    /// Mock configuration with every role mapped to a "mock-<role>" model.
    [[nodiscard]] static ProviderConfig mock();
};

struct RerankHit {
    std::size_t index = 0;
    double relevance = 0.0;

    friend bool operator==(const RerankHit&, const RerankHit&) = default;
};

/// Raw model access. Implementations throw TransportError for failures worth retrying
/// and ProviderError (below) for permanent ones.
class Provider {
public:
    virtual ~Provider() = default;

    [[nodiscard]] virtual std::string chat(const std::string& model, const std::string& system_prompt,
                                           const std::string& user_prompt) = 0;
    [[nodiscard]] virtual std::vector<std::vector<float>> embed(const std::string& model,
                                                                std::span<const std::string> texts) = 0;
    [[nodiscard]] virtual std::vector<RerankHit> rerank(const std::string& model, const std::string& query,
                                                        std::span<const std::string> documents,
                                                        std::size_t top_n) = 0;
};

} // namespace metarag::llm

namespace metarag::llm {

/// MockProvider or OpenAiProvider depending on config.kind.
[[nodiscard]] std::shared_ptr<Provider> make_provider(const ProviderConfig& config);

} // namespace metarag::llm
