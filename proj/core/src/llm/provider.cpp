#include "metarag/llm/provider.hpp"

#include "metarag/error.hpp"
#include "metarag/llm/mock_provider.hpp"
#include "metarag/llm/openai_provider.hpp"
#include "metarag/text.hpp"

namespace metarag::llm {

std::string_view to_string(Role role) {
    switch (role) {
    case Role::Generator: return "generator";
    case Role::PipelineHelper: return "pipeline_helper";
    case Role::Enricher: return "enricher";
    case Role::Judge: return "judge";
    case Role::Embedder: return "embedder";
    case Role::Reranker: return "reranker";
    }
    return "unknown";
}

Role parse_role(std::string_view name) {
    const std::string key = text::normalize_label(name);
    for (Role r : kAllRoles) {
        if (key == to_string(r)) {
            return r;
        }
    }
    throw ConfigError("unknown model role: '" + std::string(name) + "'");
}

std::string_view to_string(ProviderKind kind) {
    return kind == ProviderKind::Mock ? "mock" : "openai-compatible";
}

ProviderKind parse_provider_kind(std::string_view name) {
    const std::string key = text::normalize_label(name);
    if (key == "mock") {
        return ProviderKind::Mock;
    }
    if (key == "openai-compatible" || key == "openai" || key == "openai_compatible") {
        return ProviderKind::OpenAiCompatible;
    }
    throw ConfigError("unknown provider kind: '" + std::string(name) + "'");
}

void ProviderConfig::validate() const {
    if (max_parallel == 0) {
        throw ConfigError("max_parallel must be >= 1");
    }
    if (embed_batch_size == 0) {
        throw ConfigError("embed_batch_size must be >= 1");
    }
    if (retry.max_attempts < 1) {
        throw ConfigError("retry attempts must be >= 1");
    }
    if (timeout.count() <= 0) {
        throw ConfigError("timeout must be positive");
    }
}

ProviderConfig ProviderConfig::mock() {
    ProviderConfig c;
    c.kind = ProviderKind::Mock;
    c.base_url.clear();
    for (Role r : kAllRoles) {
        c.model_names[r] = "mock-" + std::string(to_string(r));
    }
    return c;
}

std::shared_ptr<Provider> make_provider(const ProviderConfig& config) {
    if (config.kind == ProviderKind::Mock) {
        return std::make_shared<MockProvider>();
    }
    return std::make_shared<OpenAiProvider>(config);
}

} // namespace metarag::llm
