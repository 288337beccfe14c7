#include "cli/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <toml.hpp>

#include "metarag/error.hpp"

namespace metarag::cli {

namespace {

class Section {
public:
    Section(const toml::table& table, std::string name, std::set<std::string> allowed)
        : table_(table), name_(std::move(name)) {
        for (const auto& [key, _] : table_) {
            if (!allowed.contains(std::string(key.str()))) {
                throw ConfigError("unknown key '" + std::string(key.str()) + "' in [" + name_ + "]");
            }
        }
    }

    template <typename T>
    std::optional<T> get(const std::string& key) const {
        const auto* node = table_.get(key);
        if (node == nullptr) {
            return std::nullopt;
        }
        if constexpr (std::is_same_v<T, double>) {
            if (auto v = node->value<double>()) {
                return *v;
            }
        } else if constexpr (std::is_same_v<T, std::size_t>) {
            if (auto v = node->value<std::int64_t>(); v && *v >= 0) {
                return static_cast<std::size_t>(*v);
            }
        } else if constexpr (std::is_same_v<T, int>) {
            if (auto v = node->value<std::int64_t>()) {
                return static_cast<int>(*v);
            }
        } else {
            if (auto v = node->value<T>()) {
                return *v;
            }
        }
        throw ConfigError("[" + name_ + "] " + key + " has the wrong type");
    }

    const toml::table* table(const std::string& key) const {
        const auto* node = table_.get(key);
        if (node == nullptr) {
            return nullptr;
        }
        if (!node->is_table()) {
            throw ConfigError("[" + name_ + "] " + key + " must be a table");
        }
        return node->as_table();
    }

    std::optional<std::vector<double>> numbers(const std::string& key) const {
        const auto* node = table_.get(key);
        if (node == nullptr) {
            return std::nullopt;
        }
        const auto* arr = node->as_array();
        if (arr == nullptr) {
            throw ConfigError("[" + name_ + "] " + key + " must be an array of numbers");
        }
        std::vector<double> out;
        for (const auto& el : *arr) {
            auto v = el.value<double>();
            if (!v) {
                throw ConfigError("[" + name_ + "] " + key + " must be an array of numbers");
            }
            out.push_back(*v);
        }
        return out;
    }

private:
    const toml::table& table_;
    std::string name_;
};

void apply_pipeline_keys(const Section& s, PipelineConfig& p) {
    if (auto v = s.get<int>("architecture")) {
        p.architecture = *v;
    }
    if (auto v = s.get<std::string>("collection")) {
        p.collection = parse_collection(*v);
    }
    if (auto v = s.get<std::size_t>("k")) {
        p.k = *v;
    }
    if (auto v = s.get<std::size_t>("candidate_pool")) {
        p.candidate_pool = *v;
    }
    if (auto v = s.get<double>("lambda")) {
        p.hybrid.lambda = *v;
    }
    if (auto v = s.get<std::string>("reranker")) {
        p.reranker = parse_reranker(*v);
    }
    if (auto v = s.get<std::size_t>("initial_k")) {
        p.expansion.initial_k = *v;
    }
    if (auto v = s.get<std::size_t>("expand_k")) {
        p.expansion.expand_k = *v;
    }
    if (auto w = s.numbers("weights")) {
        if (w->size() != 4) {
            throw ConfigError("weights must list four numbers: entity_freq, cluster_coherence, entity_query, retrieval");
        }
        p.weights = {(*w)[0], (*w)[1], (*w)[2], (*w)[3]};
    }
}

const std::set<std::string> kPipelineKeys = {"architecture", "collection", "k",        "candidate_pool", "lambda",
                                             "reranker",     "initial_k",  "expand_k", "weights",        "label"};

} // namespace

std::map<llm::Role, std::string> default_remote_models() {
    return {{llm::Role::Generator, "gpt-4o-mini"},    {llm::Role::PipelineHelper, "gpt-4o-mini"},
            {llm::Role::Enricher, "gpt-4o-mini"},     {llm::Role::Judge, "gpt-4o-mini"},
            {llm::Role::Embedder, "text-embedding-3-small"}, {llm::Role::Reranker, "rerank-v3.5"}};
}

void set_provider_kind(AppConfig& config, llm::ProviderKind kind) {
    auto& p = config.provider;
    if (p.kind == kind) {
        return;
    }
    const auto previous = kind == llm::ProviderKind::Mock ? default_remote_models() : llm::ProviderConfig::mock().model_names;
    const auto defaults = kind == llm::ProviderKind::Mock ? llm::ProviderConfig::mock().model_names : default_remote_models();
    for (const auto& [role, model] : defaults) {
        auto it = p.model_names.find(role);
        if (it == p.model_names.end() || it->second == previous.at(role)) {
            p.model_names[role] = model;
        }
    }
    if (kind == llm::ProviderKind::OpenAiCompatible && p.base_url.empty()) {
        p.base_url = "https://api.openai.com/v1";
    }
    p.kind = kind;
}

AppConfig parse_config(const std::string& toml_text, const std::string& source_name) {
    toml::table root;
    try {
        root = toml::parse(toml_text, source_name);
    } catch (const toml::parse_error& e) {
        std::ostringstream msg;
        msg << source_name << ": " << e.description() << " (line " << e.source().begin.line << ")";
        throw ConfigError(msg.str());
    }

    AppConfig cfg;
    const Section top(root, "top level",
                      {"provider", "chunking", "enrichment", "hybrid", "bm25", "bench", "pipeline", "retrieval"});

    if (const auto* t = top.table("provider")) {
        const Section s(*t, "provider",
                        {"kind", "base_url", "rerank_base_url", "api_key_env", "timeout_s", "max_parallel",
                         "embed_batch_size", "retry_attempts", "retry_backoff_ms", "models"});
        if (auto v = s.get<std::string>("kind")) {
            set_provider_kind(cfg, llm::parse_provider_kind(*v));
            cfg.provider_kind_set = true;
        }
        auto& p = cfg.provider;
        if (auto v = s.get<std::string>("base_url")) {
            p.base_url = *v;
        }
        if (auto v = s.get<std::string>("rerank_base_url")) {
            p.rerank_base_url = *v;
        }
        if (auto v = s.get<std::string>("api_key_env")) {
            p.api_key_env = *v;
        }
        if (auto v = s.get<double>("timeout_s")) {
            p.timeout = std::chrono::milliseconds(static_cast<long long>(*v * 1000.0));
        }
        if (auto v = s.get<std::size_t>("max_parallel")) {
            p.max_parallel = *v;
        }
        if (auto v = s.get<std::size_t>("embed_batch_size")) {
            p.embed_batch_size = *v;
        }
        if (auto v = s.get<int>("retry_attempts")) {
            p.retry.max_attempts = *v;
        }
        if (auto v = s.get<std::size_t>("retry_backoff_ms")) {
            p.retry.backoff_base = std::chrono::milliseconds(*v);
        }
        if (const auto* models = s.table("models")) {
            for (const auto& [key, node] : *models) {
                const auto role = llm::parse_role(key.str());
                auto name = node.value<std::string>();
                if (!name) {
                    throw ConfigError("[provider.models] " + std::string(key.str()) + " must be a string");
                }
                p.model_names[role] = *name;
            }
        }
        p.validate();
    }

    if (const auto* t = top.table("chunking")) {
        const Section s(*t, "chunking", {"max_tokens", "overlap_tokens"});
        if (auto v = s.get<std::size_t>("max_tokens")) {
            cfg.enrichment.chunking.max_tokens = *v;
        }
        if (auto v = s.get<std::size_t>("overlap_tokens")) {
            cfg.enrichment.chunking.overlap_tokens = *v;
        }
        cfg.enrichment.chunking.validate();
    }
    if (const auto* t = top.table("enrichment")) {
        const Section s(*t, "enrichment", {"doc_char_budget", "max_parallel"});
        if (auto v = s.get<std::size_t>("doc_char_budget")) {
            cfg.enrichment.doc_char_budget = *v;
        }
        if (auto v = s.get<std::size_t>("max_parallel")) {
            cfg.enrichment.max_parallel = *v;
        }
    }

    auto& d = cfg.pipeline_defaults;
    if (const auto* t = top.table("hybrid")) {
        const Section s(*t, "hybrid", {"lambda", "candidate_pool"});
        if (auto v = s.get<double>("lambda")) {
            d.hybrid.lambda = *v;
        }
        if (auto v = s.get<std::size_t>("candidate_pool")) {
            d.candidate_pool = *v;
        }
    }
    if (const auto* t = top.table("bm25")) {
        const Section s(*t, "bm25", {"k1", "b"});
        if (auto v = s.get<double>("k1")) {
            d.hybrid.bm25.k1 = *v;
        }
        if (auto v = s.get<double>("b")) {
            d.hybrid.bm25.b = *v;
        }
        d.hybrid.bm25.validate();
    }
    if (const auto* t = top.table("retrieval")) {
        const Section s(*t, "retrieval", {"k"});
        if (auto v = s.get<std::size_t>("k")) {
            d.k = *v;
        }
    }
    if (const auto* t = top.table("bench")) {
        const Section s(*t, "bench", {"clock"});
        if (auto v = s.get<std::string>("clock")) {
            if (*v != "auto" && *v != "wall" && *v != "logical") {
                throw ConfigError("[bench] clock must be auto, wall or logical");
            }
            cfg.clock = *v;
        }
    }
    if (const auto* t = top.table("pipeline")) {
        for (const auto& [label, node] : *t) {
            const std::string name = "pipeline." + std::string(label.str());
            if (!node.is_table()) {
                throw ConfigError("[" + name + "] must be a table");
            }
            const Section s(*node.as_table(), name, kPipelineKeys);
            PipelineConfig p = d;
            p.label = std::string(label.str());
            if (auto v = s.get<std::string>("label")) {
                p.label = *v;
            }
            apply_pipeline_keys(s, p);
            try {
                p.validate();
            } catch (const ConfigError& e) {
                throw ConfigError("[" + name + "] " + e.what());
            }
            cfg.pipelines.push_back(std::move(p));
        }
    }
    return cfg;
}

AppConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot read config file " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.string());
}

void apply_environment(AppConfig& config) {
    if (const char* url = std::getenv("LLM_BASE_URL"); url != nullptr && *url != '\0') {
        config.provider.base_url = url;
    }
}

ClockKind resolve_clock(const AppConfig& config) {
    if (config.clock == "wall") {
        return ClockKind::Wall;
    }
    if (config.clock == "logical") {
        return ClockKind::Logical;
    }
    return config.provider.kind == llm::ProviderKind::Mock ? ClockKind::Logical : ClockKind::Wall;
}

} // namespace metarag::cli
