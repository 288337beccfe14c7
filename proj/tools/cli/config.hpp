#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "metarag/enrichment.hpp"
#include "metarag/llm/provider.hpp"
#include "metarag/pipelines.hpp"

namespace metarag::cli {

/// Everything a TOML config file can set. Absent sections keep the defaults.
struct AppConfig {
    llm::ProviderConfig provider = llm::ProviderConfig::mock();
    bool provider_kind_set = false;  // [provider].kind appeared in the file
    EnrichmentOptions enrichment;
    PipelineConfig pipeline_defaults;  // [hybrid], [bm25] and top-level pipeline keys
    std::vector<PipelineConfig> pipelines;  // [pipeline.<label>], in label order
    std::string clock = "auto";             // [bench].clock: auto | wall | logical
};

/// Default model names for the OpenAI-compatible provider.
[[nodiscard]] std::map<llm::Role, std::string> default_remote_models();

/// Switches the provider kind, filling model names the config left unset.
void set_provider_kind(AppConfig& config, llm::ProviderKind kind);

/// Parses a TOML document. Unknown keys and type mismatches throw ConfigError.
[[nodiscard]] AppConfig parse_config(const std::string& toml_text, const std::string& source_name = "config");
/// Reads and parses a file; missing or unreadable files throw ConfigError.
[[nodiscard]] AppConfig load_config(const std::filesystem::path& path);

/// Applies LLM_BASE_URL when set.
void apply_environment(AppConfig& config);

/// Logical for the mock provider under "auto", wall time otherwise.
[[nodiscard]] ClockKind resolve_clock(const AppConfig& config);

} // namespace metarag::cli
