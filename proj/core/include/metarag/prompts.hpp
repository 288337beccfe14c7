#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace metarag::prompts {

enum class PromptId { DocumentMetadata, ChunkMetadata, FileFilter, QueryRewrite, Answer, ClaimExtraction, Entailment };

struct Prompt {
    PromptId id;
    std::string_view name;     // stable identifier, e.g. "doc-metadata"
    std::string_view version;  // bumped whenever the wording changes
    std::string_view system;
    std::string_view user;     // contains {{placeholders}}
};

[[nodiscard]] const Prompt& get(PromptId id);

/// Substitutes every {{name}} in `tmpl`. Throws InputError for a placeholder with no value.
[[nodiscard]] std::string render(std::string_view tmpl, const std::map<std::string, std::string>& vars);

/// name -> version for every prompt; recorded in index manifests and bench results.
[[nodiscard]] std::map<std::string, std::string> versions();

/// Which catalog prompt a system prompt belongs to, if any.
[[nodiscard]] std::optional<PromptId> identify(std::string_view system_prompt);

/// Content of the first <tag>...</tag> section in `text`, trimmed. Empty if absent.
[[nodiscard]] std::string section(std::string_view text, std::string_view tag);

} // namespace metarag::prompts
