#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "metarag/error.hpp"
#include "metarag/llm/provider.hpp"

namespace metarag::llm {

/// A non-retryable provider response (HTTP 4xx other than 408/429, malformed body).
class ProviderError : public TransportError {
public:
    using TransportError::TransportError;
};

struct FieldSpec {
    enum class Kind { String, StringList, Boolean };

    std::string name;
    Kind kind = Kind::String;
    bool required = true;
    bool allow_empty = false;  // String: "" allowed; StringList: ignored (use min_items)
    std::size_t min_items = 0;
    std::size_t max_items = static_cast<std::size_t>(-1);

    static FieldSpec string(std::string name) { return {std::move(name), Kind::String}; }
    static FieldSpec list(std::string name, std::size_t min_items = 0,
                          std::size_t max_items = static_cast<std::size_t>(-1)) {
        FieldSpec f{std::move(name), Kind::StringList};
        f.min_items = min_items;
        f.max_items = max_items;
        return f;
    }
    static FieldSpec boolean(std::string name) { return {std::move(name), Kind::Boolean}; }
};

using Schema = std::vector<FieldSpec>;

/// Human-readable field description appended to structured prompts.
[[nodiscard]] std::string describe(const Schema& schema);

/// A JSON object that passed schema validation.
class StructuredRecord {
public:
    explicit StructuredRecord(nlohmann::json object) : object_(std::move(object)) {}

    [[nodiscard]] std::string string(const std::string& field) const;
    [[nodiscard]] std::vector<std::string> list(const std::string& field) const;
    [[nodiscard]] bool boolean(const std::string& field) const;
    [[nodiscard]] bool has(const std::string& field) const;
    [[nodiscard]] const nlohmann::json& json() const { return object_; }

private:
    nlohmann::json object_;
};

/// Removes a surrounding ``` / ```json fence if present and trims.
[[nodiscard]] std::string strip_code_fences(std::string_view text);

/// Parses model output into a JSON object and validates it. Tolerates code fences and
/// prose around a single top-level object. Throws StructuredOutputError with a
/// message suitable for a repair prompt.
[[nodiscard]] StructuredRecord parse_structured(std::string_view text, const Schema& schema);

struct RoleStats {
    std::size_t calls = 0;
    std::size_t failures = 0;
    double total_seconds = 0.0;
};

/// Thread-safe facade over a Provider: role to model resolution, retries with
/// exponential backoff, a global in-flight ceiling and per-role latency accounting.
class Gateway {
public:
    Gateway(ProviderConfig config, std::shared_ptr<Provider> provider);

    Gateway(const Gateway&) = delete;
    Gateway& operator=(const Gateway&) = delete;

    [[nodiscard]] const ProviderConfig& config() const { return config_; }
    /// Throws ConfigError if `role` has no model configured.
    [[nodiscard]] const std::string& model_for(Role role) const;

    [[nodiscard]] std::string chat(Role role, const std::string& system_prompt, const std::string& user_prompt);

    /// chat() + parse_structured(); on parse or validation failure issues one repair
    /// request carrying the error and the previous reply.
    [[nodiscard]] StructuredRecord chat_structured(Role role, const std::string& system_prompt,
                                                   const std::string& user_prompt, const Schema& schema);

    /// One vector per input, order preserved, batched by config().embed_batch_size.
    [[nodiscard]] std::vector<std::vector<float>> embed(std::span<const std::string> texts);

    /// Throws InputError when top_n is 0 or exceeds the number of texts.
    [[nodiscard]] std::vector<RerankHit> rerank(const std::string& query, std::span<const std::string> texts,
                                                std::size_t top_n);

    [[nodiscard]] std::map<Role, RoleStats> stats() const;
    [[nodiscard]] std::size_t peak_in_flight() const { return peak_in_flight_.load(); }

private:
    template <typename F>
    auto call(Role role, F&& fn) -> decltype(fn(std::declval<const std::string&>()));

    void acquire();
    void release();
    void record(Role role, double seconds, bool failed);

    ProviderConfig config_;
    std::shared_ptr<Provider> provider_;

    std::mutex slots_mutex_;
    std::condition_variable slots_cv_;
    std::size_t in_flight_ = 0;
    std::atomic<std::size_t> peak_in_flight_{0};

    mutable std::mutex stats_mutex_;
    std::map<Role, RoleStats> stats_;
};

} // namespace metarag::llm
