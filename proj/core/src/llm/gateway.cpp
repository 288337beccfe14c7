#include "metarag/llm/gateway.hpp"

#include <thread>

namespace metarag::llm {

Gateway::Gateway(ProviderConfig config, std::shared_ptr<Provider> provider)
    : config_(std::move(config)), provider_(std::move(provider)) {
    config_.validate();
    if (!provider_) {
        throw ConfigError("gateway requires a provider");
    }
}

const std::string& Gateway::model_for(Role role) const {
    auto it = config_.model_names.find(role);
    if (it == config_.model_names.end() || it->second.empty()) {
        throw ConfigError("no model configured for role '" + std::string(to_string(role)) + "'");
    }
    return it->second;
}

void Gateway::acquire() {
    std::unique_lock lock(slots_mutex_);
    slots_cv_.wait(lock, [&] { return in_flight_ < config_.max_parallel; });
    ++in_flight_;
    std::size_t peak = peak_in_flight_.load();
    while (in_flight_ > peak && !peak_in_flight_.compare_exchange_weak(peak, in_flight_)) {
    }
}

void Gateway::release() {
    {
        std::lock_guard lock(slots_mutex_);
        --in_flight_;
    }
    slots_cv_.notify_one();
}

void Gateway::record(Role role, double seconds, bool failed) {
    std::lock_guard lock(stats_mutex_);
    auto& s = stats_[role];
    ++s.calls;
    s.total_seconds += seconds;
    if (failed) {
        ++s.failures;
    }
}

std::map<Role, RoleStats> Gateway::stats() const {
    std::lock_guard lock(stats_mutex_);
    return stats_;
}

template <typename F>
auto Gateway::call(Role role, F&& fn) -> decltype(fn(std::declval<const std::string&>())) {
    const std::string& model = model_for(role);
    const int attempts = config_.retry.max_attempts;
    std::string last_error;
    for (int attempt = 1; attempt <= attempts; ++attempt) {
        acquire();
        const auto start = std::chrono::steady_clock::now();
        try {
            auto result = fn(model);
            release();
            record(role, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(), false);
            return result;
        } catch (const ProviderError& e) {
            release();
            record(role, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(), true);
            throw ProviderError(std::string(to_string(role)) + ": " + e.what() + " (attempt " +
                                std::to_string(attempt) + " of " + std::to_string(attempts) + ")");
        } catch (const TransportError& e) {
            release();
            record(role, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(), true);
            last_error = e.what();
        }
        if (attempt < attempts) {
            std::this_thread::sleep_for(config_.retry.backoff_base * (1 << (attempt - 1)));
        }
    }
    throw TransportError(std::string(to_string(role)) + ": " + last_error + " (failed after " +
                         std::to_string(attempts) + " attempt" + (attempts == 1 ? "" : "s") + ")");
}

std::string Gateway::chat(Role role, const std::string& system_prompt, const std::string& user_prompt) {
    return call(role, [&](const std::string& model) { return provider_->chat(model, system_prompt, user_prompt); });
}

StructuredRecord Gateway::chat_structured(Role role, const std::string& system_prompt,
                                          const std::string& user_prompt, const Schema& schema) {
    if (schema.empty()) {
        throw InputError("structured output schema must not be empty");
    }
    const std::string format = "\n\n<response_format>\nReply with one JSON object and nothing else. Fields:\n" +
                                describe(schema) + "</response_format>";
    const std::string prompt = user_prompt + format;
    const std::string first = chat(role, system_prompt, prompt);
    try {
        return parse_structured(first, schema);
    } catch (const StructuredOutputError& e) {
        const std::string repair = prompt + "\n\n<previous_reply>\n" + first + "\n</previous_reply>\n<previous_error>\n" +
                                   e.what() + "\n</previous_error>\nReturn a corrected JSON object.";
        const std::string second = chat(role, system_prompt, repair);
        try {
            return parse_structured(second, schema);
        } catch (const StructuredOutputError& again) {
            throw StructuredOutputError(std::string(to_string(role)) +
                                        ": structured output invalid after repair: " + again.what());
        }
    }
}

std::vector<std::vector<float>> Gateway::embed(std::span<const std::string> texts) {
    if (texts.empty()) {
        throw InputError("embed: no input texts");
    }
    for (std::size_t i = 0; i < texts.size(); ++i) {
        if (texts[i].empty()) {
            throw InputError("embed: input " + std::to_string(i) + " is empty");
        }
    }
    std::vector<std::vector<float>> out;
    out.reserve(texts.size());
    const std::size_t batch = config_.embed_batch_size;
    for (std::size_t begin = 0; begin < texts.size(); begin += batch) {
        const auto part = texts.subspan(begin, std::min(batch, texts.size() - begin));
        auto vectors = call(Role::Embedder, [&](const std::string& model) { return provider_->embed(model, part); });
        if (vectors.size() != part.size()) {
            throw ProviderError("embedder returned " + std::to_string(vectors.size()) + " vectors for " +
                                std::to_string(part.size()) + " inputs");
        }
        for (auto& v : vectors) {
            if (v.empty() || (!out.empty() && v.size() != out.front().size())) {
                throw ProviderError("embedding dimension inconsistency");
            }
            out.push_back(std::move(v));
        }
    }
    return out;
}

std::vector<RerankHit> Gateway::rerank(const std::string& query, std::span<const std::string> texts,
                                       std::size_t top_n) {
    if (top_n == 0 || top_n > texts.size()) {
        throw InputError("rerank: top_n must be in [1, " + std::to_string(texts.size()) + "]");
    }
    auto hits = call(Role::Reranker,
                     [&](const std::string& model) { return provider_->rerank(model, query, texts, top_n); });
    for (const auto& h : hits) {
        if (h.index >= texts.size()) {
            throw ProviderError("reranker returned out-of-range index " + std::to_string(h.index));
        }
    }
    if (hits.size() > top_n) {
        hits.resize(top_n);
    }
    return hits;
}

} // namespace metarag::llm
