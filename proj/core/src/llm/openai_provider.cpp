#include "metarag/llm/openai_provider.hpp"

#include <cstdlib>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "metarag/llm/gateway.hpp"

namespace metarag::llm {

using nlohmann::json;

BaseUrl parse_base_url(const std::string& url) {
    BaseUrl out;
    std::string rest;
    if (url.rfind("http://", 0) == 0) {
        out.scheme = "http";
        out.port = 80;
        rest = url.substr(7);
    } else if (url.rfind("https://", 0) == 0) {
        out.scheme = "https";
        out.port = 443;
        rest = url.substr(8);
    } else {
        throw ConfigError("base_url must start with http:// or https://: '" + url + "'");
    }
    const auto slash = rest.find('/');
    std::string authority = rest.substr(0, slash);
    out.path = slash == std::string::npos ? "" : rest.substr(slash);
    while (!out.path.empty() && out.path.back() == '/') {
        out.path.pop_back();
    }
    const auto colon = authority.rfind(':');
    if (colon != std::string::npos && authority.find(']', colon) == std::string::npos) {
        const std::string port = authority.substr(colon + 1);
        try {
            std::size_t used = 0;
            out.port = std::stoi(port, &used);
            if (used != port.size() || out.port <= 0 || out.port > 65535) {
                throw std::invalid_argument(port);
            }
        } catch (const std::exception&) {
            throw ConfigError("invalid port in base_url '" + url + "'");
        }
        authority.resize(colon);
    }
    if (authority.empty()) {
        throw ConfigError("base_url has no host: '" + url + "'");
    }
    out.host = authority;
    return out;
}

OpenAiProvider::OpenAiProvider(const ProviderConfig& config)
    : base_(parse_base_url(config.base_url)),
      rerank_base_(parse_base_url(config.rerank_base_url.empty() ? config.base_url : config.rerank_base_url)),
      timeout_(config.timeout) {
    if (const char* key = std::getenv(config.api_key_env.c_str())) {
        api_key_ = key;
    }
}

std::string OpenAiProvider::post(const BaseUrl& base, const std::string& endpoint, const std::string& body) const {
    const std::string origin = base.scheme + "://" + base.host + ":" + std::to_string(base.port);
    httplib::Client client(origin);
    const auto secs = timeout_.count() / 1000;
    const auto usecs = (timeout_.count() % 1000) * 1000;
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);
    httplib::Headers headers;
    if (!api_key_.empty()) {
        headers.emplace("Authorization", "Bearer " + api_key_);
    }
    const std::string path = base.path + endpoint;
    auto res = client.Post(path, headers, body, "application/json");
    if (!res) {
        throw TransportError("POST " + path + " failed: " + httplib::to_string(res.error()));
    }
    const int status = res->status;
    if (status >= 200 && status < 300) {
        return res->body;
    }
    std::string detail = res->body.substr(0, 300);
    const std::string msg = "POST " + path + " returned HTTP " + std::to_string(status) + ": " + detail;
    if (status == 408 || status == 429 || status >= 500) {
        throw TransportError(msg);
    }
    throw ProviderError(msg);
}

namespace {

json parse_body(const std::string& body, const char* what) {
    try {
        return json::parse(body);
    } catch (const json::exception& e) {
        throw ProviderError(std::string("malformed ") + what + " response: " + e.what());
    }
}

} // namespace

std::string OpenAiProvider::chat(const std::string& model, const std::string& system_prompt,
                                 const std::string& user_prompt) {
    const json request = {{"model", model},
                          {"temperature", 0},
                          {"messages",
                           json::array({{{"role", "system"}, {"content", system_prompt}},
                                        {{"role", "user"}, {"content", user_prompt}}})}};
    const json reply = parse_body(post(base_, "/chat/completions", request.dump()), "chat");
    try {
        return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
        throw ProviderError(std::string("unexpected chat response shape: ") + e.what());
    }
}

std::vector<std::vector<float>> OpenAiProvider::embed(const std::string& model, std::span<const std::string> texts) {
    const json request = {{"model", model}, {"input", std::vector<std::string>(texts.begin(), texts.end())}};
    const json reply = parse_body(post(base_, "/embeddings", request.dump()), "embeddings");
    std::vector<std::vector<float>> out(texts.size());
    try {
        const auto& data = reply.at("data");
        if (data.size() != texts.size()) {
            throw ProviderError("embeddings response has " + std::to_string(data.size()) + " rows for " +
                                std::to_string(texts.size()) + " inputs");
        }
        for (std::size_t i = 0; i < data.size(); ++i) {
            const std::size_t index = data[i].contains("index") ? data[i].at("index").get<std::size_t>() : i;
            if (index >= out.size()) {
                throw ProviderError("embeddings response index out of range");
            }
            out[index] = data[i].at("embedding").get<std::vector<float>>();
        }
    } catch (const json::exception& e) {
        throw ProviderError(std::string("unexpected embeddings response shape: ") + e.what());
    }
    return out;
}

std::vector<RerankHit> OpenAiProvider::rerank(const std::string& model, const std::string& query,
                                              std::span<const std::string> documents, std::size_t top_n) {
    const json request = {{"model", model},
                          {"query", query},
                          {"documents", std::vector<std::string>(documents.begin(), documents.end())},
                          {"top_n", top_n}};
    const json reply = parse_body(post(rerank_base_, "/rerank", request.dump()), "rerank");
    std::vector<RerankHit> hits;
    try {
        for (const auto& r : reply.at("results")) {
            hits.push_back({r.at("index").get<std::size_t>(), r.at("relevance_score").get<double>()});
        }
    } catch (const json::exception& e) {
        throw ProviderError(std::string("unexpected rerank response shape: ") + e.what());
    }
    return hits;
}

} // namespace metarag::llm
