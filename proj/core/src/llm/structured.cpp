#include <sstream>

#include "metarag/llm/gateway.hpp"
#include "metarag/text.hpp"

namespace metarag::llm {

namespace {

std::string kind_name(FieldSpec::Kind kind) {
    switch (kind) {
    case FieldSpec::Kind::String: return "string";
    case FieldSpec::Kind::StringList: return "list of strings";
    case FieldSpec::Kind::Boolean: return "boolean";
    }
    return "value";
}

std::optional<bool> as_boolean(const nlohmann::json& v) {
    if (v.is_boolean()) {
        return v.get<bool>();
    }
    if (v.is_string()) {
        const auto s = text::normalize_label(v.get<std::string>());
        if (s == "yes" || s == "true") {
            return true;
        }
        if (s == "no" || s == "false") {
            return false;
        }
    }
    return std::nullopt;
}

} // namespace

std::string describe(const Schema& schema) {
    std::ostringstream out;
    for (const auto& f : schema) {
        out << "- \"" << f.name << "\": " << kind_name(f.kind);
        if (f.kind == FieldSpec::Kind::StringList) {
            if (f.max_items != static_cast<std::size_t>(-1)) {
                out << " (" << f.min_items << " to " << f.max_items << " items)";
            } else if (f.min_items > 0) {
                out << " (at least " << f.min_items << " items)";
            }
        }
        if (!f.required) {
            out << ", optional";
        }
        out << '\n';
    }
    return out.str();
}

std::string strip_code_fences(std::string_view text) {
    std::string s = text::trim(text);
    if (s.rfind("```", 0) == 0) {
        const auto first_newline = s.find('\n');
        s = first_newline == std::string::npos ? std::string{} : s.substr(first_newline + 1);
        const auto closing = s.rfind("```");
        if (closing != std::string::npos) {
            s = s.substr(0, closing);
        }
        s = text::trim(s);
    }
    return s;
}

StructuredRecord parse_structured(std::string_view raw, const Schema& schema) {
    if (schema.empty()) {
        throw InputError("structured output schema must not be empty");
    }
    const std::string body = strip_code_fences(raw);
    const auto open = body.find('{');
    const auto close = body.rfind('}');
    if (open == std::string::npos || close == std::string::npos || close < open) {
        throw StructuredOutputError("reply does not contain a JSON object");
    }

    nlohmann::json parsed;
    try {
        parsed = nlohmann::json::parse(body.substr(open, close - open + 1));
    } catch (const nlohmann::json::parse_error& e) {
        throw StructuredOutputError(std::string("reply is not valid JSON: ") + e.what());
    }
    if (!parsed.is_object()) {
        throw StructuredOutputError("reply is not a JSON object");
    }

    nlohmann::json clean = nlohmann::json::object();
    for (const auto& f : schema) {
        if (!parsed.contains(f.name) || parsed[f.name].is_null()) {
            if (f.required) {
                throw StructuredOutputError("missing required field '" + f.name + "'");
            }
            continue;
        }
        const auto& v = parsed[f.name];
        switch (f.kind) {
        case FieldSpec::Kind::String: {
            if (!v.is_string()) {
                throw StructuredOutputError("field '" + f.name + "' must be a string");
            }
            std::string s = text::trim(v.get<std::string>());
            if (s.empty() && !f.allow_empty) {
                throw StructuredOutputError("field '" + f.name + "' must not be empty");
            }
            clean[f.name] = std::move(s);
            break;
        }
        case FieldSpec::Kind::StringList: {
            if (!v.is_array()) {
                throw StructuredOutputError("field '" + f.name + "' must be a list of strings");
            }
            std::vector<std::string> items;
            for (const auto& item : v) {
                if (!item.is_string()) {
                    throw StructuredOutputError("field '" + f.name + "' must contain only strings");
                }
                std::string s = text::trim(item.get<std::string>());
                if (!s.empty()) {
                    items.push_back(std::move(s));
                }
            }
            if (items.size() < f.min_items || items.size() > f.max_items) {
                std::string expected = f.max_items == static_cast<std::size_t>(-1)
                                           ? "at least " + std::to_string(f.min_items)
                                           : "between " + std::to_string(f.min_items) + " and " +
                                                 std::to_string(f.max_items);
                throw StructuredOutputError("field '" + f.name + "' has " + std::to_string(items.size()) +
                                            " items, expected " + expected);
            }
            clean[f.name] = std::move(items);
            break;
        }
        case FieldSpec::Kind::Boolean: {
            const auto b = as_boolean(v);
            if (!b) {
                throw StructuredOutputError("field '" + f.name + "' must be a boolean");
            }
            clean[f.name] = *b;
            break;
        }
        }
    }
    return StructuredRecord(std::move(clean));
}

std::string StructuredRecord::string(const std::string& field) const {
    return object_.contains(field) ? object_.at(field).get<std::string>() : std::string{};
}

std::vector<std::string> StructuredRecord::list(const std::string& field) const {
    return object_.contains(field) ? object_.at(field).get<std::vector<std::string>>() : std::vector<std::string>{};
}

bool StructuredRecord::boolean(const std::string& field) const {
    return object_.contains(field) && object_.at(field).get<bool>();
}

bool StructuredRecord::has(const std::string& field) const {
    return object_.contains(field);
}

} // namespace metarag::llm
