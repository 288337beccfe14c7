#include "metarag/text.hpp"

#include <algorithm>

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

namespace metarag::text {

namespace {

bool is_ascii(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](char c) { return static_cast<unsigned char>(c) < 0x80; });
}

bool is_ascii_alnum(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

char ascii_lower(char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

void append_utf8(std::string& out, UChar32 c) {
    char buf[U8_MAX_LENGTH];
    int32_t len = 0;
    UBool error = false;
    U8_APPEND(reinterpret_cast<uint8_t*>(buf), len, U8_MAX_LENGTH, c, error);
    if (!error) {
        out.append(buf, static_cast<std::size_t>(len));
    }
}

std::string collapse_ascii_whitespace(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    for (char c : s) {
        if (is_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(c);
    }
    return out;
}

} // namespace

std::vector<Span> whitespace_tokens(std::string_view s) {
    std::vector<Span> spans;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && is_space(s[i])) {
            ++i;
        }
        if (i == s.size()) {
            break;
        }
        const std::size_t start = i;
        while (i < s.size() && !is_space(s[i])) {
            ++i;
        }
        spans.push_back({start, i});
    }
    return spans;
}

std::size_t count_whitespace_tokens(std::string_view s) {
    std::size_t n = 0;
    bool in_token = false;
    for (char c : s) {
        const bool space = is_space(c);
        if (!space && !in_token) {
            ++n;
        }
        in_token = !space;
    }
    return n;
}

std::vector<std::string> analyze(std::string_view s) {
    std::vector<std::string> tokens;
    std::string current;
    if (is_ascii(s)) {
        for (char c : s) {
            if (is_ascii_alnum(c)) {
                current.push_back(ascii_lower(c));
            } else if (!current.empty()) {
                tokens.push_back(std::move(current));
                current.clear();
            }
        }
    } else {
        const auto* bytes = reinterpret_cast<const uint8_t*>(s.data());
        const auto length = static_cast<int32_t>(s.size());
        int32_t i = 0;
        while (i < length) {
            UChar32 c = 0;
            U8_NEXT(bytes, i, length, c);
            if (c >= 0 && u_isalnum(c)) {
                append_utf8(current, u_tolower(c));
            } else if (!current.empty()) {
                tokens.push_back(std::move(current));
                current.clear();
            }
        }
    }
    if (!current.empty()) {
        tokens.push_back(std::move(current));
    }
    return tokens;
}

std::string normalize_label(std::string_view s) {
    if (is_ascii(s)) {
        std::string lowered(s);
        std::transform(lowered.begin(), lowered.end(), lowered.begin(), ascii_lower);
        return collapse_ascii_whitespace(lowered);
    }

    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* nfkc = icu::Normalizer2::getNFKCInstance(status);
    icu::UnicodeString input = icu::UnicodeString::fromUTF8(icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
    icu::UnicodeString normalized = U_SUCCESS(status) ? nfkc->normalize(input, status) : input;
    if (U_FAILURE(status)) {
        normalized = input;
    }
    normalized.foldCase();

    std::string out;
    bool pending_space = false;
    for (int32_t i = 0; i < normalized.length();) {
        const UChar32 c = normalized.char32At(i);
        i += U16_LENGTH(c);
        if (u_isUWhiteSpace(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        append_utf8(out, c);
    }
    return out;
}

std::vector<std::string> label_tokens(std::string_view s) {
    return analyze(normalize_label(s));
}

bool contains_subsequence(const std::vector<std::string>& haystack, const std::vector<std::string>& needle) {
    if (needle.empty() || needle.size() > haystack.size()) {
        return false;
    }
    return std::search(haystack.begin(), haystack.end(), needle.begin(), needle.end()) != haystack.end();
}

std::size_t utf8_floor(std::string_view s, std::size_t limit) {
    if (limit >= s.size()) {
        return s.size();
    }
    std::size_t pos = limit;
    while (pos > 0 && (static_cast<unsigned char>(s[pos]) & 0xC0) == 0x80) {
        --pos;
    }
    return pos;
}

std::size_t utf8_ceil(std::string_view s, std::size_t pos) {
    while (pos < s.size() && (static_cast<unsigned char>(s[pos]) & 0xC0) == 0x80) {
        ++pos;
    }
    return std::min(pos, s.size());
}

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && is_space(s[b])) {
        ++b;
    }
    while (e > b && is_space(s[e - 1])) {
        --e;
    }
    return std::string(s.substr(b, e - b));
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) {
            out.append(sep);
        }
        out.append(parts[i]);
    }
    return out;
}

} // namespace metarag::text
