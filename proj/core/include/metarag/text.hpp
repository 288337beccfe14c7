#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace metarag::text {

/// Half-open byte range into a UTF-8 buffer.
struct Span {
    std::size_t begin = 0;
    std::size_t end = 0;

    [[nodiscard]] std::size_t size() const { return end - begin; }
    friend bool operator==(const Span&, const Span&) = default;
};

/// ASCII whitespace as used for chunk-size accounting.
[[nodiscard]] constexpr bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

/// Maximal runs of non-whitespace bytes. These are the "tokens" of the chunker.
[[nodiscard]] std::vector<Span> whitespace_tokens(std::string_view s);

[[nodiscard]] std::size_t count_whitespace_tokens(std::string_view s);

/// Lexical analyzer shared by the sparse index and the mock providers:
/// Unicode lowercase, split on anything that is not a letter or digit, drop empties.
[[nodiscard]] std::vector<std::string> analyze(std::string_view s);

/// Identifier recorded in index manifests so persisted indexes can detect analyzer drift.
inline constexpr std::string_view kAnalyzerId = "icu-lower-alnum-split/v1";

/// Canonical form for label comparison (clusters, entities, file names):
/// NFKC, case-folded, whitespace runs collapsed to one space, trimmed.
[[nodiscard]] std::string normalize_label(std::string_view s);

/// Case-fold and NFKC-normalize, then run the analyzer. Used for phrase containment.
[[nodiscard]] std::vector<std::string> label_tokens(std::string_view s);

/// True when `needle` occurs as a contiguous run inside `haystack`. Empty needle never matches.
[[nodiscard]] bool contains_subsequence(const std::vector<std::string>& haystack,
                                        const std::vector<std::string>& needle);

/// Largest prefix length <= limit that does not cut a UTF-8 sequence.
[[nodiscard]] std::size_t utf8_floor(std::string_view s, std::size_t limit);

/// Smallest offset >= pos that starts a UTF-8 sequence (or s.size()).
[[nodiscard]] std::size_t utf8_ceil(std::string_view s, std::size_t pos);

[[nodiscard]] std::string trim(std::string_view s);

[[nodiscard]] std::string join(const std::vector<std::string>& parts, std::string_view sep);

} // namespace metarag::text
