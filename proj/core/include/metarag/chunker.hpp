#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "metarag/corpus.hpp"

namespace metarag {

/// One level of the split hierarchy. Each kind defines a set of admissible cut
/// positions (byte offsets) in the source text.
struct Separator {
    enum class Kind {
        Heading,    // start of a Markdown ATX heading line ("#".."######" + space)
        BlankLine,  // start of the first non-blank line after a blank line
        Newline,    // start of any line
        Sentence,   // start of the token following '.', '!' or '?' + whitespace
        Space,      // start of any whitespace-delimited token
        Character,  // any UTF-8 code point boundary
        Literal,    // directly after each occurrence of `literal`
    };

    Kind kind = Kind::Character;
    std::string literal;

    static Separator heading() { return {Kind::Heading, {}}; }
    static Separator blank_line() { return {Kind::BlankLine, {}}; }
    static Separator newline() { return {Kind::Newline, {}}; }
    static Separator sentence() { return {Kind::Sentence, {}}; }
    static Separator space() { return {Kind::Space, {}}; }
    static Separator character() { return {Kind::Character, {}}; }
    static Separator literal_text(std::string s) { return {Kind::Literal, std::move(s)}; }
};

[[nodiscard]] std::vector<Separator> default_separators();

struct ChunkingParams {
    std::size_t max_tokens = 1000;
    std::size_t overlap_tokens = 100;
    std::vector<Separator> separators = default_separators();

    /// Throws ConfigError unless 0 < max_tokens and overlap_tokens < max_tokens.
    void validate() const;
};

/// Positions (strictly inside (0, text.size())) where `sep` permits a cut. Sorted, unique.
[[nodiscard]] std::vector<std::size_t> separator_positions(std::string_view text, const Separator& sep);

/// Recursive splitter. Chunk sizes are counted in whitespace tokens.
///
/// Cuts are chosen greedily from the current position: the farthest cut of the
/// highest-priority separator that keeps the chunk within budget. A chunk that begins
/// at a first-level (section) boundary gets the full max_tokens budget; any other chunk
/// is prefixed with up to overlap_tokens trailing tokens of its predecessor and its own
/// new content is budgeted at max_tokens - overlap_tokens.
///
/// Returned chunks have empty metadata and contextual_text == text.
[[nodiscard]] std::vector<Chunk> split(const Document& doc, const ChunkingParams& params);

/// Metadata header followed by one blank line and the raw chunk text:
///
///     Clusters: a; b
///     Entities: x; y
///     Questions: ...
///     Insights: ...
///
///     <text>
[[nodiscard]] std::string build_contextual_text(const Chunk& chunk);

} // namespace metarag
