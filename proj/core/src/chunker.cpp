#include "metarag/chunker.hpp"

#include <algorithm>

#include "metarag/error.hpp"
#include "metarag/text.hpp"

namespace metarag {

namespace {

struct Line {
    std::size_t begin;
    std::size_t end;  // excludes the '\n'
};

std::vector<Line> split_lines(std::string_view s) {
    std::vector<Line> lines;
    std::size_t begin = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '\n') {
            lines.push_back({begin, i});
            begin = i + 1;
        }
    }
    if (begin < s.size()) {
        lines.push_back({begin, s.size()});
    }
    return lines;
}

bool is_heading_line(std::string_view line) {
    std::size_t i = 0;
    while (i < line.size() && i < 3 && line[i] == ' ') {
        ++i;
    }
    std::size_t hashes = 0;
    while (i < line.size() && line[i] == '#') {
        ++hashes;
        ++i;
    }
    if (hashes == 0 || hashes > 6) {
        return false;
    }
    return i == line.size() || line[i] == ' ' || line[i] == '\t';
}

bool is_blank(std::string_view line) {
    return std::all_of(line.begin(), line.end(), [](char c) { return text::is_space(c); });
}

// Counts whitespace tokens intersecting [a, b) using the precomputed token spans.
class TokenCounter {
public:
    explicit TokenCounter(std::string_view s) : spans_(text::whitespace_tokens(s)) {}

    [[nodiscard]] std::size_t count(std::size_t a, std::size_t b) const {
        if (a >= b) {
            return 0;
        }
        auto first = std::upper_bound(spans_.begin(), spans_.end(), a,
                                      [](std::size_t pos, const text::Span& t) { return pos < t.end; });
        auto last = std::lower_bound(spans_.begin(), spans_.end(), b,
                                     [](const text::Span& t, std::size_t pos) { return t.begin < pos; });
        return last > first ? static_cast<std::size_t>(last - first) : 0;
    }

    // Start offset of the n-th token counted backwards from `pos` (n >= 1), never before `floor`.
    [[nodiscard]] std::size_t start_of_trailing(std::size_t floor, std::size_t pos, std::size_t n) const {
        auto end_it = std::lower_bound(spans_.begin(), spans_.end(), pos,
                                       [](const text::Span& t, std::size_t p) { return t.begin < p; });
        std::size_t available = static_cast<std::size_t>(end_it - spans_.begin());
        if (n == 0 || available == 0) {
            return pos;
        }
        n = std::min(n, available);
        const std::size_t start = std::max(spans_[available - n].begin, floor);
        return start;
    }

private:
    std::vector<text::Span> spans_;
};

} // namespace

std::vector<Separator> default_separators() {
    return {Separator::heading(), Separator::blank_line(), Separator::newline(),
            Separator::sentence(), Separator::space(), Separator::character()};
}

void ChunkingParams::validate() const {
    if (max_tokens == 0) {
        throw ConfigError("max_tokens must be positive");
    }
    if (overlap_tokens >= max_tokens) {
        throw ConfigError("overlap_tokens must be smaller than max_tokens");
    }
    if (separators.empty()) {
        throw ConfigError("separator hierarchy must not be empty");
    }
}

std::vector<std::size_t> separator_positions(std::string_view s, const Separator& sep) {
    std::vector<std::size_t> out;
    switch (sep.kind) {
    case Separator::Kind::Heading:
        for (const auto& line : split_lines(s)) {
            if (line.begin > 0 && is_heading_line(s.substr(line.begin, line.end - line.begin))) {
                out.push_back(line.begin);
            }
        }
        break;
    case Separator::Kind::BlankLine: {
        const auto lines = split_lines(s);
        for (std::size_t i = 1; i < lines.size(); ++i) {
            const auto prev = s.substr(lines[i - 1].begin, lines[i - 1].end - lines[i - 1].begin);
            const auto cur = s.substr(lines[i].begin, lines[i].end - lines[i].begin);
            if (is_blank(prev) && !is_blank(cur)) {
                out.push_back(lines[i].begin);
            }
        }
        break;
    }
    case Separator::Kind::Newline:
        for (std::size_t i = 0; i + 1 < s.size(); ++i) {
            if (s[i] == '\n') {
                out.push_back(i + 1);
            }
        }
        break;
    case Separator::Kind::Sentence:
        for (std::size_t i = 0; i + 1 < s.size(); ++i) {
            if ((s[i] == '.' || s[i] == '!' || s[i] == '?') && text::is_space(s[i + 1])) {
                std::size_t j = i + 1;
                while (j < s.size() && text::is_space(s[j])) {
                    ++j;
                }
                if (j < s.size()) {
                    out.push_back(j);
                }
            }
        }
        break;
    case Separator::Kind::Space:
        for (std::size_t i = 1; i < s.size(); ++i) {
            if (text::is_space(s[i - 1]) && !text::is_space(s[i])) {
                out.push_back(i);
            }
        }
        break;
    case Separator::Kind::Character:
        for (std::size_t i = 1; i < s.size(); ++i) {
            if ((static_cast<unsigned char>(s[i]) & 0xC0) != 0x80) {
                out.push_back(i);
            }
        }
        break;
    case Separator::Kind::Literal:
        if (!sep.literal.empty()) {
            for (std::size_t pos = s.find(sep.literal); pos != std::string_view::npos;
                 pos = s.find(sep.literal, pos + 1)) {
                const std::size_t cut = pos + sep.literal.size();
                if (cut > 0 && cut < s.size()) {
                    out.push_back(cut);
                }
            }
        }
        break;
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<Chunk> split(const Document& doc, const ChunkingParams& params) {
    params.validate();
    const std::string_view src = doc.markdown_text;
    if (src.empty()) {
        throw InputError("document " + doc.doc_id + " has no text");
    }

    const TokenCounter tokens(src);
    std::vector<std::vector<std::size_t>> levels;
    levels.reserve(params.separators.size());
    for (const auto& sep : params.separators) {
        levels.push_back(separator_positions(src, sep));
    }
    const auto& sections = levels.front();
    auto is_section_start = [&](std::size_t pos) {
        return pos == 0 || std::binary_search(sections.begin(), sections.end(), pos);
    };

    // Phase 1: partition the text into non-overlapping cores.
    struct Core {
        std::size_t begin;
        std::size_t end;
    };
    std::vector<Core> cores;
    std::size_t pos = 0;
    while (pos < src.size()) {
        const bool section_start = is_section_start(pos);
        const std::size_t budget =
            section_start ? params.max_tokens : params.max_tokens - params.overlap_tokens;

        std::size_t end = src.size();
        if (tokens.count(pos, src.size()) > budget) {
            end = 0;
            for (const auto& cuts : levels) {
                // Farthest cut > pos whose chunk stays within budget. Token counts grow
                // monotonically with the cut position, so binary search applies.
                // Cuts yielding a token-less chunk are skipped.
                auto lo = std::partition_point(std::upper_bound(cuts.begin(), cuts.end(), pos), cuts.end(),
                                               [&](std::size_t cut) { return tokens.count(pos, cut) == 0; });
                auto hi = std::partition_point(lo, cuts.end(), [&](std::size_t cut) {
                    return tokens.count(pos, cut) <= budget;
                });
                if (hi != lo) {
                    end = *(hi - 1);
                    break;
                }
            }
            if (end == 0) {
                // No separator level fits: hard cut at the farthest code point in budget.
                std::size_t cut = text::utf8_ceil(src, pos + 1);
                std::size_t next = cut;
                while (next < src.size() && tokens.count(pos, next) <= budget) {
                    cut = next;
                    next = text::utf8_ceil(src, next + 1);
                }
                end = cut;
            }
        }
        cores.push_back({pos, end});
        pos = end;
    }

    // Phase 2: materialize chunks, prefixing mid-section cores with trailing tokens
    // of the previous core.
    std::vector<Chunk> chunks;
    chunks.reserve(cores.size());
    for (std::size_t i = 0; i < cores.size(); ++i) {
        std::size_t begin = cores[i].begin;
        if (i > 0 && params.overlap_tokens > 0 && !is_section_start(cores[i].begin)) {
            begin = tokens.start_of_trailing(cores[i - 1].begin, cores[i].begin, params.overlap_tokens);
        }
        Chunk chunk;
        chunk.doc_id = doc.doc_id;
        chunk.ordinal = i;
        chunk.chunk_id = make_chunk_id(doc.doc_id, i);
        chunk.offset = begin;
        chunk.overlap = cores[i].begin - begin;
        chunk.text = std::string(src.substr(begin, cores[i].end - begin));
        chunk.contextual_text = chunk.text;
        chunks.push_back(std::move(chunk));
    }
    return chunks;
}

std::string build_contextual_text(const Chunk& chunk) {
    auto line = [](std::string_view label, const std::vector<std::string>& items) {
        std::string out(label);
        out.push_back(':');
        if (!items.empty()) {
            std::vector<std::string> flat;
            flat.reserve(items.size());
            for (const auto& item : items) {
                std::string one = item;
                std::replace(one.begin(), one.end(), '\n', ' ');
                std::replace(one.begin(), one.end(), '\r', ' ');
                flat.push_back(std::move(one));
            }
            out.push_back(' ');
            out += text::join(flat, "; ");
        }
        out.push_back('\n');
        return out;
    };
    const auto& m = chunk.metadata;
    std::string header = line("Clusters", m.parent_clusters) + line("Entities", m.chunk_entities) +
                         line("Questions", m.answered_questions) + line("Insights", m.retrieval_nuggets);
    return header + "\n" + chunk.text;
}

} // namespace metarag
