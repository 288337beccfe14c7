#include <gtest/gtest.h>

#include <random>

#include "metarag/chunker.hpp"
#include "metarag/error.hpp"
#include "metarag/text.hpp"

using namespace metarag;

namespace {

Document doc(std::string text) {
    return Document{"doc", "doc.md", std::move(text), {}};
}

std::string reconstruct(const std::vector<Chunk>& chunks) {
    std::string out;
    for (const auto& c : chunks) {
        out += c.text.substr(c.overlap);
    }
    return out;
}

std::string random_markdown(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> sections(1, 5), paras(1, 4), sentences(1, 6), words(2, 14);
    std::string s = "# Title\n\n";
    const int ns = sections(rng);
    for (int i = 0; i < ns; ++i) {
        s += "## Section " + std::to_string(i) + "\n\n";
        const int np = paras(rng);
        for (int p = 0; p < np; ++p) {
            const int nsent = sentences(rng);
            for (int t = 0; t < nsent; ++t) {
                const int nw = words(rng);
                for (int w = 0; w < nw; ++w) {
                    s += "word" + std::to_string(rng() % 50) + (w + 1 < nw ? " " : "");
                }
                s += ". ";
            }
            s += "\n\n";
        }
    }
    return s;
}

} // namespace

TEST(Chunker, ShortDocumentIsOneChunk) {
    const auto chunks = split(doc("# A\n\nhello world"), {});
    ASSERT_EQ(chunks.size(), 1u);
    EXPECT_EQ(chunks[0].chunk_id, "doc#0");
    EXPECT_EQ(chunks[0].text, "# A\n\nhello world");
    EXPECT_EQ(chunks[0].contextual_text, chunks[0].text);
    EXPECT_TRUE(chunks[0].metadata.empty());
}

TEST(Chunker, SplitsAtHeadingsFirst) {
    ChunkingParams p;
    p.max_tokens = 6;
    p.overlap_tokens = 1;
    const auto chunks = split(doc("# A\none two\n## B\nthree four\n## C\nfive six"), p);
    ASSERT_EQ(chunks.size(), 3u);
    EXPECT_EQ(chunks[0].text, "# A\none two\n");
    EXPECT_EQ(chunks[1].text, "## B\nthree four\n");
    EXPECT_EQ(chunks[2].text, "## C\nfive six");
    EXPECT_EQ(chunks[1].overlap, 0u);
    EXPECT_EQ(chunks[2].overlap, 0u);
}

TEST(Chunker, MidSectionChunksCarryOverlap) {
    ChunkingParams p;
    p.max_tokens = 5;
    p.overlap_tokens = 2;
    const auto chunks = split(doc("a b c d e f g h i j k"), p);
    ASSERT_GE(chunks.size(), 2u);
    EXPECT_EQ(chunks[0].overlap, 0u);
    for (std::size_t i = 1; i < chunks.size(); ++i) {
        EXPECT_GT(chunks[i].overlap, 0u);
        const auto prefix = chunks[i].text.substr(0, chunks[i].overlap);
        EXPECT_EQ(text::count_whitespace_tokens(prefix), 2u) << chunks[i].text;
        EXPECT_NE(chunks[i - 1].text.find(text::trim(prefix)), std::string::npos);
    }
}

TEST(Chunker, ZeroOverlapChunksPartitionTheText) {
    ChunkingParams p;
    p.max_tokens = 4;
    p.overlap_tokens = 0;
    const std::string t = "one two three. four five six seven. eight nine";
    const auto chunks = split(doc(t), p);
    std::string joined;
    for (const auto& c : chunks) {
        joined += c.text;
        EXPECT_LE(text::count_whitespace_tokens(c.text), 4u);
    }
    EXPECT_EQ(joined, t);
}

TEST(Chunker, InvalidParamsAreRejected) {
    ChunkingParams p;
    p.max_tokens = 10;
    p.overlap_tokens = 10;
    EXPECT_THROW(split(doc("x"), p), ConfigError);
    p.max_tokens = 0;
    p.overlap_tokens = 0;
    EXPECT_THROW(split(doc("x"), p), ConfigError);
    EXPECT_THROW(split(doc(""), {}), InputError);
}

TEST(Chunker, CharacterFallbackForLiteralOnlyHierarchy) {
    ChunkingParams p;
    p.max_tokens = 2;
    p.overlap_tokens = 0;
    p.separators = {Separator::literal_text("|"), Separator::character()};
    const auto chunks = split(doc("aa bb cc|dd"), p);
    std::string joined;
    for (const auto& c : chunks) {
        joined += c.text;
        EXPECT_LE(text::count_whitespace_tokens(c.text), 2u);
    }
    EXPECT_EQ(joined, "aa bb cc|dd");
}

TEST(Chunker, SeparatorPositions) {
    const std::string s = "# T\n\nPara one. Next.\n## H\nx";
    EXPECT_EQ(separator_positions(s, Separator::heading()), (std::vector<std::size_t>{21}));
    EXPECT_EQ(separator_positions(s, Separator::blank_line()), (std::vector<std::size_t>{5}));
    EXPECT_EQ(separator_positions(s, Separator::sentence()), (std::vector<std::size_t>{15, 21}));
}

TEST(ChunkerProperty, RandomDocumentsRespectBudgetAndReconstruct) {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        std::mt19937_64 rng(seed);
        const std::string md = random_markdown(rng);
        ChunkingParams p;
        p.max_tokens = 8 + seed % 40;
        p.overlap_tokens = seed % 3 == 0 ? 0 : seed % 7;
        if (p.overlap_tokens >= p.max_tokens) {
            p.overlap_tokens = 0;
        }
        const auto chunks = split(doc(md), p);
        ASSERT_FALSE(chunks.empty());
        EXPECT_EQ(reconstruct(chunks), md) << "seed " << seed;
        for (std::size_t i = 0; i < chunks.size(); ++i) {
            EXPECT_EQ(chunks[i].ordinal, i);
            EXPECT_LE(text::count_whitespace_tokens(chunks[i].text), p.max_tokens) << "seed " << seed;
            EXPECT_GT(text::count_whitespace_tokens(chunks[i].text.substr(chunks[i].overlap)), 0u);
            EXPECT_EQ(md.substr(chunks[i].offset, chunks[i].text.size()), chunks[i].text);
        }
    }
}

TEST(Chunker, ContextualTextLayout) {
    Chunk c;
    c.text = "body";
    c.metadata.parent_clusters = {"Liquidity", "Risk"};
    c.metadata.chunk_entities = {"3M"};
    c.metadata.answered_questions = {"What\nis it?"};
    EXPECT_EQ(build_contextual_text(c),
              "Clusters: Liquidity; Risk\nEntities: 3M\nQuestions: What is it?\nInsights:\n\nbody");
}
