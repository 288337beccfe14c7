#include <gtest/gtest.h>

#include "metarag/text.hpp"

using namespace metarag;

TEST(Text, AnalyzeLowercasesAndSplitsOnNonAlnum) {
    EXPECT_EQ(text::analyze("Cash-Flow, 2018 CAPEX!"), (std::vector<std::string>{"cash", "flow", "2018", "capex"}));
    EXPECT_TRUE(text::analyze("  ...  ").empty());
}

TEST(Text, AnalyzeHandlesNonAscii) {
    EXPECT_EQ(text::analyze("Umsatz STEIGT über Plan"), (std::vector<std::string>{"umsatz", "steigt", "über", "plan"}));
}

TEST(Text, WhitespaceTokensReportByteSpans) {
    const std::string s = " ab  c\nd ";
    const auto spans = text::whitespace_tokens(s);
    ASSERT_EQ(spans.size(), 3u);
    EXPECT_EQ(s.substr(spans[0].begin, spans[0].size()), "ab");
    EXPECT_EQ(s.substr(spans[2].begin, spans[2].size()), "d");
    EXPECT_EQ(text::count_whitespace_tokens(s), 3u);
}

TEST(Text, NormalizeLabelFoldsCaseWidthAndSpace) {
    EXPECT_EQ(text::normalize_label("  General   MILLS "), "general mills");
    EXPECT_EQ(text::normalize_label("ＡＢＣ"), "abc");
    EXPECT_EQ(text::normalize_label("Liquidity\t&\nCapital"), "liquidity & capital");
}

TEST(Text, ContainsSubsequenceMatchesPhrasesOnly) {
    const auto q = text::label_tokens("How did General Mills grow?");
    EXPECT_TRUE(text::contains_subsequence(q, text::label_tokens("general mills")));
    EXPECT_FALSE(text::contains_subsequence(q, text::label_tokens("mills general")));
    EXPECT_FALSE(text::contains_subsequence(q, {}));
}

TEST(Text, Utf8BoundariesNeverSplitACodePoint) {
    const std::string s = "a\xC3\xA9z";  // a é z
    EXPECT_EQ(text::utf8_floor(s, 2), 1u);
    EXPECT_EQ(text::utf8_ceil(s, 2), 3u);
    EXPECT_EQ(text::utf8_floor(s, 10), s.size());
}

TEST(Text, TrimAndJoin) {
    EXPECT_EQ(text::trim("  x y \n"), "x y");
    EXPECT_EQ(text::join({"a", "b", "c"}, "; "), "a; b; c");
    EXPECT_EQ(text::join({}, ", "), "");
}
