#include <gtest/gtest.h>

#include <bit>
#include <random>
#include <set>

#include <nlohmann/json.hpp>

#include "expansion_oracle.hpp"
#include "metarag/error.hpp"
#include "metarag/pipelines.hpp"
#include "test_support.hpp"

using namespace metarag;
using prompts::PromptId;

namespace {

const std::string kQuestion = "What were 3M capital expenditures for 2018?";

PipelineConfig arch(int a, TextField field = TextField::Contextual, std::optional<RerankerKind> r = std::nullopt) {
    PipelineConfig c;
    c.architecture = a;
    c.collection = field;
    c.reranker = r;
    return c;
}

std::vector<std::string> ids(const std::vector<ScoredChunk>& v) {
    std::vector<std::string> out;
    for (const auto& s : v) {
        out.push_back(s.chunk_id);
    }
    return out;
}

struct MockRun {
    support::MockStack stack;
    Pipeline pipeline{support::fixture_index(), *stack.gateway, ClockKind::Logical};
};

} // namespace

TEST(PipelineConfig, ValidationAndNames) {
    EXPECT_NO_THROW(arch(1).validate());
    EXPECT_THROW(arch(0).validate(), ConfigError);
    EXPECT_THROW(arch(7).validate(), ConfigError);
    EXPECT_THROW(arch(1, TextField::Standard, RerankerKind::Metadata).validate(), ConfigError);
    EXPECT_THROW(arch(2, TextField::Standard, RerankerKind::External).validate(), ConfigError);
    EXPECT_THROW(arch(5, TextField::Standard, RerankerKind::External).validate(), ConfigError);
    EXPECT_NO_THROW(arch(3, TextField::Standard, RerankerKind::None).validate());
    auto big = arch(3);
    big.k = 26;
    EXPECT_THROW(big.validate(), ConfigError);
    EXPECT_EQ(arch(1).effective_reranker(), RerankerKind::None);
    EXPECT_EQ(arch(3).effective_reranker(), RerankerKind::External);
    EXPECT_EQ(arch(5).effective_reranker(), RerankerKind::Metadata);
    EXPECT_EQ(arch(6, TextField::Standard).display_name(), "a6-std-external");
    auto labelled = arch(2);
    labelled.label = "mine";
    EXPECT_EQ(labelled.display_name(), "mine");
    EXPECT_EQ(parse_reranker("metadata"), RerankerKind::Metadata);
    EXPECT_THROW((void)parse_reranker("cohere"), ConfigError);
    EXPECT_EQ(parse_collection("contextual"), TextField::Contextual);
    EXPECT_THROW((void)parse_collection("both"), ConfigError);
}

TEST(Pipeline, Arch1ReturnsKDenseChunks) {
    MockRun r;
    const auto t = r.pipeline.answer(kQuestion, arch(1, TextField::Standard));
    ASSERT_EQ(t.retrieved.size(), 7u);
    EXPECT_EQ(t.context.size(), 7u);
    for (const auto& s : t.retrieved) {
        EXPECT_TRUE(s.dense_score.has_value());
        EXPECT_FALSE(s.fused_score.has_value());
    }
    EXPECT_FALSE(t.rewritten_query.has_value());
    EXPECT_FALSE(t.expansion_added.has_value());
    EXPECT_FALSE(t.answer_text.empty());
}

TEST(Pipeline, Arch3WithoutRerankerEqualsArch2) {
    for (auto field : {TextField::Standard, TextField::Contextual}) {
        MockRun r;
        const auto two = r.pipeline.answer(kQuestion, arch(2, field));
        const auto three = r.pipeline.answer(kQuestion, arch(3, field, RerankerKind::None));
        EXPECT_EQ(ids(two.retrieved), ids(three.retrieved));
        EXPECT_EQ(two.retrieved, three.retrieved);
        EXPECT_EQ(two.answer_text, three.answer_text);
    }
}

TEST(Pipeline, RerankerSeesTheFullCandidatePool) {
    MockRun r;
    for (auto kind : {RerankerKind::External, RerankerKind::Metadata}) {
        const auto t = r.pipeline.answer(kQuestion, arch(3, TextField::Contextual, kind));
        EXPECT_EQ(t.reranker_input_size, 25u);
        EXPECT_EQ(t.retrieved.size(), 7u);
        EXPECT_EQ(t.reranker, kind);
        for (const auto& s : t.retrieved) {
            EXPECT_TRUE(s.rerank_score.has_value());
        }
    }
}

TEST(Pipeline, Arch4FailOpenEqualsArch3) {
    MockRun r;
    r.stack.provider->fail(PromptId::FileFilter, "");
    r.stack.provider->fail(PromptId::QueryRewrite, "");
    const auto four = r.pipeline.answer(kQuestion, arch(4));
    const auto three = r.pipeline.answer(kQuestion, arch(3));
    EXPECT_EQ(four.retrieved, three.retrieved);
    EXPECT_EQ(four.answer_text, three.answer_text);
    EXPECT_EQ(four.rewritten_query, kQuestion);
    EXPECT_GE(four.warnings.size(), 2u);
}

TEST(Pipeline, FileFilterRestrictsRetrievalToSelectedDocuments) {
    MockRun r;
    r.stack.provider->respond(PromptId::FileFilter, "", R"({"files": ["PepsiCo_2022_10K.md"]})");
    for (int a : {4, 6}) {
        const auto t = r.pipeline.answer(kQuestion, arch(a));
        ASSERT_TRUE(t.selected_files.has_value());
        EXPECT_EQ(*t.selected_files, (std::vector<std::string>{"PepsiCo_2022_10K"}));
        for (const auto& b : t.context) {
            EXPECT_EQ(r.pipeline.index().store().at(b.chunk_id).doc_id, "PepsiCo_2022_10K") << b.chunk_id;
        }
    }
}

TEST(Pipeline, UnknownFileSelectionFailsOpen) {
    MockRun r;
    r.stack.provider->respond(PromptId::FileFilter, "", R"({"files": ["nonexistent.md"]})");
    const auto t = r.pipeline.answer(kQuestion, arch(4));
    EXPECT_EQ(t.selected_files->size(), 3u);
    EXPECT_FALSE(t.warnings.empty());
}

TEST(Pipeline, RewriteFailureKeepsOriginalQuery) {
    MockRun r;
    r.stack.provider->fail(PromptId::QueryRewrite, "");
    const auto t = r.pipeline.answer(kQuestion, arch(4));
    EXPECT_EQ(t.rewritten_query, kQuestion);
    bool noted = false;
    for (const auto& w : t.warnings) {
        noted = noted || w.find("rewrite") != std::string::npos;
    }
    EXPECT_TRUE(noted);
}

TEST(Pipeline, RewriteIsUsedForRetrieval) {
    MockRun r;
    r.stack.provider->respond(PromptId::QueryRewrite, "", "```\n\"PepsiCo net revenue fiscal 2022\"\n```");
    const auto t = r.pipeline.answer(kQuestion, arch(4));
    EXPECT_EQ(t.rewritten_query, "PepsiCo net revenue fiscal 2022");
}

TEST(Pipeline, GeneratorFailureThrows) {
    MockRun r;
    r.stack.provider->fail(PromptId::Answer, "");
    EXPECT_THROW((void)r.pipeline.answer(kQuestion, arch(2)), TransportError);
    EXPECT_THROW((void)r.pipeline.answer("   ", arch(2)), InputError);
}

TEST(Pipeline, Arch6AddsUpToThreeExpansionChunks) {
    MockRun r;
    for (auto kind : {RerankerKind::External, RerankerKind::Metadata, RerankerKind::None}) {
        const auto t = r.pipeline.answer(kQuestion, arch(6, TextField::Contextual, kind));
        ASSERT_EQ(t.retrieved.size(), 4u);
        ASSERT_TRUE(t.expansion_added.has_value());
        EXPECT_LE(t.expansion_added->size(), 3u);
        EXPECT_EQ(t.context.size(), t.retrieved.size() + t.expansion_added->size());
        std::set<std::string> initial;
        for (const auto& s : t.retrieved) {
            initial.insert(s.chunk_id);
        }
        for (const auto& s : *t.expansion_added) {
            EXPECT_FALSE(initial.contains(s.chunk_id));
        }
        // Expansion chunks come after the reranked ones in the context.
        for (std::size_t i = 0; i < t.retrieved.size(); ++i) {
            EXPECT_EQ(t.context[i].chunk_id, t.retrieved[i].chunk_id);
        }
    }
}

TEST(Pipeline, ContextCarriesRawChunkText) {
    MockRun r;
    const auto t = r.pipeline.answer(kQuestion, arch(2, TextField::Contextual));
    for (const auto& b : t.context) {
        EXPECT_EQ(b.text, r.pipeline.index().store().at(b.chunk_id).text);
    }
    EXPECT_EQ(render_context({{"a#0", "one"}, {"b#1", "two\n"}}), "[a#0]\none\n\n[b#1]\ntwo\n\n");
}

TEST(Pipeline, LogicalClockTracesAreReproducible) {
    MockRun a, b;
    for (int x = 1; x <= 6; ++x) {
        const auto ta = a.pipeline.answer(kQuestion, arch(x, TextField::Contextual, x <= 2 ? std::optional(RerankerKind::None) : std::nullopt));
        const auto tb = b.pipeline.answer(kQuestion, arch(x, TextField::Contextual, x <= 2 ? std::optional(RerankerKind::None) : std::nullopt));
        EXPECT_EQ(nlohmann::json(ta).dump(), nlohmann::json(tb).dump()) << x;
    }
}

TEST(Pipeline, StageLatenciesAreConsistent) {
    for (auto clock : {ClockKind::Wall, ClockKind::Logical}) {
        support::MockStack stack;
        const Pipeline p(support::fixture_index(), *stack.gateway, clock);
        const auto t = p.answer(kQuestion, arch(6));
        std::vector<std::string> names;
        double sum = 0.0;
        for (const auto& s : t.stages) {
            names.push_back(s.stage);
            EXPECT_GE(s.seconds, 0.0);
            sum += s.seconds;
        }
        EXPECT_EQ(names, (std::vector<std::string>{"filter_files", "rewrite_query", "embed_query", "retrieve", "rerank",
                                                   "expand", "generate"}));
        EXPECT_LE(sum, t.total_seconds + 1e-12);
        EXPECT_GT(t.total_seconds, 0.0);
        EXPECT_TRUE(t.stage_seconds("generate").has_value());
        EXPECT_FALSE(t.stage_seconds("nope").has_value());
    }
}

TEST(Pipeline, TraceJsonShape) {
    MockRun r;
    const nlohmann::json j = r.pipeline.answer(kQuestion, arch(4));
    for (const char* key : {"original_query", "rewritten_query", "selected_files", "retrieved", "context", "answer_text",
                            "stages", "total_seconds"}) {
        EXPECT_TRUE(j.contains(key)) << key;
    }
    EXPECT_TRUE(j["retrieved"].is_array());
}

TEST(Pipeline, ConcurrentAnswersMatchSequentialOnes) {
    MockRun r;
    const std::vector<std::string> qs{kQuestion, "What was PepsiCo net revenue for fiscal 2022?",
                                      "Which segments does Amcor report?"};
    std::vector<std::string> seq, par(qs.size());
    for (const auto& q : qs) {
        seq.push_back(nlohmann::json(r.pipeline.answer(q, arch(5, TextField::Standard)).retrieved).dump());
    }
    {
        std::vector<std::jthread> th;
        for (std::size_t i = 0; i < qs.size(); ++i) {
            th.emplace_back([&, i] {
                par[i] = nlohmann::json(r.pipeline.answer(qs[i], arch(5, TextField::Standard)).retrieved).dump();
            });
        }
    }
    EXPECT_EQ(seq, par);
}

namespace {

std::vector<Chunk> ten_chunk_fixture() {
    auto c = [](std::string id, std::string doc, std::vector<std::string> cl, std::vector<std::string> en) {
        Chunk ch;
        ch.chunk_id = id;
        ch.doc_id = doc;
        ch.text = id;
        ch.contextual_text = id;
        ch.metadata.parent_clusters = std::move(cl);
        ch.metadata.chunk_entities = std::move(en);
        return ch;
    };
    return {c("k0", "d1", {"Liquidity"}, {"3M"}),
            c("k1", "d1", {"Liquidity", "Debt"}, {"3M", "Moody's"}),
            c("k2", "d1", {"Revenue"}, {"3M"}),
            c("k3", "d1", {"Liquidity"}, {}),
            c("k4", "d2", {"Liquidity", "Debt"}, {"PepsiCo"}),
            c("k5", "d2", {"Revenue"}, {"PepsiCo", "3M"}),
            c("k6", "d2", {"Outlook"}, {"Frito-Lay"}),
            c("k7", "d2", {"liquidity"}, {"3m"}),
            c("k8", "d1", {"Debt"}, {"Moody's"}),
            c("k9", "d2", {}, {})};
}

std::vector<oracle::Tagged> as_tagged(const std::vector<Chunk>& chunks) {
    std::vector<oracle::Tagged> out;
    for (const auto& c : chunks) {
        out.push_back({c.chunk_id, c.metadata.parent_clusters, c.metadata.chunk_entities});
    }
    return out;
}

} // namespace

TEST(Expansion, HandFixture) {
    const auto chunks = ten_chunk_fixture();
    const ChunkStore store(chunks);
    // Initial k0, k1, k2: core clusters {liquidity} (2 of 3), core entities {3m} (3 of 3).
    // k7 matches both (2), then k3, k4, k5 match one each; ties on id.
    const std::vector<const Chunk*> initial{&store.at("k0"), &store.at("k1"), &store.at("k2")};
    EXPECT_EQ(expand_chunks(initial, store, 3), (std::vector<std::string>{"k7", "k3", "k4"}));
    EXPECT_EQ(expand_chunks(initial, store, 3, std::set<std::string>{"d1"}), (std::vector<std::string>{"k3"}));
    EXPECT_TRUE(expand_chunks(initial, store, 0).empty());
}

TEST(ExpansionProperty, MatchesEnumerationOracle) {
    const auto chunks = ten_chunk_fixture();
    const ChunkStore store(chunks);
    const auto tagged = as_tagged(chunks);
    // Every non-empty initial set of size <= 4 over the ten chunks.
    for (unsigned mask = 1; mask < (1u << chunks.size()); ++mask) {
        if (std::popcount(mask) > 4) {
            continue;
        }
        std::vector<const Chunk*> initial;
        std::set<std::string> ids;
        for (std::size_t i = 0; i < chunks.size(); ++i) {
            if (mask & (1u << i)) {
                initial.push_back(&store.at(chunks[i].chunk_id));
                ids.insert(chunks[i].chunk_id);
            }
        }
        ASSERT_EQ(expand_chunks(initial, store, 3), oracle::expansion(tagged, ids, 3)) << mask;
    }
}
