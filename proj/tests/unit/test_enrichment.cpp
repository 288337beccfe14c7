#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "metarag/enrichment.hpp"
#include "metarag/error.hpp"
#include "metarag/text.hpp"
#include "test_support.hpp"

using namespace metarag;
using prompts::PromptId;

namespace {

const std::string kDocJson =
    R"({"one_liner": "Acme annual report", "summary": "Acme sells widgets.",
        "clusters": ["Revenue", "Cash Flow", "Risk Factors", "Segments", "Outlook"]})";

Document acme() {
    return {"acme", "acme.md", "# Acme\n\n## Revenue\nAcme revenue rose. Widgets sold well.\n", {}};
}

DocumentMetadata acme_meta() {
    return {"acme", "Acme annual report", "Acme sells widgets.",
            {"Revenue", "Cash Flow", "Risk Factors", "Segments", "Outlook"}};
}

} // namespace

TEST(HeadTail, ShortTextUnchangedLongTextSampled) {
    EXPECT_EQ(sample_head_tail("abc", 10), "abc");
    const std::string s(100, 'x');
    const auto out = sample_head_tail(s + "END", 20);
    EXPECT_EQ(out.substr(0, 10), std::string(10, 'x'));
    EXPECT_TRUE(out.ends_with("END"));
    EXPECT_NE(out.find("omitted"), std::string::npos);
}

TEST(HeadTail, NeverSplitsACodePoint) {
    std::string s;
    for (int i = 0; i < 50; ++i) {
        s += "\xC3\xA9";  // e-acute
    }
    const auto out = sample_head_tail(s, 11);
    // Every two-byte sequence must stay whole: lead bytes at even offsets within each run.
    std::size_t run = 0;
    for (unsigned char ch : out) {
        if (ch == 0xC3 || ch == 0xA9) {
            EXPECT_EQ(ch == 0xC3, run % 2 == 0);
            ++run;
        } else {
            EXPECT_EQ(run % 2, 0u);
            run = 0;
        }
    }
    EXPECT_EQ(run % 2, 0u);
}

TEST(Enrichment, CannedDocumentMetadataPassesThrough) {
    support::MockStack stack;
    stack.provider->respond(PromptId::DocumentMetadata, "acme.md", kDocJson);
    const auto m = enrich_document(*stack.gateway, acme());
    EXPECT_EQ(m, acme_meta());
}

TEST(Enrichment, DocumentClusterBoundsAreEnforced) {
    support::MockStack stack;
    stack.provider->respond(PromptId::DocumentMetadata, "",
                            R"({"one_liner": "x", "summary": "y", "clusters": ["a", "b"]})");
    EXPECT_THROW((void)enrich_document(*stack.gateway, acme()), StructuredOutputError);
}

TEST(Enrichment, ChunkParentsConstrainedToDocumentClusters) {
    support::MockStack stack;
    stack.provider->respond(PromptId::ChunkMetadata, "",
                            R"({"parent_clusters": ["cash  flow", "Not A Cluster", "revenue", "Outlook"],
                                "chunk_entities": ["Acme"], "answered_questions": ["a?", "b?", "c?"],
                                "retrieval_nuggets": ["n"]})");
    Chunk c{"acme#0", "acme", 0, "Acme revenue rose.", {}, "Acme revenue rose.", 0, 0};
    const auto m = enrich_chunk(*stack.gateway, c, acme_meta());
    EXPECT_EQ(m.parent_clusters, (std::vector<std::string>{"Cash Flow", "Revenue"}));
    EXPECT_EQ(m.chunk_entities, (std::vector<std::string>{"Acme"}));
}

TEST(Enrichment, NonMemberParentsFallBackToFirstCluster) {
    ChunkMetadata meta;
    meta.parent_clusters = {"Weather", "Sports"};
    EXPECT_EQ(constrain_parent_clusters(meta, acme_meta()).parent_clusters, (std::vector<std::string>{"Revenue"}));
    meta.parent_clusters.clear();
    EXPECT_EQ(constrain_parent_clusters(meta, acme_meta()).parent_clusters, (std::vector<std::string>{"Revenue"}));
}

TEST(Enrichment, TooFewQuestionsIsRejected) {
    support::MockStack stack;
    stack.provider->respond(PromptId::ChunkMetadata, "",
                            R"({"parent_clusters": [], "chunk_entities": [], "answered_questions": ["a?"],
                                "retrieval_nuggets": []})");
    Chunk c{"acme#0", "acme", 0, "x", {}, "x", 0, 0};
    EXPECT_THROW((void)enrich_chunk(*stack.gateway, c, acme_meta()), StructuredOutputError);
}

TEST(Enrichment, ChunkOfAnotherDocumentIsAnInputError) {
    support::MockStack stack;
    Chunk c{"other#0", "other", 0, "x", {}, "x", 0, 0};
    EXPECT_THROW((void)enrich_chunk(*stack.gateway, c, acme_meta()), InputError);
}

TEST(BuildIndex, FixtureCorpusInvariants) {
    const auto& b = support::fixture_build();
    EXPECT_EQ(b.manifest.documents, 3u);
    EXPECT_EQ(b.manifest.chunks, b.chunks.size());
    EXPECT_GE(b.chunks.size(), 25u);
    EXPECT_EQ(b.standard_vectors.size(), b.chunks.size());
    EXPECT_EQ(b.contextual_vectors.size(), b.chunks.size());
    EXPECT_EQ(b.manifest.dimension, llm::MockProvider::kDimension);
    EXPECT_EQ(b.manifest.enriched_chunks, b.chunks.size());
    EXPECT_TRUE(b.manifest.failed_documents.empty());
    EXPECT_EQ(b.docmeta.size(), 3u);
    for (const auto& c : b.chunks) {
        const auto& dm = b.docmeta.at(c.doc_id);
        EXPECT_GE(dm.clusters.size(), 5u);
        EXPECT_LE(dm.clusters.size(), 20u);
        EXPECT_GE(c.metadata.parent_clusters.size(), 1u);
        EXPECT_LE(c.metadata.parent_clusters.size(), 2u);
        for (const auto& p : c.metadata.parent_clusters) {
            EXPECT_NE(std::find(dm.clusters.begin(), dm.clusters.end(), p), dm.clusters.end()) << p;
        }
        EXPECT_GE(c.metadata.answered_questions.size(), 3u);
        EXPECT_TRUE(c.contextual_text.ends_with(c.text));
        EXPECT_EQ(c.contextual_text, build_contextual_text(c));
    }
}

TEST(BuildIndex, BothCollectionsCoverTheSameChunks) {
    const auto idx = support::fixture_index();
    const auto& s = idx->collection(TextField::Standard);
    const auto& x = idx->collection(TextField::Contextual);
    ASSERT_EQ(s.vectors.size(), x.vectors.size());
    std::set<std::string> a, b;
    for (std::size_t i = 0; i < s.vectors.size(); ++i) {
        a.insert(s.vectors.id(i));
        b.insert(x.vectors.id(i));
    }
    EXPECT_EQ(a, b);
    EXPECT_EQ(a.size(), idx->store().size());
}

TEST(BuildIndex, DeterministicAcrossRunsAndParallelism) {
    const auto corpus = load_corpus(support::fixture_dir() / "corpus_small");
    support::MockStack one(1), four(4);
    const auto a = build_corpus_index(corpus, *one.gateway, support::small_chunks());
    const auto b = build_corpus_index(corpus, *four.gateway, support::small_chunks());
    EXPECT_EQ(a.chunks, b.chunks);
    EXPECT_EQ(a.docmeta, b.docmeta);
    EXPECT_EQ(a.standard_vectors, b.standard_vectors);
    EXPECT_EQ(a.contextual_vectors, b.contextual_vectors);
    EXPECT_EQ(a.manifest, b.manifest);
}

TEST(BuildIndex, FailedDocumentKeepsChunksWithEmptyMetadata) {
    const auto corpus = load_corpus(support::fixture_dir() / "corpus_small");
    support::MockStack stack;
    stack.provider->fail(PromptId::DocumentMetadata, "PepsiCo");
    const auto b = build_corpus_index(corpus, *stack.gateway, support::small_chunks());
    EXPECT_EQ(b.manifest.failed_documents, (std::vector<std::string>{"PepsiCo_2022_10K"}));
    EXPECT_FALSE(b.docmeta.contains("PepsiCo_2022_10K"));
    std::size_t pepsi = 0;
    for (const auto& c : b.chunks) {
        if (c.doc_id == "PepsiCo_2022_10K") {
            ++pepsi;
            EXPECT_TRUE(c.metadata.empty());
            EXPECT_NE(std::find(b.manifest.failed_chunks.begin(), b.manifest.failed_chunks.end(), c.chunk_id),
                      b.manifest.failed_chunks.end());
        } else {
            EXPECT_FALSE(c.metadata.empty());
        }
    }
    EXPECT_GT(pepsi, 0u);
    EXPECT_EQ(b.manifest.enriched_chunks + b.manifest.failed_chunks.size(), b.chunks.size());
    EXPECT_FALSE(b.warnings.empty());
}

TEST(BuildIndex, FailedChunkGetsEmptyMetadata) {
    const auto corpus = load_corpus(support::fixture_dir() / "corpus_small");
    support::MockStack clean;
    const auto ref = build_corpus_index(corpus, *clean.gateway, support::small_chunks());
    // Fail every chunk-metadata call whose prompt carries a phrase from the victim chunk.
    const auto& victim = ref.chunks[2];
    const std::string needle = victim.text.substr(victim.overlap, 30);
    support::MockStack stack;
    stack.provider->fail(PromptId::ChunkMetadata, needle);
    const auto b = build_corpus_index(corpus, *stack.gateway, support::small_chunks());
    const auto& failed = b.manifest.failed_chunks;
    EXPECT_NE(std::find(failed.begin(), failed.end(), victim.chunk_id), failed.end());
    EXPECT_LT(failed.size(), b.chunks.size());
    for (const auto& c : b.chunks) {
        const bool is_failed = std::find(failed.begin(), failed.end(), c.chunk_id) != failed.end();
        EXPECT_EQ(c.metadata.empty(), is_failed) << c.chunk_id;
    }
    EXPECT_TRUE(b.manifest.failed_documents.empty());
}

TEST(BuildIndex, EmptyCorpusIsAnInputError) {
    support::MockStack stack;
    EXPECT_THROW((void)build_corpus_index(CorpusLoad{}, *stack.gateway, support::small_chunks()), InputError);
}
