#include <gtest/gtest.h>

#include <fstream>

#include <nlohmann/json.hpp>

#include "metarag/error.hpp"
#include "metarag/index_store.hpp"
#include "test_support.hpp"

using namespace metarag;
namespace fs = std::filesystem;

TEST(IndexStore, RoundTripPreservesEverything) {
    const auto& built = support::fixture_build();
    support::TempDir dir("roundtrip");
    write_index(dir.path(), built);
    const auto loaded = RagIndex::load(dir.path());
    EXPECT_EQ(loaded->manifest(), built.manifest);
    EXPECT_EQ(loaded->store().chunks(), built.chunks);
    EXPECT_EQ(loaded->docmeta(), built.docmeta);
    const auto& s = loaded->collection(TextField::Standard).vectors;
    const auto& c = loaded->collection(TextField::Contextual).vectors;
    ASSERT_EQ(s.size(), built.chunks.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        EXPECT_EQ(s.id(i), built.chunks[i].chunk_id);
        const auto row = s.vector(i);
        EXPECT_TRUE(std::equal(row.begin(), row.end(), built.standard_vectors[i].begin()));
        const auto crow = c.vector(i);
        EXPECT_TRUE(std::equal(crow.begin(), crow.end(), built.contextual_vectors[i].begin()));
    }
    // Lexical indexes are rebuilt from text and must agree with the in-memory build.
    const auto mem = RagIndex::from_built(built);
    const std::string q = "free cash flow";
    for (const auto& ch : built.chunks) {
        EXPECT_EQ(loaded->collection(TextField::Contextual).lexical.bm25_score({}, q, ch.chunk_id),
                  mem->collection(TextField::Contextual).lexical.bm25_score({}, q, ch.chunk_id));
    }
}

TEST(IndexStore, WritesAreByteIdentical) {
    const auto& built = support::fixture_build();
    support::TempDir a("bytes-a"), b("bytes-b");
    write_index(a.path(), built);
    write_index(b.path(), built);
    for (const char* f : {kManifestFile, kChunksFile, kStandardVectorsFile, kContextualVectorsFile, kDocMetaFile}) {
        EXPECT_EQ(support::read_bytes(a.path() / f), support::read_bytes(b.path() / f)) << f;
    }
    EXPECT_EQ(fs::file_size(a.path() / kStandardVectorsFile),
              built.chunks.size() * built.manifest.dimension * sizeof(float));
}

TEST(IndexStore, ManifestRecordsBuildParameters) {
    const auto& m = support::fixture_build().manifest;
    EXPECT_EQ(m.format_version, kIndexFormatVersion);
    EXPECT_EQ(m.max_tokens, 40u);
    EXPECT_EQ(m.overlap_tokens, 10u);
    EXPECT_EQ(m.provider, "mock");
    EXPECT_FALSE(m.prompt_versions.empty());
    EXPECT_FALSE(m.separators.empty());
    const nlohmann::json j = m;
    EXPECT_EQ(j.get<IndexManifest>(), m);
}

class CorruptIndex : public ::testing::Test {
protected:
    void SetUp() override { write_index(dir_.path(), support::fixture_build()); }
    support::TempDir dir_{"corrupt"};
};

TEST_F(CorruptIndex, TruncatedVectorBlob) {
    const auto p = dir_.path() / kContextualVectorsFile;
    fs::resize_file(p, fs::file_size(p) - 3);
    EXPECT_THROW((void)RagIndex::load(dir_.path()), IndexError);
}

TEST_F(CorruptIndex, MissingFile) {
    fs::remove(dir_.path() / kDocMetaFile);
    EXPECT_THROW((void)RagIndex::load(dir_.path()), IndexError);
}

TEST_F(CorruptIndex, MalformedManifest) {
    std::ofstream(dir_.path() / kManifestFile, std::ios::trunc) << "{not json";
    EXPECT_THROW((void)RagIndex::load(dir_.path()), IndexError);
}

TEST_F(CorruptIndex, WrongFormatVersion) {
    auto j = nlohmann::json::parse(support::read_bytes(dir_.path() / kManifestFile));
    j["format_version"] = 99;
    std::ofstream(dir_.path() / kManifestFile, std::ios::trunc) << j.dump();
    EXPECT_THROW((void)RagIndex::load(dir_.path()), IndexError);
}

TEST_F(CorruptIndex, DroppedChunkLine) {
    const auto text = support::read_bytes(dir_.path() / kChunksFile);
    std::ofstream(dir_.path() / kChunksFile, std::ios::trunc) << text.substr(text.find('\n') + 1);
    EXPECT_THROW((void)RagIndex::load(dir_.path()), IndexError);
}

TEST(IndexStore, MissingDirectory) {
    EXPECT_THROW((void)RagIndex::load("/nonexistent/metarag/index"), IndexError);
}

TEST(IndexStore, InconsistentRowCountsRefusedOnWrite) {
    auto built = support::fixture_build();
    built.contextual_vectors.pop_back();
    support::TempDir dir("rows");
    EXPECT_THROW(write_index(dir.path(), built), IndexError);
}
