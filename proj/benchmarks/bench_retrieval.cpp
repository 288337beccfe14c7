#include <benchmark/benchmark.h>

#include <map>
#include <random>
#include <string>
#include <vector>

#include "metarag/chunker.hpp"
#include "metarag/hybrid.hpp"
#include "metarag/lexical_index.hpp"
#include "metarag/rerankers.hpp"
#include "metarag/vector_index.hpp"

using namespace metarag;

namespace {

constexpr std::size_t kDim = 64;

struct Corpus {
    std::vector<Chunk> chunks;
    ChunkStore store;
    VectorIndex dense;
    LexicalIndex sparse;
};

std::vector<float> random_vector(std::mt19937_64& rng) {
    std::normal_distribution<float> g(0.0f, 1.0f);
    std::vector<float> v(kDim);
    for (auto& x : v) {
        x = g(rng);
    }
    return v;
}

const Corpus& corpus(std::size_t n) {
    static std::map<std::size_t, Corpus> cache;
    auto it = cache.find(n);
    if (it != cache.end()) {
        return it->second;
    }
    std::mt19937_64 rng(n);
    std::uniform_int_distribution<int> word(0, 2000);
    std::uniform_int_distribution<int> label(0, 30);
    Corpus c;
    for (std::size_t i = 0; i < n; ++i) {
        Chunk ch;
        ch.chunk_id = "c" + std::to_string(i);
        ch.doc_id = "d" + std::to_string(i % 50);
        ch.ordinal = i;
        for (int j = 0; j < 150; ++j) {
            ch.text += "w" + std::to_string(word(rng)) + " ";
        }
        ch.contextual_text = ch.text;
        ch.metadata.parent_clusters = {"cluster " + std::to_string(label(rng))};
        ch.metadata.chunk_entities = {"Entity" + std::to_string(label(rng)), "Entity" + std::to_string(label(rng))};
        c.chunks.push_back(std::move(ch));
    }
    c.store = ChunkStore(c.chunks);
    for (const auto& ch : c.chunks) {
        c.dense.add({ch.chunk_id, random_vector(rng)});
    }
    c.sparse = LexicalIndex::build(c.chunks, TextField::Standard);
    return cache.emplace(n, std::move(c)).first->second;
}

void BM_Bm25Search(benchmark::State& state) {
    const auto& c = corpus(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(c.sparse.search({}, "w12 w400 w1999 w7", 25, {}, c.store));
    }
}
BENCHMARK(BM_Bm25Search)->Arg(1000)->Arg(10000);

void BM_DenseSearch(benchmark::State& state) {
    const auto& c = corpus(static_cast<std::size_t>(state.range(0)));
    std::mt19937_64 rng(3);
    const auto q = random_vector(rng);
    for (auto _ : state) {
        benchmark::DoNotOptimize(c.dense.search(q, 25, {}, c.store));
    }
}
BENCHMARK(BM_DenseSearch)->Arg(1000)->Arg(10000);

void BM_HybridSearch(benchmark::State& state) {
    const auto& c = corpus(static_cast<std::size_t>(state.range(0)));
    const HybridRetriever h(c.store, c.dense, c.sparse);
    std::mt19937_64 rng(4);
    const auto q = random_vector(rng);
    for (auto _ : state) {
        benchmark::DoNotOptimize(h.search("w12 w400 w1999 w7", q, {}, {}, 25));
    }
}
BENCHMARK(BM_HybridSearch)->Arg(1000)->Arg(10000);

void BM_MetadataRerank(benchmark::State& state) {
    const auto& c = corpus(1000);
    std::vector<ScoredChunk> cands;
    for (std::size_t i = 0; i < 25; ++i) {
        ScoredChunk s;
        s.chunk_id = c.chunks[i].chunk_id;
        s.fused_score = 1.0 / static_cast<double>(i + 1);
        cands.push_back(s);
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(metadata_rerank("what about Entity3 and Entity7", cands, c.store, {}, 7));
    }
}
BENCHMARK(BM_MetadataRerank);

void BM_Chunker(benchmark::State& state) {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> word(0, 500);
    Document doc{"bench", "bench.md", "", {}};
    for (int s = 0; s < 40; ++s) {
        doc.markdown_text += "## Section " + std::to_string(s) + "\n\n";
        for (int p = 0; p < 6; ++p) {
            for (int j = 0; j < 80; ++j) {
                doc.markdown_text += "w" + std::to_string(word(rng)) + (j % 12 == 11 ? ". " : " ");
            }
            doc.markdown_text += "\n\n";
        }
    }
    ChunkingParams params;
    params.max_tokens = 200;
    params.overlap_tokens = 20;
    for (auto _ : state) {
        benchmark::DoNotOptimize(split(doc, params));
    }
    state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * doc.markdown_text.size()));
}
BENCHMARK(BM_Chunker);

} // namespace
BENCHMARK_MAIN();
