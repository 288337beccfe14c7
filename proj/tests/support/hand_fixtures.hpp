#pragma once

// Hand-worked fixtures shared by the unit tests and the acceptance gate.

#include <string>
#include <vector>

#include "eval_oracle.hpp"
#include "metarag/corpus.hpp"
#include "metarag/evaluator.hpp"
#include "metarag/pipelines.hpp"
#include "rerank_oracle.hpp"

namespace support {

using namespace metarag;

struct Hand {
    std::vector<Chunk> chunks;
    std::vector<oracle::Candidate> oracle_cands;
    std::vector<ScoredChunk> cands;
    ChunkStore store;
};

inline Chunk tagged(std::string id, std::vector<std::string> ents, std::vector<std::string> clusters) {
    Chunk c;
    c.chunk_id = id;
    c.doc_id = "d";
    c.text = "text of " + id;
    c.contextual_text = c.text;
    c.metadata.chunk_entities = std::move(ents);
    c.metadata.parent_clusters = std::move(clusters);
    return c;
}

// Five candidates worked out by hand:
//   A: ef (2/5 + 2/5)/2 = 0.4, cc 4/5 = 0.8, eq 0, rt 0.6 -> 0.45 under equal weights
//   B: 0.4, 0.8, 0, 1.0 -> 0.55    C: 0.2, 0.8, 1, 0 -> 0.5
//   D: 0, 0.8, 0, 0.3 -> 0.275     E: 0.2, 0.2, 0, 0.5 -> 0.225
inline Hand hand_fixture() {
    Hand h;
    h.chunks = {tagged("A", {"Acme", "Cash Flow"}, {"Liquidity"}), tagged("B", {"acme", "cash  flow"}, {"liquidity"}),
                tagged("C", {"Zeta Corp"}, {"Liquidity"}), tagged("D", {}, {"LIQUIDITY"}),
                tagged("E", {"Omega"}, {"Risk"})};
    const std::vector<double> scores{0.6, 1.0, 0.0, 0.3, 0.5};
    for (std::size_t i = 0; i < h.chunks.size(); ++i) {
        ScoredChunk s;
        s.chunk_id = h.chunks[i].chunk_id;
        s.fused_score = scores[i];
        h.cands.push_back(s);
        h.oracle_cands.push_back(
            {s.chunk_id, h.chunks[i].metadata.chunk_entities, h.chunks[i].metadata.parent_clusters, scores[i]});
    }
    h.store = ChunkStore(h.chunks);
    return h;
}

inline constexpr const char* kQuery = "How did Zeta Corp perform?";

struct HandCase {
    oracle::EvalCase c;
    std::vector<std::string> answer_claims;
    std::vector<std::string> gt_claims;
};

inline AnswerTrace trace_for(const oracle::EvalCase& c) {
    AnswerTrace t;
    t.answer_text = c.answer;
    for (std::size_t i = 0; i < c.chunks.size(); ++i) {
        t.context.push_back({"x#" + std::to_string(i), c.chunks[i]});
    }
    t.total_seconds = 0.25;
    return t;
}

inline QaExample example_for(const oracle::EvalCase& c) {
    return {"ex", "q?", c.ground_truth, std::nullopt, std::nullopt};
}

inline std::vector<HandCase> hand_cases() {
    return {
        {{"Revenue rose to 10 billion. Costs fell.", "Revenue rose to 10 billion.",
          {"Revenue rose to 10 billion in the year.", "Costs were flat."}},
         {"Revenue rose to 10 billion", "Costs fell"},
         {"Revenue rose to 10 billion"}},
        {{"", "Net income was 5 billion.", {"Net income was 5 billion."}}, {}, {"Net income was 5 billion"}},
        {{"Net income was 5 billion.", "Net income was 5 billion.", {}},
         {"Net income was 5 billion"},
         {"Net income was 5 billion"}},
        {{"The company has three segments. Flexibles is the largest segment.", "The company reports three segments.",
          {"The company has three segments: Flexibles, Rigid and Other.", "Flexibles is the largest segment by sales."}},
         {"The company has three segments", "Flexibles is the largest segment"},
         {"The company reports three segments"}},
        {{"Dividends were 7 billion.", "Dividends and buybacks were 7 billion.",
          {"Dividends and buybacks were 7 billion combined."}},
         {"Dividends were 7 billion"},
         {"Dividends and buybacks were 7 billion"}},
        {{"Margin was 22 percent. Sales grew 3 percent. Tax rate was 23 percent.", "Operating margin was 22 percent.",
          {"Operating margin was 22 percent.", "Sales grew 3 percent.", "Headcount was stable."}},
         {"Margin was 22 percent", "Sales grew 3 percent", "Tax rate was 23 percent"},
         {"Operating margin was 22 percent"}},
        {{"Capex was 5 billion. Revenue grew.", "Capex was 5 billion. Revenue grew 8 percent.",
          {"Capex was 5 billion.", "Revenue grew 8 percent over the prior year."}},
         {"Capex was 5 billion", "Revenue grew"},
         {"Capex was 5 billion", "Revenue grew 8 percent"}},
        {{"Unknown.", "Cash was 2 billion.", {"Weather report only."}}, {"Unknown"}, {"Cash was 2 billion"}},
        {{"Debt fell to 13 billion\nCash rose to 3 billion", "Debt fell to 13 billion.",
          {"Debt fell to 13 billion.", "Cash rose to 3 billion.", "Unrelated filler text."}},
         {"Debt fell to 13 billion", "Cash rose to 3 billion"},
         {"Debt fell to 13 billion"}},
        {{"PepsiCo net revenue was 86 billion.", "Net revenue for fiscal 2022 was 86 billion.",
          {"PepsiCo net revenue for fiscal 2022 was 86 billion."}},
         {"PepsiCo net revenue was 86 billion"},
         {"Net revenue for fiscal 2022 was 86 billion"}},
    };
}

} // namespace support
