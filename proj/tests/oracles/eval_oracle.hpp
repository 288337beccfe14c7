#pragma once

// Brute-force claim metrics under the containment judge: a claim is entailed when
// every non-stopword word of it occurs in the premise.

#include <set>
#include <string>
#include <vector>

#include "oracle_text.hpp"

namespace oracle {

struct EvalCase {
    std::string answer;
    std::string ground_truth;
    std::vector<std::string> chunks;
};

struct EvalExpect {
    double precision, recall, f1, claim_recall, context_precision, faithfulness, hallucination;
};

inline bool contained(const std::string& premise, const std::string& claim, const std::set<std::string>& stop) {
    const auto p = words(premise);
    const std::set<std::string> ps(p.begin(), p.end());
    for (const auto& w : words(claim)) {
        if (!stop.contains(w) && !ps.contains(w)) {
            return false;
        }
    }
    return true;
}

inline EvalExpect brute_force_metrics(const std::vector<std::string>& answer_claims,
                                      const std::vector<std::string>& gt_claims, const EvalCase& c,
                                      const std::set<std::string>& stop) {
    std::string context;
    for (const auto& ch : c.chunks) {
        context += ch + "\n";
    }
    auto frac = [](double num, std::size_t den) { return den == 0 ? 0.0 : num / static_cast<double>(den); };
    double in_gt = 0, in_ctx = 0, neither = 0, gt_in_ans = 0, gt_in_ctx = 0, relevant = 0;
    for (const auto& a : answer_claims) {
        const bool g = contained(c.ground_truth, a, stop);
        const bool x = !c.chunks.empty() && contained(context, a, stop);
        in_gt += g;
        in_ctx += x;
        neither += (!g && !x);
    }
    for (const auto& g : gt_claims) {
        gt_in_ans += !c.answer.empty() && contained(c.answer, g, stop);
        gt_in_ctx += !c.chunks.empty() && contained(context, g, stop);
    }
    for (const auto& ch : c.chunks) {
        for (const auto& g : gt_claims) {
            if (contained(ch, g, stop)) {
                ++relevant;
                break;
            }
        }
    }
    EvalExpect e{};
    e.precision = frac(in_gt, answer_claims.size());
    e.recall = frac(gt_in_ans, gt_claims.size());
    e.f1 = e.precision + e.recall > 0 ? 2 * e.precision * e.recall / (e.precision + e.recall) : 0.0;
    e.claim_recall = frac(gt_in_ctx, gt_claims.size());
    e.context_precision = frac(relevant, c.chunks.size());
    e.faithfulness = frac(in_ctx, answer_claims.size());
    e.hallucination = frac(neither, answer_claims.size());
    return e;
}

} // namespace oracle
