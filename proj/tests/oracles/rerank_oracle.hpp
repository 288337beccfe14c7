#pragma once

// The four metadata-reranker components evaluated one definition at a time, the way
// one would fill a spreadsheet: one row per candidate, one column per component.

#include <algorithm>
#include <array>
#include <set>
#include <string>
#include <vector>

#include "oracle_text.hpp"

namespace oracle {

struct Candidate {
    std::string id;
    std::vector<std::string> entities;
    std::vector<std::string> clusters;
    double retrieval_score = 0.0;
};

struct ComponentRow {
    std::string id;
    double entity_freq = 0.0;
    double cluster_coherence = 0.0;
    double entity_query = 0.0;
    double retrieval = 0.0;
    double composite = 0.0;
};

inline std::set<std::string> label_set(const std::vector<std::string>& v) {
    std::set<std::string> out;
    for (const auto& s : v) {
        auto n = lower_collapse(s);
        if (!n.empty()) {
            out.insert(n);
        }
    }
    return out;
}

inline bool phrase_in(const std::vector<std::string>& hay, const std::vector<std::string>& needle) {
    if (needle.empty() || needle.size() > hay.size()) {
        return false;
    }
    for (std::size_t i = 0; i + needle.size() <= hay.size(); ++i) {
        bool all = true;
        for (std::size_t j = 0; j < needle.size(); ++j) {
            if (hay[i + j] != needle[j]) {
                all = false;
                break;
            }
        }
        if (all) {
            return true;
        }
    }
    return false;
}

inline std::vector<ComponentRow> rerank_components(const std::string& query, const std::vector<Candidate>& cands,
                                                   const std::array<double, 4>& w) {
    const double n = static_cast<double>(cands.size());
    double lo = cands.front().retrieval_score;
    double hi = lo;
    for (const auto& c : cands) {
        lo = std::min(lo, c.retrieval_score);
        hi = std::max(hi, c.retrieval_score);
    }
    const auto qwords = words(query);
    std::vector<ComponentRow> rows;
    for (const auto& c : cands) {
        ComponentRow r;
        r.id = c.id;
        const auto ents = label_set(c.entities);
        const auto clus = label_set(c.clusters);
        for (const auto& e : ents) {
            double holders = 0;
            for (const auto& s : cands) {
                holders += label_set(s.entities).contains(e) ? 1 : 0;
            }
            r.entity_freq += holders / n;
            r.entity_query += phrase_in(qwords, words(e)) ? 1 : 0;
        }
        if (!ents.empty()) {
            r.entity_freq /= static_cast<double>(ents.size());
            r.entity_query /= static_cast<double>(ents.size());
        }
        for (const auto& g : clus) {
            double holders = 0;
            for (const auto& s : cands) {
                holders += label_set(s.clusters).contains(g) ? 1 : 0;
            }
            r.cluster_coherence += holders / n;
        }
        if (!clus.empty()) {
            r.cluster_coherence /= static_cast<double>(clus.size());
        }
        r.retrieval = hi == lo ? 0.5 : (c.retrieval_score - lo) / (hi - lo);
        r.composite = w[0] * r.entity_freq + w[1] * r.cluster_coherence + w[2] * r.entity_query + w[3] * r.retrieval;
        rows.push_back(r);
    }
    return rows;
}

} // namespace oracle
