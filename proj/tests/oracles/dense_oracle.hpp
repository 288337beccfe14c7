#pragma once

// Exhaustive cosine ranking computed in long double.

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

inline long double cosine_ld(const std::vector<float>& a, const std::vector<float>& b) {
    long double ab = 0, aa = 0, bb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ab += static_cast<long double>(a[i]) * b[i];
        aa += static_cast<long double>(a[i]) * a[i];
        bb += static_cast<long double>(b[i]) * b[i];
    }
    return ab / (std::sqrt(aa) * std::sqrt(bb));
}

inline std::vector<std::pair<std::string, long double>> dense_ranking(
    const std::vector<std::pair<std::string, std::vector<float>>>& rows, const std::vector<float>& q, std::size_t k) {
    std::vector<std::pair<std::string, long double>> all;
    for (const auto& [id, v] : rows) {
        all.emplace_back(id, cosine_ld(q, v));
    }
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    if (all.size() > k) {
        all.resize(k);
    }
    return all;
}

} // namespace oracle
