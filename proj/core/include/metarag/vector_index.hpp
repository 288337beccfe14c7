#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "metarag/corpus.hpp"
#include "metarag/error.hpp"

namespace metarag {

template <std::floating_point T>
[[nodiscard]] double dot(std::span<const T> a, std::span<const T> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    }
    return acc;
}

template <std::floating_point T>
[[nodiscard]] double euclidean_norm(std::span<const T> v) {
    return std::sqrt(dot(v, v));
}

/// (q . v) / (|q| |v|). Throws InputError on dimension mismatch or a zero-norm input.
template <std::floating_point T>
[[nodiscard]] double cosine(std::span<const T> q, std::span<const T> v) {
    if (q.size() != v.size()) {
        throw InputError("cosine: dimension mismatch");
    }
    const double nq = euclidean_norm(q);
    const double nv = euclidean_norm(v);
    if (!(nq > 0.0) || !(nv > 0.0)) {
        throw InputError("degenerate vector");
    }
    return std::clamp(dot(q, v) / (nq * nv), -1.0, 1.0);
}

inline double cosine(const std::vector<double>& q, const std::vector<double>& v) {
    return cosine(std::span<const double>(q), std::span<const double>(v));
}

inline double cosine(const std::vector<float>& q, const std::vector<float>& v) {
    return cosine(std::span<const float>(q), std::span<const float>(v));
}

struct VectorRecord {
    std::string chunk_id;
    std::vector<float> vector;
};

/// Exhaustive-scan dense index. The first insert fixes the dimension.
class VectorIndex {
public:
    /// Throws InputError on dimension mismatch, duplicate id or a zero vector.
    void add(VectorRecord record);

    [[nodiscard]] std::size_t size() const { return ids_.size(); }
    [[nodiscard]] std::size_t dimension() const { return dim_; }
    [[nodiscard]] bool contains(std::string_view chunk_id) const;

    [[nodiscard]] const std::string& id(std::size_t row) const { return ids_[row]; }
    [[nodiscard]] std::span<const float> vector(std::size_t row) const {
        return {data_.data() + row * dim_, dim_};
    }
    [[nodiscard]] double norm(std::size_t row) const { return norms_[row]; }

    /// Exact top-k by cosine among records passing `filter`; ties break on ascending chunk id.
    [[nodiscard]] std::vector<ScoredChunk> search(std::span<const float> query, std::size_t k,
                                                  const MetadataFilter& filter, const ChunkStore& store) const;

    /// Row-major float data, row i belonging to id(i).
    [[nodiscard]] const std::vector<float>& data() const { return data_; }

private:
    std::size_t dim_ = 0;
    std::vector<std::string> ids_;
    std::unordered_map<std::string, std::size_t> rows_;
    std::vector<float> data_;
    std::vector<double> norms_;
};

} // namespace metarag
