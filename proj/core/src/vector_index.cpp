#include "metarag/vector_index.hpp"

#include <algorithm>

namespace metarag {

void VectorIndex::add(VectorRecord record) {
    if (record.vector.empty()) {
        throw InputError("empty vector for " + record.chunk_id);
    }
    if (ids_.empty()) {
        dim_ = record.vector.size();
    } else if (record.vector.size() != dim_) {
        throw InputError("dimension mismatch for " + record.chunk_id + ": expected " + std::to_string(dim_) +
                         ", got " + std::to_string(record.vector.size()));
    }
    if (rows_.contains(record.chunk_id)) {
        throw InputError("duplicate chunk id: " + record.chunk_id);
    }
    const double n = euclidean_norm(std::span<const float>(record.vector));
    if (!(n > 0.0)) {
        throw InputError("degenerate vector for " + record.chunk_id);
    }
    rows_.emplace(record.chunk_id, ids_.size());
    ids_.push_back(std::move(record.chunk_id));
    data_.insert(data_.end(), record.vector.begin(), record.vector.end());
    norms_.push_back(n);
}

bool VectorIndex::contains(std::string_view chunk_id) const {
    return rows_.contains(std::string(chunk_id));
}

std::vector<ScoredChunk> VectorIndex::search(std::span<const float> query, std::size_t k,
                                             const MetadataFilter& filter, const ChunkStore& store) const {
    if (k == 0) {
        throw InputError("k must be >= 1");
    }
    if (ids_.empty()) {
        return {};
    }
    if (query.size() != dim_) {
        throw InputError("query dimension " + std::to_string(query.size()) + " does not match index dimension " +
                         std::to_string(dim_));
    }
    const double qn = euclidean_norm(query);
    if (!(qn > 0.0)) {
        throw InputError("degenerate vector");
    }

    const bool trivial = filter.is_trivial();
    std::vector<ScoredChunk> hits;
    hits.reserve(ids_.size());
    for (std::size_t row = 0; row < ids_.size(); ++row) {
        if (!trivial) {
            const Chunk* chunk = store.find(ids_[row]);
            if (!chunk || !matches(filter, *chunk)) {
                continue;
            }
        }
        ScoredChunk hit;
        hit.chunk_id = ids_[row];
        hit.dense_score = std::clamp(dot(query, vector(row)) / (qn * norms_[row]), -1.0, 1.0);
        hits.push_back(std::move(hit));
    }

    const std::size_t n = std::min(k, hits.size());
    std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(n), hits.end(),
                      [](const ScoredChunk& a, const ScoredChunk& b) {
                          if (*a.dense_score != *b.dense_score) {
                              return *a.dense_score > *b.dense_score;
                          }
                          return a.chunk_id < b.chunk_id;
                      });
    hits.resize(n);
    assign_ranks(hits);
    return hits;
}

} // namespace metarag
