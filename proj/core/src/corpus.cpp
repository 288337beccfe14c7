#include "metarag/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "metarag/error.hpp"
#include "metarag/text.hpp"

namespace metarag {

namespace {

bool intersects_normalized(const std::set<std::string>& wanted, const std::vector<std::string>& have) {
    if (wanted.empty()) {
        return true;
    }
    std::set<std::string> normalized_have;
    for (const auto& h : have) {
        normalized_have.insert(text::normalize_label(h));
    }
    return std::any_of(wanted.begin(), wanted.end(), [&](const std::string& w) {
        return normalized_have.contains(text::normalize_label(w));
    });
}

std::vector<std::string> string_list(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) {
        return {};
    }
    return j.at(key).get<std::vector<std::string>>();
}

} // namespace

std::string make_chunk_id(std::string_view doc_id, std::size_t ordinal) {
    std::string id(doc_id);
    id.push_back('#');
    id.append(std::to_string(ordinal));
    return id;
}

bool matches(const MetadataFilter& filter, const Chunk& chunk) {
    if (filter.excluded_chunk_ids.contains(chunk.chunk_id)) {
        return false;
    }
    if (filter.allowed_doc_ids && !filter.allowed_doc_ids->contains(chunk.doc_id)) {
        return false;
    }
    // An explicitly empty required set is "no constraint", same as absent.
    if (filter.required_clusters && !intersects_normalized(*filter.required_clusters, chunk.metadata.parent_clusters)) {
        return false;
    }
    if (filter.required_entities && !intersects_normalized(*filter.required_entities, chunk.metadata.chunk_entities)) {
        return false;
    }
    return true;
}

void assign_ranks(std::vector<ScoredChunk>& results) {
    for (std::size_t i = 0; i < results.size(); ++i) {
        results[i].rank = i + 1;
    }
}

ChunkStore::ChunkStore(std::vector<Chunk> chunks) : chunks_(std::move(chunks)) {
    by_id_.reserve(chunks_.size());
    for (std::size_t i = 0; i < chunks_.size(); ++i) {
        auto [_, inserted] = by_id_.emplace(chunks_[i].chunk_id, i);
        if (!inserted) {
            throw InputError("duplicate chunk id: " + chunks_[i].chunk_id);
        }
    }
}

const Chunk* ChunkStore::find(std::string_view chunk_id) const {
    auto it = by_id_.find(std::string(chunk_id));
    return it == by_id_.end() ? nullptr : &chunks_[it->second];
}

const Chunk& ChunkStore::at(std::string_view chunk_id) const {
    if (const Chunk* c = find(chunk_id)) {
        return *c;
    }
    throw InputError("unknown chunk id: " + std::string(chunk_id));
}

CorpusLoad load_corpus(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) {
        throw InputError("corpus directory not found: " + dir.string());
    }

    CorpusLoad load;

    nlohmann::json attributes = nlohmann::json::object();
    const fs::path manifest_path = dir / kCorpusManifestName;
    if (fs::exists(manifest_path, ec)) {
        std::ifstream in(manifest_path);
        try {
            attributes = nlohmann::json::parse(in);
            if (!attributes.is_object()) {
                load.warnings.push_back(std::string(kCorpusManifestName) + " is not a JSON object; ignored");
                attributes = nlohmann::json::object();
            }
        } catch (const nlohmann::json::exception& e) {
            load.warnings.push_back(std::string(kCorpusManifestName) + ": " + e.what());
            attributes = nlohmann::json::object();
        }
    }

    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir, ec)) {
        if (entry.path().extension() == ".md") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());

    for (const auto& path : files) {
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            load.warnings.push_back("skipping unreadable file: " + path.filename().string());
            continue;
        }
        std::ostringstream buffer;
        buffer << in.rdbuf();
        if (in.bad()) {
            load.warnings.push_back("skipping unreadable file: " + path.filename().string());
            continue;
        }
        Document doc;
        doc.doc_id = path.stem().string();
        doc.file_name = path.filename().string();
        doc.markdown_text = buffer.str();
        if (text::trim(doc.markdown_text).empty()) {
            load.warnings.push_back("skipping empty file: " + doc.file_name);
            continue;
        }
        if (attributes.contains(doc.doc_id) && attributes[doc.doc_id].is_object()) {
            const auto& a = attributes[doc.doc_id];
            if (a.contains("year") && !a["year"].is_null()) {
                doc.period.year = a["year"].is_string() ? a["year"].get<std::string>() : a["year"].dump();
            }
            if (a.contains("quarter") && !a["quarter"].is_null()) {
                doc.period.quarter = a["quarter"].is_string() ? a["quarter"].get<std::string>() : a["quarter"].dump();
            }
        }
        load.documents.push_back(std::move(doc));
    }
    return load;
}

void to_json(nlohmann::json& j, const DocumentMetadata& m) {
    j = nlohmann::json{{"doc_id", m.doc_id}, {"one_liner", m.one_liner}, {"summary", m.summary}, {"clusters", m.clusters}};
}

void from_json(const nlohmann::json& j, DocumentMetadata& m) {
    m.doc_id = j.value("doc_id", std::string{});
    m.one_liner = j.value("one_liner", std::string{});
    m.summary = j.value("summary", std::string{});
    m.clusters = string_list(j, "clusters");
}

void to_json(nlohmann::json& j, const ChunkMetadata& m) {
    j = nlohmann::json{{"parent_clusters", m.parent_clusters},
                       {"chunk_entities", m.chunk_entities},
                       {"answered_questions", m.answered_questions},
                       {"retrieval_nuggets", m.retrieval_nuggets}};
}

void from_json(const nlohmann::json& j, ChunkMetadata& m) {
    m.parent_clusters = string_list(j, "parent_clusters");
    m.chunk_entities = string_list(j, "chunk_entities");
    m.answered_questions = string_list(j, "answered_questions");
    m.retrieval_nuggets = string_list(j, "retrieval_nuggets");
}

void to_json(nlohmann::json& j, const Chunk& c) {
    j = nlohmann::json{{"chunk_id", c.chunk_id},
                       {"doc_id", c.doc_id},
                       {"ordinal", c.ordinal},
                       {"offset", c.offset},
                       {"overlap", c.overlap},
                       {"text", c.text},
                       {"metadata", c.metadata},
                       {"contextual_text", c.contextual_text}};
}

void from_json(const nlohmann::json& j, Chunk& c) {
    c.chunk_id = j.at("chunk_id").get<std::string>();
    c.doc_id = j.at("doc_id").get<std::string>();
    c.ordinal = j.at("ordinal").get<std::size_t>();
    c.offset = j.value("offset", std::size_t{0});
    c.overlap = j.value("overlap", std::size_t{0});
    c.text = j.at("text").get<std::string>();
    c.metadata = j.value("metadata", ChunkMetadata{});
    c.contextual_text = j.value("contextual_text", c.text);
}

void to_json(nlohmann::json& j, const ScoredChunk& s) {
    j = nlohmann::json{{"chunk_id", s.chunk_id}, {"rank", s.rank}};
    if (s.dense_score) {
        j["dense_score"] = *s.dense_score;
    }
    if (s.sparse_score) {
        j["sparse_score"] = *s.sparse_score;
    }
    if (s.fused_score) {
        j["fused_score"] = *s.fused_score;
    }
    if (s.rerank_score) {
        j["rerank_score"] = *s.rerank_score;
    }
    if (s.rerank_components) {
        j["rerank_components"] = *s.rerank_components;
    }
}

} // namespace metarag
