#include "metarag/index_store.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "metarag/error.hpp"

namespace metarag {

namespace fs = std::filesystem;
using nlohmann::json;

static_assert(std::numeric_limits<float>::is_iec559, "float32 blobs need IEEE-754 floats");

void to_json(json& j, const IndexManifest& m) {
    j = json{{"format_version", m.format_version},
             {"documents", m.documents},
             {"chunks", m.chunks},
             {"collections", m.collections},
             {"dimension", m.dimension},
             {"chunking", {{"max_tokens", m.max_tokens}, {"overlap_tokens", m.overlap_tokens}, {"separators", m.separators}}},
             {"doc_char_budget", m.doc_char_budget},
             {"analyzer", m.analyzer},
             {"provider", m.provider},
             {"embedder_model", m.embedder_model},
             {"prompt_versions", m.prompt_versions},
             {"failed_documents", m.failed_documents},
             {"failed_chunks", m.failed_chunks},
             {"enriched_chunks", m.enriched_chunks},
             {"skipped_files", m.skipped_files}};
}

void from_json(const json& j, IndexManifest& m) {
    m.format_version = j.at("format_version").get<int>();
    m.documents = j.at("documents").get<std::size_t>();
    m.chunks = j.at("chunks").get<std::size_t>();
    m.collections = j.value("collections", std::size_t{2});
    m.dimension = j.at("dimension").get<std::size_t>();
    const auto& c = j.at("chunking");
    m.max_tokens = c.at("max_tokens").get<std::size_t>();
    m.overlap_tokens = c.at("overlap_tokens").get<std::size_t>();
    m.separators = c.value("separators", std::vector<std::string>{});
    m.doc_char_budget = j.value("doc_char_budget", std::size_t{0});
    m.analyzer = j.value("analyzer", std::string{});
    m.provider = j.value("provider", std::string{});
    m.embedder_model = j.value("embedder_model", std::string{});
    m.prompt_versions = j.value("prompt_versions", std::map<std::string, std::string>{});
    m.failed_documents = j.value("failed_documents", std::vector<std::string>{});
    m.failed_chunks = j.value("failed_chunks", std::vector<std::string>{});
    m.enriched_chunks = j.value("enriched_chunks", std::size_t{0});
    m.skipped_files = j.value("skipped_files", std::vector<std::string>{});
}

namespace {

void write_file(const fs::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.close();
    if (!out) {
        throw IndexError("cannot write " + path.string());
    }
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IndexError("missing index file " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string encode_vectors(const std::vector<std::vector<float>>& rows, std::size_t dim) {
    std::string out;
    out.reserve(rows.size() * dim * 4);
    for (const auto& row : rows) {
        if (row.size() != dim) {
            throw IndexError("vector row has dimension " + std::to_string(row.size()) + ", expected " +
                             std::to_string(dim));
        }
        for (float f : row) {
            auto bits = std::bit_cast<std::uint32_t>(f);
            for (int b = 0; b < 4; ++b) {
                out.push_back(static_cast<char>((bits >> (8 * b)) & 0xFFu));
            }
        }
    }
    return out;
}

std::vector<std::vector<float>> decode_vectors(const std::string& bytes, std::size_t rows, std::size_t dim,
                                               const std::string& name) {
    if (bytes.size() != rows * dim * 4) {
        throw IndexError(name + ": expected " + std::to_string(rows * dim * 4) + " bytes, found " +
                         std::to_string(bytes.size()));
    }
    std::vector<std::vector<float>> out(rows, std::vector<float>(dim));
    std::size_t p = 0;
    for (auto& row : out) {
        for (auto& f : row) {
            std::uint32_t bits = 0;
            for (int b = 0; b < 4; ++b) {
                bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[p++])) << (8 * b);
            }
            f = std::bit_cast<float>(bits);
        }
    }
    return out;
}

} // namespace

void write_index(const fs::path& dir, const BuiltIndex& built) {
    const auto& m = built.manifest;
    if (built.chunks.size() != m.chunks || built.standard_vectors.size() != built.chunks.size() ||
        built.contextual_vectors.size() != built.chunks.size()) {
        throw IndexError("inconsistent index: chunk and vector row counts differ");
    }
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw IndexError("cannot create " + dir.string() + ": " + ec.message());
    }

    write_file(dir / kManifestFile, json(m).dump(2) + "\n");

    std::string lines;
    for (const auto& c : built.chunks) {
        lines += json(c).dump();
        lines.push_back('\n');
    }
    write_file(dir / kChunksFile, lines);
    write_file(dir / kStandardVectorsFile, encode_vectors(built.standard_vectors, m.dimension));
    write_file(dir / kContextualVectorsFile, encode_vectors(built.contextual_vectors, m.dimension));

    json meta = json::object();
    for (const auto& [id, dm] : built.docmeta) {
        meta[id] = {{"one_liner", dm.one_liner}, {"summary", dm.summary}, {"clusters", dm.clusters}};
    }
    write_file(dir / kDocMetaFile, meta.dump(2) + "\n");
}

RagIndex::RagIndex(IndexManifest manifest, std::vector<Chunk> chunks, std::map<std::string, DocumentMetadata> docmeta,
                   const std::vector<std::vector<float>>& standard, const std::vector<std::vector<float>>& contextual)
    : manifest_(std::move(manifest)), store_(std::move(chunks)), docmeta_(std::move(docmeta)),
      standard_{TextField::Standard, {}, {}}, contextual_{TextField::Contextual, {}, {}} {
    const auto& cs = store_.chunks();
    if (cs.empty()) {
        throw IndexError("index contains no chunks");
    }
    try {
        for (std::size_t i = 0; i < cs.size(); ++i) {
            standard_.vectors.add({cs[i].chunk_id, standard[i]});
            contextual_.vectors.add({cs[i].chunk_id, contextual[i]});
        }
        standard_.lexical = LexicalIndex::build(cs, TextField::Standard);
        contextual_.lexical = LexicalIndex::build(cs, TextField::Contextual);
    } catch (const InputError& e) {
        throw IndexError(std::string("inconsistent index: ") + e.what());
    }
}

std::shared_ptr<const RagIndex> RagIndex::from_built(const BuiltIndex& built) {
    if (built.standard_vectors.size() != built.chunks.size() || built.contextual_vectors.size() != built.chunks.size()) {
        throw IndexError("inconsistent index: chunk and vector row counts differ");
    }
    return std::shared_ptr<const RagIndex>(
        new RagIndex(built.manifest, built.chunks, built.docmeta, built.standard_vectors, built.contextual_vectors));
}

std::shared_ptr<const RagIndex> RagIndex::load(const fs::path& dir) {
    if (!fs::is_directory(dir)) {
        throw IndexError("index directory not found: " + dir.string());
    }
    IndexManifest manifest;
    try {
        manifest = json::parse(read_file(dir / kManifestFile)).get<IndexManifest>();
    } catch (const json::exception& e) {
        throw IndexError(std::string("malformed manifest: ") + e.what());
    }
    if (manifest.format_version != kIndexFormatVersion) {
        throw IndexError("unsupported index format version " + std::to_string(manifest.format_version));
    }

    std::vector<Chunk> chunks;
    {
        std::istringstream in(read_file(dir / kChunksFile));
        std::string line;
        std::size_t n = 0;
        while (std::getline(in, line)) {
            ++n;
            if (line.empty()) {
                continue;
            }
            try {
                chunks.push_back(json::parse(line).get<Chunk>());
            } catch (const json::exception& e) {
                throw IndexError("chunks.jsonl line " + std::to_string(n) + ": " + e.what());
            }
        }
    }
    if (chunks.size() != manifest.chunks) {
        throw IndexError("manifest lists " + std::to_string(manifest.chunks) + " chunks, chunks.jsonl has " +
                         std::to_string(chunks.size()));
    }

    std::map<std::string, DocumentMetadata> docmeta;
    try {
        const json meta = json::parse(read_file(dir / kDocMetaFile));
        for (const auto& [id, value] : meta.items()) {
            auto dm = value.get<DocumentMetadata>();
            dm.doc_id = id;
            docmeta.emplace(id, std::move(dm));
        }
    } catch (const json::exception& e) {
        throw IndexError(std::string("malformed docmeta.json: ") + e.what());
    }

    const auto standard =
        decode_vectors(read_file(dir / kStandardVectorsFile), chunks.size(), manifest.dimension, kStandardVectorsFile);
    const auto contextual = decode_vectors(read_file(dir / kContextualVectorsFile), chunks.size(), manifest.dimension,
                                           kContextualVectorsFile);
    return std::shared_ptr<const RagIndex>(
        new RagIndex(std::move(manifest), std::move(chunks), std::move(docmeta), standard, contextual));
}

} // namespace metarag
