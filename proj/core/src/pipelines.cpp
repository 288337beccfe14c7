#include "metarag/pipelines.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "metarag/error.hpp"
#include "metarag/prompts.hpp"
#include "metarag/text.hpp"

namespace metarag {

using nlohmann::json;

std::string_view to_string(RerankerKind kind) {
    switch (kind) {
    case RerankerKind::None: return "none";
    case RerankerKind::External: return "external";
    case RerankerKind::Metadata: return "metadata";
    }
    return "none";
}

RerankerKind parse_reranker(std::string_view name) {
    const auto key = text::normalize_label(name);
    if (key == "none") {
        return RerankerKind::None;
    }
    if (key == "external") {
        return RerankerKind::External;
    }
    if (key == "metadata") {
        return RerankerKind::Metadata;
    }
    throw ConfigError("unknown reranker '" + std::string(name) + "' (expected none, external or metadata)");
}

TextField parse_collection(std::string_view name) {
    const auto key = text::normalize_label(name);
    if (key == "std" || key == "standard") {
        return TextField::Standard;
    }
    if (key == "ctx" || key == "contextual") {
        return TextField::Contextual;
    }
    throw ConfigError("unknown collection '" + std::string(name) + "' (expected std or ctx)");
}

std::string_view collection_name(TextField field) {
    return field == TextField::Standard ? "std" : "ctx";
}

RerankerKind PipelineConfig::effective_reranker() const {
    if (reranker) {
        return *reranker;
    }
    switch (architecture) {
    case 3:
    case 4:
    case 6: return RerankerKind::External;
    case 5: return RerankerKind::Metadata;
    default: return RerankerKind::None;
    }
}

void PipelineConfig::validate() const {
    if (architecture < 1 || architecture > 6) {
        throw ConfigError("architecture must be 1..6, got " + std::to_string(architecture));
    }
    if (k == 0) {
        throw ConfigError("k must be positive");
    }
    if (candidate_pool == 0) {
        throw ConfigError("candidate_pool must be positive");
    }
    if (k > candidate_pool) {
        throw ConfigError("k (" + std::to_string(k) + ") must not exceed candidate_pool (" +
                          std::to_string(candidate_pool) + ")");
    }
    HybridParams h = hybrid;
    h.candidate_pool = candidate_pool;
    h.validate();
    const auto r = effective_reranker();
    if (architecture <= 2 && r != RerankerKind::None) {
        throw ConfigError("architecture " + std::to_string(architecture) + " does not take a reranker");
    }
    if (architecture == 5 && r != RerankerKind::Metadata) {
        throw ConfigError("architecture 5 requires the metadata reranker");
    }
    if (architecture == 6) {
        if (expansion.initial_k == 0 || expansion.expand_k == 0) {
            throw ConfigError("expansion initial_k and expand_k must be positive");
        }
        if (expansion.initial_k > candidate_pool) {
            throw ConfigError("expansion initial_k must not exceed candidate_pool");
        }
    }
    if (r == RerankerKind::Metadata) {
        weights.validate();
    }
}

std::string PipelineConfig::display_name() const {
    if (!label.empty()) {
        return label;
    }
    return "a" + std::to_string(architecture) + "-" + std::string(collection_name(collection)) + "-" +
           std::string(to_string(effective_reranker()));
}

std::optional<double> AnswerTrace::stage_seconds(std::string_view stage) const {
    for (const auto& s : stages) {
        if (s.stage == stage) {
            return s.seconds;
        }
    }
    return std::nullopt;
}

void to_json(json& j, const AnswerTrace& t) {
    j = json{{"original_query", t.original_query},
             {"architecture", t.architecture},
             {"collection", collection_name(t.collection)},
             {"reranker", to_string(t.reranker)},
             {"retrieved", t.retrieved},
             {"reranker_input_size", t.reranker_input_size},
             {"answer_text", t.answer_text},
             {"warnings", t.warnings},
             {"total_seconds", t.total_seconds}};
    j["rewritten_query"] = t.rewritten_query ? json(*t.rewritten_query) : json(nullptr);
    j["selected_files"] = t.selected_files ? json(*t.selected_files) : json(nullptr);
    j["expansion_added"] = t.expansion_added ? json(*t.expansion_added) : json(nullptr);
    json ctx = json::array();
    for (const auto& b : t.context) {
        ctx.push_back({{"chunk_id", b.chunk_id}, {"text", b.text}});
    }
    j["context"] = std::move(ctx);
    json stages = json::array();
    for (const auto& s : t.stages) {
        stages.push_back({{"stage", s.stage}, {"seconds", s.seconds}});
    }
    j["stages"] = std::move(stages);
}

namespace {

constexpr double kLogicalQuantum = 0.001;

class StageClock {
public:
    explicit StageClock(ClockKind kind) : kind_(kind), origin_(std::chrono::steady_clock::now()) {}

    double now() {
        if (kind_ == ClockKind::Logical) {
            const double t = ticks_ * kLogicalQuantum;
            ++ticks_;
            return t;
        }
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - origin_).count();
    }

private:
    ClockKind kind_;
    std::chrono::steady_clock::time_point origin_;
    long ticks_ = 0;
};

std::string clean_rewrite(std::string_view reply) {
    const std::string body = llm::strip_code_fences(reply);
    std::string line;
    std::size_t pos = 0;
    while (pos <= body.size()) {
        auto end = body.find('\n', pos);
        if (end == std::string::npos) {
            end = body.size();
        }
        line = text::trim(std::string_view(body).substr(pos, end - pos));
        if (!line.empty()) {
            break;
        }
        pos = end + 1;
    }
    while (line.size() >= 2 && ((line.front() == '"' && line.back() == '"') || (line.front() == '\'' && line.back() == '\''))) {
        line = text::trim(line.substr(1, line.size() - 2));
    }
    return line;
}

std::string strip_md_extension(std::string s) {
    if (s.size() > 3 && s.compare(s.size() - 3, 3, ".md") == 0) {
        s.resize(s.size() - 3);
    }
    return s;
}

} // namespace

FileSelection filter_files(llm::Gateway& gateway, std::string_view query,
                           const std::map<std::string, DocumentMetadata>& doc_index) {
    FileSelection sel;
    for (const auto& [id, _] : doc_index) {
        sel.doc_ids.push_back(id);
    }
    if (doc_index.empty()) {
        sel.warning = "file filter skipped: no document metadata";
        return sel;
    }
    std::string files;
    for (const auto& [id, meta] : doc_index) {
        std::string one = meta.one_liner;
        std::replace(one.begin(), one.end(), '\n', ' ');
        files += id + ": " + one + "\n";
    }
    const auto& p = prompts::get(prompts::PromptId::FileFilter);
    const std::string user = prompts::render(p.user, {{"query", std::string(query)}, {"files", files}});
    std::vector<std::string> chosen;
    try {
        const auto record = gateway.chat_structured(llm::Role::PipelineHelper, std::string(p.system), user,
                                                    {llm::FieldSpec::list("files")});
        chosen = record.list("files");
    } catch (const Error& e) {
        sel.warning = std::string("file filter failed, searching all documents: ") + e.what();
        return sel;
    }
    std::set<std::string> picked;
    for (const auto& name : chosen) {
        const std::string key = text::normalize_label(strip_md_extension(text::trim(name)));
        for (const auto& [id, _] : doc_index) {
            if (text::normalize_label(id) == key) {
                picked.insert(id);
            }
        }
    }
    if (picked.empty()) {
        sel.warning = "file filter selected no known document, searching all documents";
        return sel;
    }
    sel.doc_ids.assign(picked.begin(), picked.end());
    sel.filtered = true;
    return sel;
}

Rewrite rewrite_query(llm::Gateway& gateway, std::string_view query, const std::vector<DocumentMetadata>& selected) {
    Rewrite out{std::string(query), std::nullopt};
    if (selected.empty()) {
        out.warning = "query rewrite skipped: no document metadata";
        return out;
    }
    std::string docs;
    for (const auto& d : selected) {
        docs += "Document: " + d.doc_id + "\nSummary: " + d.summary + "\nClusters: " + text::join(d.clusters, "; ") +
                "\n\n";
    }
    const auto& p = prompts::get(prompts::PromptId::QueryRewrite);
    const std::string user = prompts::render(p.user, {{"query", std::string(query)}, {"documents", docs}});
    try {
        const std::string rewritten = clean_rewrite(gateway.chat(llm::Role::PipelineHelper, std::string(p.system), user));
        if (rewritten.empty()) {
            out.warning = "query rewrite returned nothing, keeping the original query";
        } else {
            out.query = rewritten;
        }
    } catch (const Error& e) {
        out.warning = std::string("query rewrite failed, keeping the original query: ") + e.what();
    }
    return out;
}

std::vector<std::string> expand_chunks(const std::vector<const Chunk*>& initial, const ChunkStore& store,
                                       std::size_t expand_k, const std::optional<std::set<std::string>>& allowed_docs) {
    auto labels = [](const std::vector<std::string>& v) {
        std::set<std::string> out;
        for (const auto& s : v) {
            auto n = text::normalize_label(s);
            if (!n.empty()) {
                out.insert(std::move(n));
            }
        }
        return out;
    };
    auto core_of = [](const std::map<std::string, std::size_t>& counts) {
        std::size_t best = 0;
        for (const auto& [_, c] : counts) {
            best = std::max(best, c);
        }
        std::set<std::string> core;
        for (const auto& [l, c] : counts) {
            if (c == best && best > 0) {
                core.insert(l);
            }
        }
        return core;
    };

    std::map<std::string, std::size_t> cluster_counts;
    std::map<std::string, std::size_t> entity_counts;
    std::set<std::string> initial_ids;
    for (const Chunk* c : initial) {
        initial_ids.insert(c->chunk_id);
        for (const auto& l : labels(c->metadata.parent_clusters)) {
            ++cluster_counts[l];
        }
        for (const auto& l : labels(c->metadata.chunk_entities)) {
            ++entity_counts[l];
        }
    }
    const auto core_clusters = core_of(cluster_counts);
    const auto core_entities = core_of(entity_counts);

    std::vector<std::pair<std::size_t, std::string>> matches;
    for (const auto& c : store.chunks()) {
        if (initial_ids.contains(c.chunk_id) || (allowed_docs && !allowed_docs->contains(c.doc_id))) {
            continue;
        }
        std::size_t n = 0;
        for (const auto& l : labels(c.metadata.parent_clusters)) {
            n += core_clusters.contains(l) ? 1 : 0;
        }
        for (const auto& l : labels(c.metadata.chunk_entities)) {
            n += core_entities.contains(l) ? 1 : 0;
        }
        if (n > 0) {
            matches.emplace_back(n, c.chunk_id);
        }
    }
    std::sort(matches.begin(), matches.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    std::vector<std::string> out;
    for (std::size_t i = 0; i < matches.size() && i < expand_k; ++i) {
        out.push_back(matches[i].second);
    }
    return out;
}

std::string render_context(const std::vector<ContextBlock>& blocks) {
    std::string out;
    for (const auto& b : blocks) {
        out += "[" + b.chunk_id + "]\n" + b.text;
        if (out.back() != '\n') {
            out.push_back('\n');
        }
        out.push_back('\n');
    }
    return out;
}

Pipeline::Pipeline(std::shared_ptr<const RagIndex> index, llm::Gateway& gateway, ClockKind clock)
    : index_(std::move(index)), gateway_(gateway), clock_(clock) {
    if (!index_) {
        throw IndexError("pipeline requires a loaded index");
    }
}

AnswerTrace Pipeline::answer(const std::string& query, const PipelineConfig& config) const {
    config.validate();
    if (text::trim(query).empty()) {
        throw InputError("query must not be empty");
    }
    StageClock clock(clock_);
    const double started = clock.now();
    auto timed = [&](AnswerTrace& t, const char* stage, auto&& fn) {
        const double t0 = clock.now();
        fn();
        t.stages.push_back({stage, clock.now() - t0});
    };

    const ChunkStore& store = index_->store();
    const auto& coll = index_->collection(config.collection);
    const RerankerKind reranker = config.effective_reranker();

    AnswerTrace trace;
    trace.original_query = query;
    trace.architecture = config.architecture;
    trace.collection = config.collection;
    trace.reranker = config.architecture >= 3 ? reranker : RerankerKind::None;

    std::string search_query = query;
    MetadataFilter filter;
    if (config.architecture == 4 || config.architecture == 6) {
        FileSelection sel;
        timed(trace, "filter_files", [&] { sel = filter_files(gateway_, query, index_->docmeta()); });
        if (sel.warning) {
            trace.warnings.push_back(*sel.warning);
        }
        if (sel.filtered) {
            filter.allowed_doc_ids = std::set<std::string>(sel.doc_ids.begin(), sel.doc_ids.end());
        }
        trace.selected_files = sel.doc_ids;

        timed(trace, "rewrite_query", [&] {
            std::vector<DocumentMetadata> selected;
            for (const auto& id : sel.doc_ids) {
                if (auto it = index_->docmeta().find(id); it != index_->docmeta().end()) {
                    selected.push_back(it->second);
                }
            }
            auto rw = rewrite_query(gateway_, query, selected);
            if (rw.warning) {
                trace.warnings.push_back(*rw.warning);
            }
            search_query = std::move(rw.query);
        });
        trace.rewritten_query = search_query;
    }

    std::vector<float> qvec;
    timed(trace, "embed_query", [&] { qvec = gateway_.embed(std::vector<std::string>{search_query}).front(); });

    HybridParams hp = config.hybrid;
    hp.candidate_pool = config.candidate_pool;
    const HybridRetriever hybrid(store, coll.vectors, coll.lexical);
    std::vector<ScoredChunk> candidates;
    timed(trace, "retrieve", [&] {
        switch (config.architecture) {
        case 1: candidates = coll.vectors.search(qvec, config.k, filter, store); break;
        case 2: candidates = hybrid.search(search_query, qvec, hp, filter, config.k); break;
        default: candidates = hybrid.search(search_query, qvec, hp, filter, config.candidate_pool); break;
        }
    });

    if (config.architecture >= 3) {
        const std::size_t keep =
            std::min(config.architecture == 6 ? config.expansion.initial_k : config.k, candidates.size());
        trace.reranker_input_size = candidates.size();
        timed(trace, "rerank", [&] {
            if (candidates.empty()) {
                return;
            }
            switch (reranker) {
            case RerankerKind::None:
                candidates.resize(keep);
                assign_ranks(candidates);
                break;
            case RerankerKind::External:
                candidates = external_rerank(gateway_, search_query, candidates, store, config.collection, keep);
                break;
            case RerankerKind::Metadata:
                candidates = metadata_rerank(search_query, candidates, store, config.weights, keep);
                break;
            }
        });
    }
    trace.retrieved = std::move(candidates);

    for (const auto& s : trace.retrieved) {
        trace.context.push_back({s.chunk_id, store.at(s.chunk_id).text});
    }

    if (config.architecture == 6) {
        timed(trace, "expand", [&] {
            std::vector<const Chunk*> initial;
            for (const auto& s : trace.retrieved) {
                initial.push_back(&store.at(s.chunk_id));
            }
            std::vector<ScoredChunk> added;
            if (!initial.empty()) {
                for (auto& id : expand_chunks(initial, store, config.expansion.expand_k, filter.allowed_doc_ids)) {
                    ScoredChunk s;
                    s.chunk_id = std::move(id);
                    added.push_back(std::move(s));
                }
            }
            assign_ranks(added);
            for (const auto& s : added) {
                trace.context.push_back({s.chunk_id, store.at(s.chunk_id).text});
            }
            trace.expansion_added = std::move(added);
        });
    }

    timed(trace, "generate", [&] {
        const auto& p = prompts::get(prompts::PromptId::Answer);
        const std::string user =
            prompts::render(p.user, {{"context", render_context(trace.context)}, {"question", query}});
        trace.answer_text = text::trim(gateway_.chat(llm::Role::Generator, std::string(p.system), user));
    });

    trace.total_seconds = clock.now() - started;
    return trace;
}

} // namespace metarag
