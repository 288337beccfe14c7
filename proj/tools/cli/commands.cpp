#include "cli/commands.hpp"

#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cli/config.hpp"
#include "metarag/enrichment.hpp"
#include "metarag/error.hpp"
#include "metarag/evaluator.hpp"
#include "metarag/index_store.hpp"
#include "metarag/llm/gateway.hpp"
#include "metarag/pipelines.hpp"

namespace metarag::cli {

namespace {

namespace fs = std::filesystem;

struct IndexArgs {
    std::string corpus;
    std::string out;
    std::string provider;
    std::string config;
    std::optional<std::size_t> max_tokens;
    std::optional<std::size_t> overlap;
};

struct AskArgs {
    std::string index;
    int arch = 1;
    std::string collection = "std";
    std::string query;
    std::optional<std::size_t> k;
    std::optional<std::size_t> candidates;
    std::optional<double> lambda;
    std::string reranker;
    bool trace = false;
    std::string config;
    std::string provider;
};

struct BenchArgs {
    std::string index;
    std::string dataset;
    std::string configs;
    std::string out;
    std::string provider;
};

AppConfig base_config(const std::string& path) {
    AppConfig cfg = path.empty() ? AppConfig{} : load_config(path);
    apply_environment(cfg);
    return cfg;
}

// --provider wins, then the config file, then whatever built the index.
void choose_provider(AppConfig& cfg, const std::string& flag, const std::string& index_provider) {
    if (!flag.empty()) {
        set_provider_kind(cfg, llm::parse_provider_kind(flag));
    } else if (!cfg.provider_kind_set && !index_provider.empty()) {
        set_provider_kind(cfg, llm::parse_provider_kind(index_provider));
    }
}

void write_text(const fs::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f << content;
    f.close();
    if (!f) {
        throw Error("cannot write " + path.string());
    }
}

int cmd_index(const IndexArgs& a, std::ostream& out, std::ostream& err) {
    AppConfig cfg = base_config(a.config);
    choose_provider(cfg, a.provider.empty() && !cfg.provider_kind_set ? std::string("mock") : a.provider, {});
    if (a.max_tokens) {
        cfg.enrichment.chunking.max_tokens = *a.max_tokens;
    }
    if (a.overlap) {
        cfg.enrichment.chunking.overlap_tokens = *a.overlap;
    }
    cfg.enrichment.chunking.validate();

    const auto corpus = load_corpus(a.corpus);
    for (const auto& w : corpus.warnings) {
        err << "warning: " << w << "\n";
    }
    llm::Gateway gateway(cfg.provider, llm::make_provider(cfg.provider));
    const auto built = build_corpus_index(corpus, gateway, cfg.enrichment);
    for (std::size_t i = corpus.warnings.size(); i < built.warnings.size(); ++i) {
        err << "warning: " << built.warnings[i] << "\n";
    }
    write_index(a.out, built);

    const auto& m = built.manifest;
    out << "indexed " << m.documents << " documents into " << m.chunks << " chunks (dimension " << m.dimension
        << ", " << m.collections << " collections) at " << a.out << "\n";
    out << "enriched chunks: " << m.enriched_chunks << ", failed chunks: " << m.failed_chunks.size()
        << ", failed documents: " << m.failed_documents.size() << "\n";
    return kExitOk;
}

int cmd_ask(const AskArgs& a, std::ostream& out, std::ostream& err) {
    AppConfig cfg = base_config(a.config);
    PipelineConfig p = cfg.pipeline_defaults;
    p.architecture = a.arch;
    p.collection = parse_collection(a.collection);
    if (a.k) {
        p.k = *a.k;
    }
    if (a.candidates) {
        p.candidate_pool = *a.candidates;
    }
    if (a.lambda) {
        p.hybrid.lambda = *a.lambda;
    }
    if (!a.reranker.empty()) {
        p.reranker = parse_reranker(a.reranker);
    }
    p.validate();

    const auto index = RagIndex::load(a.index);
    choose_provider(cfg, a.provider, index->manifest().provider);
    llm::Gateway gateway(cfg.provider, llm::make_provider(cfg.provider));
    const Pipeline pipeline(index, gateway, resolve_clock(cfg));
    const auto trace = pipeline.answer(a.query, p);

    if (a.trace) {
        out << nlohmann::json(trace).dump(2) << "\n";
        return kExitOk;
    }
    for (const auto& w : trace.warnings) {
        err << "warning: " << w << "\n";
    }
    out << trace.answer_text << "\n\nSources:\n";
    for (const auto& s : trace.retrieved) {
        out << "  " << s.rank << ". " << s.chunk_id << "\n";
    }
    if (trace.expansion_added && !trace.expansion_added->empty()) {
        out << "Expansion:\n";
        for (const auto& s : *trace.expansion_added) {
            out << "  " << s.rank << ". " << s.chunk_id << "\n";
        }
    }
    return kExitOk;
}

int cmd_bench(const BenchArgs& a, std::ostream& out, std::ostream& err) {
    AppConfig cfg = base_config(a.configs);
    if (cfg.pipelines.empty()) {
        throw ConfigError(a.configs + ": no [pipeline.<name>] sections");
    }
    const auto dataset = load_dataset(a.dataset);
    for (const auto& e : dataset.errors) {
        err << "warning: " << a.dataset << " " << e << "\n";
    }
    if (dataset.examples.empty()) {
        throw InputError(a.dataset + ": no usable examples");
    }
    const auto index = RagIndex::load(a.index);
    choose_provider(cfg, a.provider, index->manifest().provider);
    llm::Gateway gateway(cfg.provider, llm::make_provider(cfg.provider));
    const Pipeline pipeline(index, gateway, resolve_clock(cfg));
    const Judge judge(gateway);

    auto report = run_benchmark(dataset.examples, cfg.pipelines, pipeline, judge, cfg.provider.max_parallel);
    report.dataset_errors = dataset.errors;

    std::error_code ec;
    fs::create_directories(a.out, ec);
    if (ec) {
        throw Error("cannot create " + a.out + ": " + ec.message());
    }
    const std::string table = report_table(report);
    write_text(fs::path(a.out) / "results.json", report_json(report).dump(2) + "\n");
    write_text(fs::path(a.out) / "results.csv", report_csv(report));
    write_text(fs::path(a.out) / "results.txt", table);
    out << table;
    for (const auto& row : report.rows) {
        if (row.failed_examples > 0) {
            err << "warning: " << row.config.display_name() << ": " << row.failed_examples
                << " example(s) failed, see results.json\n";
        }
    }
    return kExitOk;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"metarag: metadata-driven retrieval-augmented generation over Markdown filings"};
    app.name("metarag");
    app.require_subcommand(1);

    IndexArgs ia;
    auto* index = app.add_subcommand("index", "Chunk, enrich and embed a corpus into an index directory");
    index->add_option("--corpus", ia.corpus, "Directory of .md files")->required();
    index->add_option("--out", ia.out, "Index directory to write")->required();
    index->add_option("--provider", ia.provider, "mock or openai")->check(CLI::IsMember({"mock", "openai"}));
    index->add_option("--config", ia.config, "TOML config file")->check(CLI::ExistingFile);
    index->add_option("--max-tokens", ia.max_tokens, "Chunk size in whitespace tokens")->check(CLI::PositiveNumber);
    index->add_option("--overlap", ia.overlap, "Overlap between neighbouring chunks in tokens");

    AskArgs aa;
    auto* ask = app.add_subcommand("ask", "Answer one question with a retrieval architecture");
    ask->add_option("--index", aa.index, "Index directory")->required();
    ask->add_option("--arch", aa.arch, "Architecture 1-6")->check(CLI::Range(1, 6))->capture_default_str();
    ask->add_option("--collection", aa.collection, "std or ctx")
        ->check(CLI::IsMember({"std", "ctx", "standard", "contextual"}))
        ->capture_default_str();
    ask->add_option("--query", aa.query, "Question text")->required();
    ask->add_option("--k", aa.k, "Chunks passed to the generator")->check(CLI::PositiveNumber);
    ask->add_option("--candidates", aa.candidates, "Candidate pool size")->check(CLI::PositiveNumber);
    ask->add_option("--lambda", aa.lambda, "Dense weight in hybrid fusion")->check(CLI::Range(0.0, 1.0));
    ask->add_option("--reranker", aa.reranker, "none, external or metadata")
        ->check(CLI::IsMember({"none", "external", "metadata"}));
    ask->add_flag("--trace", aa.trace, "Print the full trace as JSON");
    ask->add_option("--config", aa.config, "TOML config file")->check(CLI::ExistingFile);
    ask->add_option("--provider", aa.provider, "mock or openai")->check(CLI::IsMember({"mock", "openai"}));

    BenchArgs ba;
    auto* bench = app.add_subcommand("bench", "Run and score pipeline configurations over a QA dataset");
    bench->add_option("--index", ba.index, "Index directory")->required();
    bench->add_option("--dataset", ba.dataset, "JSONL question/answer file")->required();
    bench->add_option("--configs", ba.configs, "TOML file with [pipeline.<name>] sections")->required();
    bench->add_option("--out", ba.out, "Directory for results.json, results.csv and results.txt")->required();
    bench->add_option("--provider", ba.provider, "mock or openai")->check(CLI::IsMember({"mock", "openai"}));

    std::vector<const char*> argv{"metarag"};
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (index->parsed()) {
            return cmd_index(ia, out, err);
        }
        if (ask->parsed()) {
            return cmd_ask(aa, out, err);
        }
        return cmd_bench(ba, out, err);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}

} // namespace metarag::cli
