#include "metarag/evaluator.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "metarag/error.hpp"
#include "metarag/prompts.hpp"
#include "metarag/text.hpp"

namespace metarag {

using nlohmann::json;

namespace {

std::optional<std::vector<std::string>> string_list(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) {
        return std::nullopt;
    }
    const auto& v = j.at(key);
    if (v.is_string()) {
        return std::vector<std::string>{v.get<std::string>()};
    }
    return v.get<std::vector<std::string>>();
}

std::string first_string(const json& j, std::initializer_list<const char*> keys) {
    for (const char* k : keys) {
        if (j.contains(k) && j.at(k).is_string()) {
            return j.at(k).get<std::string>();
        }
        if (j.contains(k) && j.at(k).is_number()) {
            return j.at(k).dump();
        }
    }
    return {};
}

std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

double ratio(std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::size_t count_true(const std::vector<bool>& v) {
    return static_cast<std::size_t>(std::count(v.begin(), v.end(), true));
}

} // namespace

QaExample parse_example(const json& j, std::size_t line) {
    if (!j.is_object()) {
        throw InputError("expected a JSON object");
    }
    QaExample ex;
    try {
        ex.id = first_string(j, {"id", "financebench_id", "question_id"});
        if (ex.id.empty()) {
            ex.id = "line-" + std::to_string(line);
        }
        ex.question = text::trim(first_string(j, {"question"}));
        ex.ground_truth_answer = text::trim(first_string(j, {"ground_truth_answer", "answer"}));
        ex.evidence_doc_ids = string_list(j, "evidence_doc_ids");
        if (!ex.evidence_doc_ids && j.contains("doc_name") && j.at("doc_name").is_string()) {
            ex.evidence_doc_ids = std::vector<std::string>{j.at("doc_name").get<std::string>()};
        }
        ex.evidence_strings = string_list(j, "evidence_strings");
        if (!ex.evidence_strings && j.contains("evidence") && j.at("evidence").is_array()) {
            std::vector<std::string> ev;
            for (const auto& e : j.at("evidence")) {
                if (e.is_string()) {
                    ev.push_back(e.get<std::string>());
                } else if (e.is_object() && e.contains("evidence_text")) {
                    ev.push_back(e.at("evidence_text").get<std::string>());
                }
            }
            ex.evidence_strings = std::move(ev);
        }
    } catch (const json::exception& e) {
        throw InputError(e.what());
    }
    if (ex.question.empty()) {
        throw InputError("missing or empty question");
    }
    if (ex.ground_truth_answer.empty()) {
        throw InputError("missing or empty ground-truth answer");
    }
    return ex;
}

DatasetLoad load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot read dataset " + path.string());
    }
    DatasetLoad out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (text::trim(line).empty()) {
            continue;
        }
        try {
            out.examples.push_back(parse_example(json::parse(line), n));
        } catch (const json::exception& e) {
            out.errors.push_back("line " + std::to_string(n) + ": " + e.what());
        } catch (const InputError& e) {
            out.errors.push_back("line " + std::to_string(n) + ": " + e.what());
        }
    }
    return out;
}

Judge::Claims Judge::extract_claims(std::string_view t) const {
    Claims out;
    const std::string body = text::trim(t);
    if (body.empty()) {
        return out;
    }
    const auto& p = prompts::get(prompts::PromptId::ClaimExtraction);
    try {
        const auto record = gateway_.chat_structured(llm::Role::Judge, std::string(p.system),
                                                     prompts::render(p.user, {{"text", body}}),
                                                     {llm::FieldSpec::list("claims", 1)});
        out.claims = record.list("claims");
    } catch (const Error& e) {
        out.claims = {body};
        out.warning = std::string("claim extraction failed, using the whole text: ") + e.what();
    }
    return out;
}

Judge::Verdict Judge::entails(std::string_view premise, std::string_view claim) const {
    const auto& p = prompts::get(prompts::PromptId::Entailment);
    try {
        const auto record = gateway_.chat_structured(
            llm::Role::Judge, std::string(p.system),
            prompts::render(p.user, {{"premise", std::string(premise)}, {"claim", std::string(claim)}}),
            {llm::FieldSpec::boolean("entailed")});
        return {record.boolean("entailed"), false};
    } catch (const Error&) {
        return {false, true};
    }
}

double Metrics::get(std::size_t i) const {
    return const_cast<Metrics*>(this)->at(i);
}

double& Metrics::at(std::size_t i) {
    switch (i) {
    case 0: return precision;
    case 1: return recall;
    case 2: return f1;
    case 3: return claim_recall;
    case 4: return context_precision;
    case 5: return faithfulness;
    case 6: return hallucination;
    default: throw InputError("metric index out of range");
    }
}

MetricResult compute_metrics(const Verdicts& v) {
    const std::size_t na = v.answer_in_gt.size();
    const std::size_t ng = v.gt_in_answer.size();
    const std::size_t nc = v.chunk_relevant.size();
    if (v.answer_in_context.size() != na || v.gt_in_context.size() != ng) {
        throw InputError("verdict tables have inconsistent sizes");
    }
    MetricResult r;
    auto& m = r.metrics;
    std::size_t unsupported = 0;
    for (std::size_t i = 0; i < na; ++i) {
        if (!v.answer_in_context[i] && !v.answer_in_gt[i]) {
            ++unsupported;
        }
    }
    m.precision = ratio(count_true(v.answer_in_gt), na);
    m.recall = ratio(count_true(v.gt_in_answer), ng);
    m.f1 = m.precision + m.recall > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    m.claim_recall = ratio(count_true(v.gt_in_context), ng);
    m.context_precision = ratio(count_true(v.chunk_relevant), nc);
    m.faithfulness = ratio(count_true(v.answer_in_context), na);
    m.hallucination = ratio(unsupported, na);
    if (na == 0) {
        for (const char* name : {"precision", "faithfulness", "hallucination"}) {
            r.degenerate.emplace_back(name);
        }
    }
    if (ng == 0) {
        r.degenerate.emplace_back("recall");
        r.degenerate.emplace_back("claim_recall");
    }
    if (na == 0 || ng == 0) {
        r.degenerate.emplace_back("f1");
    }
    if (nc == 0) {
        r.degenerate.emplace_back("context_precision");
    }
    std::sort(r.degenerate.begin(), r.degenerate.end());
    return r;
}

EvalRecord score_example(const Judge& judge, const QaExample& example, const AnswerTrace& trace) {
    EvalRecord rec;
    rec.example_id = example.id;
    rec.question = example.question;
    rec.answer = trace.answer_text;
    rec.latency_seconds = trace.total_seconds;

    auto answer_claims = judge.extract_claims(trace.answer_text);
    auto gt_claims = judge.extract_claims(example.ground_truth_answer);
    for (auto* c : {&answer_claims, &gt_claims}) {
        if (c->warning) {
            rec.warnings.push_back(*c->warning);
        }
    }
    rec.answer_claims = std::move(answer_claims.claims);
    rec.gt_claims = std::move(gt_claims.claims);

    const std::string context = render_context(trace.context);
    auto check = [&](std::string_view premise, std::string_view claim) {
        const auto v = judge.entails(premise, claim);
        if (v.failed) {
            ++rec.judge_failures;
        }
        return v.entailed;
    };

    auto& v = rec.verdicts;
    for (const auto& a : rec.answer_claims) {
        v.answer_in_gt.push_back(check(example.ground_truth_answer, a));
        v.answer_in_context.push_back(!context.empty() && check(context, a));
    }
    for (const auto& g : rec.gt_claims) {
        v.gt_in_answer.push_back(!trace.answer_text.empty() && check(trace.answer_text, g));
        v.gt_in_context.push_back(!context.empty() && check(context, g));
    }
    for (const auto& block : trace.context) {
        rec.context_chunk_ids.push_back(block.chunk_id);
        bool relevant = false;
        for (const auto& g : rec.gt_claims) {
            if (check(block.text, g)) {
                relevant = true;
                break;
            }
        }
        v.chunk_relevant.push_back(relevant);
    }
    if (rec.judge_failures > 0) {
        rec.warnings.push_back(std::to_string(rec.judge_failures) + " entailment judgement(s) failed and counted as not entailed");
    }
    auto result = compute_metrics(v);
    rec.metrics = result.metrics;
    rec.degenerate = std::move(result.degenerate);
    return rec;
}

Metrics macro_average(std::span<const EvalRecord> records) {
    Metrics mean;
    if (records.empty()) {
        return mean;
    }
    for (std::size_t i = 0; i < kMetricNames.size(); ++i) {
        double acc = 0.0;
        for (const auto& r : records) {
            acc += r.metrics.get(i);
        }
        mean.at(i) = acc / static_cast<double>(records.size());
    }
    return mean;
}

BenchmarkReport run_benchmark(const std::vector<QaExample>& dataset, const std::vector<PipelineConfig>& configs,
                              const Pipeline& pipeline, const Judge& judge, std::size_t max_parallel) {
    if (configs.empty()) {
        throw ConfigError("benchmark needs at least one pipeline config");
    }
    for (const auto& c : configs) {
        c.validate();
    }
    BenchmarkReport report;
    report.rows.resize(configs.size());
    for (std::size_t c = 0; c < configs.size(); ++c) {
        report.rows[c].config = configs[c];
        report.rows[c].records.resize(dataset.size());
    }

    const std::size_t jobs = configs.size() * dataset.size();
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t j = next++; j < jobs; j = next++) {
            const std::size_t c = j / dataset.size();
            const std::size_t e = j % dataset.size();
            const auto& ex = dataset[e];
            EvalRecord rec;
            try {
                const auto trace = pipeline.answer(ex.question, configs[c]);
                rec = score_example(judge, ex, trace);
            } catch (const Error& err) {
                rec = EvalRecord{};
                rec.example_id = ex.id;
                rec.question = ex.question;
                rec.error = err.what();
            }
            report.rows[c].records[e] = std::move(rec);
        }
    };
    {
        std::vector<std::jthread> pool;
        const std::size_t workers = std::max<std::size_t>(1, std::min(max_parallel, jobs));
        for (std::size_t w = 1; w < workers; ++w) {
            pool.emplace_back(worker);
        }
        worker();
    }

    for (auto& row : report.rows) {
        row.mean = macro_average(row.records);
        double lat = 0.0;
        for (const auto& r : row.records) {
            lat += r.latency_seconds;
            row.failed_examples += r.error ? 1 : 0;
        }
        row.mean_latency_seconds = row.records.empty() ? 0.0 : lat / static_cast<double>(row.records.size());
    }
    return report;
}

namespace {

json metrics_json(const Metrics& m) {
    json j = json::object();
    for (std::size_t i = 0; i < kMetricNames.size(); ++i) {
        j[kMetricNames[i]] = m.get(i);
    }
    return j;
}

} // namespace

json report_json(const BenchmarkReport& report) {
    json rows = json::array();
    for (const auto& row : report.rows) {
        const auto& c = row.config;
        json records = json::array();
        for (const auto& r : row.records) {
            json jr = {{"id", r.example_id},
                       {"question", r.question},
                       {"answer", r.answer},
                       {"answer_claims", r.answer_claims},
                       {"gt_claims", r.gt_claims},
                       {"context_chunk_ids", r.context_chunk_ids},
                       {"verdicts",
                        {{"answer_in_gt", r.verdicts.answer_in_gt},
                         {"answer_in_context", r.verdicts.answer_in_context},
                         {"gt_in_answer", r.verdicts.gt_in_answer},
                         {"gt_in_context", r.verdicts.gt_in_context},
                         {"chunk_relevant", r.verdicts.chunk_relevant}}},
                       {"metrics", metrics_json(r.metrics)},
                       {"degenerate", r.degenerate},
                       {"warnings", r.warnings},
                       {"judge_failures", r.judge_failures},
                       {"latency_seconds", r.latency_seconds}};
            jr["error"] = r.error ? json(*r.error) : json(nullptr);
            records.push_back(std::move(jr));
        }
        rows.push_back({{"name", c.display_name()},
                        {"architecture", c.architecture},
                        {"collection", collection_name(c.collection)},
                        {"reranker", to_string(c.effective_reranker())},
                        {"k", c.k},
                        {"candidate_pool", c.candidate_pool},
                        {"lambda", c.hybrid.lambda},
                        {"examples", row.records.size()},
                        {"failed_examples", row.failed_examples},
                        {"metrics", metrics_json(row.mean)},
                        {"mean_latency_seconds", row.mean_latency_seconds},
                        {"records", std::move(records)}});
    }
    return json{{"configs", std::move(rows)},
                {"dataset_errors", report.dataset_errors},
                {"prompt_versions", prompts::versions()}};
}

std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\r\n") == std::string_view::npos) {
        return std::string(s);
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') {
            out += "\"\"";
        } else {
            out.push_back(c);
        }
    }
    out.push_back('"');
    return out;
}

std::string report_csv(const BenchmarkReport& report) {
    std::string out = "config,architecture,collection,reranker,examples";
    for (const char* m : kMetricNames) {
        out += std::string(",") + m;
    }
    out += ",mean_latency_s\r\n";
    for (const auto& row : report.rows) {
        const auto& c = row.config;
        out += csv_field(c.display_name()) + "," + std::to_string(c.architecture) + "," +
               std::string(collection_name(c.collection)) + "," + std::string(to_string(c.effective_reranker())) + "," +
               std::to_string(row.records.size());
        for (std::size_t i = 0; i < kMetricNames.size(); ++i) {
            out += "," + fixed(row.mean.get(i), 6);
        }
        out += "," + fixed(row.mean_latency_seconds, 6) + "\r\n";
    }
    return out;
}

std::string report_table(const BenchmarkReport& report) {
    static const std::array<const char*, 7> headers = {"P", "R", "F1", "ClaimR", "CtxP", "Faith", "Halluc"};
    std::vector<std::vector<std::string>> cells;
    std::vector<std::string> head = {"Config"};
    head.insert(head.end(), headers.begin(), headers.end());
    head.emplace_back("Latency(s)");
    cells.push_back(head);
    for (const auto& row : report.rows) {
        std::vector<std::string> line = {row.config.display_name()};
        for (std::size_t i = 0; i < kMetricNames.size(); ++i) {
            line.push_back(fixed(100.0 * row.mean.get(i), 1));
        }
        line.push_back(fixed(row.mean_latency_seconds, 2));
        cells.push_back(std::move(line));
    }
    std::vector<std::size_t> width(head.size(), 0);
    for (const auto& line : cells) {
        for (std::size_t i = 0; i < line.size(); ++i) {
            width[i] = std::max(width[i], line[i].size());
        }
    }
    std::string out;
    for (std::size_t r = 0; r < cells.size(); ++r) {
        for (std::size_t i = 0; i < cells[r].size(); ++i) {
            const auto& s = cells[r][i];
            const std::string pad(width[i] - s.size(), ' ');
            out += i == 0 ? s + pad : "  " + pad + s;
        }
        out.push_back('\n');
        if (r == 0) {
            std::size_t total = 0;
            for (std::size_t i = 0; i < width.size(); ++i) {
                total += width[i] + (i == 0 ? 0 : 2);
            }
            out += std::string(total, '-') + "\n";
        }
    }
    return out;
}

} // namespace metarag
