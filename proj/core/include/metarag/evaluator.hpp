#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "metarag/llm/gateway.hpp"
#include "metarag/pipelines.hpp"

namespace metarag {

struct QaExample {
    std::string id;
    std::string question;
    std::string ground_truth_answer;
    std::optional<std::vector<std::string>> evidence_doc_ids;
    std::optional<std::vector<std::string>> evidence_strings;
};

struct DatasetLoad {
    std::vector<QaExample> examples;
    std::vector<std::string> errors;  // "line N: ..." for every rejected line
};

/// One example from a JSON object. Accepts the native field names (id, question,
/// ground_truth_answer, evidence_doc_ids, evidence_strings) and the FinanceBench ones
/// (financebench_id, answer, doc_name, evidence[].evidence_text). Throws InputError.
[[nodiscard]] QaExample parse_example(const nlohmann::json& j, std::size_t line);

/// JSONL reader; bad lines are reported and skipped. Throws InputError if the file
/// cannot be read.
[[nodiscard]] DatasetLoad load_dataset(const std::filesystem::path& path);

/// Claim extraction and entailment through the judge role.
class Judge {
public:
    explicit Judge(llm::Gateway& gateway) : gateway_(gateway) {}

    struct Claims {
        std::vector<std::string> claims;
        std::optional<std::string> warning;  // set when the whole text was used as one claim
    };
    struct Verdict {
        bool entailed = false;
        bool failed = false;  // judge error, counted as not entailed
    };

    /// Empty text yields no claims.
    [[nodiscard]] Claims extract_claims(std::string_view text) const;
    [[nodiscard]] Verdict entails(std::string_view premise, std::string_view claim) const;

private:
    llm::Gateway& gateway_;
};

inline constexpr std::array<const char*, 7> kMetricNames = {
    "precision", "recall", "f1", "claim_recall", "context_precision", "faithfulness", "hallucination"};

struct Metrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double claim_recall = 0.0;
    double context_precision = 0.0;
    double faithfulness = 0.0;
    double hallucination = 0.0;

    [[nodiscard]] double get(std::size_t i) const;
    double& at(std::size_t i);
};

/// Entailment tables behind one record.
struct Verdicts {
    std::vector<bool> answer_in_gt;       // per answer claim: entailed by the ground-truth answer
    std::vector<bool> answer_in_context;  // per answer claim: entailed by the retrieved context
    std::vector<bool> gt_in_answer;       // per gt claim: entailed by the generated answer
    std::vector<bool> gt_in_context;      // per gt claim: entailed by the retrieved context
    std::vector<bool> chunk_relevant;     // per context chunk: entails at least one gt claim
};

struct MetricResult {
    Metrics metrics;
    std::vector<std::string> degenerate;  // metrics whose denominator was 0 (reported as 0)
};

/// The seven claim-level metrics from the entailment tables.
[[nodiscard]] MetricResult compute_metrics(const Verdicts& v);

struct EvalRecord {
    std::string example_id;
    std::string question;
    std::string answer;
    std::vector<std::string> answer_claims;
    std::vector<std::string> gt_claims;
    std::vector<std::string> context_chunk_ids;
    Verdicts verdicts;
    Metrics metrics;
    std::vector<std::string> degenerate;
    std::vector<std::string> warnings;
    std::size_t judge_failures = 0;
    double latency_seconds = 0.0;
    std::optional<std::string> error;  // the pipeline failed; metrics are 0
};

/// Judges one answered example. The context is every trace context block (retrieved
/// then expansion), concatenated in order with "[chunk_id]" separators.
[[nodiscard]] EvalRecord score_example(const Judge& judge, const QaExample& example, const AnswerTrace& trace);

/// Arithmetic mean of every metric over the records (all zero for no records).
[[nodiscard]] Metrics macro_average(std::span<const EvalRecord> records);

struct ConfigReport {
    PipelineConfig config;
    std::vector<EvalRecord> records;  // dataset order
    Metrics mean;
    double mean_latency_seconds = 0.0;
    std::size_t failed_examples = 0;
};

struct BenchmarkReport {
    std::vector<ConfigReport> rows;
    std::vector<std::string> dataset_errors;
};

/// Every config over every example: answer(), then score_example(). Examples run on
/// up to max_parallel workers; records keep dataset order. A pipeline failure on one
/// example is recorded (metrics 0, latency 0) and the run continues.
[[nodiscard]] BenchmarkReport run_benchmark(const std::vector<QaExample>& dataset,
                                            const std::vector<PipelineConfig>& configs, const Pipeline& pipeline,
                                            const Judge& judge, std::size_t max_parallel);

[[nodiscard]] nlohmann::json report_json(const BenchmarkReport& report);
/// RFC-4180 CSV, one row per config; metrics as fractions with 6 decimals.
[[nodiscard]] std::string report_csv(const BenchmarkReport& report);
/// Aligned plain-text table; metrics in percent with one decimal, latency in seconds.
[[nodiscard]] std::string report_table(const BenchmarkReport& report);

/// RFC-4180 field quoting.
[[nodiscard]] std::string csv_field(std::string_view s);

} // namespace metarag
