#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "dgf/core.hpp"
#include "dgf/feedback.hpp"
#include "dgf/json_io.hpp"
#include "dgf/synthgen.hpp"

namespace dgf {

struct ErrorLabel {
    ErrorType type = ErrorType::MissingForce;
    std::string target;

    friend auto operator<=>(const ErrorLabel&, const ErrorLabel&) = default;
};

struct ScoredConfidence {
    double confidence = 0.0;
    ErrorType type = ErrorType::MissingForce;
    bool is_true_positive = false;  // filled by evaluate()
};

struct PredictionRecord {
    std::string sample_id;
    std::string mode;
    std::vector<ErrorLabel> predicted_errors;  // sorted, unique
    std::vector<ErrorLabel> gt_errors;         // sorted, unique
    std::string feedback_text;
    std::vector<ScoredConfidence> violation_confidences;
    StageLatency latency;
};

void to_json(json& j, const PredictionRecord& r);
void from_json(const json& j, PredictionRecord& r);

/// Builds a record from a pipeline report; gt_errors stay empty until evaluate().
PredictionRecord make_record(const FeedbackReport& report);

/// Reads JSON lines; blank lines are skipped. Errors name the line number.
std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path);
std::string predictions_to_jsonl(const std::vector<PredictionRecord>& records);

struct Counts {
    int tp = 0;
    int fp = 0;
    int fn = 0;

    Counts& operator+=(const Counts& o) {
        tp += o.tp;
        fp += o.fp;
        fn += o.fn;
        return *this;
    }
};

/// Type-level matching, targets ignored. Keys are every type seen on either side.
std::map<ErrorType, Counts> match_errors(const std::vector<ErrorLabel>& predicted, const std::vector<ErrorLabel>& gt);

struct Prf {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    Counts counts;
};

/// P, R, F1 from pooled counts; each is 0 when its denominator is 0.
Prf prf(const Counts& c);

struct F1Suite {
    Prf micro;
    double macro_f1 = 0.0;  // mean per-type F1 over types present in gt
    std::map<ErrorType, Prf> per_type;
};

F1Suite f1_suite(const std::vector<PredictionRecord>& records);

/// Pooled FP / predicted; 0 when nothing is predicted.
double hallucination_rate(const std::vector<PredictionRecord>& records);

struct Likert {
    int correctness = 1;
    int actionability = 1;
};

Likert likert_scores(std::string_view feedback_text, const std::vector<ErrorLabel>& gt_errors);

struct CalibrationPair {
    double confidence = 0.0;
    bool correct = false;
};

struct EceResult {
    double value = 0.0;
    bool empty = false;  // no pairs; value is 0
};

EceResult ece(const std::vector<CalibrationPair>& pairs, int n_bins = 10);

struct Interval {
    double low = 0.0;
    double high = 0.0;
};

/// Metric over a resample, given as record indices (with repeats).
using ResampleMetric = std::function<double(const std::vector<std::size_t>&)>;

/// Percentile bootstrap (2.5 / 97.5 with linear interpolation). Every metric
/// sees the same resamples. Resample r draws from an mt19937_64 seeded with
/// seed_seq{seed, r}, so results do not depend on evaluation order.
std::vector<Interval> bootstrap_ci(std::size_t n_records, const std::vector<ResampleMetric>& metrics,
                                   int n_resamples = 10000, std::uint64_t seed = 0);

/// Interval for the mean of per-sample values.
Interval bootstrap_ci(const std::vector<double>& values, int n_resamples = 10000, std::uint64_t seed = 0);

/// Linear-interpolation quantile of sorted values.
double quantile_sorted(const std::vector<double>& sorted, double q);

struct MetricCI {
    double value = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
};

inline constexpr int kReportSchemaVersion = 1;

struct MetricsReport {
    int schema_version = kReportSchemaVersion;
    Domain benchmark = Domain::Fbd;
    std::string mode;
    std::string split;
    int n_samples = 0;
    int n_bootstrap = 0;
    std::uint64_t seed = 0;
    MetricCI micro_f1, macro_f1, precision, recall;
    MetricCI hallucination_rate;
    MetricCI correctness_mean, actionability_mean;
    std::map<ErrorType, Prf> per_type_f1;  // every type of the benchmark's domain
    std::map<ErrorType, int> per_type_support;
    double ece = 0.0;
    bool ece_empty = false;
    double latency_mean_ms = 0.0;
    StageLatency latency_stage_mean_ms;
};

void to_json(json& j, const MetricsReport& r);
void from_json(const json& j, MetricsReport& r);

/// Scores the predictions of every sample in `split`. Extra records outside the
/// split are ignored; unknown or missing sample ids raise dgf::Error listing them.
MetricsReport evaluate(const synth::Manifest& manifest, std::vector<PredictionRecord> predictions,
                       int n_bootstrap = 10000, std::uint64_t seed = 0,
                       synth::Split split = synth::Split::Test);

/// Ground-truth labels of one sample.
std::vector<ErrorLabel> gt_labels(const synth::DiagramSample& s);

/// Main table (one row per report) and per-type F1 table. Best value per
/// metric within a benchmark is bold when the benchmark has several rows.
std::string render_markdown(const std::vector<MetricsReport>& reports);

}  // namespace dgf
