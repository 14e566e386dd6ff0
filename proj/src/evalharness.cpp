#include "dgf/evalharness.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <regex>
#include <set>
#include <sstream>

namespace dgf {
namespace {

constexpr std::size_t kNumTypes = std::size(kAllErrorTypes);

std::size_t type_index(ErrorType t) { return static_cast<std::size_t>(t); }

using TypeCounts = std::array<Counts, kNumTypes>;

TypeCounts type_counts(const PredictionRecord& r) {
    TypeCounts out{};
    for (const auto& [t, c] : match_errors(r.predicted_errors, r.gt_errors)) out[type_index(t)] = c;
    return out;
}

std::set<ErrorType> types_of(const std::vector<ErrorLabel>& labels) {
    std::set<ErrorType> out;
    for (const auto& l : labels) out.insert(l.type);
    return out;
}

void normalize(std::vector<ErrorLabel>& labels) {
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
}

struct Pooled {
    Counts micro;
    TypeCounts per_type{};
    std::array<bool, kNumTypes> gt_present{};
};

Pooled pool(const std::vector<TypeCounts>& per_record, const std::vector<std::size_t>& idx) {
    Pooled p;
    for (std::size_t i : idx) {
        for (std::size_t t = 0; t < kNumTypes; ++t) {
            const Counts& c = per_record[i][t];
            p.per_type[t] += c;
            p.micro += c;
            if (c.tp + c.fn > 0) p.gt_present[t] = true;
        }
    }
    return p;
}

double macro_of(const Pooled& p) {
    double sum = 0.0;
    int n = 0;
    for (std::size_t t = 0; t < kNumTypes; ++t) {
        if (!p.gt_present[t]) continue;
        sum += prf(p.per_type[t]).f1;
        ++n;
    }
    return n ? sum / n : 0.0;
}

double hallucination_of(const Counts& c) {
    const int predicted = c.tp + c.fp;
    return predicted ? static_cast<double>(c.fp) / predicted : 0.0;
}

bool has_word(const std::string& low, std::string_view word) {
    std::size_t pos = 0;
    while ((pos = low.find(word, pos)) != std::string::npos) {
        const bool left = pos == 0 || !std::isalpha(static_cast<unsigned char>(low[pos - 1]));
        const std::size_t end = pos + word.size();
        const bool right = end >= low.size() || !std::isalpha(static_cast<unsigned char>(low[end]));
        if (left && right) return true;
        pos = end;
    }
    return false;
}

std::string fmt3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

json metric_json(const MetricCI& m) {
    return {{"value", m.value}, {"ci_low", m.ci_low}, {"ci_high", m.ci_high}};
}

MetricCI metric_from(const json& j) {
    return {j.at("value").get<double>(), j.at("ci_low").get<double>(), j.at("ci_high").get<double>()};
}

json prf_json(const Prf& p) {
    return {{"precision", p.precision}, {"recall", p.recall}, {"f1", p.f1},
            {"tp", p.counts.tp}, {"fp", p.counts.fp}, {"fn", p.counts.fn}};
}

Prf prf_from(const json& j) {
    Prf p;
    p.precision = j.at("precision").get<double>();
    p.recall = j.at("recall").get<double>();
    p.f1 = j.at("f1").get<double>();
    p.counts = {j.at("tp").get<int>(), j.at("fp").get<int>(), j.at("fn").get<int>()};
    return p;
}

}  // namespace

void to_json(json& j, const PredictionRecord& r) {
    auto labels = [](const std::vector<ErrorLabel>& v) {
        json a = json::array();
        for (const auto& l : v) a.push_back({{"type", to_string(l.type)}, {"target", l.target}});
        return a;
    };
    json conf = json::array();
    for (const auto& c : r.violation_confidences) {
        conf.push_back({{"confidence", c.confidence}, {"type", to_string(c.type)},
                        {"is_true_positive", c.is_true_positive}});
    }
    j = {{"sample_id", r.sample_id},
         {"mode", r.mode},
         {"predicted_errors", labels(r.predicted_errors)},
         {"gt_errors", labels(r.gt_errors)},
         {"feedback_text", r.feedback_text},
         {"violation_confidences", conf},
         {"latency_ms", r.latency}};
}

void from_json(const json& j, PredictionRecord& r) {
    auto labels = [](const json& a) {
        std::vector<ErrorLabel> v;
        for (const auto& l : a) {
            v.push_back({parse_error_type(l.at("type").get<std::string>()), l.at("target").get<std::string>()});
        }
        normalize(v);
        return v;
    };
    r.sample_id = j.at("sample_id").get<std::string>();
    r.mode = j.value("mode", "");
    r.predicted_errors = labels(j.at("predicted_errors"));
    r.gt_errors = labels(j.value("gt_errors", json::array()));
    r.feedback_text = j.at("feedback_text").get<std::string>();
    r.violation_confidences.clear();
    for (const auto& c : j.value("violation_confidences", json::array())) {
        const double conf = c.at("confidence").get<double>();
        if (!(conf >= 0.0 && conf <= 1.0)) throw Error("confidence outside [0,1] in record " + r.sample_id);
        r.violation_confidences.push_back(
            {conf, parse_error_type(c.at("type").get<std::string>()), c.value("is_true_positive", false)});
    }
    r.latency = j.at("latency_ms").get<StageLatency>();
}

PredictionRecord make_record(const FeedbackReport& report) {
    PredictionRecord r;
    r.sample_id = report.sample_id;
    r.mode = std::string(to_string(report.mode));
    for (const auto& v : report.violations) {
        r.predicted_errors.push_back({v.error_type, v.target});
        r.violation_confidences.push_back({v.confidence, v.error_type, false});
    }
    normalize(r.predicted_errors);
    r.feedback_text = report.text;
    r.latency = report.latency;
    return r;
}

std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path) {
    std::istringstream in(read_file(path));
    std::vector<PredictionRecord> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string where = path.string() + ":" + std::to_string(lineno);
        try {
            out.push_back(parse_json(line, where).get<PredictionRecord>());
        } catch (const json::exception& e) {
            throw Error(where + ": " + e.what());
        }
    }
    return out;
}

std::string predictions_to_jsonl(const std::vector<PredictionRecord>& records) {
    std::string out;
    for (const auto& r : records) out += json(r).dump() + "\n";
    return out;
}

std::map<ErrorType, Counts> match_errors(const std::vector<ErrorLabel>& predicted, const std::vector<ErrorLabel>& gt) {
    const auto p = types_of(predicted);
    const auto g = types_of(gt);
    std::map<ErrorType, Counts> out;
    for (ErrorType t : p) {
        if (g.count(t)) ++out[t].tp;
        else ++out[t].fp;
    }
    for (ErrorType t : g) {
        if (!p.count(t)) ++out[t].fn;
    }
    return out;
}

Prf prf(const Counts& c) {
    Prf r;
    r.counts = c;
    r.precision = c.tp + c.fp ? static_cast<double>(c.tp) / (c.tp + c.fp) : 0.0;
    r.recall = c.tp + c.fn ? static_cast<double>(c.tp) / (c.tp + c.fn) : 0.0;
    r.f1 = r.precision + r.recall > 0 ? 2 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
    return r;
}

F1Suite f1_suite(const std::vector<PredictionRecord>& records) {
    if (records.empty()) throw Error("f1_suite: no records");
    std::vector<TypeCounts> per_record;
    for (const auto& r : records) per_record.push_back(type_counts(r));
    std::vector<std::size_t> all(records.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    const Pooled p = pool(per_record, all);
    F1Suite s;
    s.micro = prf(p.micro);
    s.macro_f1 = macro_of(p);
    for (ErrorType t : kAllErrorTypes) {
        const Counts& c = p.per_type[type_index(t)];
        if (c.tp + c.fp + c.fn > 0) s.per_type[t] = prf(c);
    }
    return s;
}

double hallucination_rate(const std::vector<PredictionRecord>& records) {
    if (records.empty()) throw Error("hallucination_rate: no records");
    Counts total;
    for (const auto& r : records) {
        for (const auto& [t, c] : match_errors(r.predicted_errors, r.gt_errors)) total += c;
    }
    return hallucination_of(total);
}

Likert likert_scores(std::string_view feedback_text, const std::vector<ErrorLabel>& gt_errors) {
    Likert out;
    const auto mentioned = extract_error_types(feedback_text);
    const auto gt = types_of(gt_errors);
    if (gt.empty()) {
        out.correctness = mentioned.empty() ? 5 : 1;
    } else {
        int matched = 0;
        bool spurious = false;
        for (ErrorType t : mentioned) {
            if (gt.count(t)) ++matched;
            else spurious = true;
        }
        const long score = std::lround(1.0 + 4.0 * matched / static_cast<double>(gt.size())) - (spurious ? 1 : 0);
        out.correctness = static_cast<int>(std::clamp(score, 1L, 5L));
    }

    if (feedback_text == kCorrectDiagramText) {
        out.actionability = 5;
        return out;
    }
    static const std::string_view verbs[] = {"add", "remove", "flip", "reverse", "redraw", "move", "connect"};
    static const std::regex quoted_name("'[^'\\s][^']*'");
    std::istringstream in{std::string(feedback_text)};
    std::string line;
    double sum = 0.0;
    int items = 0;
    while (std::getline(in, line)) {
        if (extract_error_types(line).empty()) continue;
        std::string low = line;
        std::transform(low.begin(), low.end(), low.begin(), [](unsigned char c) { return std::tolower(c); });
        const bool verb = std::any_of(std::begin(verbs), std::end(verbs), [&](auto v) { return has_word(low, v); });
        const bool target = std::regex_search(line, quoted_name);
        sum += 1 + 2 * verb + 2 * target;
        ++items;
    }
    out.actionability = items ? static_cast<int>(std::clamp(std::lround(sum / items), 1L, 5L)) : 1;
    return out;
}

EceResult ece(const std::vector<CalibrationPair>& pairs, int n_bins) {
    if (n_bins < 1) throw Error("ece: n_bins must be positive");
    if (pairs.empty()) return {0.0, true};
    std::vector<double> conf_sum(n_bins, 0.0), correct(n_bins, 0.0);
    std::vector<int> count(n_bins, 0);
    for (const auto& p : pairs) {
        if (!(p.confidence >= 0.0 && p.confidence <= 1.0)) throw Error("ece: confidence outside [0,1]");
        const int b = std::min(static_cast<int>(std::floor(p.confidence * n_bins)), n_bins - 1);
        conf_sum[b] += p.confidence;
        correct[b] += p.correct ? 1.0 : 0.0;
        ++count[b];
    }
    double e = 0.0;
    for (int b = 0; b < n_bins; ++b) {
        if (!count[b]) continue;
        e += static_cast<double>(count[b]) / pairs.size() * std::abs(correct[b] / count[b] - conf_sum[b] / count[b]);
    }
    return {e, false};
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) throw Error("quantile of an empty sample");
    const double pos = q * (sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - lo) * (sorted[hi] - sorted[lo]);
}

std::vector<Interval> bootstrap_ci(std::size_t n_records, const std::vector<ResampleMetric>& metrics,
                                   int n_resamples, std::uint64_t seed) {
    if (n_records == 0) throw Error("bootstrap_ci: no records");
    if (n_resamples < 1) throw Error("bootstrap_ci: n_resamples must be positive");
    std::vector<std::vector<double>> values(metrics.size(), std::vector<double>(n_resamples));
    std::vector<std::size_t> idx(n_records);
    std::uniform_int_distribution<std::size_t> pick(0, n_records - 1);
    for (int r = 0; r < n_resamples; ++r) {
        std::seed_seq ss{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                         static_cast<std::uint32_t>(r)};
        std::mt19937_64 rng(ss);
        for (auto& i : idx) i = pick(rng);
        for (std::size_t m = 0; m < metrics.size(); ++m) values[m][r] = metrics[m](idx);
    }
    std::vector<Interval> out;
    for (auto& v : values) {
        std::sort(v.begin(), v.end());
        out.push_back({quantile_sorted(v, 0.025), quantile_sorted(v, 0.975)});
    }
    return out;
}

Interval bootstrap_ci(const std::vector<double>& values, int n_resamples, std::uint64_t seed) {
    ResampleMetric mean = [&](const std::vector<std::size_t>& idx) {
        double s = 0.0;
        for (std::size_t i : idx) s += values[i];
        return s / idx.size();
    };
    return bootstrap_ci(values.size(), {mean}, n_resamples, seed).front();
}

std::vector<ErrorLabel> gt_labels(const synth::DiagramSample& s) {
    std::vector<ErrorLabel> out;
    for (const auto& e : s.injected_errors) out.push_back({e.error_type, e.target});
    normalize(out);
    return out;
}

MetricsReport evaluate(const synth::Manifest& manifest, std::vector<PredictionRecord> predictions, int n_bootstrap,
                       std::uint64_t seed, synth::Split split) {
    std::map<std::string, std::size_t> by_id;
    std::vector<std::string> unknown;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (!manifest.find(predictions[i].sample_id)) unknown.push_back(predictions[i].sample_id);
        else if (!by_id.emplace(predictions[i].sample_id, i).second) {
            throw Error("duplicate prediction for " + predictions[i].sample_id);
        }
    }
    if (!unknown.empty()) {
        std::string msg = "predictions for unknown samples:";
        for (const auto& id : unknown) msg += " " + id;
        throw Error(msg);
    }

    std::vector<PredictionRecord> records;
    std::vector<std::string> missing;
    for (const auto& s : manifest.samples) {
        if (s.split != split) continue;
        auto it = by_id.find(s.sample_id);
        if (it == by_id.end()) {
            missing.push_back(s.sample_id);
            continue;
        }
        PredictionRecord r = std::move(predictions[it->second]);
        r.gt_errors = gt_labels(s);
        const auto gt = types_of(r.gt_errors);
        for (auto& c : r.violation_confidences) c.is_true_positive = gt.count(c.type) > 0;
        records.push_back(std::move(r));
    }
    if (!missing.empty()) {
        std::string msg = "missing predictions for:";
        for (const auto& id : missing) msg += " " + id;
        throw Error(msg);
    }
    if (records.empty()) throw Error("no samples in the " + std::string(synth::to_string(split)) + " split");

    MetricsReport rep;
    rep.benchmark = manifest.domain;
    rep.split = std::string(synth::to_string(split));
    rep.n_samples = static_cast<int>(records.size());
    rep.n_bootstrap = n_bootstrap;
    rep.seed = seed;
    std::set<std::string> modes;
    for (const auto& r : records) modes.insert(r.mode);
    rep.mode = modes.size() == 1 ? *modes.begin() : "mixed";

    std::vector<TypeCounts> per_record;
    std::vector<double> corr, act;
    std::vector<CalibrationPair> calib;
    StageLatency lat_sum;
    for (const auto& r : records) {
        per_record.push_back(type_counts(r));
        const Likert l = likert_scores(r.feedback_text, r.gt_errors);
        corr.push_back(l.correctness);
        act.push_back(l.actionability);
        for (const auto& c : r.violation_confidences) calib.push_back({c.confidence, c.is_true_positive});
        lat_sum.perception_ms += r.latency.perception_ms;
        lat_sum.graph_ms += r.latency.graph_ms;
        lat_sum.constraints_ms += r.latency.constraints_ms;
        lat_sum.feedback_ms += r.latency.feedback_ms;
        lat_sum.total_ms += r.latency.total_ms;
    }
    const double n = static_cast<double>(records.size());

    auto mean_of = [](const std::vector<double>& v, const std::vector<std::size_t>& idx) {
        double s = 0.0;
        for (std::size_t i : idx) s += v[i];
        return s / idx.size();
    };
    const std::vector<ResampleMetric> metrics = {
        [&](const auto& idx) { return prf(pool(per_record, idx).micro).f1; },
        [&](const auto& idx) { return macro_of(pool(per_record, idx)); },
        [&](const auto& idx) { return prf(pool(per_record, idx).micro).precision; },
        [&](const auto& idx) { return prf(pool(per_record, idx).micro).recall; },
        [&](const auto& idx) { return hallucination_of(pool(per_record, idx).micro); },
        [&](const auto& idx) { return mean_of(corr, idx); },
        [&](const auto& idx) { return mean_of(act, idx); },
    };
    std::vector<std::size_t> all(records.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    const auto cis = bootstrap_ci(records.size(), metrics, n_bootstrap, seed);
    MetricCI* slots[] = {&rep.micro_f1, &rep.macro_f1, &rep.precision, &rep.recall,
                         &rep.hallucination_rate, &rep.correctness_mean, &rep.actionability_mean};
    for (std::size_t m = 0; m < metrics.size(); ++m) {
        const double point = metrics[m](all);
        // Percentile intervals can miss a skewed point estimate; widen to include it.
        *slots[m] = {point, std::min(cis[m].low, point), std::max(cis[m].high, point)};
    }

    const Pooled whole = pool(per_record, all);
    for (ErrorType t : error_types_of(manifest.domain)) {
        const Counts& c = whole.per_type[type_index(t)];
        rep.per_type_f1[t] = prf(c);
        rep.per_type_support[t] = c.tp + c.fn;
    }
    const EceResult e = ece(calib);
    rep.ece = e.value;
    rep.ece_empty = e.empty;
    rep.latency_stage_mean_ms = {lat_sum.perception_ms / n, lat_sum.graph_ms / n, lat_sum.constraints_ms / n,
                                 lat_sum.feedback_ms / n, lat_sum.total_ms / n};
    rep.latency_mean_ms = rep.latency_stage_mean_ms.total_ms;
    return rep;
}

void to_json(json& j, const MetricsReport& r) {
    json per_type = json::object();
    for (const auto& [t, p] : r.per_type_f1) {
        json e = prf_json(p);
        auto s = r.per_type_support.find(t);
        e["support"] = s == r.per_type_support.end() ? 0 : s->second;
        per_type[std::string(to_string(t))] = e;
    }
    j = {{"schema_version", r.schema_version},
         {"benchmark", to_string(r.benchmark)},
         {"mode", r.mode},
         {"split", r.split},
         {"n_samples", r.n_samples},
         {"n_bootstrap", r.n_bootstrap},
         {"seed", r.seed},
         {"micro_f1", metric_json(r.micro_f1)},
         {"macro_f1", metric_json(r.macro_f1)},
         {"precision", metric_json(r.precision)},
         {"recall", metric_json(r.recall)},
         {"hallucination_rate", metric_json(r.hallucination_rate)},
         {"correctness_mean", metric_json(r.correctness_mean)},
         {"actionability_mean", metric_json(r.actionability_mean)},
         {"per_type_f1", per_type},
         {"ece", r.ece},
         {"ece_empty", r.ece_empty},
         {"latency_mean_ms", r.latency_mean_ms},
         {"latency_stage_mean_ms", r.latency_stage_mean_ms}};
}

void from_json(const json& j, MetricsReport& r) {
    r.schema_version = j.at("schema_version").get<int>();
    if (r.schema_version != kReportSchemaVersion) {
        throw Error("report schema version " + std::to_string(r.schema_version) + " is not supported (expected " +
                    std::to_string(kReportSchemaVersion) + ")");
    }
    r.benchmark = parse_domain(j.at("benchmark").get<std::string>());
    r.mode = j.at("mode").get<std::string>();
    r.split = j.value("split", "test");
    r.n_samples = j.at("n_samples").get<int>();
    r.n_bootstrap = j.at("n_bootstrap").get<int>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.micro_f1 = metric_from(j.at("micro_f1"));
    r.macro_f1 = metric_from(j.at("macro_f1"));
    r.precision = metric_from(j.at("precision"));
    r.recall = metric_from(j.at("recall"));
    r.hallucination_rate = metric_from(j.at("hallucination_rate"));
    r.correctness_mean = metric_from(j.at("correctness_mean"));
    r.actionability_mean = metric_from(j.at("actionability_mean"));
    r.per_type_f1.clear();
    r.per_type_support.clear();
    for (const auto& [name, e] : j.at("per_type_f1").items()) {
        const ErrorType t = parse_error_type(name);
        r.per_type_f1[t] = prf_from(e);
        r.per_type_support[t] = e.value("support", 0);
    }
    r.ece = j.at("ece").get<double>();
    r.ece_empty = j.value("ece_empty", false);
    r.latency_mean_ms = j.at("latency_mean_ms").get<double>();
    r.latency_stage_mean_ms = j.at("latency_stage_mean_ms").get<StageLatency>();
}

std::string render_markdown(const std::vector<MetricsReport>& reports) {
    if (reports.empty()) throw Error("render_markdown: no reports");
    struct Column {
        const char* name;
        std::function<double(const MetricsReport&)> value;
        std::function<std::string(const MetricsReport&)> text;
        bool higher_better;
    };
    auto with_ci = [](const MetricCI& m) {
        return fmt3(m.value) + " [" + fmt3(m.ci_low) + ", " + fmt3(m.ci_high) + "]";
    };
    const std::vector<Column> cols = {
        {"Mi-F1", [](auto& r) { return r.micro_f1.value; }, [&](auto& r) { return with_ci(r.micro_f1); }, true},
        {"Ma-F1", [](auto& r) { return r.macro_f1.value; }, [&](auto& r) { return with_ci(r.macro_f1); }, true},
        {"P", [](auto& r) { return r.precision.value; }, [&](auto& r) { return with_ci(r.precision); }, true},
        {"R", [](auto& r) { return r.recall.value; }, [&](auto& r) { return with_ci(r.recall); }, true},
        {"Corr.", [](auto& r) { return r.correctness_mean.value; }, [&](auto& r) { return with_ci(r.correctness_mean); }, true},
        {"Act.", [](auto& r) { return r.actionability_mean.value; }, [&](auto& r) { return with_ci(r.actionability_mean); }, true},
        {"Hall.", [](auto& r) { return r.hallucination_rate.value; }, [&](auto& r) { return with_ci(r.hallucination_rate); }, false},
        {"ECE", [](auto& r) { return r.ece; }, [](auto& r) { return fmt3(r.ece); }, false},
        {"Latency (ms)", [](auto& r) { return r.latency_mean_ms; },
         [](auto& r) { char b[32]; std::snprintf(b, sizeof b, "%.1f", r.latency_mean_ms); return std::string(b); }, false},
    };

    auto best_in_group = [&](const Column& c, Domain d) {
        std::optional<double> best;
        int rows = 0;
        for (const auto& r : reports) {
            if (r.benchmark != d) continue;
            ++rows;
            const double v = c.value(r);
            if (!best || (c.higher_better ? v > *best : v < *best)) best = v;
        }
        return rows > 1 ? best : std::nullopt;
    };

    std::ostringstream out;
    out << "## Main results\n\n| Benchmark | Method | Split | n |";
    for (const auto& c : cols) out << " " << c.name << " |";
    out << "\n|---|---|---|---|";
    for (std::size_t i = 0; i < cols.size(); ++i) out << "---|";
    out << "\n";
    for (const auto& r : reports) {
        out << "| " << to_string(r.benchmark) << " | " << r.mode << " | " << r.split << " | " << r.n_samples << " |";
        for (const auto& c : cols) {
            const auto best = best_in_group(c, r.benchmark);
            const bool bold = best && std::abs(c.value(r) - *best) < 1e-12;
            out << " " << (bold ? "**" : "") << c.text(r) << (bold ? "**" : "") << " |";
        }
        out << "\n";
    }
    out << "\nIntervals are 95% percentile bootstrap CIs (" << reports.front().n_bootstrap << " resamples, seed "
        << reports.front().seed << ").\n";

    for (Domain d : {Domain::Fbd, Domain::Circuit}) {
        std::vector<const MetricsReport*> group;
        for (const auto& r : reports) {
            if (r.benchmark == d) group.push_back(&r);
        }
        if (group.empty()) continue;
        out << "\n## Per-error-type F1 (" << to_string(d) << ")\n\n| Error type | Support |";
        for (const auto* r : group) out << " " << r->mode << " |";
        out << "\n|---|---|";
        for (std::size_t i = 0; i < group.size(); ++i) out << "---|";
        out << "\n";
        for (ErrorType t : error_types_of(d)) {
            auto sup = group.front()->per_type_support.find(t);
            out << "| " << to_string(t) << " | " << (sup == group.front()->per_type_support.end() ? 0 : sup->second)
                << " |";
            for (const auto* r : group) {
                auto it = r->per_type_f1.find(t);
                out << " " << (it == r->per_type_f1.end() ? std::string("n/a") : fmt3(it->second.f1)) << " |";
            }
            out << "\n";
        }
    }
    return out.str();
}

}  // namespace dgf
