#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>

#include "dgf/evalharness.hpp"
#include "support.hpp"

using namespace dgf;

namespace {

using E = ErrorType;

PredictionRecord rec(std::vector<ErrorLabel> pred, std::vector<ErrorLabel> gt) {
    PredictionRecord r;
    r.sample_id = "s";
    r.mode = "grammar";
    r.predicted_errors = std::move(pred);
    r.gt_errors = std::move(gt);
    return r;
}

PredictionRecord oracle_record(const synth::DiagramSample& s) {
    PredictionRecord r;
    r.sample_id = s.sample_id;
    r.mode = "grammar";
    r.predicted_errors = gt_labels(s);
    for (const auto& l : r.predicted_errors) r.violation_confidences.push_back({0.9, l.type, false});
    return r;
}

// Pooled type-level counts computed directly from type sets.
struct Brute {
    double precision, recall, f1, halluc;
};

Brute brute_force(const std::vector<PredictionRecord>& rs) {
    double tp = 0, fp = 0, fn = 0;
    for (const auto& r : rs) {
        std::set<E> p, g;
        for (const auto& l : r.predicted_errors) p.insert(l.type);
        for (const auto& l : r.gt_errors) g.insert(l.type);
        for (E t : p) (g.count(t) ? tp : fp) += 1;
        for (E t : g) if (!p.count(t)) fn += 1;
    }
    const double P = tp + fp > 0 ? tp / (tp + fp) : 0.0;
    const double R = tp + fn > 0 ? tp / (tp + fn) : 0.0;
    return {P, R, P + R > 0 ? 2 * P * R / (P + R) : 0.0, tp + fp > 0 ? fp / (tp + fp) : 0.0};
}

// Exact ECE over equal-width bins, written out independently.
double brute_ece(const std::vector<CalibrationPair>& ps) {
    double total = 0;
    for (int b = 0; b < 10; ++b) {
        double n = 0, c = 0, a = 0;
        for (const auto& p : ps) {
            const int bin = p.confidence >= 1.0 ? 9 : static_cast<int>(p.confidence * 10);
            if (bin != b) continue;
            n += 1;
            c += p.confidence;
            a += p.correct;
        }
        if (n > 0) total += n / ps.size() * std::abs(a / n - c / n);
    }
    return total;
}

}  // namespace

TEST_CASE("match_errors") {
    const auto m = match_errors({{E::MissingForce, "friction"}, {E::ExtraForce, "x"}},
                                {{E::MissingForce, "normal"}, {E::WrongDirection, "gravity"}});
    CHECK(m.at(E::MissingForce).tp == 1);
    CHECK(m.at(E::ExtraForce).fp == 1);
    CHECK(m.at(E::WrongDirection).fn == 1);
    CHECK(m.size() == 3);
    CHECK(match_errors({}, {}).empty());
}

TEST_CASE("f1 on pooled counts") {
    // 2 TP, 1 FP, 3 FN across three records.
    std::vector<PredictionRecord> rs = {
        rec({{E::MissingForce, "a"}, {E::ExtraForce, "b"}}, {{E::MissingForce, "a"}, {E::AnchorError, "c"}}),
        rec({{E::WrongDirection, "d"}}, {{E::WrongDirection, "d"}, {E::MissingForce, "e"}}),
        rec({}, {{E::ExtraForce, "f"}}),
    };
    const auto s = f1_suite(rs);
    CHECK(s.micro.counts.tp == 2);
    CHECK(s.micro.counts.fp == 1);
    CHECK(s.micro.counts.fn == 3);
    CHECK(s.micro.precision == doctest::Approx(2.0 / 3.0));
    CHECK(s.micro.recall == doctest::Approx(0.4));
    CHECK(s.micro.f1 == doctest::Approx(0.5));
    CHECK(hallucination_rate(rs) == doctest::Approx(1.0 / 3.0));
    CHECK(s.per_type.at(E::AnchorError).f1 == 0.0);
    CHECK(s.per_type.at(E::WrongDirection).f1 == doctest::Approx(1.0));

    CHECK(prf({}).f1 == 0.0);
    CHECK(hallucination_rate({rec({}, {{E::OpenCircuit, "x"}})}) == 0.0);
    CHECK_THROWS_AS(f1_suite({}), Error);
}

TEST_CASE("f1 and hallucination match a brute-force oracle on random records") {
    std::mt19937 rng(5);
    std::uniform_int_distribution<int> type(0, 8), count(0, 3);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<PredictionRecord> rs(1 + trial % 9);
        for (auto& r : rs) {
            for (int k = count(rng); k > 0; --k) r.predicted_errors.push_back({kAllErrorTypes[type(rng)], "t"});
            for (int k = count(rng); k > 0; --k) r.gt_errors.push_back({kAllErrorTypes[type(rng)], "t"});
        }
        const auto b = brute_force(rs);
        const auto s = f1_suite(rs);
        CHECK(s.micro.precision == doctest::Approx(b.precision));
        CHECK(s.micro.recall == doctest::Approx(b.recall));
        CHECK(s.micro.f1 == doctest::Approx(b.f1));
        CHECK(hallucination_rate(rs) == doctest::Approx(b.halluc));
    }
}

TEST_CASE("likert") {
    CHECK(likert_scores(kCorrectDiagramText, {}).correctness == 5);
    CHECK(likert_scores(kCorrectDiagramText, {}).actionability == 5);
    CHECK(likert_scores("1. Extra force drawn.", {}).correctness == 1);

    const std::vector<ErrorLabel> gt = {{E::MissingForce, "friction"}, {E::AnchorError, "normal"}};
    const auto full = likert_scores("1. Missing force 'friction'. Add it.\n2. Misplaced anchor on 'normal'. Move it.", gt);
    CHECK(full.correctness == 5);
    CHECK(full.actionability == 5);
    CHECK(likert_scores("1. Missing force somewhere.", gt).correctness == 3);
    CHECK(likert_scores("1. Missing force somewhere.", gt).actionability == 1);
    CHECK(likert_scores("1. Missing force. Extra force.", gt).correctness == 2);
    CHECK(likert_scores("1. Missing force. Add 'friction'.", gt).actionability == 5);
    CHECK(likert_scores("Looks fine to me.", gt).correctness == 1);
    CHECK(likert_scores("Looks fine to me.", gt).actionability == 1);
}

TEST_CASE("ece") {
    std::vector<CalibrationPair> half;
    for (int i = 0; i < 10; ++i) half.push_back({0.5, i % 2 == 0});
    CHECK(ece(half).value == doctest::Approx(0.0));
    CHECK(ece({{0.9, false}}).value == doctest::Approx(0.9));
    CHECK(ece({{1.0, true}}).value == doctest::Approx(0.0));
    const auto e = ece({});
    CHECK(e.empty);
    CHECK(e.value == 0.0);
    CHECK_THROWS_AS(ece(half, 0), Error);

    std::mt19937 rng(8);
    std::uniform_real_distribution<double> u(0, 1);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<CalibrationPair> ps(1 + trial);
        for (auto& p : ps) p = {u(rng), u(rng) < 0.6};
        CHECK(ece(ps).value == doctest::Approx(brute_ece(ps)));
    }
}

TEST_CASE("bootstrap") {
    CHECK(quantile_sorted({1, 2, 3, 4}, 0.5) == doctest::Approx(2.5));
    CHECK(quantile_sorted({7}, 0.975) == 7);

    const auto c = bootstrap_ci(std::vector<double>(12, 0.7), 500, 3);
    CHECK(c.low == doctest::Approx(0.7));
    CHECK(c.high == doctest::Approx(0.7));

    const std::vector<double> v = {0, 1, 1, 0, 1, 0.5, 0.25, 1};
    const auto a = bootstrap_ci(v, 2000, 9);
    const auto b = bootstrap_ci(v, 2000, 9);
    CHECK(a.low == b.low);
    CHECK(a.high == b.high);
    CHECK(a.low < a.high);

    CHECK_THROWS_AS(bootstrap_ci(std::vector<double>{}, 10, 0), Error);
    CHECK_THROWS_AS(bootstrap_ci(v, 0, 0), Error);
}

TEST_CASE("bootstrap matches the exact resampling distribution of six records") {
    // Enumerate all 6^6 equally likely resamples and take exact quantiles.
    const std::vector<double> v = {0.0, 0.0, 1.0, 1.0, 1.0, 0.5};
    std::vector<double> means;
    for (int code = 0; code < 46656; ++code) {
        int c = code;
        double s = 0;
        for (int k = 0; k < 6; ++k, c /= 6) s += v[c % 6];
        means.push_back(s / 6);
    }
    std::sort(means.begin(), means.end());
    const double lo = quantile_sorted(means, 0.025), hi = quantile_sorted(means, 0.975);
    const auto ci = bootstrap_ci(v, 10000, 0);
    CHECK(std::abs(ci.low - lo) <= 0.05);
    CHECK(std::abs(ci.high - hi) <= 0.05);
}

TEST_CASE("evaluate") {
    const auto m = synth::load_manifest(test::testdata("fbd"));
    std::vector<PredictionRecord> oracle;
    for (const auto& s : m.samples) oracle.push_back(oracle_record(s));

    const auto rep = evaluate(m, oracle, 200, 1);
    CHECK(rep.n_samples == 40);
    CHECK(rep.micro_f1.value == doctest::Approx(1.0));
    CHECK(rep.hallucination_rate.value == 0.0);
    CHECK(rep.micro_f1.ci_low <= rep.micro_f1.value);
    CHECK(rep.micro_f1.value <= rep.micro_f1.ci_high);
    CHECK(rep.per_type_f1.size() == error_types_of(Domain::Fbd).size());

    const json j = rep;
    const auto back = j.get<MetricsReport>();
    CHECK(back.micro_f1.value == rep.micro_f1.value);
    CHECK(back.per_type_support == rep.per_type_support);
    json bad = j;
    bad["schema_version"] = 2;
    CHECK_THROWS_AS(bad.get<MetricsReport>(), Error);

    SUBCASE("empty predictions") {
        std::vector<PredictionRecord> empty;
        for (const auto& s : m.samples) {
            PredictionRecord r;
            r.sample_id = s.sample_id;
            r.mode = "grammar";
            empty.push_back(r);
        }
        const auto e = evaluate(m, empty, 100, 1);
        CHECK(e.recall.value == 0.0);
        CHECK(e.hallucination_rate.value == 0.0);
        CHECK(e.ece_empty);
    }
    SUBCASE("missing and unknown ids are listed") {
        auto few = oracle;
        const std::string dropped = m.samples[0].split == synth::Split::Test ? m.samples[0].sample_id : [&] {
            for (const auto& s : m.samples)
                if (s.split == synth::Split::Test) return s.sample_id;
            return std::string();
        }();
        std::erase_if(few, [&](const PredictionRecord& r) { return r.sample_id == dropped; });
        try {
            evaluate(m, few, 10, 1);
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(std::string(e.what()).find(dropped) != std::string::npos);
        }
        auto extra = oracle;
        extra.push_back(oracle.front());
        extra.back().sample_id = "nope_123";
        CHECK_THROWS_WITH_AS(evaluate(m, extra, 10, 1), doctest::Contains("nope_123"), Error);
        auto dup = oracle;
        dup.push_back(oracle.front());
        CHECK_THROWS_AS(evaluate(m, dup, 10, 1), Error);
    }
    SUBCASE("markdown") {
        auto other = rep;
        other.mode = "vision-only";
        other.micro_f1.value = 0.3;
        const auto md = render_markdown({rep, other});
        CHECK(md.find("**1.000") != std::string::npos);
        CHECK(md.find("vision-only") != std::string::npos);
    }
}

TEST_CASE("prediction records round trip through jsonl") {
    PredictionRecord r = rec({{E::OpenCircuit, "R1-B1"}}, {});
    r.feedback_text = "1. Open circuit.";
    r.violation_confidences = {{0.8, E::OpenCircuit, false}};
    r.latency.total_ms = 3.5;
    const auto path = std::filesystem::temp_directory_path() / "dgf_test_preds.jsonl";
    {
        std::ofstream f(path);
        f << predictions_to_jsonl({r, r}) << "\n";
    }
    const auto back = read_predictions(path);
    REQUIRE(back.size() == 2);
    CHECK(back[1].predicted_errors == r.predicted_errors);
    CHECK(back[1].latency.total_ms == 3.5);
    {
        std::ofstream f(path);
        f << predictions_to_jsonl({r}) << "\n{broken\n";
    }
    CHECK_THROWS_WITH_AS(read_predictions(path), doctest::Contains(":3"), Error);
    std::filesystem::remove(path);
}
