#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>
#include <httplib.h>

#include <set>
#include <thread>

#include "dgf/feedback.hpp"
#include "dgf/synthgen.hpp"
#include "support.hpp"

using namespace dgf;

namespace {

Violation viol(ErrorType t, std::string target, std::string id = "c", json params = json::object()) {
    Violation v;
    v.constraint_id = std::move(id);
    v.error_type = t;
    v.target = std::move(target);
    v.confidence = 0.9;
    v.params = std::move(params);
    return v;
}

std::set<ErrorType> as_set(const std::vector<ErrorType>& v) { return {v.begin(), v.end()}; }

// Every template variant the rubric can produce.
std::vector<Violation> all_variants() {
    return {viol(ErrorType::MissingForce, "friction", "required_force", {{"expected_direction", 180.0}}),
            viol(ErrorType::MissingForce, "net_force", "force_balance", {{"net_direction", 270.0}}),
            viol(ErrorType::WrongDirection, "normal", "force_direction",
                 {{"expected_direction", 90.0}, {"observed_direction", 233.0}}),
            viol(ErrorType::AnchorError, "gravity", "force_anchor", {{"offset", 74.0}}),
            viol(ErrorType::ExtraForce, "extra_force", "extra_force"),
            viol(ErrorType::WrongPolarity, "D1", "polarity", {{"expected_direction", 0.0}}),
            viol(ErrorType::OpenCircuit, "R1-B1", "connection", {{"from", "R1"}, {"to", "B1"}}),
            viol(ErrorType::OpenCircuit, "R2", "terminal"),
            viol(ErrorType::IllegalJunction, "crossing", "junction", {{"expected_dot", true}}),
            viol(ErrorType::IllegalJunction, "crossing", "junction", {{"expected_dot", false}}),
            viol(ErrorType::MissingGround, "ground", "ground"),
            viol(ErrorType::MissingComponent, "R1", "component_presence")};
}

ScenarioKey key_for(ErrorType t) {
    return synth::find_scenario(domain_of(t) == Domain::Fbd ? "block_on_table" : "series");
}

// Serves POST /feedback from a background thread for the life of the object.
class Stub {
public:
    explicit Stub(httplib::Server::Handler h) {
        server_.Post("/feedback", std::move(h));
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~Stub() {
        server_.stop();
        thread_.join();
    }
    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

std::vector<RubricItem> sample_items() {
    const auto key = synth::find_scenario("diode_polarity");
    return map_to_rubric({viol(ErrorType::WrongPolarity, "D1", "polarity", {{"expected_direction", 0.0}})}, key);
}

}  // namespace

TEST_CASE("map_to_rubric") {
    const auto fbd = synth::find_scenario("sliding_block");
    CHECK(map_to_rubric({}, fbd).empty());

    const auto items = map_to_rubric({viol(ErrorType::MissingForce, "friction")}, fbd);
    REQUIRE(items.size() == 1);
    CHECK(items[0].diagnosis_text.find("friction") != std::string::npos);
    CHECK(items[0].fix_text.rfind("Add", 0) == 0);

    const auto circ = synth::find_scenario("diode_polarity");
    const auto pol = map_to_rubric({viol(ErrorType::WrongPolarity, "D1")}, circ);
    REQUIRE(pol.size() == 1);
    const bool verb = pol[0].fix_text.find("Flip") != std::string::npos ||
                      pol[0].fix_text.find("reverse") != std::string::npos;
    CHECK(verb);
    CHECK(pol[0].fix_text.find("D1") != std::string::npos);

    CHECK_THROWS_AS(map_to_rubric({viol(ErrorType::WrongPolarity, "D1")}, fbd), Error);
}

TEST_CASE("every template names its target, uses its verb and mentions only its own type") {
    for (const auto& v : all_variants()) {
        CAPTURE(to_string(v.error_type));
        CAPTURE(v.constraint_id);
        const auto items = map_to_rubric({v}, key_for(v.error_type));
        REQUIRE(items.size() == 1);
        const std::string line = render_feedback(items);
        CHECK(as_set(extract_error_types(line)) == std::set<ErrorType>{v.error_type});
        std::string low = items[0].fix_text;
        for (auto& c : low) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        CHECK(low.find(fix_verb(v.error_type)) != std::string::npos);
        std::vector<std::string> names = {v.target};
        if (v.params.contains("from")) names = {v.params.at("from"), v.params.at("to")};
        for (const auto& n : names) CHECK(line.find("'" + n + "'") != std::string::npos);
    }
}

TEST_CASE("render_feedback") {
    CHECK(render_feedback({}) == "Diagram looks correct per scenario key.");
    CHECK(render_feedback({}) == kCorrectDiagramText);

    const auto key = synth::find_scenario("sliding_block");
    const auto one = render_feedback(map_to_rubric({viol(ErrorType::ExtraForce, "extra_force")}, key));
    CHECK(one.rfind("1. ", 0) == 0);
    CHECK(one.find('\n') == std::string::npos);

    const auto three = render_feedback(map_to_rubric({viol(ErrorType::MissingForce, "friction"),
                                                      viol(ErrorType::ExtraForce, "extra_force"),
                                                      viol(ErrorType::AnchorError, "normal")},
                                                     key));
    const auto first = three.find("1. Missing force");
    const auto second = three.find("\n2. Extra force");
    const auto third = three.find("\n3. Misplaced anchor");
    CHECK(first == 0);
    CHECK(second != std::string::npos);
    CHECK(third != std::string::npos);
    CHECK(second < third);
}

TEST_CASE("keyword extraction") {
    CHECK(extract_error_types("").empty());
    CHECK(extract_error_types(kCorrectDiagramText).empty());
    CHECK(as_set(extract_error_types("OPEN CIRCUIT near R1; also a Junction problem")) ==
          std::set<ErrorType>{ErrorType::OpenCircuit, ErrorType::IllegalJunction});
    CHECK(extract_error_types("the extra_force arrow").empty());
    for (ErrorType t : kAllErrorTypes) CHECK(as_set(extract_error_types(error_keywords(t).front())) ==
                                             std::set<ErrorType>{t});
}

TEST_CASE("run_pipeline in oracle mode") {
    const auto m = synth::load_manifest(test::testdata("circuit"));
    const synth::DiagramSample* clean = nullptr;
    const synth::DiagramSample* no_ground = nullptr;
    for (const auto& s : m.samples) {
        if (!clean && s.injected_errors.empty()) clean = &s;
        if (!no_ground && !s.injected_errors.empty() && s.injected_errors[0].error_type == ErrorType::MissingGround) {
            no_ground = &s;
        }
    }
    REQUIRE(clean);
    REQUIRE(no_ground);

    auto run = [&](const synth::DiagramSample& s, PipelineMode mode) {
        const auto img = read_png(test::testdata("circuit") / s.image_path);
        return run_pipeline(img, synth::find_scenario(s.scenario_id), mode, {}, Stage1Result{s.gt_primitives, 0.0});
    };
    const auto ok = run(*clean, PipelineMode::Grammar);
    CHECK(ok.violations.empty());
    CHECK(ok.text == kCorrectDiagramText);

    const auto ng = run(*no_ground, PipelineMode::Grammar);
    REQUIRE(ng.violations.size() == 1);
    CHECK(ng.violations[0].error_type == ErrorType::MissingGround);
    CHECK(as_set(extract_error_types(ng.text)) == std::set<ErrorType>{ErrorType::MissingGround});

    const auto lat = ng.latency;
    CHECK(lat.total_ms + 1e-3 >= lat.perception_ms + lat.graph_ms + lat.constraints_ms + lat.feedback_ms);

    const json j = ng;
    for (const char* k : {"sample_id", "mode", "violations", "text", "latency_ms"}) CHECK(j.contains(k));
    CHECK(j.at("mode") == "grammar");
}

TEST_CASE("vision-only mode reports absences from detection counts only") {
    const auto key = synth::find_scenario("inclined_plane");
    std::vector<Primitive> dets = {test::arrow({100, 100}, {200, 100})};
    const auto v = vision_only_violations(dets, key);
    REQUIRE(v.size() == 2);
    for (const auto& x : v) {
        CHECK(x.error_type == ErrorType::MissingForce);
        CHECK(x.evidence.empty());
        CHECK(x.confidence == doctest::Approx(0.9));
    }

    const auto circ = synth::find_scenario("grounded_reference");
    const auto none = vision_only_violations({}, circ);
    CHECK(none.size() == circ.components.size() + 1);

    // A full render checked against its own detections.
    const auto r = synth::render_sample(circ, {}, synth::NoiseParams{0.0}, 3);
    const auto report = run_pipeline(r.image, circ, PipelineMode::VisionOnly);
    CHECK(report.latency.graph_ms == 0.0);
    CHECK(report.latency.constraints_ms == 0.0);
    const auto s1 = run_stage1(r.image);
    const auto expected = vision_only_violations(s1.primitives, circ);
    REQUIRE(report.violations.size() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) CHECK(report.violations[i].target == expected[i].target);
    if (report.violations.empty()) CHECK(report.text == kCorrectDiagramText);
}

TEST_CASE("run_pipeline input errors") {
    const auto key = synth::find_scenario("series");
    CHECK_THROWS_AS(run_pipeline(std::filesystem::path("/nonexistent/image.png"), key, PipelineMode::Grammar), Error);
    CHECK_THROWS_AS(run_pipeline(GrayImage(), key, PipelineMode::Grammar), Error);
    CHECK_THROWS_AS(parse_pipeline_mode("vlm"), Error);
    CHECK(parse_pipeline_mode("vision-only") == PipelineMode::VisionOnly);
}

TEST_CASE("external generator") {
    const auto items = sample_items();
    const GrayImage img(32, 24, 255);
    const std::string fallback = render_feedback(items);

    SUBCASE("endpoint unset") {
        const auto r = external_generate(items, img, {});
        CHECK(r.fallback);
        CHECK(r.text == fallback);
        CHECK_FALSE(r.warning.empty());
    }
    SUBCASE("unreachable endpoint") {
        ExternalConfig cfg;
        cfg.endpoint = "http://127.0.0.1:1";
        cfg.timeout_s = 1.0;
        const auto r = external_generate(items, img, cfg);
        CHECK(r.fallback);
        CHECK(r.text == fallback);
    }
    SUBCASE("stub echoes the violations") {
        json seen;
        Stub stub([&](const httplib::Request& req, httplib::Response& res) {
            seen = json::parse(req.body);
            json reply = {{"text", "stub: " + seen.at("violations").dump()}};
            res.set_content(reply.dump(), "application/json");
        });
        ExternalConfig cfg;
        cfg.endpoint = stub.url();
        const auto r = external_generate(items, img, cfg);
        CHECK_FALSE(r.fallback);
        CHECK(r.text == "stub: " + seen.at("violations").dump());
        CHECK(seen.at("violations").size() == 1);
        CHECK(seen.at("violations")[0].at("target") == "D1");
        CHECK(seen.at("rubric_prompt") == std::string(kDefaultRubricPrompt));
        CHECK(seen.at("image_b64").get<std::string>().rfind("iVBORw0KGgo", 0) == 0);  // PNG signature
    }
    SUBCASE("malformed replies fall back") {
        for (const std::string body : {"not json", "{\"txt\": 1}", "[1,2]", "{\"text\": 5}"}) {
            Stub stub([&](const httplib::Request&, httplib::Response& res) {
                res.set_content(body, "application/json");
            });
            ExternalConfig cfg;
            cfg.endpoint = stub.url();
            const auto r = external_generate(items, img, cfg);
            CAPTURE(body);
            CHECK(r.fallback);
            CHECK(r.text == fallback);
        }
        Stub err([](const httplib::Request&, httplib::Response& res) { res.status = 500; });
        ExternalConfig cfg;
        cfg.endpoint = err.url();
        CHECK(external_generate(items, img, cfg).fallback);
    }
    SUBCASE("usable from several threads") {
        Stub stub([](const httplib::Request&, httplib::Response& res) {
            res.set_content(R"({"text": "ok"})", "application/json");
        });
        ExternalConfig cfg;
        cfg.endpoint = stub.url() + "/";
        std::vector<std::thread> workers;
        std::vector<std::string> out(8);
        for (std::size_t i = 0; i < out.size(); ++i) {
            workers.emplace_back([&, i] { out[i] = external_generate(items, img, cfg).text; });
        }
        for (auto& w : workers) w.join();
        for (const auto& t : out) CHECK(t == "ok");
    }
}

TEST_CASE("external mode in the pipeline") {
    const auto key = synth::find_scenario("diode_polarity");
    const auto r = synth::render_sample(key, synth::error_cycle(Domain::Circuit, 3, key), synth::NoiseParams{0.0}, 9);
    const Stage1Result oracle{r.gt_primitives, 0.0};
    Stub garbage([](const httplib::Request&, httplib::Response& res) { res.set_content("<html>", "text/html"); });
    PipelineConfig cfg;
    cfg.external.endpoint = garbage.url();
    const auto ext = run_pipeline(r.image, key, PipelineMode::External, cfg, oracle);
    const auto grammar = run_pipeline(r.image, key, PipelineMode::Grammar, cfg, oracle);
    CHECK(ext.external_fallback);
    CHECK(ext.text == grammar.text);
    REQUIRE(ext.violations.size() == 1);

    // No violations means no call at all.
    const auto clean = synth::render_sample(key, {}, synth::NoiseParams{0.0}, 9);
    const auto none = run_pipeline(clean.image, key, PipelineMode::External, cfg, Stage1Result{clean.gt_primitives, 0.0});
    CHECK(none.text == kCorrectDiagramText);
    CHECK_FALSE(none.external_fallback);
}
