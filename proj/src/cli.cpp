#include "dgf/cli.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

#include "dgf/evalharness.hpp"

namespace dgf {
namespace vision {
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(HoughParams, rho, theta_deg, votes, min_length, max_gap, seed)
}

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(ArrowFilter, area_min, area_max, solidity_min, solidity_max,
                                                elongation_min, head_mass_ratio_min)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(ComponentFilter, area_min, area_max, cluster_gap, min_part_pixels,
                                                hole_min_pixels, source_circularity_min, resistor_aspect_min,
                                                battery_plate_ratio_min, core_kernel, core_min_pixels)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(JunctionFilter, area_min, area_max, circularity_min, open_kernel,
                                                wire_distance)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(GraphConfig, proximity_radius)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(ConstraintConfig, direction_tolerance, anchor_tolerance,
                                                force_balance_tau_ratio, polarity_tolerance, force_match_radius,
                                                direction_weight, component_match_radius, extra_force_margin,
                                                crossing_distance, crossing_interior, junction_radius,
                                                absence_confidence)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(ExternalConfig, endpoint, timeout_s, rubric_prompt)

void to_json(json& j, const PerceptionConfig& c) {
    j = {{"denoise_sigma", c.denoise_sigma},
         {"clahe_clip_limit", c.clahe_clip_limit},
         {"clahe_tiles", c.clahe_tiles},
         {"adaptive_block", c.adaptive_block},
         {"adaptive_offset", c.adaptive_offset},
         {"speckle_min_pixels", c.speckle_min_pixels},
         {"arrow", c.arrow},
         {"hough", c.hough},
         {"wire_merge_angle_deg", c.wire_merge_angle_deg},
         {"wire_merge_distance", c.wire_merge_distance},
         {"wire_overlap_suppress", c.wire_overlap_suppress},
         {"component", c.component},
         {"junction", c.junction},
         {"nms_iou", c.nms_iou},
         {"debug_dir", c.debug_dir ? json(c.debug_dir->string()) : json(nullptr)}};
}

void from_json(const json& j, PerceptionConfig& c) {
    const PerceptionConfig d;
    c.denoise_sigma = j.value("denoise_sigma", d.denoise_sigma);
    c.clahe_clip_limit = j.value("clahe_clip_limit", d.clahe_clip_limit);
    c.clahe_tiles = j.value("clahe_tiles", d.clahe_tiles);
    c.adaptive_block = j.value("adaptive_block", d.adaptive_block);
    c.adaptive_offset = j.value("adaptive_offset", d.adaptive_offset);
    c.speckle_min_pixels = j.value("speckle_min_pixels", d.speckle_min_pixels);
    c.arrow = j.value("arrow", d.arrow);
    c.hough = j.value("hough", d.hough);
    c.wire_merge_angle_deg = j.value("wire_merge_angle_deg", d.wire_merge_angle_deg);
    c.wire_merge_distance = j.value("wire_merge_distance", d.wire_merge_distance);
    c.wire_overlap_suppress = j.value("wire_overlap_suppress", d.wire_overlap_suppress);
    c.component = j.value("component", d.component);
    c.junction = j.value("junction", d.junction);
    c.nms_iou = j.value("nms_iou", d.nms_iou);
    c.debug_dir.reset();
    if (auto it = j.find("debug_dir"); it != j.end() && !it->is_null()) c.debug_dir = it->get<std::string>();
}

namespace cli {
namespace {

void check_keys(const json& given, const json& known, const std::string& path) {
    if (!given.is_object()) throw Error("config: '" + path + "' must be an object");
    for (const auto& [k, v] : given.items()) {
        const std::string where = path.empty() ? k : path + "." + k;
        auto it = known.find(k);
        if (it == known.end()) throw Error("config: unknown key '" + where + "'");
        if (it->is_object()) check_keys(v, *it, where);
    }
}

std::vector<synth::Split> splits_of(const std::string& split) {
    if (split == "test") return {synth::Split::Test};
    if (split == "train") return {synth::Split::Train};
    if (split == "all") return {synth::Split::Train, synth::Split::Test};
    throw Error("unknown split '" + split + "' (expected test, train or all)");
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace

json config_to_json(const RunConfig& c) {
    return {{"perception", c.pipeline.perception},
            {"graph", c.pipeline.graph},
            {"constraints", c.pipeline.constraints},
            {"external", c.pipeline.external},
            {"mode", to_string(c.mode)},
            {"dataset", c.dataset.string()},
            {"split", c.split},
            {"predictions_out", c.predictions_out.string()},
            {"n_bootstrap", c.n_bootstrap},
            {"bootstrap_seed", c.bootstrap_seed},
            {"oracle_perception", c.oracle_perception},
            {"jobs", c.jobs}};
}

RunConfig config_from_json(const json& j) {
    const RunConfig d;
    check_keys(j, config_to_json(d), "");
    RunConfig c;
    try {
        c.pipeline.perception = j.value("perception", d.pipeline.perception);
        c.pipeline.graph = j.value("graph", d.pipeline.graph);
        c.pipeline.constraints = j.value("constraints", d.pipeline.constraints);
        c.pipeline.external = j.value("external", d.pipeline.external);
        c.mode = parse_pipeline_mode(j.value("mode", std::string(to_string(d.mode))));
        c.dataset = j.value("dataset", d.dataset.string());
        c.split = j.value("split", d.split);
        c.predictions_out = j.value("predictions_out", d.predictions_out.string());
        c.n_bootstrap = j.value("n_bootstrap", d.n_bootstrap);
        c.bootstrap_seed = j.value("bootstrap_seed", d.bootstrap_seed);
        c.oracle_perception = j.value("oracle_perception", d.oracle_perception);
        c.jobs = j.value("jobs", d.jobs);
    } catch (const json::exception& e) {
        throw Error(std::string("config: ") + e.what());
    }
    splits_of(c.split);
    c.pipeline.perception.validate();
    c.pipeline.constraints.validate();
    if (c.jobs < 1) throw Error("config: jobs must be at least 1");
    if (c.n_bootstrap < 1) throw Error("config: n_bootstrap must be at least 1");
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    return config_from_json(parse_json(read_file(path), path.string()));
}

std::string config_hash(const RunConfig& cfg) {
    json j = config_to_json(cfg);
    // Paths and worker count do not change results.
    for (const char* k : {"dataset", "predictions_out", "jobs"}) j.erase(k);
    j["perception"].erase("debug_dir");
    return hex(fnv1a(j.dump()));
}

Stage1Result oracle_stage1(const synth::DiagramSample& sample) {
    return {sample.gt_primitives, 0.0};
}

std::vector<FeedbackReport> run_samples(const synth::Manifest& manifest, const RunConfig& cfg) {
    const auto splits = splits_of(cfg.split);
    std::vector<const synth::DiagramSample*> todo;
    for (const auto& s : manifest.samples) {
        if (std::find(splits.begin(), splits.end(), s.split) != splits.end()) todo.push_back(&s);
    }
    std::vector<FeedbackReport> out(todo.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    auto worker = [&] {
        for (std::size_t i = next++; i < todo.size(); i = next++) {
            try {
                const auto& s = *todo[i];
                const ScenarioKey key = synth::find_scenario(s.scenario_id);
                if (key.domain != s.domain) throw Error(s.sample_id + ": key domain does not match the sample");
                const GrayImage img = read_png(cfg.dataset / s.image_path);
                PipelineConfig pc = cfg.pipeline;
                if (pc.perception.debug_dir) pc.perception.debug_dir = *pc.perception.debug_dir / s.sample_id;
                std::optional<Stage1Result> s1;
                if (cfg.oracle_perception) s1 = oracle_stage1(s);
                out[i] = run_pipeline(img, key, cfg.mode, pc, s1);
                out[i].sample_id = s.sample_id;
            } catch (...) {
                std::lock_guard lock(failure_mu);
                if (!failure) failure = std::current_exception();
                next = todo.size();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < cfg.jobs; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
    return out;
}

int cmd_generate(const std::string& benchmark, const std::filesystem::path& out_dir, std::uint64_t seed, int jobs,
                 std::ostream& out, std::ostream& err) {
    Domain domain;
    try {
        domain = parse_domain(benchmark);
    } catch (const Error& e) {
        err << "usage error: " << e.what() << " (expected fbd or circuit)\n";
        return 2;
    }
    if (jobs < 1) {
        err << "usage error: --jobs must be at least 1\n";
        return 2;
    }
    try {
        const auto m = synth::generate_benchmark(domain, out_dir, seed, jobs);
        out << "generated " << m.samples.size() << " " << to_string(domain) << " samples in " << out_dir.string()
            << " (seed " << seed << ")\n";
        auto print = [&](const char* name, const std::map<std::string, int>& h) {
            out << "  " << name << ":";
            for (const auto& [k, v] : h) out << " " << k << "=" << v;
            out << "\n";
        };
        print("split", m.split_histogram);
        print("noise", m.noise_histogram);
        print("cycle", m.cycle_histogram);
        print("error types", m.error_type_histogram);
        return 0;
    } catch (const std::exception& e) {
        err << "generate failed: " << e.what() << "\n";
        return 1;
    }
}

int cmd_run(const RunConfig& cfg_in, std::ostream& out, std::ostream& err) {
    if (cfg_in.predictions_out.empty()) {
        err << "usage error: an output path for predictions is required\n";
        return 2;
    }
    try {
        splits_of(cfg_in.split);
    } catch (const Error& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    }
    try {
        RunConfig cfg = cfg_in;
        if (cfg.pipeline.external.endpoint.empty()) {
            if (const char* env = std::getenv(kEndpointEnv)) cfg.pipeline.external.endpoint = env;
        }
        const auto manifest = synth::load_manifest(cfg.dataset);
        const auto reports = run_samples(manifest, cfg);
        const std::string hash = config_hash(cfg);
        std::string lines;
        int fallbacks = 0;
        for (const auto& r : reports) {
            json j = make_record(r);
            j["config_hash"] = hash;
            j["dataset_seed"] = manifest.master_seed;
            j["oracle_perception"] = cfg.oracle_perception;
            j["external_fallback"] = r.external_fallback;
            fallbacks += r.external_fallback;
            lines += j.dump() + "\n";
        }
        write_file_atomic(cfg.predictions_out, lines);
        json run_info = config_to_json(cfg);
        run_info["config_hash"] = hash;
        run_info["dataset_seed"] = manifest.master_seed;
        run_info["n_predictions"] = reports.size();
        write_file_atomic(cfg.predictions_out.string() + ".config.json", run_info.dump(2) + "\n");
        out << "wrote " << reports.size() << " predictions (" << to_string(cfg.mode)
            << (cfg.oracle_perception ? ", oracle perception" : "") << ") to " << cfg.predictions_out.string()
            << "\n";
        if (cfg.mode == PipelineMode::External) out << "  template fallbacks: " << fallbacks << "\n";
        return 0;
    } catch (const std::exception& e) {
        err << "run failed: " << e.what() << "\n";
        return 1;
    }
}

int cmd_eval(const std::filesystem::path& predictions, const std::filesystem::path& dataset,
             const std::filesystem::path& out_json, const std::optional<std::filesystem::path>& out_md,
             int n_bootstrap, std::uint64_t seed, const std::string& split, std::ostream& out, std::ostream& err) {
    if (n_bootstrap < 1) {
        err << "usage error: n_bootstrap must be at least 1\n";
        return 2;
    }
    try {
        const auto splits = splits_of(split);
        if (splits.size() != 1) throw Error("eval scores one split at a time (test or train)");
        const auto manifest = synth::load_manifest(dataset);
        auto records = read_predictions(predictions);
        const std::string text = read_file(predictions);
        const auto raw = parse_json(text.substr(0, text.find('\n')), predictions.string());
        const auto report = evaluate(manifest, std::move(records), n_bootstrap, seed, splits.front());
        json j = report;
        j["run_info"] = {{"predictions", predictions.string()},
                         {"dataset_seed", manifest.master_seed},
                         {"config_hash", raw.value("config_hash", "")}};
        write_file_atomic(out_json, j.dump(2) + "\n");
        const std::string md = render_markdown({report});
        if (out_md) write_file_atomic(*out_md, md);
        out << md;
        return 0;
    } catch (const std::exception& e) {
        err << "eval failed: " << e.what() << "\n";
        return 1;
    }
}

int cmd_report(const std::vector<std::filesystem::path>& reports, const std::optional<std::filesystem::path>& out_md,
               std::ostream& out, std::ostream& err) {
    if (reports.empty()) {
        err << "usage error: at least one report is required\n";
        return 2;
    }
    try {
        std::vector<MetricsReport> parsed;
        for (const auto& p : reports) {
            try {
                parsed.push_back(parse_json(read_file(p), p.string()).get<MetricsReport>());
            } catch (const json::exception& e) {
                throw Error(p.string() + ": " + e.what());
            } catch (const Error& e) {
                throw Error(p.string() + ": " + e.what());
            }
        }
        const std::string md = render_markdown(parsed);
        if (out_md) write_file_atomic(*out_md, md);
        out << md;
        return 0;
    } catch (const std::exception& e) {
        err << "report failed: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace cli
}  // namespace dgf
