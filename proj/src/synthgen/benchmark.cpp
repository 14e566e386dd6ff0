#include <atomic>
#include <cstdio>
#include <exception>
#include <mutex>
#include <thread>

#include "dgf/json_io.hpp"
#include "dgf/synthgen.hpp"

namespace dgf::synth {
namespace {

std::string level_name(double level) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "%.1f", level);
    return buf;
}

std::string make_sample_id(const std::string& scenario_id, int index) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "%02d", index);
    return scenario_id + "_" + buf;
}

json sample_json(const DiagramSample& s) {
    return {{"sample_id", s.sample_id},
            {"scenario_id", s.scenario_id},
            {"domain", to_string(s.domain)},
            {"sample_index", s.sample_index},
            {"image_path", s.image_path},
            {"noise_level", round4(s.noise.level)},
            {"split", to_string(s.split)},
            {"seed", s.render_seed},
            {"errors", s.injected_errors},
            {"primitives", s.gt_primitives}};
}

DiagramSample sample_from_json(const json& j) {
    DiagramSample s;
    s.sample_id = j.at("sample_id").get<std::string>();
    s.scenario_id = j.at("scenario_id").get<std::string>();
    s.domain = parse_domain(j.at("domain").get<std::string>());
    s.sample_index = j.at("sample_index").get<int>();
    s.image_path = j.at("image_path").get<std::string>();
    s.noise = NoiseParams::from_level(j.at("noise_level").get<double>());
    const auto split = j.at("split").get<std::string>();
    if (split != "train" && split != "test") throw Error("bad split '" + split + "'");
    s.split = split == "test" ? Split::Test : Split::Train;
    s.render_seed = j.at("seed").get<std::uint64_t>();
    s.injected_errors = j.at("errors").get<std::vector<InjectedError>>();
    s.gt_primitives = j.at("primitives").get<std::vector<Primitive>>();
    return s;
}

void fill_histograms(Manifest& m) {
    m.noise_histogram.clear();
    m.cycle_histogram.clear();
    m.error_type_histogram.clear();
    m.split_histogram.clear();
    for (const auto& s : m.samples) {
        ++m.noise_histogram[level_name(s.noise.level)];
        ++m.cycle_histogram[std::string(cycle_slot_name(s.domain, s.cycle_slot()))];
        if (s.injected_errors.empty()) ++m.error_type_histogram["none"];
        for (const auto& e : s.injected_errors) ++m.error_type_histogram[std::string(to_string(e.error_type))];
        ++m.split_histogram[std::string(to_string(s.split))];
    }
}

}  // namespace

const DiagramSample* Manifest::find(const std::string& sample_id) const {
    for (const auto& s : samples) {
        if (s.sample_id == sample_id) return &s;
    }
    return nullptr;
}

Manifest generate_benchmark(Domain domain, const std::filesystem::path& out_dir,
                            std::uint64_t master_seed, int jobs) {
    Manifest m;
    m.domain = domain;
    m.master_seed = master_seed;

    const auto keys = list_scenarios(domain);
    std::vector<SplitSlot> slots;
    for (const auto& key : keys) {
        for (int i = 0; i < kSamplesPerScenario; ++i) {
            DiagramSample s;
            s.sample_id = make_sample_id(key.id, i);
            s.scenario_id = key.id;
            s.domain = domain;
            s.sample_index = i;
            s.image_path = "images/" + s.sample_id + ".png";
            s.noise = assign_noise(i);
            s.injected_errors = error_cycle(domain, i, key);
            s.render_seed = sample_seed(master_seed, key.id, i);
            m.samples.push_back(std::move(s));
            slots.push_back({key.id, i});
        }
    }
    const auto splits = stratified_split(slots);
    for (std::size_t i = 0; i < m.samples.size(); ++i) m.samples[i].split = splits[i];

    std::error_code ec;
    std::filesystem::create_directories(out_dir / "images", ec);
    std::filesystem::create_directories(out_dir / "annotations", ec);
    if (ec) throw Error("cannot create dataset directory " + out_dir.string() + ": " + ec.message());

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < m.samples.size(); i = next++) {
            try {
                auto& s = m.samples[i];
                const auto key = find_scenario(s.scenario_id);
                auto r = render_sample(key, s.injected_errors, s.noise, s.render_seed, m.render);
                s.injected_errors = std::move(r.realized_errors);
                s.gt_primitives = std::move(r.gt_primitives);
                write_png(r.image, out_dir / s.image_path);
                write_file_atomic(out_dir / "annotations" / (s.sample_id + ".json"),
                                  sample_json(s).dump(2) + "\n");
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const int n_threads = std::max(1, jobs);
    std::vector<std::thread> pool;
    for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);

    fill_histograms(m);

    json records = json::array();
    for (const auto& s : m.samples) records.push_back(sample_json(s));
    const json doc = {
        {"domain", to_string(domain)},
        {"master_seed", master_seed},
        {"render",
         {{"width", m.render.width},
          {"height", m.render.height},
          {"background", m.render.background},
          {"stroke", m.render.stroke},
          {"stroke_width", m.render.stroke_width}}},
        {"samples", records},
        {"histograms",
         {{"noise_level", m.noise_histogram},
          {"cycle_slot", m.cycle_histogram},
          {"error_type", m.error_type_histogram},
          {"split", m.split_histogram}}}};
    write_file_atomic(out_dir / "manifest.json", doc.dump(1) + "\n");
    return m;
}

Manifest load_manifest(const std::filesystem::path& dataset_dir) {
    const auto path = dataset_dir / "manifest.json";
    const json doc = parse_json(read_file(path), path.string());
    Manifest m;
    try {
        m.domain = parse_domain(doc.at("domain").get<std::string>());
        m.master_seed = doc.at("master_seed").get<std::uint64_t>();
        const auto& r = doc.at("render");
        m.render.width = r.at("width").get<int>();
        m.render.height = r.at("height").get<int>();
        m.render.background = r.at("background").get<std::uint8_t>();
        m.render.stroke = r.at("stroke").get<std::uint8_t>();
        m.render.stroke_width = r.at("stroke_width").get<double>();
        for (const auto& s : doc.at("samples")) m.samples.push_back(sample_from_json(s));
    } catch (const json::exception& e) {
        throw Error("malformed manifest " + path.string() + ": " + e.what());
    }
    fill_histograms(m);
    return m;
}

}  // namespace dgf::synth
