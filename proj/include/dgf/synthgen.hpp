#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "dgf/core.hpp"
#include "dgf/image.hpp"

namespace dgf::synth {

/// Augmentation strength. The derived coefficients are linear in `level`.
struct NoiseParams {
    double level = 0.0;

    double stroke_jitter_sigma() const { return 3.0 * level; }
    double pixel_noise_sigma() const { return 25.0 * level; }
    double rotation_max_deg() const { return 5.0 * level; }
    double brightness_max() const { return 20.0 * level; }

    /// Accepts only the five benchmark levels 0.0, 0.1, ..., 0.4.
    static NoiseParams from_level(double level);
};

struct RenderConfig {
    int width = 640;
    int height = 480;
    std::uint8_t background = 255;
    std::uint8_t stroke = 0;
    double stroke_width = 2.0;
};

enum class Split { Train, Test };
std::string_view to_string(Split s);

inline constexpr int kScenariosPerDomain = 10;
inline constexpr int kSamplesPerScenario = 20;
inline constexpr int kCycleLength = 5;

struct DiagramSample {
    std::string sample_id;
    std::string scenario_id;
    Domain domain = Domain::Fbd;
    int sample_index = 0;
    std::string image_path;  // relative to the dataset root
    NoiseParams noise;
    std::vector<InjectedError> injected_errors;
    std::vector<Primitive> gt_primitives;
    Split split = Split::Train;
    std::uint64_t render_seed = 0;

    int cycle_slot() const { return sample_index % kCycleLength; }
};

std::vector<ScenarioKey> list_scenarios(Domain domain);
/// Throws dgf::Error for unknown ids.
ScenarioKey find_scenario(const std::string& scenario_id);

/// Name of each error-cycle slot as used in histograms: "none" then the
/// primary error type of the slot.
std::string_view cycle_slot_name(Domain domain, int slot);

std::vector<InjectedError> error_cycle(Domain domain, int sample_index, const ScenarioKey& key);

NoiseParams assign_noise(int sample_index);

struct RenderResult {
    GrayImage image;
    std::vector<Primitive> gt_primitives;
    /// Errors with `detail` filled in from the concrete draw (angles, offsets).
    std::vector<InjectedError> realized_errors;
    /// Ink mask before pixel noise (1 = stroke pixel); used by soundness checks.
    BinaryMap stroke_mask;
    /// Index of the gt primitive that inked each pixel (-1 = background).
    std::vector<int> owner;
};

/// Pure function of its arguments. Throws dgf::Error if an error does not fit
/// the key (unknown target, non-polar component, ...).
RenderResult render_sample(const ScenarioKey& key, const std::vector<InjectedError>& errors,
                           const NoiseParams& noise, std::uint64_t seed,
                           const RenderConfig& config = {});

struct SplitSlot {
    std::string scenario_id;
    int sample_index = 0;
};

/// For scenario j (in first-appearance order), test = the lowest-index sample of
/// each cycle slot (j+k) mod 5, k = 0..3. Requires 200 samples, 20 per scenario.
std::vector<Split> stratified_split(std::span<const SplitSlot> samples);

std::uint64_t sample_seed(std::uint64_t master_seed, const std::string& scenario_id,
                          int sample_index);

struct Manifest {
    Domain domain = Domain::Fbd;
    std::uint64_t master_seed = 0;
    RenderConfig render;
    std::vector<DiagramSample> samples;
    std::map<std::string, int> noise_histogram;
    std::map<std::string, int> cycle_histogram;
    std::map<std::string, int> error_type_histogram;
    std::map<std::string, int> split_histogram;

    const DiagramSample* find(const std::string& sample_id) const;
};

/// Writes images/, annotations/ and manifest.json under out_dir.
Manifest generate_benchmark(Domain domain, const std::filesystem::path& out_dir,
                            std::uint64_t master_seed, int jobs = 1);

Manifest load_manifest(const std::filesystem::path& dataset_dir);

}  // namespace dgf::synth
