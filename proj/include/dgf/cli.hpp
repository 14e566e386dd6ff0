#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "dgf/feedback.hpp"
#include "dgf/json_io.hpp"
#include "dgf/synthgen.hpp"

namespace dgf::cli {

inline constexpr const char* kEndpointEnv = "DGF_FEEDBACK_ENDPOINT";

struct RunConfig {
    PipelineConfig pipeline;
    PipelineMode mode = PipelineMode::Grammar;
    std::filesystem::path dataset;
    std::string split = "test";  // test, train or all
    std::filesystem::path predictions_out;
    int n_bootstrap = 10000;
    std::uint64_t bootstrap_seed = 0;
    bool oracle_perception = false;
    int jobs = 1;
};

/// Every threshold of every stage, so a config file can override any of them.
json config_to_json(const RunConfig& cfg);

/// Starts from defaults and applies the keys present in `j`. Unknown keys and
/// wrongly typed values raise dgf::Error naming the key.
RunConfig config_from_json(const json& j);
RunConfig load_config(const std::filesystem::path& path);

/// FNV-1a over the canonical JSON dump, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

// Each command returns the process exit status: 0 on success, 1 on a runtime
// failure (reported on `err`), 2 on bad arguments.
int cmd_generate(const std::string& benchmark, const std::filesystem::path& out_dir, std::uint64_t seed, int jobs,
                 std::ostream& out, std::ostream& err);
int cmd_run(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_eval(const std::filesystem::path& predictions, const std::filesystem::path& dataset,
             const std::filesystem::path& out_json, const std::optional<std::filesystem::path>& out_md,
             int n_bootstrap, std::uint64_t seed, const std::string& split, std::ostream& out, std::ostream& err);
int cmd_report(const std::vector<std::filesystem::path>& reports, const std::optional<std::filesystem::path>& out_md,
               std::ostream& out, std::ostream& err);

/// Primitives handed to Stage 2 in oracle mode: the generator's ground truth.
Stage1Result oracle_stage1(const synth::DiagramSample& sample);

/// Runs the pipeline over the samples of `split` using `jobs` threads. Records
/// come back in manifest order.
std::vector<FeedbackReport> run_samples(const synth::Manifest& manifest, const RunConfig& cfg);

}  // namespace dgf::cli
