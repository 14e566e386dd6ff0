#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dgf/constraints.hpp"
#include "dgf/core.hpp"
#include "dgf/graph.hpp"
#include "dgf/image.hpp"
#include "dgf/json_io.hpp"
#include "dgf/perception.hpp"

namespace dgf {

inline constexpr std::string_view kCorrectDiagramText = "Diagram looks correct per scenario key.";

/// Keyword phrases that mark a mention of each error type in feedback text.
/// The first entry is the one the templates use.
const std::vector<std::string_view>& error_keywords(ErrorType t);

/// The single fix verb attached to each error type.
std::string_view fix_verb(ErrorType t);

/// Error types whose keywords occur in `text` (case-insensitive), in enum order.
std::vector<ErrorType> extract_error_types(std::string_view text);

struct RubricItem {
    Violation violation;
    std::string diagnosis_text;
    std::string fix_text;
};

/// One item per violation. Throws dgf::Error for a violation outside the key's domain.
std::vector<RubricItem> map_to_rubric(const std::vector<Violation>& violations, const ScenarioKey& key);

/// Numbered "diagnosis fix" lines, or kCorrectDiagramText for no items.
std::string render_feedback(const std::vector<RubricItem>& items);

enum class PipelineMode { Grammar, VisionOnly, External };
std::string_view to_string(PipelineMode m);
/// Accepts grammar, vision-only and external.
PipelineMode parse_pipeline_mode(std::string_view s);

inline constexpr std::string_view kDefaultRubricPrompt =
    "You are grading a student's diagram. Explain each listed violation in one sentence "
    "and give one concrete fix for it. Do not mention problems that are not listed.";

struct ExternalConfig {
    /// Base URL such as http://127.0.0.1:8080; the request goes to <base>/feedback.
    std::string endpoint;
    double timeout_s = 10.0;
    std::string rubric_prompt = std::string(kDefaultRubricPrompt);
};

struct ExternalResult {
    std::string text;
    bool fallback = false;
    std::string warning;  // set when fallback is true
};

/// POSTs {image_b64, violations, rubric_prompt} and returns the response's
/// "text" verbatim. Any failure returns render_feedback(items) and logs a warning.
/// Safe to call from several threads.
ExternalResult external_generate(const std::vector<RubricItem>& items, const GrayImage& image,
                                 const ExternalConfig& cfg);

struct PipelineConfig {
    PerceptionConfig perception;
    GraphConfig graph;
    ConstraintConfig constraints;
    ExternalConfig external;  // used by PipelineMode::External
};

/// Stage 1 output computed elsewhere: ground-truth primitives in oracle mode,
/// or one detection run shared by several modes.
struct Stage1Result {
    std::vector<Primitive> primitives;
    double elapsed_ms = 0.0;
};

Stage1Result run_stage1(const GrayImage& image, const PerceptionConfig& cfg = {});

struct StageLatency {
    double perception_ms = 0.0;
    double graph_ms = 0.0;
    double constraints_ms = 0.0;
    double feedback_ms = 0.0;
    double total_ms = 0.0;
};

struct FeedbackReport {
    std::string sample_id;
    PipelineMode mode = PipelineMode::Grammar;
    std::vector<Violation> violations;
    std::string text;
    StageLatency latency;
    std::size_t n_detections = 0;
    bool external_fallback = false;
};

void to_json(json& j, const StageLatency& l);
void from_json(const json& j, StageLatency& l);
void to_json(json& j, const FeedbackReport& r);

/// Runs the pipeline on one image. Without `stage1` the detector runs here.
FeedbackReport run_pipeline(const GrayImage& image, const ScenarioKey& key, PipelineMode mode,
                            const PipelineConfig& cfg = {}, const std::optional<Stage1Result>& stage1 = {});

/// Loads the PNG first; unreadable files raise dgf::Error.
FeedbackReport run_pipeline(const std::filesystem::path& image_path, const ScenarioKey& key, PipelineMode mode,
                            const PipelineConfig& cfg = {});

/// Baseline violations: key elements with fewer same-kind detections than the
/// key requires, counted over the whole image.
std::vector<Violation> vision_only_violations(const std::vector<Primitive>& detections, const ScenarioKey& key,
                                              const ConstraintConfig& cfg = {});

}  // namespace dgf
