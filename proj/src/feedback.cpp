#include "dgf/feedback.hpp"

#include <httplib.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <iostream>
#include <map>
#include <mutex>

namespace dgf {
namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

void log_warning(const std::string& msg) {
    static std::mutex mu;
    std::lock_guard lock(mu);
    std::clog << "warning: " << msg << '\n';
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

std::string quote_name(std::string_view s) { return "'" + std::string(s) + "'"; }

std::string fmt_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.0f", v);
    return buf;
}

std::string direction_words(double deg) {
    const double d = normalize_deg(std::round(deg));
    static const std::pair<double, const char*> named[] = {
        {0, "right"}, {90, "up"}, {180, "left"}, {270, "down"},
        {45, "up and to the right"}, {135, "up and to the left"},
        {225, "down and to the left"}, {315, "down and to the right"}};
    for (const auto& [a, w] : named) {
        if (angle_diff(d, a) < 1.0) return w;
    }
    return "at " + fmt_num(d) + " degrees";
}

double param(const Violation& v, const char* name, double fallback = 0.0) {
    auto it = v.params.find(name);
    return it != v.params.end() && it->is_number() ? it->get<double>() : fallback;
}

std::string param_str(const Violation& v, const char* name, const std::string& fallback) {
    auto it = v.params.find(name);
    return it != v.params.end() && it->is_string() ? it->get<std::string>() : fallback;
}

RubricItem fbd_item(const Violation& v) {
    const std::string t = quote_name(v.target);
    RubricItem it{v, "", ""};
    switch (v.error_type) {
        case ErrorType::MissingForce:
            if (v.constraint_id == "force_balance") {
                it.diagnosis_text = "Missing force: the drawn forces on this static body do not balance; the net " +
                                    t + " points " + direction_words(param(v, "net_direction")) + ".";
                it.fix_text = "Add the force that cancels " + t + ".";
            } else {
                it.diagnosis_text = "Missing force: " + t + " is not drawn on the body.";
                it.fix_text = "Add an arrow for " + t + " pointing " +
                              direction_words(param(v, "expected_direction")) + " from where it acts.";
            }
            break;
        case ErrorType::WrongDirection:
            it.diagnosis_text = "Wrong direction: " + t + " points " +
                                direction_words(param(v, "observed_direction")) + ".";
            it.fix_text = "Redraw " + t + " so it points " + direction_words(param(v, "expected_direction")) + ".";
            break;
        case ErrorType::AnchorError:
            it.diagnosis_text = "Misplaced anchor: " + t + " starts " + fmt_num(param(v, "offset")) +
                                " px from the point where it acts.";
            it.fix_text = "Move the tail of " + t + " to its point of application.";
            break;
        case ErrorType::ExtraForce:
            it.diagnosis_text = "Extra force: " + t + " does not act on this body.";
            it.fix_text = "Remove " + t + " from the diagram.";
            break;
        default:
            break;
    }
    return it;
}

RubricItem circuit_item(const Violation& v, const ScenarioKey& key) {
    const std::string t = quote_name(v.target);
    RubricItem it{v, "", ""};
    switch (v.error_type) {
        case ErrorType::WrongPolarity:
            it.diagnosis_text = "Reversed polarity: " + t + " faces the wrong way.";
            it.fix_text = "Flip " + t + " so it points " + direction_words(param(v, "expected_direction")) + ".";
            break;
        case ErrorType::OpenCircuit:
            if (v.constraint_id == "connection") {
                const std::string a = quote_name(param_str(v, "from", v.target));
                const std::string b = quote_name(param_str(v, "to", v.target));
                it.diagnosis_text = "Open circuit: " + a + " and " + b + " are not joined by a wire.";
                it.fix_text = "Connect " + a + " to " + b + " with a wire.";
            } else {
                it.diagnosis_text = "Open circuit: one terminal of " + t + " is left unwired.";
                it.fix_text = "Connect the loose terminal of " + t + " to the rest of the circuit.";
            }
            break;
        case ErrorType::IllegalJunction: {
            auto want = v.params.find("expected_dot");
            const bool dot = want != v.params.end() && want->is_boolean() && want->get<bool>();
            if (dot) {
                it.diagnosis_text = "Junction: two wires meet at a " + t + " without a connection dot.";
                it.fix_text = "Redraw the " + t + " with a dot where the wires join.";
            } else {
                it.diagnosis_text = "Junction: a dot joins wires that should only pass over each other.";
                it.fix_text = "Redraw the " + t + " without the dot.";
            }
            break;
        }
        case ErrorType::MissingGround:
            it.diagnosis_text = "Missing ground: the circuit has no ground symbol.";
            it.fix_text = "Add a " + t + " symbol on the return wire.";
            break;
        case ErrorType::MissingComponent: {
            const auto* kc = key.find_component(v.target);
            const std::string kind = kc ? std::string(to_string(kc->kind)) : "component";
            it.diagnosis_text = "Missing component: " + t + " is not drawn.";
            it.fix_text = "Add the " + kind + " " + t + " in its place in the circuit.";
            break;
        }
        default:
            break;
    }
    return it;
}

std::string vision_summary(const std::vector<Primitive>& dets) {
    std::map<std::string, int> counts;
    for (const auto& p : dets) {
        std::string name;
        switch (p.kind) {
            case PrimitiveKind::ForceArrow: name = "arrow"; break;
            case PrimitiveKind::Wire: name = "wire"; break;
            case PrimitiveKind::Junction: name = "dot"; break;
            case PrimitiveKind::GroundSymbol: name = "earth symbol"; break;
            case PrimitiveKind::Component: name = std::string(to_string(*p.component_kind)); break;
            default: continue;
        }
        ++counts[name];
    }
    std::string s = "Detected:";
    bool first = true;
    for (const auto& [name, n] : counts) {
        s += (first ? " " : ", ") + std::to_string(n) + " " + name + (n == 1 ? "" : "s");
        first = false;
    }
    if (first) s += " nothing";
    return s + ".";
}

struct Endpoint {
    std::string base;  // scheme://host:port
    std::string path;
};

std::optional<Endpoint> split_endpoint(const std::string& url) {
    const auto scheme = url.find("://");
    if (scheme == std::string::npos) return std::nullopt;
    const auto slash = url.find('/', scheme + 3);
    Endpoint e;
    e.base = url.substr(0, slash);
    std::string prefix = slash == std::string::npos ? "" : url.substr(slash);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    e.path = prefix + "/feedback";
    return e;
}

}  // namespace

const std::vector<std::string_view>& error_keywords(ErrorType t) {
    static const std::map<ErrorType, std::vector<std::string_view>> table = {
        {ErrorType::MissingForce, {"missing force"}},
        {ErrorType::WrongDirection, {"wrong direction"}},
        {ErrorType::AnchorError, {"misplaced anchor", "anchor error"}},
        {ErrorType::ExtraForce, {"extra force"}},
        {ErrorType::WrongPolarity, {"reversed polarity", "wrong polarity"}},
        {ErrorType::OpenCircuit, {"open circuit"}},
        {ErrorType::IllegalJunction, {"junction"}},
        {ErrorType::MissingGround, {"missing ground"}},
        {ErrorType::MissingComponent, {"missing component"}},
    };
    return table.at(t);
}

std::string_view fix_verb(ErrorType t) {
    switch (t) {
        case ErrorType::MissingForce: return "add";
        case ErrorType::WrongDirection: return "redraw";
        case ErrorType::AnchorError: return "move";
        case ErrorType::ExtraForce: return "remove";
        case ErrorType::WrongPolarity: return "flip";
        case ErrorType::OpenCircuit: return "connect";
        case ErrorType::IllegalJunction: return "redraw";
        case ErrorType::MissingGround: return "add";
        case ErrorType::MissingComponent: return "add";
    }
    throw Error("unknown error type");
}

std::vector<ErrorType> extract_error_types(std::string_view text) {
    const std::string low = lower(text);
    std::vector<ErrorType> out;
    for (ErrorType t : kAllErrorTypes) {
        for (auto kw : error_keywords(t)) {
            if (low.find(kw) != std::string::npos) {
                out.push_back(t);
                break;
            }
        }
    }
    return out;
}

std::vector<RubricItem> map_to_rubric(const std::vector<Violation>& violations, const ScenarioKey& key) {
    std::vector<RubricItem> out;
    out.reserve(violations.size());
    for (const auto& v : violations) {
        if (domain_of(v.error_type) != key.domain) {
            throw Error("violation '" + std::string(to_string(v.error_type)) + "' does not belong to key '" + key.id +
                        "'");
        }
        out.push_back(key.domain == Domain::Fbd ? fbd_item(v) : circuit_item(v, key));
    }
    return out;
}

std::string render_feedback(const std::vector<RubricItem>& items) {
    if (items.empty()) return std::string(kCorrectDiagramText);
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += '\n';
        out += std::to_string(i + 1) + ". " + items[i].diagnosis_text + " " + items[i].fix_text;
    }
    return out;
}

std::string_view to_string(PipelineMode m) {
    switch (m) {
        case PipelineMode::Grammar: return "grammar";
        case PipelineMode::VisionOnly: return "vision-only";
        case PipelineMode::External: return "external";
    }
    return "?";
}

PipelineMode parse_pipeline_mode(std::string_view s) {
    if (s == "grammar") return PipelineMode::Grammar;
    if (s == "vision-only") return PipelineMode::VisionOnly;
    if (s == "external") return PipelineMode::External;
    throw Error("unknown mode '" + std::string(s) + "' (expected grammar, vision-only or external)");
}

ExternalResult external_generate(const std::vector<RubricItem>& items, const GrayImage& image,
                                 const ExternalConfig& cfg) {
    auto fallback = [&](std::string why) {
        log_warning("external generator: " + why + "; using template feedback");
        return ExternalResult{render_feedback(items), true, std::move(why)};
    };
    if (cfg.endpoint.empty()) return fallback("no endpoint configured");
    const auto ep = split_endpoint(cfg.endpoint);
    if (!ep) return fallback("malformed endpoint '" + cfg.endpoint + "'");

    json violations = json::array();
    for (const auto& it : items) violations.push_back(it.violation);
    const json body = {{"image_b64", httplib::detail::base64_encode(encode_png(image))},
                       {"violations", violations},
                       {"rubric_prompt", cfg.rubric_prompt}};
    try {
        httplib::Client client(ep->base);
        const auto secs = std::chrono::duration<double>(cfg.timeout_s);
        const auto us = std::chrono::duration_cast<std::chrono::microseconds>(secs);
        client.set_connection_timeout(us);
        client.set_read_timeout(us);
        client.set_write_timeout(us);
        auto res = client.Post(ep->path, body.dump(), "application/json");
        if (!res) return fallback("request failed (" + httplib::to_string(res.error()) + ")");
        if (res->status != 200) return fallback("HTTP status " + std::to_string(res->status));
        const json reply = json::parse(res->body, nullptr, false);
        if (reply.is_discarded() || !reply.is_object()) return fallback("response is not a JSON object");
        auto text = reply.find("text");
        if (text == reply.end() || !text->is_string()) return fallback("response has no string 'text'");
        return {text->get<std::string>(), false, ""};
    } catch (const std::exception& e) {
        return fallback(e.what());
    }
}

Stage1Result run_stage1(const GrayImage& image, const PerceptionConfig& cfg) {
    const auto t0 = Clock::now();
    Stage1Result r;
    r.primitives = detect_all(image, cfg);
    r.elapsed_ms = ms_since(t0);
    return r;
}

std::vector<Violation> vision_only_violations(const std::vector<Primitive>& detections, const ScenarioKey& key,
                                              const ConstraintConfig& cfg) {
    auto absent = [&](std::string id, ErrorType t, std::string target, json params = json::object()) {
        Violation v;
        v.constraint_id = std::move(id);
        v.error_type = t;
        v.target = std::move(target);
        v.confidence = cfg.absence_confidence;
        v.params = std::move(params);
        return v;
    };
    auto count = [&](auto pred) {
        return static_cast<std::size_t>(std::count_if(detections.begin(), detections.end(), pred));
    };
    std::vector<Violation> out;
    if (key.domain == Domain::Fbd) {
        const std::size_t arrows = count([](const Primitive& p) { return p.kind == PrimitiveKind::ForceArrow; });
        for (std::size_t i = arrows; i < key.required_forces.size(); ++i) {
            const auto& f = key.required_forces[i];
            out.push_back(absent("vision_absence", ErrorType::MissingForce, f.name,
                                 {{"expected_direction", f.direction_deg}}));
        }
        return out;
    }
    std::map<ComponentKind, std::size_t> seen;
    for (const auto& c : key.components) {
        const std::size_t have = count([&](const Primitive& p) { return p.is_component(c.kind); });
        if (++seen[c.kind] > have) {
            out.push_back(absent("vision_absence", ErrorType::MissingComponent, c.id,
                                 {{"kind", to_string(c.kind)}}));
        }
    }
    if (key.requires_ground && count([](const Primitive& p) { return p.kind == PrimitiveKind::GroundSymbol; }) == 0) {
        out.push_back(absent("vision_absence", ErrorType::MissingGround, "ground"));
    }
    return out;
}

FeedbackReport run_pipeline(const GrayImage& image, const ScenarioKey& key, PipelineMode mode,
                            const PipelineConfig& cfg, const std::optional<Stage1Result>& stage1) {
    if (image.empty()) throw Error("run_pipeline: empty image");
    validate(key);
    cfg.constraints.validate();
    const Stage1Result s1 = stage1 ? *stage1 : run_stage1(image, cfg.perception);

    FeedbackReport r;
    r.mode = mode;
    r.n_detections = s1.primitives.size();
    r.latency.perception_ms = s1.elapsed_ms;
    const auto t_rest = Clock::now();

    if (mode == PipelineMode::VisionOnly) {
        auto t = Clock::now();
        r.violations = vision_only_violations(s1.primitives, key, cfg.constraints);
        r.text = render_feedback(map_to_rubric(r.violations, key));
        if (!r.violations.empty()) r.text += "\n" + vision_summary(s1.primitives);
        r.latency.feedback_ms = ms_since(t);
    } else {
        auto t = Clock::now();
        std::vector<Primitive> nodes;
        nodes.reserve(s1.primitives.size());
        for (const auto& p : s1.primitives) {
            if (p.kind != PrimitiveKind::Body && p.kind != PrimitiveKind::Label) nodes.push_back(p);
        }
        const SymbolicGraph g = build_graph(std::move(nodes), cfg.graph);
        r.latency.graph_ms = ms_since(t);

        t = Clock::now();
        r.violations = check_all(g, key, cfg.constraints);
        r.latency.constraints_ms = ms_since(t);

        t = Clock::now();
        const auto items = map_to_rubric(r.violations, key);
        if (mode == PipelineMode::External && !items.empty()) {
            auto ext = external_generate(items, image, cfg.external);
            r.text = std::move(ext.text);
            r.external_fallback = ext.fallback;
        } else {
            r.text = render_feedback(items);
        }
        r.latency.feedback_ms = ms_since(t);
    }
    r.latency.total_ms = s1.elapsed_ms + ms_since(t_rest);
    return r;
}

FeedbackReport run_pipeline(const std::filesystem::path& image_path, const ScenarioKey& key, PipelineMode mode,
                            const PipelineConfig& cfg) {
    return run_pipeline(read_png(image_path), key, mode, cfg);
}

void to_json(json& j, const StageLatency& l) {
    j = {{"perception_ms", l.perception_ms},
         {"graph_ms", l.graph_ms},
         {"constraints_ms", l.constraints_ms},
         {"feedback_ms", l.feedback_ms},
         {"total_ms", l.total_ms}};
}

void from_json(const json& j, StageLatency& l) {
    l.perception_ms = j.at("perception_ms").get<double>();
    l.graph_ms = j.at("graph_ms").get<double>();
    l.constraints_ms = j.at("constraints_ms").get<double>();
    l.feedback_ms = j.at("feedback_ms").get<double>();
    l.total_ms = j.at("total_ms").get<double>();
}

void to_json(json& j, const FeedbackReport& r) {
    j = {{"sample_id", r.sample_id},
         {"mode", to_string(r.mode)},
         {"violations", r.violations},
         {"text", r.text},
         {"latency_ms", r.latency},
         {"n_detections", r.n_detections},
         {"external_fallback", r.external_fallback}};
}

}  // namespace dgf
