#include "dgf/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace dgf {
namespace {

void require(const ScenarioKey& key, Domain d, const char* check) {
    if (key.domain != d) {
        throw Error(std::string(check) + " needs a " + std::string(to_string(d)) + " key, got '" + key.id + "'");
    }
}

struct ArrowGeom {
    Point tail;
    Point tip;
    double orientation;
    double length;
};

ArrowGeom arrow_geom(const Primitive& p) {
    if (p.endpoints) {
        const auto [tail, tip] = *p.endpoints;
        return {tail, tip, p.orientation.value_or(orientation_of(tail, tip)), distance(tail, tip)};
    }
    const Point c = p.bbox.center();
    const double o = p.orientation.value_or(0.0);
    const double len = std::hypot(p.bbox.width(), p.bbox.height());
    return {c, c + direction_vector(o) * len, o, len};
}

std::vector<NodeId> nodes_of(const SymbolicGraph& g, PrimitiveKind k) {
    std::vector<NodeId> out;
    for (NodeId i = 0; i < g.size(); ++i) {
        if (g.node(i).kind == k) out.push_back(i);
    }
    return out;
}

double evidence_confidence(const SymbolicGraph& g, const std::vector<NodeId>& evidence, const ConstraintConfig& cfg) {
    if (evidence.empty()) return cfg.absence_confidence;
    double c = 1.0;
    for (NodeId n : evidence) c = std::min(c, g.node(n).confidence);
    return c;
}

Violation make(const SymbolicGraph& g, const ConstraintConfig& cfg, std::string constraint_id, ErrorType type,
               std::string target, std::vector<NodeId> evidence, json params = json::object()) {
    Violation v;
    v.constraint_id = std::move(constraint_id);
    v.error_type = type;
    v.target = std::move(target);
    v.confidence = evidence_confidence(g, evidence, cfg);
    v.evidence = std::move(evidence);
    v.params = std::move(params);
    return v;
}

double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }

struct Crossing {
    Point at;
    NodeId wire_a;
    NodeId wire_b;
};

// Wire end touching the interior of another wire (T) or two interiors meeting (X).
std::vector<Crossing> find_crossings(const SymbolicGraph& g, const ConstraintConfig& cfg) {
    std::vector<NodeId> wires;
    for (NodeId n : nodes_of(g, PrimitiveKind::Wire)) {
        if (g.node(n).endpoints) wires.push_back(n);
    }
    auto closest = [](Point p, Point a, Point b, double& t_px) {
        const Point ab = b - a;
        const double len = std::hypot(ab.x, ab.y);
        double t = len > 0 ? dot(p - a, ab) / (len * len) : 0.0;
        t = std::clamp(t, 0.0, 1.0);
        t_px = std::min(t, 1.0 - t) * len;  // distance from the nearer end
        return a + ab * t;
    };
    std::vector<Crossing> out;
    for (std::size_t i = 0; i < wires.size(); ++i) {
        for (std::size_t j = i + 1; j < wires.size(); ++j) {
            const auto [a0, a1] = *g.node(wires[i]).endpoints;
            const auto [b0, b1] = *g.node(wires[j]).endpoints;
            std::optional<Point> hit;
            // Proper intersection of both interiors.
            const Point r = a1 - a0, s = b1 - b0;
            const double denom = r.x * s.y - r.y * s.x;
            if (std::abs(denom) > 1e-9) {
                const Point q = b0 - a0;
                const double t = (q.x * s.y - q.y * s.x) / denom;
                const double u = (q.x * r.y - q.y * r.x) / denom;
                const double la = std::hypot(r.x, r.y), lb = std::hypot(s.x, s.y);
                if (std::min(t, 1 - t) * la >= cfg.crossing_interior && std::min(u, 1 - u) * lb >= cfg.crossing_interior) {
                    hit = a0 + r * t;
                }
            }
            // An end of one wire resting on the interior of the other.
            const std::tuple<Point, Point, Point> ends[] = {
                {a0, b0, b1}, {a1, b0, b1}, {b0, a0, a1}, {b1, a0, a1}};
            for (const auto& [e, p, q] : ends) {
                if (hit) break;
                double t_px = 0.0;
                const Point c = closest(e, p, q, t_px);
                if (distance(e, c) <= cfg.crossing_distance && t_px >= cfg.crossing_interior) hit = c;
            }
            if (hit) out.push_back({*hit, wires[i], wires[j]});
        }
    }
    return out;
}

double point_box_distance(Point p, const BBox& b) {
    const double dx = std::max({b.x_min - p.x, 0.0, p.x - b.x_max});
    const double dy = std::max({b.y_min - p.y, 0.0, p.y - b.y_max});
    return std::hypot(dx, dy);
}

}  // namespace

void ConstraintConfig::validate() const {
    for (double v : {direction_tolerance, anchor_tolerance, force_balance_tau_ratio, polarity_tolerance,
                     force_match_radius, component_match_radius, crossing_distance, junction_radius}) {
        if (!(v > 0.0)) throw Error("constraint config: tolerances must be positive");
    }
    if (direction_weight < 0.0 || crossing_interior < 0.0 || extra_force_margin < 0) {
        throw Error("constraint config: weights and margins must be non-negative");
    }
    if (!(absence_confidence >= 0.0 && absence_confidence <= 1.0)) {
        throw Error("constraint config: absence_confidence must be in [0,1]");
    }
}

void to_json(json& j, const Violation& v) {
    j = {{"constraint_id", v.constraint_id},
         {"error_type", to_string(v.error_type)},
         {"target", v.target},
         {"evidence", v.evidence},
         {"confidence", round4(v.confidence)},
         {"params", v.params}};
}

void from_json(const json& j, Violation& v) {
    v.constraint_id = j.at("constraint_id").get<std::string>();
    v.error_type = parse_error_type(j.at("error_type").get<std::string>());
    v.target = j.at("target").get<std::string>();
    v.evidence = j.value("evidence", std::vector<NodeId>{});
    v.confidence = j.at("confidence").get<double>();
    if (!(v.confidence >= 0.0 && v.confidence <= 1.0)) throw Error("violation confidence outside [0,1]");
    v.params = j.value("params", json::object());
}

ForceMatch match_forces(const SymbolicGraph& g, const ScenarioKey& key, const ConstraintConfig& cfg) {
    require(key, Domain::Fbd, "force matching");
    const auto arrows = nodes_of(g, PrimitiveKind::ForceArrow);
    struct Cand {
        double cost;
        std::size_t force;
        NodeId node;
    };
    std::vector<Cand> cands;
    for (std::size_t f = 0; f < key.required_forces.size(); ++f) {
        const auto& rf = key.required_forces[f];
        for (NodeId n : arrows) {
            const auto a = arrow_geom(g.node(n));
            const double d = distance(a.tail, rf.anchor);
            if (d > cfg.force_match_radius) continue;
            cands.push_back({d + cfg.direction_weight * angle_diff(a.orientation, rf.direction_deg), f, n});
        }
    }
    std::stable_sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
        return std::tie(a.cost, a.force, a.node) < std::tie(b.cost, b.force, b.node);
    });
    ForceMatch m;
    m.arrow_for_force.assign(key.required_forces.size(), std::nullopt);
    std::vector<bool> taken(g.size(), false);
    for (const auto& c : cands) {
        if (m.arrow_for_force[c.force] || taken[c.node]) continue;
        m.arrow_for_force[c.force] = c.node;
        taken[c.node] = true;
    }
    for (NodeId n : arrows) {
        if (!taken[n]) m.unmatched_arrows.push_back(n);
    }
    return m;
}

std::vector<std::optional<NodeId>> match_components(const SymbolicGraph& g, const ScenarioKey& key,
                                                    const ConstraintConfig& cfg) {
    require(key, Domain::Circuit, "component matching");
    struct Cand {
        double dist;
        std::size_t comp;
        NodeId node;
    };
    std::vector<Cand> cands;
    for (std::size_t c = 0; c < key.components.size(); ++c) {
        const auto& kc = key.components[c];
        for (NodeId n = 0; n < g.size(); ++n) {
            if (!g.node(n).is_component(kc.kind)) continue;
            const double d = distance(g.node(n).bbox.center(), kc.position);
            if (d <= cfg.component_match_radius) cands.push_back({d, c, n});
        }
    }
    std::stable_sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
        return std::tie(a.dist, a.comp, a.node) < std::tie(b.dist, b.comp, b.node);
    });
    std::vector<std::optional<NodeId>> out(key.components.size());
    std::vector<bool> taken(g.size(), false);
    for (const auto& c : cands) {
        if (out[c.comp] || taken[c.node]) continue;
        out[c.comp] = c.node;
        taken[c.node] = true;
    }
    return out;
}

std::vector<Violation> check_required_forces(const SymbolicGraph& g, const ScenarioKey& key,
                                             const ConstraintConfig& cfg) {
    const auto m = match_forces(g, key, cfg);
    std::vector<Violation> out;
    for (std::size_t f = 0; f < key.required_forces.size(); ++f) {
        if (m.arrow_for_force[f]) continue;
        const auto& rf = key.required_forces[f];
        out.push_back(make(g, cfg, "required_force", ErrorType::MissingForce, rf.name, {},
                           {{"expected_direction", rf.direction_deg}, {"expected_anchor", rf.anchor}}));
    }
    return out;
}

std::vector<Violation> check_force_directions(const SymbolicGraph& g, const ScenarioKey& key,
                                              const ConstraintConfig& cfg) {
    const auto m = match_forces(g, key, cfg);
    std::vector<Violation> out;
    for (std::size_t f = 0; f < key.required_forces.size(); ++f) {
        if (!m.arrow_for_force[f]) continue;
        const auto& rf = key.required_forces[f];
        const auto a = arrow_geom(g.node(*m.arrow_for_force[f]));
        const double diff = angle_diff(a.orientation, rf.direction_deg);
        if (diff > cfg.direction_tolerance) {
            out.push_back(make(g, cfg, "force_direction", ErrorType::WrongDirection, rf.name, {*m.arrow_for_force[f]},
                               {{"expected_direction", rf.direction_deg},
                                {"observed_direction", round4(a.orientation)},
                                {"difference", round4(diff)}}));
        }
    }
    return out;
}

std::vector<Violation> check_anchor(const SymbolicGraph& g, const ScenarioKey& key, const ConstraintConfig& cfg) {
    const auto m = match_forces(g, key, cfg);
    std::vector<Violation> out;
    for (std::size_t f = 0; f < key.required_forces.size(); ++f) {
        if (!m.arrow_for_force[f]) continue;
        const auto& rf = key.required_forces[f];
        const auto a = arrow_geom(g.node(*m.arrow_for_force[f]));
        const double d = distance(a.tail, rf.anchor);
        if (d > cfg.anchor_tolerance) {
            out.push_back(make(g, cfg, "force_anchor", ErrorType::AnchorError, rf.name, {*m.arrow_for_force[f]},
                               {{"expected_anchor", rf.anchor}, {"observed_tail", a.tail}, {"offset", round4(d)}}));
        }
    }
    return out;
}

std::vector<Violation> check_extra_forces(const SymbolicGraph& g, const ScenarioKey& key,
                                          const ConstraintConfig& cfg) {
    const auto m = match_forces(g, key, cfg);
    std::vector<Violation> out;
    if (static_cast<int>(m.unmatched_arrows.size()) <= cfg.extra_force_margin) return out;
    for (NodeId n : m.unmatched_arrows) {
        const auto a = arrow_geom(g.node(n));
        out.push_back(make(g, cfg, "extra_force", ErrorType::ExtraForce, g.node(n).label.value_or("arrow_" + std::to_string(n)),
                           {n}, {{"observed_tail", a.tail}, {"observed_direction", round4(a.orientation)}}));
    }
    return out;
}

std::vector<Violation> check_force_balance(const SymbolicGraph& g, const ScenarioKey& key,
                                           const ConstraintConfig& cfg) {
    require(key, Domain::Fbd, "force balance");
    std::vector<Violation> out;
    if (!key.is_static) return out;
    const auto arrows = nodes_of(g, PrimitiveKind::ForceArrow);
    Point net;
    for (NodeId n : arrows) {
        const auto a = arrow_geom(g.node(n));
        net = net + direction_vector(a.orientation) * a.length;
    }
    const double norm = std::hypot(net.x, net.y);
    const double tau = cfg.force_balance_tau_ratio * key.mean_force_magnitude();
    if (norm >= tau) {
        out.push_back(make(g, cfg, "force_balance", ErrorType::MissingForce, "net_force", arrows,
                           {{"net_magnitude", round4(norm)},
                            {"net_direction", round4(orientation_of({0, 0}, net))},
                            {"tau", round4(tau)}}));
    }
    return out;
}

std::vector<Violation> check_component_presence(const SymbolicGraph& g, const ScenarioKey& key,
                                                const ConstraintConfig& cfg) {
    const auto m = match_components(g, key, cfg);
    std::vector<Violation> out;
    for (std::size_t c = 0; c < key.components.size(); ++c) {
        if (m[c]) continue;
        const auto& kc = key.components[c];
        out.push_back(make(g, cfg, "component_presence", ErrorType::MissingComponent, kc.id, {},
                           {{"kind", to_string(kc.kind)}, {"expected_position", kc.position}}));
    }
    return out;
}

std::vector<Violation> check_connectivity(const SymbolicGraph& g, const ScenarioKey& key,
                                          const ConstraintConfig& cfg) {
    const auto m = match_components(g, key, cfg);
    const KindFilter via{PrimitiveKind::Wire, PrimitiveKind::Junction};
    std::vector<Violation> out;

    for (const auto& [a, b] : key.connections) {
        std::size_t ia = 0, ib = 0;
        for (std::size_t c = 0; c < key.components.size(); ++c) {
            if (key.components[c].id == a) ia = c;
            if (key.components[c].id == b) ib = c;
        }
        if (!m[ia] || !m[ib]) continue;  // presence reports the absence
        if (!connected(g, *m[ia], *m[ib], via)) {
            out.push_back(make(g, cfg, "connection", ErrorType::OpenCircuit, a + "-" + b, {*m[ia], *m[ib]},
                               {{"from", a}, {"to", b}}));
        }
    }

    // Nets: connected pieces of the wire/junction subgraph.
    std::vector<int> net(g.size(), -1);
    int n_nets = 0;
    for (NodeId s = 0; s < g.size(); ++s) {
        if (net[s] >= 0 || !via.matches(g.node(s).kind)) continue;
        std::vector<NodeId> stack{s};
        net[s] = n_nets;
        while (!stack.empty()) {
            const NodeId u = stack.back();
            stack.pop_back();
            for (NodeId v : neighbors(g, u, via)) {
                if (net[v] < 0) {
                    net[v] = n_nets;
                    stack.push_back(v);
                }
            }
        }
        ++n_nets;
    }
    // A two-terminal part needs a distinct net on each side.
    for (std::size_t c = 0; c < key.components.size(); ++c) {
        if (!m[c]) continue;
        std::vector<int> touching;
        for (NodeId v : neighbors(g, *m[c], via)) touching.push_back(net[v]);
        std::sort(touching.begin(), touching.end());
        touching.erase(std::unique(touching.begin(), touching.end()), touching.end());
        if (touching.size() < 2) {
            const auto& id = key.components[c].id;
            out.push_back(make(g, cfg, "terminal", ErrorType::OpenCircuit, id, {*m[c]},
                               {{"component", id}, {"nets", touching.size()}}));
        }
    }
    return out;
}

std::vector<Violation> check_polarity(const SymbolicGraph& g, const ScenarioKey& key, const ConstraintConfig& cfg) {
    const auto m = match_components(g, key, cfg);
    std::vector<Violation> out;
    for (std::size_t c = 0; c < key.components.size(); ++c) {
        const auto& kc = key.components[c];
        if (!kc.polarity_deg || !m[c]) continue;
        const auto& node = g.node(*m[c]);
        if (!node.orientation) continue;
        const double diff = angle_diff(*node.orientation, *kc.polarity_deg);
        if (diff > cfg.polarity_tolerance) {
            out.push_back(make(g, cfg, "polarity", ErrorType::WrongPolarity, kc.id, {*m[c]},
                               {{"expected_direction", *kc.polarity_deg},
                                {"observed_direction", round4(*node.orientation)},
                                {"difference", round4(diff)}}));
        }
    }
    return out;
}

std::vector<Violation> check_ground(const SymbolicGraph& g, const ScenarioKey& key, const ConstraintConfig& cfg) {
    require(key, Domain::Circuit, "ground check");
    std::vector<Violation> out;
    if (key.requires_ground && nodes_of(g, PrimitiveKind::GroundSymbol).empty()) {
        out.push_back(make(g, cfg, "ground", ErrorType::MissingGround, "ground", {}));
    }
    return out;
}

std::vector<Violation> check_junction_semantics(const SymbolicGraph& g, const ScenarioKey& key,
                                                const ConstraintConfig& cfg) {
    require(key, Domain::Circuit, "junction check");
    std::vector<Violation> out;
    if (!key.crossing_wires_connected) return out;
    const auto dots = nodes_of(g, PrimitiveKind::Junction);
    for (const auto& x : find_crossings(g, cfg)) {
        std::optional<NodeId> dot_node;
        for (NodeId d : dots) {
            if (point_box_distance(x.at, g.node(d).bbox) <= cfg.junction_radius) {
                dot_node = d;
                break;
            }
        }
        const bool want_dot = *key.crossing_wires_connected;
        if (want_dot == dot_node.has_value()) continue;
        std::vector<NodeId> evidence{x.wire_a, x.wire_b};
        if (dot_node) evidence.push_back(*dot_node);
        out.push_back(make(g, cfg, "junction", ErrorType::IllegalJunction, "crossing", evidence,
                           {{"at", x.at}, {"expected_dot", want_dot}}));
    }
    return out;
}

std::vector<Violation> check_all(const SymbolicGraph& g, const ScenarioKey& key, const ConstraintConfig& cfg) {
    cfg.validate();
    validate(key);
    std::vector<Violation> out;
    auto append = [&](std::vector<Violation> v) { out.insert(out.end(), v.begin(), v.end()); };
    if (key.domain == Domain::Fbd) {
        append(check_required_forces(g, key, cfg));
        append(check_force_directions(g, key, cfg));
        append(check_anchor(g, key, cfg));
        append(check_extra_forces(g, key, cfg));
        if (out.empty()) append(check_force_balance(g, key, cfg));
    } else {
        append(check_component_presence(g, key, cfg));
        append(check_connectivity(g, key, cfg));
        append(check_polarity(g, key, cfg));
        append(check_ground(g, key, cfg));
        append(check_junction_semantics(g, key, cfg));
    }
    return out;
}

}  // namespace dgf
