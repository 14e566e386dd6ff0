#include "library.hpp"

#include <algorithm>

namespace dgf::synth::detail {
namespace {

// Body and the anchor ring around it (8 px clear of the outline).
constexpr BBox kBody{280, 215, 360, 265};
constexpr Point kBottom{320, 273};
constexpr Point kTop{320, 207};
constexpr Point kRight{368, 240};
constexpr Point kLeft{272, 240};
constexpr Point kTopLeft{272, 207};
constexpr Point kTopRight{368, 207};
constexpr Point kBottomLeft{272, 273};
constexpr Point kBottomRight{368, 273};

RequiredForce pick_extra_force(const std::vector<RequiredForce>& forces) {
    const std::pair<Point, double> candidates[] = {
        {kBottomRight, 315.0}, {kBottomLeft, 225.0}, {kTopRight, 45.0}, {kTopLeft, 135.0}};
    for (const auto& [anchor, dir] : candidates) {
        const bool used = std::any_of(forces.begin(), forces.end(), [&](const RequiredForce& f) {
            return distance(f.anchor, anchor) < 10.0;
        });
        if (!used) return {"extra_force", dir, anchor, 80.0};
    }
    return {"extra_force", 315.0, kBottomRight, 80.0};
}

Scenario fbd(std::string id, bool is_static, std::vector<RequiredForce> forces,
             std::vector<std::pair<Point, Point>> decorations = {}) {
    Scenario s;
    s.key.id = std::move(id);
    s.key.domain = Domain::Fbd;
    s.key.is_static = is_static;
    s.fbd.body = kBody;
    s.fbd.extra = pick_extra_force(forces);
    s.fbd.decorations = std::move(decorations);
    s.key.required_forces = std::move(forces);
    return s;
}

std::vector<Scenario> build_fbd() {
    const std::pair<Point, Point> ceiling{{220, 60}, {420, 60}};
    std::vector<Scenario> v;
    // Incline rising at 37 degrees: weight, normal and static friction close the triangle.
    v.push_back(fbd("inclined_plane", true,
                    {{"gravity", 270, kBottom, 125},
                     {"normal", 127, kTopLeft, 100},
                     {"friction", 37, kTopRight, 75}}));
    v.push_back(fbd("hanging_mass", true,
                    {{"gravity", 270, kBottom, 100}, {"tension", 90, kTop, 100}}, {ceiling}));
    v.push_back(fbd("pushing_block", true,
                    {{"gravity", 270, kBottom, 100},
                     {"normal", 90, kTop, 100},
                     {"applied", 0, kRight, 80},
                     {"friction", 180, kLeft, 80}}));
    v.push_back(fbd("car_on_road", true,
                    {{"gravity", 270, kBottom, 110},
                     {"normal", 90, kTop, 110},
                     {"drive", 0, kRight, 90},
                     {"drag", 180, kLeft, 90}}));
    v.push_back(fbd("pendulum", false,
                    {{"gravity", 270, kBottom, 100}, {"tension", 120, kTopLeft, 90}}));
    v.push_back(fbd("block_on_table", true,
                    {{"gravity", 270, kBottom, 100}, {"normal", 90, kTop, 100}}));
    v.push_back(fbd("sliding_block", false,
                    {{"gravity", 270, kBottom, 100},
                     {"normal", 90, kTop, 100},
                     {"friction", 180, kLeft, 75}}));
    v.push_back(fbd("elevator", true,
                    {{"gravity", 270, kBottom, 110}, {"tension", 90, kTop, 110}}));
    v.push_back(fbd("projectile", false, {{"gravity", 270, kBottom, 100}}));
    v.push_back(fbd("spring_mass", true,
                    {{"gravity", 270, kBottom, 90}, {"spring", 90, kTop, 90}}, {ceiling}));
    return v;
}

struct CircuitSpec {
    std::string id;
    std::vector<Placement> parts;
    std::vector<std::pair<Point, Point>> wires;
    std::vector<std::pair<std::string, std::string>> connections;
    std::vector<OpenCandidate> open;
    std::vector<Point> dots = {};
    std::optional<Point> ground = std::nullopt;
    std::optional<bool> crossing = std::nullopt;
};

bool is_polar(ComponentKind k) {
    return k == ComponentKind::Diode || k == ComponentKind::Led ||
           k == ComponentKind::CurrentSource;
}

Scenario circuit(CircuitSpec spec) {
    Scenario s;
    s.key.id = spec.id;
    s.key.domain = Domain::Circuit;
    for (const auto& p : spec.parts) {
        KeyComponent c;
        c.id = p.id;
        c.kind = p.kind;
        c.position = p.center;
        if (is_polar(p.kind)) c.polarity_deg = p.orientation;
        s.key.components.push_back(c);
    }
    s.key.connections = std::move(spec.connections);
    s.key.requires_ground = spec.ground.has_value();
    s.key.crossing_wires_connected = spec.crossing;
    s.circuit.components = std::move(spec.parts);
    s.circuit.wires = std::move(spec.wires);
    s.circuit.dots = std::move(spec.dots);
    s.circuit.ground = spec.ground;
    s.circuit.open_candidates = std::move(spec.open);
    return s;
}

// Rectangular loop: left symbol at (120,240), top symbol at (320,100), right at (520,240).
std::vector<std::pair<Point, Point>> loop_wires() {
    return {{{120, 210}, {120, 100}}, {{120, 100}, {290, 100}}, {{350, 100}, {520, 100}},
            {{520, 100}, {520, 210}}, {{520, 270}, {520, 380}}, {{520, 380}, {120, 380}},
            {{120, 380}, {120, 270}}};
}

// Two-symbol loop: left at (120,240), right at (520,240).
std::vector<std::pair<Point, Point>> two_symbol_wires() {
    return {{{120, 210}, {120, 100}}, {{120, 100}, {520, 100}}, {{520, 100}, {520, 210}},
            {{520, 270}, {520, 380}}, {{520, 380}, {120, 380}}, {{120, 380}, {120, 270}}};
}

std::vector<Scenario> build_circuit() {
    using K = ComponentKind;
    const Placement battery{"B1", K::Battery, {120, 240}, 90};
    std::vector<Scenario> v;

    v.push_back(circuit({"series",
                         {battery, {"R1", K::Resistor, {320, 100}, 0}, {"R2", K::Resistor, {520, 240}, 90}},
                         loop_wires(),
                         {{"B1", "R1"}, {"R1", "R2"}, {"R2", "B1"}},
                         {{6, "B1"}, {3, "R2"}, {1, "R1"}}}));

    v.push_back(circuit({"parallel",
                         {battery, {"R1", K::Resistor, {320, 240}, 90}, {"R2", K::Resistor, {520, 240}, 90}},
                         {{{120, 210}, {120, 100}}, {{120, 100}, {520, 100}}, {{320, 100}, {320, 210}},
                          {{520, 100}, {520, 210}}, {{120, 270}, {120, 380}}, {{120, 380}, {520, 380}},
                          {{320, 270}, {320, 380}}, {{520, 270}, {520, 380}}},
                         {{"B1", "R1"}, {"B1", "R2"}},
                         {{3, "R2"}, {6, "R1"}, {0, "B1"}},
                         {{320, 100}, {320, 380}},
                         std::nullopt,
                         true}));

    v.push_back(circuit({"series_parallel",
                         {battery, {"R1", K::Resistor, {260, 100}, 0}, {"R2", K::Resistor, {420, 240}, 90},
                          {"R3", K::Resistor, {520, 240}, 90}},
                         {{{120, 210}, {120, 100}}, {{120, 100}, {230, 100}}, {{290, 100}, {520, 100}},
                          {{420, 100}, {420, 210}}, {{520, 100}, {520, 210}}, {{120, 270}, {120, 380}},
                          {{120, 380}, {520, 380}}, {{420, 270}, {420, 380}}, {{520, 270}, {520, 380}}},
                         {{"B1", "R1"}, {"R1", "R2"}, {"R1", "R3"}, {"R2", "B1"}, {"R3", "B1"}},
                         {{4, "R3"}, {1, "R1"}, {3, "R2"}},
                         {{420, 100}, {420, 380}},
                         std::nullopt,
                         true}));

    v.push_back(circuit({"diode_polarity",
                         {battery, {"D1", K::Diode, {320, 100}, 0}, {"R1", K::Resistor, {520, 240}, 90}},
                         loop_wires(),
                         {{"B1", "D1"}, {"D1", "R1"}, {"R1", "B1"}},
                         {{6, "B1"}, {3, "R1"}, {1, "D1"}}}));

    v.push_back(circuit({"battery_resistor",
                         {battery, {"R1", K::Resistor, {520, 240}, 90}},
                         two_symbol_wires(),
                         {{"B1", "R1"}},
                         {{2, "R1"}, {5, "B1"}, {3, "R1"}}}));

    v.push_back(circuit({"led_resistor",
                         {battery, {"R1", K::Resistor, {320, 100}, 0}, {"L1", K::Led, {520, 240}, 270}},
                         loop_wires(),
                         {{"B1", "R1"}, {"R1", "L1"}, {"L1", "B1"}},
                         {{6, "B1"}, {3, "L1"}, {1, "R1"}}}));

    v.push_back(circuit({"voltage_divider",
                         {battery, {"R1", K::Resistor, {520, 180}, 90}, {"R2", K::Resistor, {520, 320}, 90}},
                         {{{120, 210}, {120, 100}}, {{120, 100}, {520, 100}}, {{520, 100}, {520, 150}},
                          {{520, 210}, {520, 290}}, {{520, 250}, {600, 250}}, {{520, 350}, {520, 380}},
                          {{520, 380}, {120, 380}}, {{120, 380}, {120, 270}}},
                         {{"B1", "R1"}, {"R1", "R2"}, {"R2", "B1"}},
                         {{1, "R1"}, {7, "B1"}, {0, "B1"}},
                         {{520, 250}},
                         std::nullopt,
                         true}));

    v.push_back(circuit({"current_source",
                         {{"I1", K::CurrentSource, {120, 240}, 90}, {"R1", K::Resistor, {520, 240}, 90}},
                         two_symbol_wires(),
                         {{"I1", "R1"}},
                         {{2, "R1"}, {5, "I1"}, {3, "R1"}}}));

    v.push_back(circuit({"capacitor_charge",
                         {battery, {"R1", K::Resistor, {320, 100}, 0}, {"C1", K::Capacitor, {520, 240}, 90}},
                         loop_wires(),
                         {{"B1", "R1"}, {"R1", "C1"}, {"C1", "B1"}},
                         {{6, "B1"}, {3, "C1"}, {1, "R1"}}}));

    auto grounded_wires = loop_wires();
    grounded_wires.push_back({{320, 380}, {320, 420}});
    v.push_back(circuit({"grounded_reference",
                         {battery, {"R1", K::Resistor, {320, 100}, 0}, {"R2", K::Resistor, {520, 240}, 90}},
                         grounded_wires,
                         {{"B1", "R1"}, {"R1", "R2"}, {"R2", "B1"}},
                         {{6, "B1"}, {3, "R2"}, {1, "R1"}},
                         {},
                         Point{320, 440}}));
    return v;
}

}  // namespace

Point ground_terminal(Point center) { return {center.x, center.y - 20.0}; }

const std::vector<Scenario>& library(Domain domain) {
    static const std::vector<Scenario> fbd_lib = build_fbd();
    static const std::vector<Scenario> circuit_lib = build_circuit();
    return domain == Domain::Fbd ? fbd_lib : circuit_lib;
}

const Scenario* find(const std::string& scenario_id) {
    for (Domain d : {Domain::Fbd, Domain::Circuit}) {
        for (const auto& s : library(d)) {
            if (s.key.id == scenario_id) return &s;
        }
    }
    return nullptr;
}

}  // namespace dgf::synth::detail
