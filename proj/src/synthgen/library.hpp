#pragma once

// Scenario drawings behind the public keys. Internal to synthgen.

#include <optional>
#include <string>
#include <vector>

#include "dgf/core.hpp"

namespace dgf::synth::detail {

/// Distance wires stop short of symbol terminals; keeps each symbol its own
/// connected component and different nets more than the graph radius apart.
inline constexpr double kTerminalGap = 16.0;
/// Half the end-to-end span of every two-terminal symbol.
inline constexpr double kSymbolHalfSpan = 30.0;
inline constexpr double kArrowHeadLength = 12.0;
inline constexpr double kArrowHeadHalfWidth = 4.0;
inline constexpr double kJunctionRadius = 4.0;

struct Placement {
    std::string id;
    ComponentKind kind;
    Point center;
    double orientation;
};

struct OpenCandidate {
    int wire;
    std::string target;
};

struct CircuitLayout {
    std::vector<Placement> components;
    std::vector<std::pair<Point, Point>> wires;  // before terminal trimming
    std::vector<Point> dots;
    std::optional<Point> ground;  // symbol center; terminal 20 px above
    std::vector<OpenCandidate> open_candidates;
};

struct FbdLayout {
    BBox body;
    RequiredForce extra;
    std::vector<std::pair<Point, Point>> decorations;  // unlabeled strokes (ceilings)
};

struct Scenario {
    ScenarioKey key;
    FbdLayout fbd;
    CircuitLayout circuit;
};

const std::vector<Scenario>& library(Domain domain);
/// nullptr when the id is not part of the library.
const Scenario* find(const std::string& scenario_id);

Point ground_terminal(Point center);

}  // namespace dgf::synth::detail
