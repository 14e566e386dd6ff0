#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dgf/core.hpp"
#include "dgf/graph.hpp"
#include "dgf/json_io.hpp"

namespace dgf {

struct ConstraintConfig {
    double direction_tolerance = 25.0;  // deg, strict
    double anchor_tolerance = 30.0;     // px, strict
    double force_balance_tau_ratio = 0.2;
    double polarity_tolerance = 45.0;   // deg, strict
    /// Arrows farther than this from a key anchor never match that force.
    double force_match_radius = 120.0;
    /// Matching cost = tail distance (px) + direction_weight * angle difference (deg).
    double direction_weight = 0.5;
    double component_match_radius = 150.0;
    /// Unmatched arrows allowed before ExtraForce fires.
    int extra_force_margin = 0;
    double crossing_distance = 6.0;   // px between a wire end and another wire
    double crossing_interior = 4.0;   // px the crossing must sit inside a segment
    double junction_radius = 6.0;     // px from crossing to a junction box
    double absence_confidence = 0.9;

    void validate() const;
};

struct Violation {
    std::string constraint_id;
    ErrorType error_type = ErrorType::MissingForce;
    std::string target;
    std::vector<NodeId> evidence;
    double confidence = 0.0;
    json params = json::object();
};

void to_json(json& j, const Violation& v);
void from_json(const json& j, Violation& v);

/// Global greedy assignment of arrows to key forces by ascending cost; ties
/// fall to key order, then node order.
struct ForceMatch {
    std::vector<std::optional<NodeId>> arrow_for_force;  // parallel to key.required_forces
    std::vector<NodeId> unmatched_arrows;
};
ForceMatch match_forces(const SymbolicGraph& g, const ScenarioKey& key, const ConstraintConfig& cfg = {});

/// Greedy nearest assignment of same-kind component nodes to key components.
std::vector<std::optional<NodeId>> match_components(const SymbolicGraph& g, const ScenarioKey& key,
                                                    const ConstraintConfig& cfg = {});

std::vector<Violation> check_required_forces(const SymbolicGraph& g, const ScenarioKey& key,
                                             const ConstraintConfig& cfg = {});
std::vector<Violation> check_force_directions(const SymbolicGraph& g, const ScenarioKey& key,
                                              const ConstraintConfig& cfg = {});
std::vector<Violation> check_anchor(const SymbolicGraph& g, const ScenarioKey& key,
                                    const ConstraintConfig& cfg = {});
std::vector<Violation> check_extra_forces(const SymbolicGraph& g, const ScenarioKey& key,
                                          const ConstraintConfig& cfg = {});
std::vector<Violation> check_force_balance(const SymbolicGraph& g, const ScenarioKey& key,
                                           const ConstraintConfig& cfg = {});
std::vector<Violation> check_component_presence(const SymbolicGraph& g, const ScenarioKey& key,
                                                const ConstraintConfig& cfg = {});
std::vector<Violation> check_connectivity(const SymbolicGraph& g, const ScenarioKey& key,
                                          const ConstraintConfig& cfg = {});
std::vector<Violation> check_polarity(const SymbolicGraph& g, const ScenarioKey& key,
                                      const ConstraintConfig& cfg = {});
std::vector<Violation> check_ground(const SymbolicGraph& g, const ScenarioKey& key,
                                    const ConstraintConfig& cfg = {});
std::vector<Violation> check_junction_semantics(const SymbolicGraph& g, const ScenarioKey& key,
                                                const ConstraintConfig& cfg = {});

/// All checks of the key's domain in fixed order. Force balance only runs on a
/// diagram with no per-force violation, so one drawing mistake is reported once.
std::vector<Violation> check_all(const SymbolicGraph& g, const ScenarioKey& key, const ConstraintConfig& cfg = {});

}  // namespace dgf
