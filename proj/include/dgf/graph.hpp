#pragma once

#include <initializer_list>
#include <utility>
#include <vector>

#include "dgf/core.hpp"
#include "dgf/json_io.hpp"

namespace dgf {

using NodeId = std::size_t;

struct GraphConfig {
    double proximity_radius = 80.0;  // px, strict: bbox_gap < radius
};

/// Set of primitive kinds; default-constructed filters match nothing.
class KindFilter {
public:
    KindFilter() = default;
    KindFilter(std::initializer_list<PrimitiveKind> kinds) : kinds_(kinds) {}
    static KindFilter any();

    bool matches(PrimitiveKind k) const;

private:
    std::vector<PrimitiveKind> kinds_;
    bool all_ = false;
};

class SymbolicGraph {
public:
    SymbolicGraph() = default;
    SymbolicGraph(std::vector<Primitive> nodes, std::vector<std::pair<NodeId, NodeId>> edges);

    std::size_t size() const { return nodes_.size(); }
    const Primitive& node(NodeId id) const;
    const std::vector<Primitive>& nodes() const { return nodes_; }
    /// Sorted (u < v) pairs.
    const std::vector<std::pair<NodeId, NodeId>>& edges() const { return edges_; }
    /// Ascending neighbour ids.
    const std::vector<NodeId>& adjacent(NodeId id) const;
    bool has_edge(NodeId a, NodeId b) const;

private:
    std::vector<Primitive> nodes_;
    std::vector<std::pair<NodeId, NodeId>> edges_;
    std::vector<std::vector<NodeId>> adjacency_;
};

SymbolicGraph build_graph(std::vector<Primitive> primitives, const GraphConfig& cfg = {});

/// True when a path joins a and b whose interior nodes all match `via`.
/// Throws dgf::Error for unknown ids.
bool connected(const SymbolicGraph& g, NodeId a, NodeId b, const KindFilter& via);

std::vector<NodeId> neighbors(const SymbolicGraph& g, NodeId id, const KindFilter& filter);

/// {nodes: [primitive...], edges: [[u, v], ...]}
json graph_to_json(const SymbolicGraph& g);

}  // namespace dgf
