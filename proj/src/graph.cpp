#include "dgf/graph.hpp"

#include <algorithm>
#include <deque>

namespace dgf {

KindFilter KindFilter::any() {
    KindFilter f;
    f.all_ = true;
    return f;
}

bool KindFilter::matches(PrimitiveKind k) const {
    return all_ || std::find(kinds_.begin(), kinds_.end(), k) != kinds_.end();
}

SymbolicGraph::SymbolicGraph(std::vector<Primitive> nodes, std::vector<std::pair<NodeId, NodeId>> edges)
    : nodes_(std::move(nodes)), adjacency_(nodes_.size()) {
    for (auto [u, v] : edges) {
        if (u == v) throw Error("graph: self-edge on node " + std::to_string(u));
        if (u >= nodes_.size() || v >= nodes_.size()) throw Error("graph: edge references unknown node");
        if (u > v) std::swap(u, v);
        edges_.emplace_back(u, v);
    }
    std::sort(edges_.begin(), edges_.end());
    edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
    for (auto [u, v] : edges_) {
        adjacency_[u].push_back(v);
        adjacency_[v].push_back(u);
    }
    for (auto& a : adjacency_) std::sort(a.begin(), a.end());
}

const Primitive& SymbolicGraph::node(NodeId id) const {
    if (id >= nodes_.size()) throw Error("graph: unknown node id " + std::to_string(id));
    return nodes_[id];
}

const std::vector<NodeId>& SymbolicGraph::adjacent(NodeId id) const {
    if (id >= nodes_.size()) throw Error("graph: unknown node id " + std::to_string(id));
    return adjacency_[id];
}

bool SymbolicGraph::has_edge(NodeId a, NodeId b) const {
    const auto& adj = adjacent(a);
    return std::binary_search(adj.begin(), adj.end(), b);
}

SymbolicGraph build_graph(std::vector<Primitive> primitives, const GraphConfig& cfg) {
    if (!(cfg.proximity_radius > 0.0)) throw Error("graph: proximity_radius must be positive");
    for (const auto& p : primitives) validate(p);
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (NodeId i = 0; i < primitives.size(); ++i) {
        for (NodeId j = i + 1; j < primitives.size(); ++j) {
            if (bbox_gap(primitives[i].bbox, primitives[j].bbox) < cfg.proximity_radius) edges.emplace_back(i, j);
        }
    }
    return SymbolicGraph(std::move(primitives), std::move(edges));
}

bool connected(const SymbolicGraph& g, NodeId a, NodeId b, const KindFilter& via) {
    g.node(a);
    g.node(b);
    if (a == b) return true;
    std::vector<bool> seen(g.size(), false);
    std::deque<NodeId> queue{a};
    seen[a] = true;
    while (!queue.empty()) {
        const NodeId u = queue.front();
        queue.pop_front();
        for (NodeId v : g.adjacent(u)) {
            if (v == b) return true;
            if (seen[v] || !via.matches(g.node(v).kind)) continue;
            seen[v] = true;
            queue.push_back(v);
        }
    }
    return false;
}

std::vector<NodeId> neighbors(const SymbolicGraph& g, NodeId id, const KindFilter& filter) {
    std::vector<NodeId> out;
    for (NodeId v : g.adjacent(id)) {
        if (filter.matches(g.node(v).kind)) out.push_back(v);
    }
    return out;
}

json graph_to_json(const SymbolicGraph& g) {
    json nodes = json::array();
    for (NodeId i = 0; i < g.size(); ++i) {
        json n = g.node(i);
        n["id"] = i;
        nodes.push_back(n);
    }
    json edges = json::array();
    for (auto [u, v] : g.edges()) edges.push_back({u, v});
    return {{"nodes", nodes}, {"edges", edges}};
}

}  // namespace dgf
