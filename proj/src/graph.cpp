#include "dynflow/graph.hpp"

#include <algorithm>
#include <cstdlib>

namespace dynflow {

DynGraph::DynGraph(VertexId num_vertices, std::int64_t insertion_budget,
                   std::int64_t cost_bound, std::int64_t capacity_bound)
    : num_vertices_(num_vertices),
      insertion_budget_(insertion_budget),
      cost_bound_(cost_bound),
      capacity_bound_(capacity_bound) {
  if (num_vertices < 0) throw Error("graph: negative vertex count");
  if (insertion_budget < 0) throw Error("graph: negative insertion budget");
}

EdgeId DynGraph::insert_edge(VertexId tail, VertexId head, std::int64_t capacity,
                             std::int64_t cost) {
  if (tail < 0 || tail >= num_vertices_ || head < 0 || head >= num_vertices_)
    throw Error("insert_edge: vertex out of range");
  if (capacity < 0) throw Error("insert_edge: negative capacity");
  if (capacity > capacity_bound_) throw Error("insert_edge: capacity exceeds bound U");
  if (std::llabs(cost) > cost_bound_) throw Error("insert_edge: cost out of range");
  if (insertions() >= insertion_budget_) throw Error("insert_edge: budget exhausted");
  const auto id = static_cast<EdgeId>(edges_.size());
  edges_.push_back({id, tail, head, capacity, cost, true});
  ++live_edges_;
  return id;
}

void DynGraph::delete_edge(EdgeId id) {
  if (!contains(id)) throw Error("delete_edge: unknown edge id " + std::to_string(id));
  edges_[id].alive = false;
  --live_edges_;
}

const Edge& DynGraph::edge(EdgeId id) const {
  if (id < 0 || id >= static_cast<EdgeId>(edges_.size()))
    throw Error("edge: unknown edge id " + std::to_string(id));
  return edges_[id];
}

std::vector<EdgeId> DynGraph::live_edges() const {
  std::vector<EdgeId> ids;
  ids.reserve(static_cast<std::size_t>(live_edges_));
  for (const Edge& e : edges_)
    if (e.alive) ids.push_back(e.id);
  return ids;
}

std::optional<std::vector<OrientedEdge>> forest_path(const DynGraph& g,
                                                     std::span<const EdgeId> forest_edges,
                                                     VertexId from, VertexId to) {
  if (from == to) return std::vector<OrientedEdge>{};
  std::unordered_map<VertexId, std::vector<OrientedEdge>> adj;
  for (EdgeId id : forest_edges) {
    const Edge& e = g.edge(id);
    adj[e.tail].push_back({id, 1});
    adj[e.head].push_back({id, -1});
  }
  std::unordered_map<VertexId, OrientedEdge> via;
  std::queue<VertexId> q;
  q.push(from);
  via[from] = {kNoEdge, 0};
  while (!q.empty()) {
    const VertexId x = q.front();
    q.pop();
    if (x == to) break;
    auto it = adj.find(x);
    if (it == adj.end()) continue;
    for (const OrientedEdge& oe : it->second) {
      const VertexId y = edge_end(g.edge(oe.id), oe.sign);
      if (via.contains(y)) continue;
      via[y] = oe;
      q.push(y);
    }
  }
  if (!via.contains(to)) return std::nullopt;
  std::vector<OrientedEdge> path;
  for (VertexId x = to; x != from;) {
    const OrientedEdge oe = via[x];
    path.push_back(oe);
    x = edge_start(g.edge(oe.id), oe.sign);
  }
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace dynflow
