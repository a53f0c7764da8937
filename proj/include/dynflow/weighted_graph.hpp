#pragma once

#include <span>
#include <vector>

#include "dynflow/common.hpp"

namespace dynflow {

// Static multigraph carrying the min-ratio objective data. Edge ids in
// OrientedEdge values refer to positions in `edges`. Self-loops and parallel
// edges are allowed.
struct WeightedEdge {
  VertexId tail = kNoVertex;
  VertexId head = kNoVertex;
  double gradient = 0.0;
  double length = 1.0;
};

struct WeightedGraph {
  VertexId num_vertices = 0;
  std::vector<WeightedEdge> edges;

  EdgeId add_edge(VertexId tail, VertexId head, double gradient, double length) {
    edges.push_back({tail, head, gradient, length});
    return static_cast<EdgeId>(edges.size() - 1);
  }
};

inline VertexId start_of(const WeightedGraph& g, OrientedEdge e) {
  return e.sign > 0 ? g.edges[e.id].tail : g.edges[e.id].head;
}
inline VertexId end_of(const WeightedGraph& g, OrientedEdge e) {
  return e.sign > 0 ? g.edges[e.id].head : g.edges[e.id].tail;
}

struct CycleValue {
  double gradient = 0.0;
  double length = 0.0;
  double ratio() const { return length > 0.0 ? gradient / length : 0.0; }
};

// Backward traversal contributes -g_e to the gradient and +l_e to the length.
inline CycleValue cycle_value(const WeightedGraph& g, std::span<const OrientedEdge> cycle) {
  CycleValue v;
  for (const OrientedEdge& e : cycle) {
    v.gradient += e.sign * g.edges[e.id].gradient;
    v.length += g.edges[e.id].length;
  }
  return v;
}

// True when consecutive edges chain head-to-tail and the walk closes.
inline bool is_closed_walk(const WeightedGraph& g, std::span<const OrientedEdge> cycle) {
  if (cycle.empty()) return false;
  for (std::size_t i = 0; i < cycle.size(); ++i)
    if (end_of(g, cycle[i]) != start_of(g, cycle[(i + 1) % cycle.size()])) return false;
  return true;
}

}  // namespace dynflow
