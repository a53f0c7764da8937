#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dynflow/common.hpp"

namespace dynflow {

struct Edge {
  EdgeId id = kNoEdge;
  VertexId tail = kNoVertex;
  VertexId head = kNoVertex;
  std::int64_t capacity = 0;
  std::int64_t cost = 0;
  bool alive = false;
};

// Directed multigraph with integral capacities and costs. Edge ids are handed
// out in insertion order and never reused; deleted edges keep their slot.
class DynGraph {
 public:
  DynGraph(VertexId num_vertices, std::int64_t insertion_budget,
           std::int64_t cost_bound, std::int64_t capacity_bound);

  EdgeId insert_edge(VertexId tail, VertexId head, std::int64_t capacity,
                     std::int64_t cost);
  void delete_edge(EdgeId id);

  bool contains(EdgeId id) const {
    return id >= 0 && id < static_cast<EdgeId>(edges_.size()) && edges_[id].alive;
  }
  const Edge& edge(EdgeId id) const;

  VertexId num_vertices() const { return num_vertices_; }
  std::int64_t num_edges() const { return live_edges_; }
  std::int64_t insertions() const { return static_cast<std::int64_t>(edges_.size()); }
  std::int64_t insertion_budget() const { return insertion_budget_; }
  std::int64_t cost_bound() const { return cost_bound_; }
  std::int64_t capacity_bound() const { return capacity_bound_; }

  // Every slot ever handed out, including deleted ones (check `alive`).
  const std::vector<Edge>& slots() const { return edges_; }
  std::vector<EdgeId> live_edges() const;

 private:
  VertexId num_vertices_;
  std::int64_t insertion_budget_;
  std::int64_t cost_bound_;
  std::int64_t capacity_bound_;
  std::int64_t live_edges_ = 0;
  std::vector<Edge> edges_;
};

inline VertexId edge_start(const Edge& e, int sign) { return sign > 0 ? e.tail : e.head; }
inline VertexId edge_end(const Edge& e, int sign) { return sign > 0 ? e.head : e.tail; }

template <class T>
struct BasicCirculation {
  std::map<EdgeId, T> values;

  void add(EdgeId id, const T& amount) {
    auto [it, inserted] = values.try_emplace(id, amount);
    if (!inserted) it->second += amount;
  }
  T at(EdgeId id) const {
    auto it = values.find(id);
    return it == values.end() ? T(0) : it->second;
  }
  void prune() {
    std::erase_if(values, [](const auto& kv) { return kv.second == T(0); });
  }
};

using Circulation = BasicCirculation<double>;
using ExactCirculation = BasicCirculation<Rational>;

inline ExactCirculation to_exact(const Circulation& c) {
  ExactCirculation out;
  for (const auto& [id, v] : c.values) out.values.emplace(id, Rational(v));
  return out;
}

namespace detail {

inline bool near_zero(double x, double scale) { return std::abs(x) <= 1e-9 * std::max(1.0, scale); }
inline bool near_zero(const Rational& x, const Rational&) { return x == 0; }
inline double magnitude(double x) { return std::abs(x); }
inline Rational magnitude(const Rational& x) { return abs(x); }

}  // namespace detail

// B^T c: net inflow minus outflow at every vertex (head gains, tail loses).
template <class T>
std::vector<T> divergence(const DynGraph& g, const BasicCirculation<T>& c) {
  std::vector<T> div(g.num_vertices(), T(0));
  for (const auto& [id, v] : c.values) {
    if (!g.contains(id)) throw Error("divergence: unknown edge id " + std::to_string(id));
    const Edge& e = g.edge(id);
    div[e.tail] -= v;
    div[e.head] += v;
  }
  return div;
}

template <class T>
bool is_circulation(const DynGraph& g, const BasicCirculation<T>& c) {
  T scale(0);
  for (const auto& [id, v] : c.values) scale = std::max(scale, detail::magnitude(v));
  for (const T& d : divergence(g, c))
    if (!detail::near_zero(d, scale)) return false;
  return true;
}

template <class T>
struct CycleTerm {
  std::vector<OrientedEdge> cycle;  // simple cycle, signs conform to the input
  T coefficient;
};

// Conformal decomposition: every returned cycle traverses each edge in the
// direction of its flow, and the coefficients are positive.
template <class T>
std::vector<CycleTerm<T>> cycle_decompose(const DynGraph& g, const BasicCirculation<T>& c) {
  if (!is_circulation(g, c)) throw Error("cycle_decompose: nonzero divergence");

  T scale(0);
  for (const auto& [id, v] : c.values) scale = std::max(scale, detail::magnitude(v));

  struct Arc {
    OrientedEdge edge;
    VertexId to;
    T remaining;
  };
  std::vector<Arc> arcs;
  std::vector<std::vector<std::size_t>> out(g.num_vertices());
  for (const auto& [id, v] : c.values) {
    if (detail::near_zero(v, scale)) continue;
    const Edge& e = g.edge(id);
    const int sign = v > 0 ? 1 : -1;
    out[edge_start(e, sign)].push_back(arcs.size());
    arcs.push_back({{id, sign}, edge_end(e, sign), detail::magnitude(v)});
  }

  std::vector<std::size_t> cursor(g.num_vertices(), 0);
  auto next_arc = [&](VertexId v) -> std::optional<std::size_t> {
    auto& list = out[v];
    while (cursor[v] < list.size()) {
      const std::size_t a = list[cursor[v]];
      if (!detail::near_zero(arcs[a].remaining, scale)) return a;
      ++cursor[v];
    }
    return std::nullopt;
  };

  std::vector<CycleTerm<T>> terms;
  std::vector<int> position(g.num_vertices(), -1);
  for (std::size_t seed = 0; seed < arcs.size(); ++seed) {
    while (!detail::near_zero(arcs[seed].remaining, scale)) {
      std::vector<std::size_t> walk{seed};
      std::vector<VertexId> visited{edge_start(g.edge(arcs[seed].edge.id), arcs[seed].edge.sign)};
      position[visited.front()] = 0;
      VertexId at = arcs[seed].to;
      while (position[at] < 0) {
        auto a = next_arc(at);
        if (!a) {
          for (VertexId v : visited) position[v] = -1;
          throw Error("cycle_decompose: flow got stuck; input is not a circulation");
        }
        position[at] = static_cast<int>(visited.size());
        visited.push_back(at);
        walk.push_back(*a);
        at = arcs[*a].to;
      }
      const std::size_t first = static_cast<std::size_t>(position[at]);
      for (VertexId v : visited) position[v] = -1;

      CycleTerm<T> term{{}, arcs[walk[first]].remaining};
      for (std::size_t i = first; i < walk.size(); ++i)
        term.coefficient = std::min(term.coefficient, arcs[walk[i]].remaining);
      for (std::size_t i = first; i < walk.size(); ++i) {
        arcs[walk[i]].remaining -= term.coefficient;
        term.cycle.push_back(arcs[walk[i]].edge);
      }
      terms.push_back(std::move(term));
    }
  }
  return terms;
}

// A cycle given implicitly: off-tree edges (u_i, v_i) joined by the unique
// paths v_i -> u_{i+1} in forest `forest`, optionally extended by `augment`
// edges that are temporarily treated as forest edges.
struct ImplicitCycle {
  int forest = 0;
  std::vector<OrientedEdge> off_tree;
  std::vector<EdgeId> augment;
};

// Path from `from` to `to` inside the forest spanned by `forest_edges`;
// nullopt when the endpoints are in different components.
std::optional<std::vector<OrientedEdge>> forest_path(const DynGraph& g,
                                                     std::span<const EdgeId> forest_edges,
                                                     VertexId from, VertexId to);

template <class T = double>
BasicCirculation<T> materialize_cycle(const DynGraph& g, const ImplicitCycle& ic,
                                      std::span<const EdgeId> forest_edges) {
  std::vector<EdgeId> tree(forest_edges.begin(), forest_edges.end());
  tree.insert(tree.end(), ic.augment.begin(), ic.augment.end());
  BasicCirculation<T> out;
  const std::size_t L = ic.off_tree.size();
  for (std::size_t j = 0; j < L; ++j) {
    const OrientedEdge& cur = ic.off_tree[j];
    const OrientedEdge& nxt = ic.off_tree[(j + 1) % L];
    if (!g.contains(cur.id)) throw Error("materialize_cycle: unknown edge");
    out.add(cur.id, T(cur.sign));
    const VertexId from = edge_end(g.edge(cur.id), cur.sign);
    const VertexId to = edge_start(g.edge(nxt.id), nxt.sign);
    auto path = forest_path(g, tree, from, to);
    if (!path) throw Error("materialize_cycle: segment endpoints are disconnected in the forest");
    for (const OrientedEdge& pe : *path) out.add(pe.id, T(pe.sign));
  }
  out.prune();
  return out;
}

}  // namespace dynflow
