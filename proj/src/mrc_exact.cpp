#include "dynflow/mrc_exact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dynflow {

namespace {

void check_lengths(const WeightedGraph& g) {
  for (const WeightedEdge& e : g.edges)
    if (!(e.length > 0.0)) throw Error("min-ratio cycle: nonpositive length");
}

struct Arc {
  VertexId from;
  VertexId to;
  OrientedEdge edge;
  double weight;
};

}  // namespace

std::optional<RatioCycle> has_cycle_below(const WeightedGraph& g, double lambda) {
  check_lengths(g);
  const VertexId n = g.num_vertices;
  if (n == 0 || g.edges.empty()) return std::nullopt;

  std::vector<Arc> arcs;
  arcs.reserve(2 * g.edges.size());
  double scale = 0.0;
  for (EdgeId i = 0; i < static_cast<EdgeId>(g.edges.size()); ++i) {
    const WeightedEdge& e = g.edges[i];
    arcs.push_back({e.tail, e.head, {i, 1}, e.gradient + lambda * e.length});
    arcs.push_back({e.head, e.tail, {i, -1}, -e.gradient + lambda * e.length});
    scale = std::max({scale, std::abs(arcs[arcs.size() - 2].weight), std::abs(arcs.back().weight)});
  }
  const double eps = 1e-13 * std::max(scale, 1e-300);

  // Every vertex starts at distance 0 (implicit super source).
  std::vector<double> dist(n, 0.0);
  std::vector<int> parent(n, -1);  // index into arcs
  // Every cycle of the parent graph is negative; collect them and keep the
  // one with the best ratio.
  std::vector<int> stamp(n, -1);
  auto extract = [&]() {
    std::optional<RatioCycle> best;
    std::fill(stamp.begin(), stamp.end(), -1);
    for (VertexId s = 0; s < n; ++s) {
      VertexId v = s;
      while (v >= 0 && stamp[v] < 0) {
        stamp[v] = s;
        v = parent[v] < 0 ? kNoVertex : arcs[parent[v]].from;
      }
      if (v < 0 || stamp[v] != s) continue;
      RatioCycle c;
      VertexId x = v;
      do {
        const Arc& arc = arcs[parent[x]];
        c.edges.push_back(arc.edge);
        x = arc.from;
      } while (x != v);
      std::reverse(c.edges.begin(), c.edges.end());
      const CycleValue val = cycle_value(g, c.edges);
      if (val.gradient + lambda * val.length >= 0.0) continue;
      c.gradient = val.gradient;
      c.length = val.length;
      c.ratio = val.ratio();
      if (!best || c.ratio < best->ratio) best = std::move(c);
    }
    return best;
  };

  const VertexId max_rounds = 4 * n + 4;
  for (VertexId round = 0; round < max_rounds; ++round) {
    bool changed = false;
    for (std::size_t a = 0; a < arcs.size(); ++a) {
      const Arc& arc = arcs[a];
      const double cand = dist[arc.from] + arc.weight;
      if (cand < dist[arc.to] - eps) {
        dist[arc.to] = cand;
        parent[arc.to] = static_cast<int>(a);
        changed = true;
      }
    }
    if (!changed) return std::nullopt;
    if (auto c = extract()) return c;
  }
  return std::nullopt;
}

std::optional<RatioCycle> min_ratio_cycle_exact(const WeightedGraph& g) {
  auto best = has_cycle_below(g, 0.0);
  if (!best || best->ratio >= 0.0) return std::nullopt;
  // Dinkelbach iteration: each round strictly improves the witness, and there
  // are finitely many simple cycles.
  for (int iter = 0; iter < 200; ++iter) {
    auto next = has_cycle_below(g, -best->ratio);
    if (!next || !(next->ratio < best->ratio)) break;
    best = std::move(next);
  }
  return best;
}

double optimal_ratio(const WeightedGraph& g) {
  auto c = min_ratio_cycle_exact(g);
  return c ? c->ratio : 0.0;
}

}  // namespace dynflow
