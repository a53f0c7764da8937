#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dynflow/weighted_graph.hpp"

namespace dynflow {

struct LsdConfig {
  double c_str = 4.0;  // weighted stretch sum  <= c_str * |v|_1 * log^4 n
  double c_avg = 4.0;  // per-edge average over a collection <= c_avg * log^4 n
  double c_w = 4.0;    // piece volume cap c_w * k * log^2 n
  double c_t = 2.0;    // collection size <= c_t * k * log n
  int min_forests = 2;
  int max_forests = 0;  // 0: c_t * k * log n
};

// log2 clamped below by 1 so that tiny graphs keep meaningful bounds.
double log_n(VertexId n);
double weighted_stretch_bound(VertexId n, const LsdConfig& cfg);  // c_str log^4 n
double average_stretch_bound(VertexId n, const LsdConfig& cfg);   // c_avg log^4 n
double stretch_cap(VertexId n, int k);                            // k log^6 n
double piece_volume_cap(VertexId n, int k, const LsdConfig& cfg);

// A spanning tree T (one tree per connected component), a rooted forest
// F subset of T that only loses edges, and frozen stretch overestimates.
struct ForestRouting {
  VertexId num_vertices = 0;
  int k = 1;
  std::vector<char> in_tree;       // per edge
  std::vector<char> in_forest;     // per edge
  std::vector<double> stretch_over;
  std::vector<EdgeId> parent_edge;  // per vertex: forest edge towards the root, or -1
  std::vector<VertexId> root;       // per vertex
  std::vector<double> potential;    // per vertex: signed T-gradient from the T root, frozen
  std::vector<std::vector<VertexId>> pieces;  // edge-disjoint subtrees of F at build time
  std::int64_t initial_components = 0;
  std::int64_t updates = 0;

  std::int64_t components() const;
  std::vector<EdgeId> forest_edges() const;
  bool is_root(VertexId v) const { return root[v] == v; }
};

// Exact stretch of edge `e` with respect to the current F and lengths.
double stretch(const WeightedGraph& g, const ForestRouting& fr, EdgeId e);
std::vector<double> stretches(const WeightedGraph& g, const ForestRouting& fr);

// Signed gradient of the T path from v to u, via the frozen potentials.
inline double tree_path_gradient(const ForestRouting& fr, VertexId v, VertexId u) {
  return fr.potential[u] - fr.potential[v];
}

ForestRouting build_lsd(const WeightedGraph& g, std::span<const double> weights, int k,
                        const LsdConfig& cfg = {});

// F = T = `tree` (must be acyclic). Each component is rooted at the first
// listed vertex of `roots` it contains, or at its smallest vertex.
ForestRouting make_forest_routing(const WeightedGraph& g, std::span<const EdgeId> tree,
                                  std::span<const VertexId> roots = {}, int k = 1);

void delete_forest_edge(ForestRouting& fr, const WeightedGraph& g, EdgeId e);

// `e` must already be the last edge of `g`. Both endpoints become roots, so
// the new edge has stretch exactly 1.
void insert_edge_hook(ForestRouting& fr, const WeightedGraph& g, EdgeId e);

struct ForestCollection {
  std::vector<ForestRouting> forests;
  bool bound_met = true;  // false when the round limit was hit first
  double worst_average = 0.0;
  double weight() const { return forests.empty() ? 0.0 : 1.0 / static_cast<double>(forests.size()); }
  // sum_i lambda_i * stretch_over^i_e for every edge.
  std::vector<double> average_stretch() const;
};

ForestCollection mwu_build_collection(const WeightedGraph& g, int k, const LsdConfig& cfg = {});

}  // namespace dynflow
