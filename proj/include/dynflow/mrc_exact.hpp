#pragma once

#include <optional>
#include <vector>

#include "dynflow/weighted_graph.hpp"

namespace dynflow {

struct RatioCycle {
  std::vector<OrientedEdge> edges;  // a simple cycle in the bidirected graph
  double gradient = 0.0;
  double length = 0.0;
  double ratio = 0.0;
};

// Some simple bidirected cycle with gradient + lambda * length < 0, or none.
// Among the cycles exposed by the label-correcting pass, the one of smallest
// ratio is returned.
std::optional<RatioCycle> has_cycle_below(const WeightedGraph& g, double lambda);

// A simple cycle of minimum gradient/length ratio. Returns none when no cycle
// has negative ratio; the optimum is then 0 (attained by any back-and-forth
// traversal), or undefined for an edgeless graph.
std::optional<RatioCycle> min_ratio_cycle_exact(const WeightedGraph& g);

// The optimal value itself: the ratio of the cycle above, or 0.
double optimal_ratio(const WeightedGraph& g);

}  // namespace dynflow
