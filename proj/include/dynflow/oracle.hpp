#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dynflow/common.hpp"

namespace dynflow {

struct BoxEdge {
  VertexId tail = kNoVertex;
  VertexId head = kNoVertex;
  std::int64_t lower = 0;
  std::int64_t upper = 0;
  std::int64_t cost = 0;
};

struct IntegralCirculation {
  std::int64_t cost = 0;
  std::vector<std::int64_t> flow;  // per input edge
};

// Minimum-cost integral circulation with lower <= x <= upper, or none when
// the box admits no circulation. Saturates negative residual arcs, then
// routes the resulting imbalance by successive shortest paths.
std::optional<IntegralCirculation> min_cost_circulation(VertexId n, std::span<const BoxEdge> edges);

struct CapEdge {
  VertexId tail = kNoVertex;
  VertexId head = kNoVertex;
  std::int64_t capacity = 0;
};

struct MaxFlow {
  std::int64_t value = 0;
  std::vector<std::int64_t> flow;
};

// Dinic's algorithm.
MaxFlow max_flow(VertexId n, std::span<const CapEdge> edges, VertexId s, VertexId t);

// Some directed cycle exists (self-loops count).
bool has_directed_cycle(VertexId n, std::span<const CapEdge> edges);

}  // namespace dynflow
