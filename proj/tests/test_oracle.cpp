#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <functional>
#include <random>

#include "dynflow/oracle.hpp"

using namespace dynflow;

namespace {

// Enumerates every integral assignment in the box.
std::optional<std::int64_t> brute_min_cost(VertexId n, const std::vector<BoxEdge>& edges) {
  std::optional<std::int64_t> best;
  std::vector<std::int64_t> x(edges.size());
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == edges.size()) {
      std::vector<std::int64_t> div(n, 0);
      std::int64_t cost = 0;
      for (std::size_t j = 0; j < edges.size(); ++j) {
        div[edges[j].tail] -= x[j];
        div[edges[j].head] += x[j];
        cost += x[j] * edges[j].cost;
      }
      for (auto d : div)
        if (d != 0) return;
      if (!best || cost < *best) best = cost;
      return;
    }
    for (x[i] = edges[i].lower; x[i] <= edges[i].upper; ++x[i]) rec(i + 1);
  };
  rec(0);
  return best;
}

std::int64_t brute_max_flow(VertexId n, const std::vector<CapEdge>& edges, VertexId s, VertexId t) {
  std::int64_t best = 0;
  std::vector<std::int64_t> x(edges.size());
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == edges.size()) {
      std::vector<std::int64_t> div(n, 0);
      for (std::size_t j = 0; j < edges.size(); ++j) {
        div[edges[j].tail] -= x[j];
        div[edges[j].head] += x[j];
      }
      for (VertexId v = 0; v < n; ++v)
        if (v != s && v != t && div[v] != 0) return;
      best = std::max(best, div[t]);
      return;
    }
    for (x[i] = 0; x[i] <= edges[i].capacity; ++x[i]) rec(i + 1);
  };
  rec(0);
  return best;
}

}  // namespace

TEST_CASE("two-edge cycle") {
  const std::vector<BoxEdge> e{{0, 1, 0, 1, 1}, {1, 0, 0, 1, -3}};
  const auto r = min_cost_circulation(2, e);
  REQUIRE(r.has_value());
  CHECK(r->cost == -2);
  CHECK(r->flow == std::vector<std::int64_t>{1, 1});
}

TEST_CASE("acyclic graph has zero optimum") {
  const std::vector<BoxEdge> e{{0, 1, 0, 3, -5}, {1, 2, 0, 3, -5}, {0, 2, 0, 3, -1}};
  const auto r = min_cost_circulation(3, e);
  REQUIRE(r.has_value());
  CHECK(r->cost == 0);
}

TEST_CASE("infeasible box") {
  const std::vector<BoxEdge> e{{0, 1, 1, 2, 0}};
  CHECK_FALSE(min_cost_circulation(2, e).has_value());
}

TEST_CASE("self-loops") {
  const std::vector<BoxEdge> e{{0, 0, 0, 4, -2}, {1, 1, 0, 4, 3}};
  const auto r = min_cost_circulation(2, e);
  REQUIRE(r.has_value());
  CHECK(r->cost == -8);
}

TEST_CASE("random boxes match enumeration") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    const VertexId n = 2 + static_cast<VertexId>(rng() % 3);
    const int m = 1 + static_cast<int>(rng() % 5);
    std::vector<BoxEdge> e;
    for (int i = 0; i < m; ++i) {
      const std::int64_t lo = rng() % 3 == 0 ? 1 : 0;
      e.push_back({static_cast<VertexId>(rng() % n), static_cast<VertexId>(rng() % n), lo,
                   lo + static_cast<std::int64_t>(rng() % 3), static_cast<std::int64_t>(rng() % 9) - 4});
    }
    const auto want = brute_min_cost(n, e);
    const auto got = min_cost_circulation(n, e);
    REQUIRE(got.has_value() == want.has_value());
    if (!got) continue;
    CHECK(got->cost == *want);
    std::vector<std::int64_t> div(n, 0);
    std::int64_t cost = 0;
    for (int i = 0; i < m; ++i) {
      CHECK(got->flow[i] >= e[i].lower);
      CHECK(got->flow[i] <= e[i].upper);
      div[e[i].tail] -= got->flow[i];
      div[e[i].head] += got->flow[i];
      cost += got->flow[i] * e[i].cost;
    }
    CHECK(cost == got->cost);
    for (auto d : div) CHECK(d == 0);
  }
}

TEST_CASE("K4 with unit capacities") {
  std::vector<CapEdge> e;
  for (VertexId u = 0; u < 4; ++u)
    for (VertexId v = 0; v < 4; ++v)
      if (u != v) e.push_back({u, v, 1});
  CHECK(max_flow(4, e, 0, 2).value == 3);
  CHECK(brute_max_flow(4, e, 0, 2) == 3);
}

TEST_CASE("random max flows match enumeration") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const VertexId n = 3 + static_cast<VertexId>(rng() % 3);
    std::vector<CapEdge> e;
    const int m = 1 + static_cast<int>(rng() % 6);
    for (int i = 0; i < m; ++i)
      e.push_back({static_cast<VertexId>(rng() % n), static_cast<VertexId>(rng() % n),
                   static_cast<std::int64_t>(rng() % 3)});
    const auto got = max_flow(n, e, 0, n - 1);
    CHECK(got.value == brute_max_flow(n, e, 0, n - 1));
    std::vector<std::int64_t> div(n, 0);
    for (int i = 0; i < m; ++i) {
      CHECK(got.flow[i] >= 0);
      CHECK(got.flow[i] <= e[i].capacity);
      div[e[i].tail] -= got.flow[i];
      div[e[i].head] += got.flow[i];
    }
    for (VertexId v = 1; v + 1 < n; ++v) CHECK(div[v] == 0);
    CHECK(div[n - 1] == got.value);
  }
}

TEST_CASE("directed cycle detection") {
  std::vector<CapEdge> e{{0, 1, 1}, {1, 2, 1}};
  CHECK_FALSE(has_directed_cycle(3, e));
  e.push_back({0, 2, 1});
  CHECK_FALSE(has_directed_cycle(3, e));
  e.push_back({2, 0, 1});
  CHECK(has_directed_cycle(3, e));
  CHECK(has_directed_cycle(1, std::vector<CapEdge>{{0, 0, 1}}));

  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    const VertexId n = 2 + static_cast<VertexId>(rng() % 6);
    std::vector<CapEdge> g;
    std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
    for (int i = 0; i < static_cast<int>(rng() % 9); ++i) {
      const VertexId u = static_cast<VertexId>(rng() % n), v = static_cast<VertexId>(rng() % n);
      g.push_back({u, v, 1});
      reach[u][v] = 1;
    }
    for (VertexId k = 0; k < n; ++k)
      for (VertexId i = 0; i < n; ++i)
        for (VertexId j = 0; j < n; ++j)
          if (reach[i][k] && reach[k][j]) reach[i][j] = 1;
    bool cyc = false;
    for (VertexId v = 0; v < n; ++v) cyc = cyc || reach[v][v];
    CHECK(has_directed_cycle(n, g) == cyc);
  }
}
