#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numeric>
#include <random>

#include "dynflow/lct.hpp"
#include "oracles.hpp"

using namespace dynflow;

TEST_CASE("link and cut bookkeeping") {
  LinkCutForest f(3);
  f.link(0, 0, 1, 0, 1);
  f.link(1, 1, 2, 0, 1);
  f.cut(0);
  CHECK_FALSE(f.connected(0, 1));
  CHECK(f.connected(1, 2));
  CHECK_THROWS_AS(f.cut(0), Error);
}

TEST_CASE("link rejects cycles") {
  LinkCutForest f(2);
  f.link(0, 0, 1, 0, 1);
  CHECK_THROWS_WITH_AS(f.link(1, 1, 0, 0, 1), doctest::Contains("cycle"), Error);
}

TEST_CASE("path sums and flow on a short path") {
  LinkCutForest f(3);
  f.link(0, 0, 1, 1, 1);
  f.link(1, 1, 2, -2, 3);
  const PathSums s = f.path_sums(0, 2);
  CHECK(s.gradient == -1.0);
  CHECK(s.length == 4.0);
  const PathSums back = f.path_sums(2, 0);
  CHECK(back.gradient == 1.0);
  CHECK(back.length == 4.0);
  const PathSums none = f.path_sums(0, 0);
  CHECK(none.gradient == 0.0);
  CHECK(none.length == 0.0);

  f.path_add(0, 2, 2);
  CHECK(f.point_flow(0) == 2.0);
  CHECK(f.point_flow(1) == 2.0);
  f.path_add(2, 0, 2);
  CHECK(f.point_flow(0) == 0.0);
  CHECK(f.point_flow(1) == 0.0);

  LinkCutForest g(4);
  g.link(0, 0, 1, 0, 1);
  CHECK_THROWS_AS(g.path_sums(0, 3), Error);
  CHECK_THROWS_AS(g.path_add(0, 3, 1.0), Error);
}

TEST_CASE("cut reports the accumulated flow") {
  LinkCutForest f(3);
  f.link(5, 1, 0, 0, 1);
  f.link(6, 1, 2, 0, 1);
  f.path_add(0, 2, 1.5);
  CHECK(f.cut(5) == -1.5);
  CHECK(f.cut(6) == 1.5);
}

TEST_CASE("random link/cut sequences match a naive forest") {
  std::mt19937_64 rng(11);
  const VertexId n = 40;
  for (int round = 0; round < 3; ++round) {
    LinkCutForest f(n);
    oracle::NaiveForest naive(n);
    EdgeId next = 0;
    std::uniform_int_distribution<VertexId> pick(0, n - 1);
    std::uniform_real_distribution<double> val(-2, 2);
    for (int op = 0; op < 1000; ++op) {
      const int kind = static_cast<int>(rng() % 4);
      if (kind < 2) {
        const VertexId u = pick(rng), v = pick(rng);
        if (u == v) continue;
        const bool joined = naive.path(u, v).has_value();
        if (joined) {
          CHECK_THROWS_AS(f.link(next, u, v, 0, 1), Error);
          continue;
        }
        const double g = val(rng), l = std::abs(val(rng)) + 0.1;
        f.link(next, u, v, g, l);
        naive.edges.push_back({next, u, v, g, l, 0.0});
        ++next;
      } else if (kind == 2 && !naive.edges.empty()) {
        const std::size_t k = rng() % naive.edges.size();
        const double flow = f.cut(naive.edges[k].id);
        CHECK(flow == doctest::Approx(naive.edges[k].flow).epsilon(1e-9));
        naive.edges.erase(naive.edges.begin() + static_cast<std::ptrdiff_t>(k));
      } else {
        const VertexId u = pick(rng), v = pick(rng);
        auto p = naive.path(u, v);
        CHECK(f.connected(u, v) == p.has_value());
        if (!p) continue;
        double g = 0, l = 0;
        for (auto [k, s] : *p) {
          g += s * naive.edges[k].gradient;
          l += naive.edges[k].length;
        }
        const PathSums got = f.path_sums(u, v);
        CHECK(got.gradient == doctest::Approx(g).epsilon(1e-12));
        CHECK(got.length == doctest::Approx(l).epsilon(1e-12));
        const auto edges = f.path_edges(u, v);
        REQUIRE(edges.size() == p->size());
        for (std::size_t i = 0; i < edges.size(); ++i) {
          CHECK(edges[i].id == naive.edges[(*p)[i].first].id);
          CHECK(edges[i].sign == (*p)[i].second);
        }
        const double eta = val(rng);
        f.path_add(u, v, eta);
        for (auto [k, s] : *p) naive.edges[k].flow += s * eta;
      }
    }
    for (const auto& e : naive.edges) CHECK(f.point_flow(e.id) == doctest::Approx(e.flow).epsilon(1e-9));
  }
}

TEST_CASE("random path adds on a random tree") {
  std::mt19937_64 rng(3);
  const VertexId n = 50;
  LinkCutForest f(n);
  oracle::NaiveForest naive(n);
  for (VertexId v = 1; v < n; ++v) {
    const VertexId p = static_cast<VertexId>(rng() % v);
    const bool forward = rng() % 2;
    const VertexId t = forward ? p : v, h = forward ? v : p;
    f.link(v, t, h, 0.5, 1.0);
    naive.edges.push_back({v, t, h, 0.5, 1.0, 0.0});
  }
  std::uniform_real_distribution<double> val(-3, 3);
  for (int op = 0; op < 500; ++op) {
    const VertexId u = static_cast<VertexId>(rng() % n), v = static_cast<VertexId>(rng() % n);
    const double eta = val(rng);
    f.path_add(u, v, eta);
    const auto path = naive.path(u, v);
    for (auto [k, s] : *path) naive.edges[k].flow += s * eta;
  }
  for (const auto& e : naive.edges) CHECK(std::abs(f.point_flow(e.id) - e.flow) <= 1e-9);
}
