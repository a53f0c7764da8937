#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "dynflow/graph.hpp"

using namespace dynflow;

TEST_CASE("insert_edge returns monotone ids") {
  DynGraph g(3, 10, 5, 5);
  CHECK(g.insert_edge(0, 1, 3, -2) == 0);
  CHECK(g.num_edges() == 1);
  CHECK(g.insert_edge(1, 2, 1, 1) == 1);
  g.delete_edge(0);
  CHECK(g.insert_edge(2, 0, 1, 1) == 2);
  CHECK_FALSE(g.contains(0));
}

TEST_CASE("insert_edge rejects bad input") {
  DynGraph g(2, 2, 5, 5);
  CHECK_THROWS_WITH_AS(g.insert_edge(0, 1, -1, 0), doctest::Contains("negative capacity"), Error);
  CHECK_THROWS_WITH_AS(g.insert_edge(0, 1, 1, 6), doctest::Contains("cost out of range"), Error);
  CHECK_THROWS_WITH_AS(g.insert_edge(0, 1, 6, 0), doctest::Contains("capacity exceeds"), Error);
  CHECK_THROWS_AS(g.insert_edge(0, 2, 1, 0), Error);
  g.insert_edge(0, 1, 1, 0);
  g.insert_edge(1, 0, 1, 0);
  CHECK_THROWS_WITH_AS(g.insert_edge(0, 1, 1, 0), doctest::Contains("budget exhausted"), Error);
}

TEST_CASE("delete round trip leaves other edges untouched") {
  DynGraph g(4, 10, 9, 9);
  g.insert_edge(0, 1, 3, 4);
  g.insert_edge(1, 2, 5, -6);
  const Edge before = g.edge(1);
  const EdgeId e = g.insert_edge(2, 3, 1, 1);
  g.delete_edge(e);
  CHECK(g.num_edges() == 2);
  CHECK(g.edge(1).capacity == before.capacity);
  CHECK(g.edge(1).cost == before.cost);
  CHECK_THROWS_AS(g.delete_edge(e), Error);
}

TEST_CASE("divergence examples") {
  DynGraph g(3, 10, 1, 5);
  const EdgeId ab = g.insert_edge(0, 1, 1, 0);
  const EdgeId ba = g.insert_edge(1, 0, 1, 0);
  Circulation c;
  c.add(ab, 1);
  c.add(ba, 1);
  for (double d : divergence(g, c)) CHECK(d == 0.0);

  Circulation p;
  p.add(ab, 1);
  const auto d = divergence(g, p);
  CHECK(d[0] == -1.0);
  CHECK(d[1] == 1.0);

  Circulation bad;
  bad.add(77, 1);
  CHECK_THROWS_AS(divergence(g, bad), Error);
}

TEST_CASE("cycle_decompose") {
  DynGraph g(5, 10, 1, 5);
  const EdgeId a = g.insert_edge(0, 1, 5, 0);
  const EdgeId b = g.insert_edge(1, 2, 5, 0);
  const EdgeId c = g.insert_edge(2, 0, 5, 0);

  SUBCASE("triangle") {
    Circulation f;
    f.add(a, 2);
    f.add(b, 2);
    f.add(c, 2);
    const auto terms = cycle_decompose(g, f);
    REQUIRE(terms.size() == 1);
    CHECK(terms[0].coefficient == doctest::Approx(2.0));
    CHECK(terms[0].cycle.size() == 3);
  }
  SUBCASE("zero") { CHECK(cycle_decompose(g, Circulation{}).empty()); }
  SUBCASE("figure eight recombines") {
    const EdgeId d = g.insert_edge(0, 3, 5, 0);
    const EdgeId e = g.insert_edge(3, 4, 5, 0);
    const EdgeId h = g.insert_edge(4, 0, 5, 0);
    ExactCirculation f;
    for (EdgeId id : {a, b, c, d, e, h}) f.add(id, Rational(1));
    const auto terms = cycle_decompose(g, f);
    CHECK(terms.size() == 2);
    ExactCirculation sum;
    for (const auto& t : terms) {
      CHECK(t.coefficient == 1);
      for (const auto& oe : t.cycle) sum.add(oe.id, t.coefficient * oe.sign);
    }
    CHECK(sum.values == f.values);
  }
  SUBCASE("nonzero divergence") {
    Circulation f;
    f.add(a, 1);
    CHECK_THROWS_WITH_AS(cycle_decompose(g, f), doctest::Contains("nonzero divergence"), Error);
  }
}

TEST_CASE("cycle_decompose recombines random circulations exactly") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const VertexId n = 6;
    DynGraph g(n, 60, 1, 100);
    std::uniform_int_distribution<VertexId> pick(0, n - 1);
    std::vector<EdgeId> ids;
    for (int i = 0; i < 14; ++i) {
      VertexId u = pick(rng), v = pick(rng);
      if (u == v) v = (u + 1) % n;
      ids.push_back(g.insert_edge(u, v, 10, 0));
    }
    // Sum of random cycles found by walking random closed walks.
    ExactCirculation f;
    for (int w = 0; w < 3; ++w) {
      for (int len = 3; len <= 5; ++len) {
        std::vector<OrientedEdge> walk;
        VertexId start = pick(rng), at = start;
        for (int s = 0; s < len; ++s) {
          const EdgeId id = ids[rng() % ids.size()];
          const Edge& e = g.edge(id);
          if (e.tail == at) walk.push_back({id, 1}), at = e.head;
          else if (e.head == at) walk.push_back({id, -1}), at = e.tail;
        }
        if (at != start) continue;
        const int coef = 1 + static_cast<int>(rng() % 3);
        for (auto oe : walk) f.add(oe.id, Rational(coef * oe.sign));
      }
    }
    f.prune();
    const auto terms = cycle_decompose(g, f);
    ExactCirculation sum;
    for (const auto& t : terms)
      for (const auto& oe : t.cycle) sum.add(oe.id, t.coefficient * oe.sign);
    sum.prune();
    CHECK(sum.values == f.values);
    CHECK(terms.size() <= f.values.size());
  }
}

TEST_CASE("materialize_cycle") {
  DynGraph g(5, 20, 1, 5);
  const EdgeId ab = g.insert_edge(0, 1, 1, 0);
  const EdgeId bc = g.insert_edge(1, 2, 1, 0);
  const EdgeId cd = g.insert_edge(2, 3, 1, 0);
  const EdgeId ac = g.insert_edge(0, 2, 1, 0);
  const EdgeId bd = g.insert_edge(1, 3, 1, 0);
  const std::vector<EdgeId> forest{ab, bc, cd};

  SUBCASE("fundamental cycle") {
    ImplicitCycle ic{0, {{ac, 1}}, {}};
    const auto c = materialize_cycle(g, ic, forest);
    CHECK(c.values.size() == 3);
    CHECK(c.at(ac) == 1.0);
    CHECK(c.at(ab) == -1.0);
    CHECK(c.at(bc) == -1.0);
    for (double d : divergence(g, c)) CHECK(d == 0.0);
  }
  SUBCASE("two off-tree edges match explicit walk") {
    // a->c, then forest c->b, then b->d, then forest d->c->b->a.
    ImplicitCycle ic{0, {{ac, 1}, {bd, 1}}, {}};
    const auto c = materialize_cycle<Rational>(g, ic, forest);
    ExactCirculation expect;
    for (auto [id, s] : std::vector<std::pair<EdgeId, int>>{
             {ac, 1}, {bc, -1}, {bd, 1}, {cd, -1}, {bc, -1}, {ab, -1}})
      expect.add(id, Rational(s));
    expect.prune();
    CHECK(c.values == expect.values);
    for (const auto& d : divergence(g, c)) CHECK(d == 0);
  }
  SUBCASE("disconnected") {
    const std::vector<EdgeId> broken{ab, cd};
    ImplicitCycle ic{0, {{ac, 1}}, {}};
    CHECK_THROWS_WITH_AS(materialize_cycle(g, ic, broken), doctest::Contains("disconnected"), Error);
  }
}
