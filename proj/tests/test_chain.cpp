#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "dynflow/chain.hpp"
#include "oracles.hpp"

using namespace dynflow;

namespace {

// Fundamental cycle of off-tree edge e against a BFS spanning forest.
struct BfsForest {
  std::vector<EdgeId> edges;
  std::vector<char> in;
};

BfsForest bfs_forest(const WeightedGraph& g) {
  BfsForest f;
  f.in.assign(g.edges.size(), 0);
  std::vector<std::vector<std::pair<VertexId, EdgeId>>> adj(g.num_vertices);
  for (EdgeId e = 0; e < static_cast<EdgeId>(g.edges.size()); ++e) {
    adj[g.edges[e].tail].push_back({g.edges[e].head, e});
    adj[g.edges[e].head].push_back({g.edges[e].tail, e});
  }
  std::vector<char> seen(g.num_vertices, 0);
  for (VertexId s = 0; s < g.num_vertices; ++s) {
    if (seen[s]) continue;
    seen[s] = 1;
    std::vector<VertexId> q{s};
    for (std::size_t i = 0; i < q.size(); ++i)
      for (auto [y, e] : adj[q[i]]) {
        if (seen[y]) continue;
        seen[y] = 1;
        f.in[e] = 1;
        f.edges.push_back(e);
        q.push_back(y);
      }
  }
  return f;
}

std::vector<OrientedEdge> fundamental_cycle(const WeightedGraph& g, const BfsForest& f, EdgeId e) {
  std::vector<OrientedEdge> cyc{{e, 1}};
  auto path = forest_path(g, f.edges, g.edges[e].head, g.edges[e].tail);
  REQUIRE(path.has_value());
  cyc.insert(cyc.end(), path->begin(), path->end());
  return cyc;
}

// Integer combination of random fundamental cycles.
template <class T>
BasicCirculation<T> random_circulation(const WeightedGraph& g, std::mt19937_64& rng, int cycles) {
  const auto f = bfs_forest(g);
  std::vector<EdgeId> off;
  for (EdgeId e = 0; e < static_cast<EdgeId>(g.edges.size()); ++e)
    if (!f.in[e]) off.push_back(e);
  BasicCirculation<T> c;
  if (off.empty()) return c;
  for (int i = 0; i < cycles; ++i) {
    const int coef = static_cast<int>(rng() % 7) - 3;
    if (coef == 0) continue;
    for (const OrientedEdge& oe : fundamental_cycle(g, f, off[rng() % off.size()])) c.add(oe.id, T(coef * oe.sign));
  }
  c.prune();
  return c;
}

Rational exact_gradient(std::span<const Rational> grad, const ExactCirculation& c) {
  Rational s = 0;
  for (const auto& [id, v] : c.values) s += grad[id] * v;
  return s;
}

std::vector<Rational> exact_top(const WeightedGraph& g) {
  std::vector<Rational> out;
  for (const auto& e : g.edges) out.emplace_back(e.gradient);
  return out;
}

WeightedGraph complete_graph(VertexId n, double len) {
  WeightedGraph g;
  g.num_vertices = n;
  for (VertexId u = 0; u < n; ++u)
    for (VertexId v = u + 1; v < n; ++v) g.add_edge(u, v, 0, len);
  return g;
}

LevelGraph as_level(const WeightedGraph& g) {
  LevelGraph lg;
  lg.graph = g;
  lg.parent.resize(g.edges.size());
  std::iota(lg.parent.begin(), lg.parent.end(), 0);
  lg.origin = lg.parent;
  return lg;
}

// Components of the subgraph spanned by `edges`, or -1 if it has a cycle.
std::int64_t forest_components(const WeightedGraph& g, std::span<const EdgeId> edges) {
  std::vector<VertexId> up(g.num_vertices);
  std::iota(up.begin(), up.end(), 0);
  auto find = [&](VertexId x) {
    while (up[x] != x) x = up[x] = up[up[x]];
    return x;
  };
  std::int64_t comps = g.num_vertices;
  for (EdgeId e : edges) {
    const VertexId a = find(g.edges[e].tail), b = find(g.edges[e].head);
    if (a == b) return -1;
    up[a] = b;
    --comps;
  }
  return comps;
}

}  // namespace

TEST_CASE("core graph of a path with one off-tree edge") {
  WeightedGraph g;
  g.num_vertices = 3;
  g.add_edge(0, 1, 0, 1);
  g.add_edge(1, 2, 0, 1);
  const EdgeId ac = g.add_edge(0, 2, 1, 1);
  const std::vector<EdgeId> tree{0, 1};
  const auto fr = make_forest_routing(g, tree, std::vector<VertexId>{0});
  const auto cg = build_core_graph(g, fr);
  CHECK(cg.graph.num_vertices == 1);
  const auto& e = cg.graph.edges[ac];
  CHECK(e.tail == e.head);
  CHECK(e.length == doctest::Approx(3.0));
  CHECK(e.gradient == doctest::Approx(1.0));
  CHECK(cg.contracted[0]);
  CHECK(cg.graph.edges[0].gradient == 0.0);

  g.edges[0].gradient = 1.0;
  g.edges[1].gradient = 1.0;
  g.edges[ac].gradient = 1.0;
  auto cg2 = build_core_graph(g, fr);
  // 1 + (0) - (2): the cycle a->c->b->a has gradient 1 - 2.
  CHECK(cg2.graph.edges[ac].gradient == doctest::Approx(-1.0));
}

TEST_CASE("core graph keeps the component structure") {
  WeightedGraph h;
  h.num_vertices = 5;
  h.add_edge(0, 1, 0, 2);
  h.add_edge(2, 3, 0, 1);
  h.add_edge(3, 4, 0, 2);
  const EdgeId cross = h.add_edge(1, 4, 0.5, 1);
  const std::vector<EdgeId> forest{0, 1, 2};
  const auto fr = make_forest_routing(h, forest, std::vector<VertexId>{0, 2});
  const auto cg = build_core_graph(h, fr);
  CHECK(cg.graph.num_vertices == 2);
  CHECK(cg.vertex_of[1] == cg.vertex_of[0]);
  CHECK(cg.vertex_of[4] == cg.vertex_of[2]);
  CHECK(cg.graph.edges[cross].tail != cg.graph.edges[cross].head);
  CHECK(cg.graph.edges[cross].length == doctest::Approx(6.0));
}

TEST_CASE("routing into the core preserves the gradient exactly") {
  std::mt19937_64 rng(5);
  LsdConfig cfg;
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = oracle::random_graph(12, 30, rng, -1, 1, 0.3, 3);
    const auto col = mwu_build_collection(g, 2, cfg);
    const auto top = exact_top(g);
    const auto c = random_circulation<Rational>(g, rng, 6);
    double avg = 0.0;
    for (const auto& fr : col.forests) {
      const auto cg = build_core_graph(g, fr);
      const auto cc = route_into_core(g, cg, c);
      CHECK(is_circulation(cg.graph, cc));
      const auto core = core_gradients<Rational>(g, top, fr);
      CHECK(exact_gradient(core, cc) == exact_gradient(top, c));
      avg += static_cast<double>(length_of(cg.graph, cc)) / static_cast<double>(col.forests.size());
    }
    CHECK(avg <= average_stretch_bound(g.num_vertices, cfg) * static_cast<double>(length_of(g, c)) + 1e-9);
  }
}

TEST_CASE("routing into the core rejects a non-circulation") {
  const auto g = complete_graph(4, 1);
  const auto fr = make_forest_routing(g, std::vector<EdgeId>{0, 1, 2});
  const auto cg = build_core_graph(g, fr);
  Circulation c;
  c.add(3, 1.0);
  CHECK_THROWS_AS(route_into_core(g, cg, c), Error);
}

TEST_CASE("spanner of a tree is the tree") {
  std::mt19937_64 rng(2);
  WeightedGraph g;
  g.num_vertices = 30;
  for (VertexId v = 1; v < 30; ++v) g.add_edge(static_cast<VertexId>(rng() % v), v, 0, 1 + (rng() % 5));
  const auto sp = build_spanner(g);
  CHECK(sp.spanner_size() == g.edges.size());
  CHECK(spanner_violations(g, sp, 2).empty());
}

TEST_CASE("spanner of a complete graph") {
  const auto g = complete_graph(8, 1);
  const auto sp = build_spanner(g);
  CHECK(spanner_violations(g, sp, 2).empty());
  CHECK(sp.spanner_size() < g.edges.size());
  for (EdgeId e = 0; e < static_cast<EdgeId>(g.edges.size()); ++e)
    if (sp.is_embedded(e)) CHECK(is_closed_walk(g, sparsifier_cycle(g, sp, e)));
}

TEST_CASE("spanner never mixes length scales") {
  auto g = complete_graph(10, 1);
  const auto heavy = complete_graph(10, 100);
  for (const auto& e : heavy.edges) g.add_edge(e.tail, e.head, 0, e.length);
  const auto sp = build_spanner(g);
  CHECK(spanner_violations(g, sp, 2).empty());
  for (EdgeId e = 0; e < static_cast<EdgeId>(g.edges.size()); ++e)
    for (const OrientedEdge& pe : sp.embedding[e]) CHECK(approx2(g.edges[pe.id].length, g.edges[e].length));
}

TEST_CASE("self-loops and excluded edges") {
  WeightedGraph g;
  g.num_vertices = 2;
  const EdgeId loop = g.add_edge(0, 0, -1, 1);
  const EdgeId a = g.add_edge(0, 1, 0, 1);
  const EdgeId b = g.add_edge(0, 1, 0, 1);
  std::vector<char> excl(g.edges.size(), 0);
  excl[b] = 1;
  const auto sp = build_spanner(g, {}, excl);
  CHECK(sp.is_embedded(loop));
  CHECK(sp.embedding[loop].empty());
  CHECK(sparsifier_cycle(g, sp, loop) == std::vector<OrientedEdge>{{loop, 1}});
  CHECK(sp.in_spanner[a]);
  CHECK_FALSE(sp.is_embedded(b));
  CHECK(spanner_violations(g, sp, 2).empty());
}

TEST_CASE("routing into the spanner") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const auto g = oracle::random_graph(20, 120, rng, -1, 1, 0.5, 8);
    const auto sp = build_spanner(g);
    REQUIRE(spanner_violations(g, sp, 2).empty());
    const auto c = random_circulation<double>(g, rng, 10);
    const auto ch = route_into_spanner(g, sp, c);
    CHECK(is_circulation(g, ch));
    for (const auto& [id, v] : ch.values) CHECK(sp.in_spanner[id]);
    CHECK(length_of(g, ch) <= 2.0 * sp.gamma_l * length_of(g, c) + 1e-9);

    Circulation on_h;
    for (const auto& [id, v] : ch.values) on_h.add(id, v);
    const auto again = route_into_spanner(g, sp, on_h);
    CHECK(again.values == on_h.values);
  }
}

TEST_CASE("spanner chain levels") {
  std::mt19937_64 rng(13);
  const auto g = oracle::random_graph(32, 400, rng, -1, 1, 0.5, 4);
  const auto top = as_level(g);
  CHECK(build_spanner_chain(top, 0, {}).levels.size() == 1);
  CHECK(spanner_depth(400, 32, 4) == 1);
  CHECK(spanner_depth(10, 32, 4) == 0);

  const auto chain = build_spanner_chain(top, 2, {});
  REQUIRE(chain.levels.size() == 3);
  for (std::size_t i = 0; i + 1 < chain.levels.size(); ++i) {
    const auto& cur = chain.levels[i];
    const auto& next = chain.levels[i + 1];
    CHECK(next.level.graph.edges.size() == cur.spanner.spanner_size());
    CHECK(next.level.graph.edges.size() <= cur.level.graph.edges.size());
    CHECK(spanner_violations(cur.level.graph, cur.spanner, 4).empty());
    for (std::size_t e = 0; e < next.level.graph.edges.size(); ++e) {
      const auto& we = next.level.graph.edges[e];
      const auto& orig = g.edges[next.level.origin[e]];
      CHECK(we.tail == orig.tail);
      CHECK(we.head == orig.head);
      CHECK(we.length == orig.length);
    }
  }
}

TEST_CASE("tree chain structure") {
  std::mt19937_64 rng(19);
  const auto g = oracle::random_graph(40, 160, rng, -1, 1, 0.5, 4);
  ChainConfig cfg;
  cfg.k = 2;
  CHECK(tree_depth(40, 2) == 2);

  const auto flat = build_branching_tree_chain(as_level(g), 0, cfg);
  CHECK(flat.nodes.size() == 1);
  CHECK(flat.leaves == std::vector<int>{0});

  cfg.lsd.min_forests = 3;
  const auto one = build_branching_tree_chain(as_level(g), 1, cfg);
  CHECK(one.nodes[0].branches.size() >= 3);
  for (const auto& b : one.nodes[0].branches) {
    const auto& child = one.nodes[b.child];
    CHECK(child.level == 1);
    CHECK(child.level_graph.graph.num_vertices == one.nodes[0].collection.forests[b.forest].components());
    CHECK(child.level_graph.graph.num_vertices <= 160 / 2 + 1);
    for (std::size_t e = 0; e < child.level_graph.graph.edges.size(); ++e)
      CHECK_FALSE(b.core.contracted[child.level_graph.parent[e]]);
  }

  cfg.lsd.min_forests = 2;
  cfg.max_branching = 2;
  const auto two = build_branching_tree_chain(as_level(g), 2, cfg);
  CHECK(two.leaves.size() == 4);
  for (int leaf : two.leaves) {
    const auto forest = chain_forest(two, leaf);
    CHECK(forest_components(g, forest) == two.nodes[leaf].level_graph.graph.num_vertices);
  }
}

TEST_CASE("gradient refresh matches the exact derivation") {
  std::mt19937_64 rng(29);
  auto g = oracle::random_graph(30, 120, rng, -1, 1, 0.5, 4);
  ChainConfig cfg;
  cfg.k = 2;
  cfg.max_branching = 2;
  auto chain = build_branching_tree_chain(as_level(g), 2, cfg);
  std::uniform_real_distribution<double> grad(-2, 2);
  for (auto& e : chain.nodes[0].level_graph.graph.edges) e.gradient = grad(rng);
  refresh_chain_gradients(chain);
  const auto exact = exact_node_gradients(chain, exact_top(chain.nodes[0].level_graph.graph));
  for (std::size_t i = 0; i < chain.nodes.size(); ++i)
    for (std::size_t e = 0; e < exact[i].size(); ++e)
      CHECK(chain.nodes[i].level_graph.graph.edges[e].gradient ==
            doctest::Approx(static_cast<double>(exact[i][e])).epsilon(1e-9));
}

TEST_CASE("lifted cycles keep the gradient and do not lengthen") {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 4; ++trial) {
    const auto g = oracle::random_graph(30, 110, rng, -1, 1, 0.5, 4);
    ChainConfig cfg;
    cfg.k = 2;
    cfg.max_branching = 2;
    const auto chain = build_branching_tree_chain(as_level(g), 2, cfg);
    const auto exact = exact_node_gradients(chain, exact_top(g));
    const auto top = exact_top(g);
    for (std::size_t i = 0; i < chain.nodes.size(); ++i) {
      const auto& lg = chain.nodes[i].level_graph.graph;
      const auto bf = bfs_forest(lg);
      const auto joiners = chain_forest(chain, static_cast<int>(i));
      for (EdgeId e = 0; e < static_cast<EdgeId>(lg.edges.size()); ++e) {
        if (bf.in[e]) continue;
        const auto cyc = fundamental_cycle(lg, bf, e);
        ImplicitCycle ic;
        ic.off_tree = lift_cycle(chain, static_cast<int>(i), cyc);
        const auto c = materialize_cycle<Rational>(g, ic, joiners);
        CHECK(is_circulation(g, c));
        Rational level_grad = 0;
        double level_len = 0;
        for (const auto& oe : cyc) {
          level_grad += exact[i][oe.id] * oe.sign;
          level_len += lg.edges[oe.id].length;
        }
        CHECK(exact_gradient(top, c) == level_grad);
        CHECK(static_cast<double>(length_of(g, c)) <= level_len * (1 + 1e-9));
      }
    }
  }
}

TEST_CASE("per-level length inflation along a sampled chain") {
  std::mt19937_64 rng(43);
  LsdConfig lsd;
  int good = 0, total = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = oracle::random_graph(24, 90, rng, -1, 1, 0.5, 4);
    ChainConfig cfg;
    cfg.k = 2;
    cfg.max_branching = 2;
    const auto chain = build_branching_tree_chain(as_level(g), 2, cfg);
    auto c = random_circulation<double>(g, rng, 5);
    bool ok = true;
    for (int node = 0; !chain.nodes[node].branches.empty();) {
      const auto& tn = chain.nodes[node];
      const auto& b = tn.branches[rng() % tn.branches.size()];
      const double before = length_of(tn.level_graph.graph, c);
      const auto cc = route_into_core(tn.level_graph.graph, b.core, c);
      Circulation nonforest;
      for (const auto& [id, v] : cc.values)
        if (!b.core.contracted[id]) nonforest.add(id, v);
      const auto ch = route_into_spanner(b.core.graph, b.spanner, nonforest);
      const auto& child = chain.nodes[b.child].level_graph;
      std::vector<EdgeId> index(b.core.graph.edges.size(), kNoEdge);
      for (std::size_t e = 0; e < child.parent.size(); ++e) index[child.parent[e]] = static_cast<EdgeId>(e);
      Circulation next;
      for (const auto& [id, v] : ch.values) next.add(index[id], v);
      const double after = length_of(child.graph, next);
      const double beta = 2.0 * average_stretch_bound(tn.level_graph.graph.num_vertices, lsd) * 2.0 * b.spanner.gamma_l;
      ok = ok && after <= beta * before + 1e-9;
      CHECK(is_circulation(child.graph, next));
      c = next;
      node = b.child;
    }
    good += ok;
    ++total;
  }
  MESSAGE("chains within the per-level bound: " << good << " / " << total);
  CHECK(2 * good >= total);
}
