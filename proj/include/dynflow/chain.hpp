#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dynflow/graph.hpp"
#include "dynflow/lsd.hpp"
#include "dynflow/weighted_graph.hpp"

namespace dynflow {

template <class T>
std::vector<T> divergence(const WeightedGraph& g, const BasicCirculation<T>& c) {
  std::vector<T> div(g.num_vertices, T(0));
  for (const auto& [id, v] : c.values) {
    if (id < 0 || id >= static_cast<EdgeId>(g.edges.size()))
      throw Error("divergence: unknown edge id " + std::to_string(id));
    div[g.edges[id].tail] -= v;
    div[g.edges[id].head] += v;
  }
  return div;
}

template <class T>
bool is_circulation(const WeightedGraph& g, const BasicCirculation<T>& c) {
  T scale(0);
  for (const auto& [id, v] : c.values) scale = std::max(scale, detail::magnitude(v));
  for (const T& d : divergence(g, c))
    if (!detail::near_zero(d, scale)) return false;
  return true;
}

template <class T>
T gradient_of(const WeightedGraph& g, const BasicCirculation<T>& c) {
  T s(0);
  for (const auto& [id, v] : c.values) s += T(g.edges[id].gradient) * v;
  return s;
}

template <class T>
T length_of(const WeightedGraph& g, const BasicCirculation<T>& c) {
  T s(0);
  for (const auto& [id, v] : c.values) s += T(g.edges[id].length) * detail::magnitude(v);
  return s;
}

template <class T = double>
BasicCirculation<T> to_circulation(std::span<const OrientedEdge> cycle) {
  BasicCirculation<T> c;
  for (const OrientedEdge& e : cycle) c.add(e.id, T(e.sign));
  c.prune();
  return c;
}

// ---------------------------------------------------------------------------
// Core graph C(G, F)

struct CoreGraph {
  WeightedGraph graph;              // edge i is the image of host edge i
  std::vector<VertexId> vertex_of;  // host vertex -> core vertex
  std::vector<char> contracted;     // forest edges, kept as zero-gradient self-loops
};

// Signed gradient of the T path from the T root to every vertex.
template <class T>
std::vector<T> tree_potentials(const WeightedGraph& g, std::span<const T> gradient, const ForestRouting& fr) {
  const VertexId n = g.num_vertices;
  std::vector<int> start(static_cast<std::size_t>(n) + 1, 0);
  for (EdgeId e = 0; e < static_cast<EdgeId>(g.edges.size()); ++e)
    if (fr.in_tree[e]) ++start[g.edges[e].tail + 1], ++start[g.edges[e].head + 1];
  for (VertexId v = 0; v < n; ++v) start[v + 1] += start[v];
  std::vector<std::pair<VertexId, EdgeId>> adj(static_cast<std::size_t>(start[n]));
  std::vector<int> fill(start.begin(), start.end() - 1);
  for (EdgeId e = 0; e < static_cast<EdgeId>(g.edges.size()); ++e) {
    if (!fr.in_tree[e]) continue;
    adj[fill[g.edges[e].tail]++] = {g.edges[e].head, e};
    adj[fill[g.edges[e].head]++] = {g.edges[e].tail, e};
  }
  std::vector<T> pot(n, T(0));
  std::vector<char> seen(n, 0);
  std::vector<VertexId> queue;
  for (VertexId s = 0; s < n; ++s) {
    if (seen[s]) continue;
    seen[s] = 1;
    queue.assign(1, s);
    for (std::size_t i = 0; i < queue.size(); ++i) {
      const VertexId x = queue[i];
      for (int i2 = start[x]; i2 < start[x + 1]; ++i2) {
        const auto [y, e] = adj[i2];
        if (seen[y]) continue;
        seen[y] = 1;
        pot[y] = g.edges[e].tail == x ? T(pot[x] + gradient[e]) : T(pot[x] - gradient[e]);
        queue.push_back(y);
      }
    }
  }
  return pot;
}

// g_e + <g, p(T[v, u])> for every e = (u, v); zero on forest edges.
template <class T>
std::vector<T> core_gradients(const WeightedGraph& g, std::span<const T> gradient, const ForestRouting& fr) {
  const auto pot = tree_potentials(g, gradient, fr);
  std::vector<T> out(g.edges.size(), T(0));
  for (std::size_t e = 0; e < g.edges.size(); ++e)
    if (!fr.in_forest[e]) out[e] = gradient[e] + pot[g.edges[e].tail] - pot[g.edges[e].head];
  return out;
}

std::vector<double> gradients_of(const WeightedGraph& g);

CoreGraph build_core_graph(const WeightedGraph& g, const ForestRouting& fr);

// Recomputes the core gradients from the host's current gradients.
void refresh_core_gradients(CoreGraph& cg, const WeightedGraph& g, const ForestRouting& fr);

template <class T>
BasicCirculation<T> route_into_core(const WeightedGraph& g, const CoreGraph& cg, const BasicCirculation<T>& c) {
  if (!is_circulation(g, c)) throw Error("route_into_core: nonzero divergence");
  BasicCirculation<T> out;
  for (const auto& [id, v] : c.values) out.add(id, v);
  (void)cg;
  return out;
}

// ---------------------------------------------------------------------------
// Spanner with embedding

struct SpannerParams {
  int gamma_l = 0;       // 0: ceil(2 log n)
  double gamma_s = 0.0;  // 0: 8 log n log W
  int visit_cap = 4096;  // BFS budget per candidate path search
};

int default_gamma_l(VertexId n);
double default_gamma_s(VertexId n, double length_spread);

// Lengths l and l' are within a factor two of each other.
inline bool approx2(double a, double b) { return a <= 2.0 * b && b <= 2.0 * a; }

// Bucket b holds lengths in (2^b, 2^(b+1)].
int length_bucket(double length);

struct SpannerWithEmbedding {
  int gamma_l = 1;
  double gamma_s = 1.0;
  std::vector<char> in_spanner;                       // per host edge
  std::vector<char> excluded;                         // neither spanner nor embedded
  std::vector<std::vector<OrientedEdge>> embedding;   // path tail -> head over spanner edges

  std::size_t spanner_size() const;
  bool is_embedded(EdgeId e) const { return !in_spanner[e] && !excluded[e]; }
};

SpannerWithEmbedding build_spanner(const WeightedGraph& host, SpannerParams params = {},
                                   std::span<const char> excluded = {});

// Human-readable descriptions of every violated spanner property; empty if
// the embedding is valid for `host` with its current lengths.
std::vector<std::string> spanner_violations(const WeightedGraph& host, const SpannerWithEmbedding& sp, int k);

// e forward followed by its embedding path reversed. A self-loop is a cycle
// on its own.
std::vector<OrientedEdge> sparsifier_cycle(const WeightedGraph& host, const SpannerWithEmbedding& sp, EdgeId e);

// The spanner as a graph of its own; `host_ids[i]` is the host id of edge i.
WeightedGraph spanner_graph(const WeightedGraph& host, const SpannerWithEmbedding& sp,
                            std::vector<EdgeId>& host_ids);

template <class T>
BasicCirculation<T> route_into_spanner(const WeightedGraph& host, const SpannerWithEmbedding& sp,
                                       const BasicCirculation<T>& c) {
  if (!is_circulation(host, c)) throw Error("route_into_spanner: nonzero divergence");
  BasicCirculation<T> out;
  for (const auto& [id, v] : c.values) {
    if (sp.in_spanner[id]) {
      out.add(id, v);
      continue;
    }
    if (sp.excluded[id]) throw Error("route_into_spanner: flow on an excluded edge");
    for (const OrientedEdge& pe : sp.embedding[id]) out.add(pe.id, v * T(pe.sign));
  }
  out.prune();
  return out;
}

// ---------------------------------------------------------------------------
// Chains

struct ChainConfig {
  int k = 8;
  int d_s = -1;  // -1: maximal with k^d_s <= m/n
  int d_t = -1;  // -1: maximal with k^d_t <= sqrt(n)
  SpannerParams spanner;
  LsdConfig lsd;
  int max_branching = 0;  // 0: every forest of the collection becomes a branch
};

int spanner_depth(std::int64_t m, VertexId n, int k);
int tree_depth(VertexId n, int k);

// A graph inside a chain. Edge i descends from edge `parent[i]` of the graph
// one level up and ultimately from edge `origin[i]` of the input graph.
struct LevelGraph {
  WeightedGraph graph;
  std::vector<EdgeId> parent;
  std::vector<EdgeId> origin;
};

struct SpannerLevel {
  LevelGraph level;
  SpannerWithEmbedding spanner;  // empty at the last level
};

struct SpannerChain {
  std::vector<SpannerLevel> levels;  // d_s + 1 graphs
};

SpannerChain build_spanner_chain(const LevelGraph& top, int d_s, const SpannerParams& params);

struct TreeBranch {
  int forest = -1;  // index into TreeNode::collection
  CoreGraph core;
  SpannerWithEmbedding spanner;
  int child = -1;
};

struct TreeNode {
  int level = 0;
  int parent_node = -1;
  int parent_branch = -1;
  LevelGraph level_graph;
  ForestCollection collection;
  std::vector<TreeBranch> branches;
};

struct BranchingTreeChain {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  std::vector<int> leaves;
  int depth = 0;
};

BranchingTreeChain build_branching_tree_chain(const LevelGraph& top, int d_t, const ChainConfig& cfg);

// Child level graph of a branch: the sparsified core graph.
LevelGraph sparsified_core_graph(const LevelGraph& parent, const TreeBranch& b);

// Recomputes the gradient of every node graph and core graph from the
// gradients of the top graph (lengths are frozen at build).
void refresh_chain_gradients(BranchingTreeChain& chain);

// Exact gradients of every node graph, derived from exact top gradients.
std::vector<std::vector<Rational>> exact_node_gradients(const BranchingTreeChain& chain,
                                                        std::span<const Rational> top);

// Input-graph ids of the forest F^{G_0..G_d} for the chain ending at `leaf`.
std::vector<EdgeId> chain_forest(const BranchingTreeChain& chain, int leaf);

// Any leaf below `node`.
int some_leaf_below(const BranchingTreeChain& chain, int node);

// Maps a cycle in the graph of `node` to its preimage edges in the input
// graph; the preimage edges are joined by paths in the chain forest.
std::vector<OrientedEdge> lift_cycle(const BranchingTreeChain& chain, int node,
                                     std::span<const OrientedEdge> cycle);
// A cycle of a branch's core graph uses the ids of the node graph, so it
// lifts through the same mapping.

// Explicit walk on a WeightedGraph for an implicit cycle (tests and audits).
std::optional<std::vector<OrientedEdge>> forest_path(const WeightedGraph& g, std::span<const EdgeId> forest,
                                                     VertexId from, VertexId to);

template <class T = double>
BasicCirculation<T> materialize_cycle(const WeightedGraph& g, const ImplicitCycle& ic,
                                      std::span<const EdgeId> forest_edges) {
  std::vector<EdgeId> tree(forest_edges.begin(), forest_edges.end());
  tree.insert(tree.end(), ic.augment.begin(), ic.augment.end());
  BasicCirculation<T> out;
  const std::size_t L = ic.off_tree.size();
  for (std::size_t j = 0; j < L; ++j) {
    const OrientedEdge& cur = ic.off_tree[j];
    const OrientedEdge& nxt = ic.off_tree[(j + 1) % L];
    out.add(cur.id, T(cur.sign));
    auto path = forest_path(g, tree, end_of(g, cur), start_of(g, nxt));
    if (!path) throw Error("materialize_cycle: segment endpoints are disconnected in the forest");
    for (const OrientedEdge& pe : *path) out.add(pe.id, T(pe.sign));
  }
  out.prune();
  return out;
}

}  // namespace dynflow
