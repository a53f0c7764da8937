#include "dynflow/chain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace dynflow {

std::vector<double> gradients_of(const WeightedGraph& g) {
  std::vector<double> out;
  out.reserve(g.edges.size());
  for (const WeightedEdge& e : g.edges) out.push_back(e.gradient);
  return out;
}

CoreGraph build_core_graph(const WeightedGraph& g, const ForestRouting& fr) {
  const VertexId n = g.num_vertices;
  if (fr.num_vertices != n || fr.in_forest.size() != g.edges.size())
    throw Error("build_core_graph: forest does not match the graph");
  CoreGraph cg;
  cg.vertex_of.assign(n, kNoVertex);
  std::vector<VertexId> compact(n, kNoVertex);
  VertexId next = 0;
  for (VertexId v = 0; v < n; ++v)
    if (fr.is_root(v)) compact[v] = next++;
  for (VertexId v = 0; v < n; ++v) cg.vertex_of[v] = compact[fr.root[v]];
  cg.graph.num_vertices = next;
  cg.contracted.assign(g.edges.size(), 0);
  for (EdgeId e = 0; e < static_cast<EdgeId>(g.edges.size()); ++e) {
    const WeightedEdge& we = g.edges[e];
    cg.graph.add_edge(cg.vertex_of[we.tail], cg.vertex_of[we.head], 0.0, fr.stretch_over[e] * we.length);
    cg.contracted[e] = fr.in_forest[e];
  }
  refresh_core_gradients(cg, g, fr);
  return cg;
}

void refresh_core_gradients(CoreGraph& cg, const WeightedGraph& g, const ForestRouting& fr) {
  const auto grad = gradients_of(g);
  const auto core = core_gradients<double>(g, grad, fr);
  for (std::size_t e = 0; e < g.edges.size(); ++e) cg.graph.edges[e].gradient = core[e];
}

int default_gamma_l(VertexId n) { return static_cast<int>(std::ceil(2.0 * log_n(n))); }

double default_gamma_s(VertexId n, double length_spread) {
  return 8.0 * log_n(n) * std::max(1.0, std::log2(std::max(2.0, length_spread)));
}

int length_bucket(double length) { return static_cast<int>(std::ceil(std::log2(length))) - 1; }

std::size_t SpannerWithEmbedding::spanner_size() const {
  return static_cast<std::size_t>(std::count(in_spanner.begin(), in_spanner.end(), 1));
}

SpannerWithEmbedding build_spanner(const WeightedGraph& host, SpannerParams params, std::span<const char> excluded) {
  const VertexId n = host.num_vertices;
  const std::size_t m = host.edges.size();
  SpannerWithEmbedding sp;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const WeightedEdge& e : host.edges) {
    if (!(e.length > 0.0)) throw Error("build_spanner: nonpositive length");
    lo = std::min(lo, e.length);
    hi = std::max(hi, e.length);
  }
  sp.gamma_l = params.gamma_l > 0 ? params.gamma_l : default_gamma_l(n);
  sp.gamma_s = params.gamma_s > 0 ? params.gamma_s : default_gamma_s(n, m ? hi / lo : 1.0);
  sp.in_spanner.assign(m, 0);
  sp.excluded.assign(m, 0);
  if (!excluded.empty()) {
    if (excluded.size() != m) throw Error("build_spanner: exclusion mask size mismatch");
    std::copy(excluded.begin(), excluded.end(), sp.excluded.begin());
  }
  sp.embedding.assign(m, {});

  std::vector<EdgeId> order;
  for (EdgeId e = 0; e < static_cast<EdgeId>(m); ++e)
    if (!sp.excluded[e]) order.push_back(e);
  std::stable_sort(order.begin(), order.end(), [&](EdgeId a, EdgeId b) {
    const int ba = length_bucket(host.edges[a].length), bb = length_bucket(host.edges[b].length);
    return ba != bb ? ba < bb : host.edges[a].length < host.edges[b].length;
  });

  using Adj = std::vector<std::vector<std::pair<VertexId, OrientedEdge>>>;
  std::map<int, Adj> by_bucket;
  std::vector<int> hops(n, -1);
  std::vector<OrientedEdge> via(n);
  std::vector<VertexId> queue;
  for (EdgeId e : order) {
    const WeightedEdge& we = host.edges[e];
    if (we.tail == we.head) continue;  // its own cycle, empty embedding
    Adj& adj = by_bucket[length_bucket(we.length)];
    if (adj.empty()) adj.resize(n);
    // Hop-bounded BFS from tail towards head inside this bucket.
    queue.assign(1, we.tail);
    hops[we.tail] = 0;
    bool found = false;
    for (std::size_t i = 0; i < queue.size() && !found; ++i) {
      const VertexId x = queue[i];
      if (hops[x] >= sp.gamma_l || static_cast<int>(queue.size()) > params.visit_cap) break;
      for (auto [y, oe] : adj[x]) {
        if (hops[y] >= 0) continue;
        hops[y] = hops[x] + 1;
        via[y] = oe;
        queue.push_back(y);
        if (y == we.head) {
          found = true;
          break;
        }
      }
    }
    if (found) {
      std::vector<OrientedEdge> path;
      for (VertexId x = we.head; x != we.tail; x = start_of(host, via[x])) path.push_back(via[x]);
      std::reverse(path.begin(), path.end());
      sp.embedding[e] = std::move(path);
    } else {
      sp.in_spanner[e] = 1;
      sp.embedding[e] = {{e, 1}};
      adj[we.tail].push_back({we.head, {e, 1}});
      adj[we.head].push_back({we.tail, {e, -1}});
    }
    for (VertexId x : queue) hops[x] = -1;
  }
  return sp;
}

std::vector<std::string> spanner_violations(const WeightedGraph& host, const SpannerWithEmbedding& sp, int k) {
  std::vector<std::string> out;
  const std::size_t m = host.edges.size();
  if (sp.in_spanner.size() != m || sp.embedding.size() != m || sp.excluded.size() != m) {
    out.push_back("size mismatch");
    return out;
  }
  for (EdgeId e = 0; e < static_cast<EdgeId>(m); ++e) {
    if (sp.excluded[e]) continue;
    const WeightedEdge& we = host.edges[e];
    const auto& path = sp.embedding[e];
    const std::string tag = "edge " + std::to_string(e) + ": ";
    if (sp.in_spanner[e]) {
      if (path.size() != 1 || path[0] != OrientedEdge{e, 1}) out.push_back(tag + "spanner edge must embed as itself");
      continue;
    }
    if (static_cast<int>(path.size()) > sp.gamma_l) out.push_back(tag + "embedding longer than gamma_l");
    VertexId at = we.tail;
    for (const OrientedEdge& pe : path) {
      if (pe.id < 0 || pe.id >= static_cast<EdgeId>(m) || !sp.in_spanner[pe.id]) {
        out.push_back(tag + "embedding uses a non-spanner edge");
        break;
      }
      if (start_of(host, pe) != at) {
        out.push_back(tag + "embedding is not a walk");
        break;
      }
      at = end_of(host, pe);
      if (!approx2(host.edges[pe.id].length, we.length)) out.push_back(tag + "embedding mixes length scales");
    }
    if (at != we.head) out.push_back(tag + "embedding does not end at the head");
  }
  const double bound = (static_cast<double>(m) / k + host.num_vertices) * sp.gamma_s;
  if (static_cast<double>(sp.spanner_size()) > bound) out.push_back("spanner larger than (m/k + n) gamma_s");
  return out;
}

std::vector<OrientedEdge> sparsifier_cycle(const WeightedGraph& host, const SpannerWithEmbedding& sp, EdgeId e) {
  if (!sp.is_embedded(e)) throw Error("sparsifier_cycle: edge is not embedded");
  std::vector<OrientedEdge> cycle{{e, 1}};
  const auto& path = sp.embedding[e];
  for (auto it = path.rbegin(); it != path.rend(); ++it) cycle.push_back({it->id, -it->sign});
  (void)host;
  return cycle;
}

WeightedGraph spanner_graph(const WeightedGraph& host, const SpannerWithEmbedding& sp, std::vector<EdgeId>& host_ids) {
  WeightedGraph h;
  h.num_vertices = host.num_vertices;
  host_ids.clear();
  for (EdgeId e = 0; e < static_cast<EdgeId>(host.edges.size()); ++e) {
    if (!sp.in_spanner[e]) continue;
    h.edges.push_back(host.edges[e]);
    host_ids.push_back(e);
  }
  return h;
}

int spanner_depth(std::int64_t m, VertexId n, int k) {
  if (k < 2 || n <= 0) return 0;
  int d = 0;
  double power = k;
  while (power <= static_cast<double>(m) / n) {
    ++d;
    power *= k;
  }
  return d;
}

int tree_depth(VertexId n, int k) {
  if (k < 2) return 0;
  int d = 0;
  double power = k;
  while (power <= std::sqrt(static_cast<double>(n))) {
    ++d;
    power *= k;
  }
  return d;
}

SpannerChain build_spanner_chain(const LevelGraph& top, int d_s, const SpannerParams& params) {
  SpannerChain chain;
  chain.levels.push_back({top, {}});
  for (int i = 0; i < d_s; ++i) {
    SpannerLevel& cur = chain.levels.back();
    cur.spanner = build_spanner(cur.level.graph, params);
    LevelGraph next;
    next.graph = spanner_graph(cur.level.graph, cur.spanner, next.parent);
    next.origin.reserve(next.parent.size());
    for (EdgeId p : next.parent) next.origin.push_back(cur.level.origin[p]);
    chain.levels.push_back({std::move(next), {}});
  }
  return chain;
}

LevelGraph sparsified_core_graph(const LevelGraph& parent, const TreeBranch& b) {
  LevelGraph child;
  child.graph = spanner_graph(b.core.graph, b.spanner, child.parent);
  child.origin.reserve(child.parent.size());
  for (EdgeId p : child.parent) child.origin.push_back(parent.origin[p]);
  return child;
}

BranchingTreeChain build_branching_tree_chain(const LevelGraph& top, int d_t, const ChainConfig& cfg) {
  BranchingTreeChain chain;
  chain.depth = d_t;
  chain.nodes.push_back({});
  chain.nodes[0].level_graph = top;
  for (std::size_t i = 0; i < chain.nodes.size(); ++i) {
    if (chain.nodes[i].level == d_t) {
      chain.leaves.push_back(static_cast<int>(i));
      continue;
    }
    LsdConfig lsd = cfg.lsd;
    if (cfg.max_branching > 0 && lsd.max_forests <= 0) lsd.max_forests = cfg.max_branching;
    ForestCollection col = mwu_build_collection(chain.nodes[i].level_graph.graph, cfg.k, lsd);
    std::size_t branching = col.forests.size();
    if (cfg.max_branching > 0) branching = std::min<std::size_t>(branching, cfg.max_branching);
    col.forests.resize(branching);
    chain.nodes[i].collection = std::move(col);
    for (std::size_t j = 0; j < branching; ++j) {
      TreeNode& node = chain.nodes[i];
      TreeBranch b;
      b.forest = static_cast<int>(j);
      b.core = build_core_graph(node.level_graph.graph, node.collection.forests[j]);
      b.spanner = build_spanner(b.core.graph, cfg.spanner, b.core.contracted);
      TreeNode child;
      child.level = node.level + 1;
      child.parent_node = static_cast<int>(i);
      child.parent_branch = static_cast<int>(j);
      child.level_graph = sparsified_core_graph(node.level_graph, b);
      b.child = static_cast<int>(chain.nodes.size());
      node.branches.push_back(std::move(b));
      chain.nodes.push_back(std::move(child));
    }
  }
  return chain;
}

void refresh_chain_gradients(BranchingTreeChain& chain) {
  for (TreeNode& node : chain.nodes) {
    for (TreeBranch& b : node.branches) {
      refresh_core_gradients(b.core, node.level_graph.graph, node.collection.forests[b.forest]);
      LevelGraph& child = chain.nodes[b.child].level_graph;
      for (std::size_t e = 0; e < child.graph.edges.size(); ++e)
        child.graph.edges[e].gradient = b.core.graph.edges[child.parent[e]].gradient;
    }
  }
}

std::vector<std::vector<Rational>> exact_node_gradients(const BranchingTreeChain& chain,
                                                        std::span<const Rational> top) {
  std::vector<std::vector<Rational>> out(chain.nodes.size());
  out[0].assign(top.begin(), top.end());
  for (std::size_t i = 0; i < chain.nodes.size(); ++i) {
    const TreeNode& node = chain.nodes[i];
    for (const TreeBranch& b : node.branches) {
      const auto core = core_gradients<Rational>(node.level_graph.graph, out[i], node.collection.forests[b.forest]);
      const LevelGraph& child = chain.nodes[b.child].level_graph;
      auto& dst = out[b.child];
      dst.reserve(child.parent.size());
      for (EdgeId p : child.parent) dst.push_back(core[p]);
    }
  }
  return out;
}

std::vector<EdgeId> chain_forest(const BranchingTreeChain& chain, int leaf) {
  std::vector<EdgeId> out;
  for (int v = leaf; chain.nodes[v].parent_node >= 0;) {
    const TreeNode& p = chain.nodes[chain.nodes[v].parent_node];
    const TreeBranch& b = p.branches[chain.nodes[v].parent_branch];
    const ForestRouting& fr = p.collection.forests[b.forest];
    for (EdgeId e = 0; e < static_cast<EdgeId>(fr.in_forest.size()); ++e)
      if (fr.in_forest[e]) out.push_back(p.level_graph.origin[e]);
    v = chain.nodes[v].parent_node;
  }
  std::sort(out.begin(), out.end());
  return out;
}

int some_leaf_below(const BranchingTreeChain& chain, int node) {
  while (!chain.nodes[node].branches.empty()) node = chain.nodes[node].branches.front().child;
  return node;
}

std::vector<OrientedEdge> lift_cycle(const BranchingTreeChain& chain, int node, std::span<const OrientedEdge> cycle) {
  const LevelGraph& lg = chain.nodes[node].level_graph;
  std::vector<OrientedEdge> out;
  out.reserve(cycle.size());
  for (const OrientedEdge& e : cycle) {
    if (e.id < 0 || e.id >= static_cast<EdgeId>(lg.origin.size())) throw Error("lift_cycle: unknown level edge");
    out.push_back({lg.origin[e.id], e.sign});
  }
  return out;
}

std::optional<std::vector<OrientedEdge>> forest_path(const WeightedGraph& g, std::span<const EdgeId> forest,
                                                     VertexId from, VertexId to) {
  if (from == to) return std::vector<OrientedEdge>{};
  std::map<VertexId, std::vector<std::pair<VertexId, OrientedEdge>>> adj;
  for (EdgeId e : forest) {
    const WeightedEdge& we = g.edges[e];
    adj[we.tail].push_back({we.head, {e, 1}});
    adj[we.head].push_back({we.tail, {e, -1}});
  }
  std::map<VertexId, OrientedEdge> via;
  std::vector<VertexId> queue{from};
  via[from] = {kNoEdge, 0};
  for (std::size_t i = 0; i < queue.size(); ++i) {
    const VertexId x = queue[i];
    if (x == to) break;
    for (auto [y, oe] : adj[x]) {
      if (via.contains(y)) continue;
      via[y] = oe;
      queue.push_back(y);
    }
  }
  if (!via.contains(to)) return std::nullopt;
  std::vector<OrientedEdge> path;
  for (VertexId x = to; x != from; x = start_of(g, via[x])) path.push_back(via[x]);
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace dynflow
