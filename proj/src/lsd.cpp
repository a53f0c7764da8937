#include "dynflow/lsd.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <queue>
#include <string>

namespace dynflow {

double log_n(VertexId n) { return std::max(1.0, std::log2(static_cast<double>(std::max<VertexId>(n, 2)))); }

double weighted_stretch_bound(VertexId n, const LsdConfig& cfg) { return cfg.c_str * std::pow(log_n(n), 4); }

double average_stretch_bound(VertexId n, const LsdConfig& cfg) { return cfg.c_avg * std::pow(log_n(n), 4); }

double stretch_cap(VertexId n, int k) { return static_cast<double>(k) * std::pow(log_n(n), 6); }

double piece_volume_cap(VertexId n, int k, const LsdConfig& cfg) {
  return std::max(1.0, cfg.c_w * static_cast<double>(k) * std::pow(log_n(n), 2));
}

std::int64_t ForestRouting::components() const {
  std::int64_t c = 0;
  for (VertexId v = 0; v < num_vertices; ++v) c += root[v] == v;
  return c;
}

std::vector<EdgeId> ForestRouting::forest_edges() const {
  std::vector<EdgeId> out;
  for (EdgeId e = 0; e < static_cast<EdgeId>(in_forest.size()); ++e)
    if (in_forest[e]) out.push_back(e);
  return out;
}

namespace {

struct Adjacency {
  std::vector<std::vector<std::pair<VertexId, EdgeId>>> out;

  Adjacency(const WeightedGraph& g, const std::vector<char>* filter = nullptr) : out(g.num_vertices) {
    for (EdgeId e = 0; e < static_cast<EdgeId>(g.edges.size()); ++e) {
      if (filter && !(*filter)[e]) continue;
      const WeightedEdge& we = g.edges[e];
      if (we.tail == we.head) continue;
      out[we.tail].push_back({we.head, e});
      out[we.head].push_back({we.tail, e});
    }
  }
};

VertexId parent_of(const WeightedGraph& g, const ForestRouting& fr, VertexId v);

// Length-weighted distance from each vertex to its forest root, using the
// current lengths.
std::vector<double> root_distances(const WeightedGraph& g, const ForestRouting& fr) {
  std::vector<double> d(fr.num_vertices, -1.0);
  std::vector<VertexId> chain;
  for (VertexId v = 0; v < fr.num_vertices; ++v) {
    chain.clear();
    VertexId x = v;
    while (d[x] < 0.0 && fr.parent_edge[x] >= 0) {
      chain.push_back(x);
      x = parent_of(g, fr, x);
    }
    if (d[x] < 0.0) d[x] = 0.0;
    for (auto it = chain.rbegin(); it != chain.rend(); ++it)
      d[*it] = d[parent_of(g, fr, *it)] + g.edges[fr.parent_edge[*it]].length;
  }
  return d;
}

VertexId parent_of(const WeightedGraph& g, const ForestRouting& fr, VertexId v) {
  const WeightedEdge& we = g.edges[fr.parent_edge[v]];
  return we.tail == v ? we.head : we.tail;
}

// Length of the forest path between u and v (same component).
double forest_distance(const WeightedGraph& g, const ForestRouting& fr, const std::vector<double>& d,
                       const std::vector<int>& depth, VertexId u, VertexId v) {
  VertexId a = u, b = v;
  while (depth[a] > depth[b]) a = parent_of(g, fr, a);
  while (depth[b] > depth[a]) b = parent_of(g, fr, b);
  while (a != b) {
    a = parent_of(g, fr, a);
    b = parent_of(g, fr, b);
  }
  return d[u] + d[v] - 2.0 * d[a];
}

std::vector<int> depths(const WeightedGraph& g, const ForestRouting& fr) {
  std::vector<int> depth(fr.num_vertices, -1);
  for (VertexId v = 0; v < fr.num_vertices; ++v) {
    std::vector<VertexId> chain;
    VertexId x = v;
    while (depth[x] < 0 && fr.parent_edge[x] >= 0) {
      chain.push_back(x);
      x = parent_of(g, fr, x);
    }
    if (depth[x] < 0) depth[x] = 0;
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) depth[*it] = depth[parent_of(g, fr, *it)] + 1;
  }
  return depth;
}

double stretch_from(const WeightedGraph& g, const ForestRouting& fr, const std::vector<double>& d,
                    const std::vector<int>& depth, EdgeId e) {
  const WeightedEdge& we = g.edges[e];
  if (we.tail == we.head) return 1.0;
  const VertexId u = we.tail, v = we.head;
  double path;
  if (fr.root[u] == fr.root[v])
    path = forest_distance(g, fr, d, depth, u, v);
  else
    path = d[u] + d[v];
  return 1.0 + path / we.length;
}

// Sets parent_edge / root for every vertex reachable from `r` through forest
// edges, with `r` as the root.
void orient_from(const WeightedGraph& g, ForestRouting& fr, const Adjacency& fadj, VertexId r) {
  std::vector<VertexId> stack{r};
  fr.parent_edge[r] = kNoEdge;
  fr.root[r] = r;
  while (!stack.empty()) {
    const VertexId x = stack.back();
    stack.pop_back();
    for (auto [y, e] : fadj.out[x]) {
      if (!fr.in_forest[e] || e == fr.parent_edge[x]) continue;
      fr.parent_edge[y] = e;
      fr.root[y] = r;
      stack.push_back(y);
    }
  }
  (void)g;
}

// Low-stretch spanning forest by recursive ball growing. Each call splits a
// connected vertex set into a central ball and pieces attached to it by
// single bridge edges.
class TreeBuilder {
 public:
  TreeBuilder(const WeightedGraph& g, std::span<const double> w)
      : g_(g), w_(w), adj_(g), member_(g.num_vertices, -1), dist_(g.num_vertices), pred_(g.num_vertices),
        in_tree_(g.edges.size(), 0) {}

  std::vector<char> run(std::vector<VertexId>& centers) {
    std::vector<char> seen(g_.num_vertices, 0);
    for (VertexId s = 0; s < g_.num_vertices; ++s) {
      if (seen[s]) continue;
      std::vector<VertexId> comp{s};
      seen[s] = 1;
      for (std::size_t i = 0; i < comp.size(); ++i)
        for (auto [y, e] : adj_.out[comp[i]])
          if (!seen[y]) {
            seen[y] = 1;
            comp.push_back(y);
          }
      VertexId center = s;
      double best = -1.0;
      for (VertexId v : comp) {
        double wd = 0.0;
        for (auto [y, e] : adj_.out[v]) wd += w_[e];
        if (wd > best) {
          best = wd;
          center = v;
        }
      }
      centers.push_back(center);
      tasks_.push_back({std::move(comp), center});
    }
    while (!tasks_.empty()) {
      Task t = std::move(tasks_.back());
      tasks_.pop_back();
      decompose(t);
    }
    return std::move(in_tree_);
  }

 private:
  struct Task {
    std::vector<VertexId> vertices;
    VertexId center;
  };

  // Dijkstra from `src` restricted to vertices with member_ == tag. Returns
  // the visited vertices in order of distance.
  std::vector<VertexId> dijkstra(VertexId src, int tag, double limit) {
    using Item = std::pair<double, VertexId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    std::vector<VertexId> order, touched{src};
    dist_[src] = 0.0;
    pred_[src] = kNoEdge;
    member_[src] = tag + 1;  // tag + 1 marks "reached"
    pq.push({0.0, src});
    while (!pq.empty()) {
      auto [dv, v] = pq.top();
      pq.pop();
      if (dv > dist_[v] || member_[v] != tag + 1) continue;
      if (dv > limit) break;
      member_[v] = tag + 2;  // settled
      order.push_back(v);
      for (auto [y, e] : adj_.out[v]) {
        const double nd = dv + g_.edges[e].length;
        if (member_[y] == tag || (member_[y] == tag + 1 && nd < dist_[y])) {
          if (member_[y] == tag) touched.push_back(y);
          member_[y] = tag + 1;
          dist_[y] = nd;
          pred_[y] = e;
          pq.push({nd, y});
        }
      }
    }
    for (VertexId v : touched)
      if (member_[v] == tag + 1) member_[v] = tag;
    return order;
  }

  void decompose(Task& t) {
    const std::size_t sz = t.vertices.size();
    if (sz <= 1) return;
    const int tag = next_tag();
    for (VertexId v : t.vertices) member_[v] = tag;
    std::vector<VertexId> order = dijkstra(t.center, tag, std::numeric_limits<double>::infinity());
    if (sz <= 4) {
      for (VertexId v : order)
        if (pred_[v] >= 0) in_tree_[pred_[v]] = 1;
      for (VertexId v : t.vertices) member_[v] = -1;
      return;
    }
    const double radius = dist_[order.back()];
    // Grow the central ball. Candidate cut points lie in [R/3, 2R/3]; pick the
    // one with the least weight leaving the ball.
    const int settled = tag + 2;
    const int inball = tag + 3;
    double boundary = 0.0;
    std::size_t best_cut = 0;
    double best_cost = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
      const VertexId v = order[i];
      member_[v] = inball;
      for (auto [y, e] : adj_.out[v]) {
        if (member_[y] == inball)
          boundary -= w_[e];
        else if (member_[y] == settled)
          boundary += w_[e];
      }
      const double r = dist_[v];
      if (dist_[order[i + 1]] == r) continue;
      if (r < radius / 3.0 && i + 2 < order.size() && dist_[order[i + 1]] <= radius / 3.0) continue;
      if (r > 2.0 * radius / 3.0 && best_cost < std::numeric_limits<double>::infinity()) break;
      if (boundary < best_cost) {
        best_cost = boundary;
        best_cut = i;
      }
    }
    // Reset ball marks; ball = order[0..best_cut].
    for (VertexId v : order) member_[v] = settled;
    std::vector<VertexId> ball(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(best_cut + 1));
    const int tag_ball = next_tag();
    for (VertexId v : ball) member_[v] = tag_ball;
    const int tag_rest = next_tag();
    std::vector<VertexId> rest(order.begin() + static_cast<std::ptrdiff_t>(best_cut + 1), order.end());
    for (VertexId v : rest) member_[v] = tag_rest;

    // Attach pieces around the ball, nearest bridge first.
    using Bridge = std::pair<double, std::pair<EdgeId, VertexId>>;
    std::priority_queue<Bridge, std::vector<Bridge>, std::greater<>> bridges;
    auto offer = [&](VertexId from, double base) {
      for (auto [y, e] : adj_.out[from])
        if (member_[y] == tag_rest) bridges.push({base + g_.edges[e].length, {e, y}});
    };
    for (VertexId v : ball) offer(v, dist_[v]);
    std::size_t assigned = 0;
    while (assigned < rest.size()) {
      if (bridges.empty()) throw Error("lsd: disconnected piece during decomposition");
      auto [key, item] = bridges.top();
      bridges.pop();
      auto [e, anchor] = item;
      if (member_[anchor] != tag_rest) continue;
      in_tree_[e] = 1;
      const int tag_piece = next_tag();
      // Piece radius up to R/3, cut at the cheapest boundary.
      std::vector<VertexId> reach = dijkstra(anchor, tag_rest, radius / 3.0);
      double bnd = 0.0, best = std::numeric_limits<double>::infinity();
      std::size_t cut = 0;
      const int piece_mark = tag_piece + 5;
      for (std::size_t i = 0; i < reach.size(); ++i) {
        const VertexId v = reach[i];
        member_[v] = piece_mark;
        for (auto [y, f] : adj_.out[v]) {
          if (member_[y] == piece_mark)
            bnd -= w_[f];
          else if (member_[y] == tag_rest || member_[y] == tag_rest + 2)
            bnd += w_[f];
        }
        if (i + 1 < reach.size() && dist_[reach[i + 1]] == dist_[v]) continue;
        if (bnd <= best) {
          best = bnd;
          cut = i;
        }
      }
      std::vector<VertexId> piece(reach.begin(), reach.begin() + static_cast<std::ptrdiff_t>(cut + 1));
      for (VertexId v : reach) member_[v] = tag_rest;
      for (VertexId v : piece) member_[v] = tag_piece;
      for (VertexId v : piece) offer(v, key);
      assigned += piece.size();
      tasks_.push_back({std::move(piece), anchor});
    }
    for (VertexId v : ball) member_[v] = -1;
    tasks_.push_back({std::move(ball), t.center});
  }

  int next_tag() {
    tag_counter_ += 8;
    return tag_counter_;
  }

  const WeightedGraph& g_;
  std::span<const double> w_;
  Adjacency adj_;
  std::vector<int> member_;
  std::vector<double> dist_;
  std::vector<EdgeId> pred_;
  std::vector<char> in_tree_;
  std::vector<Task> tasks_;
  int tag_counter_ = 0;
};

// Pieces, component count and frozen overestimates. Overestimates use the
// distance to the roots on both sides; forest deletions only shrink root
// distances, so they stay valid without recomputation.
void finalize(const WeightedGraph& g, ForestRouting& fr, const std::vector<VertexId>& order) {
  std::vector<std::vector<VertexId>> by_root(fr.num_vertices);
  for (VertexId v : order) by_root[fr.root[v]].push_back(v);
  for (auto& piece : by_root)
    if (!piece.empty()) fr.pieces.push_back(std::move(piece));
  fr.initial_components = static_cast<std::int64_t>(fr.pieces.size());
  const auto d = root_distances(g, fr);
  fr.stretch_over.resize(g.edges.size());
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    const WeightedEdge& we = g.edges[e];
    fr.stretch_over[e] = we.tail == we.head ? 1.0 : 1.0 + (d[we.tail] + d[we.head]) / we.length;
  }
}

}  // namespace

double stretch(const WeightedGraph& g, const ForestRouting& fr, EdgeId e) {
  if (e < 0 || e >= static_cast<EdgeId>(g.edges.size())) throw Error("stretch: unknown edge");
  return stretch_from(g, fr, root_distances(g, fr), depths(g, fr), e);
}

std::vector<double> stretches(const WeightedGraph& g, const ForestRouting& fr) {
  const auto d = root_distances(g, fr);
  const auto depth = depths(g, fr);
  std::vector<double> out(g.edges.size());
  for (EdgeId e = 0; e < static_cast<EdgeId>(g.edges.size()); ++e) out[e] = stretch_from(g, fr, d, depth, e);
  return out;
}

ForestRouting build_lsd(const WeightedGraph& g, std::span<const double> weights, int k, const LsdConfig& cfg) {
  const VertexId n = g.num_vertices;
  const EdgeId m = static_cast<EdgeId>(g.edges.size());
  if (k < 1) throw Error("lsd: k must be positive");
  if (static_cast<EdgeId>(weights.size()) != m) throw Error("lsd: weight vector size mismatch");
  for (const WeightedEdge& e : g.edges)
    if (!(e.length > 0.0)) throw Error("lsd: nonpositive length");
  for (double w : weights)
    if (!(w >= 0.0)) throw Error("lsd: negative weight");

  ForestRouting fr;
  fr.num_vertices = n;
  fr.k = k;
  std::vector<VertexId> centers;
  {
    TreeBuilder tb(g, weights);
    fr.in_tree = tb.run(centers);
  }
  fr.in_forest = fr.in_tree;
  fr.parent_edge.assign(n, kNoEdge);
  fr.root.assign(n, kNoVertex);
  fr.potential.assign(n, 0.0);

  // Root T at the centres and record BFS order, potentials.
  const Adjacency tadj(g, &fr.in_tree);
  std::vector<VertexId> order;
  order.reserve(n);
  for (VertexId c : centers) {
    fr.root[c] = c;
    std::size_t start = order.size();
    order.push_back(c);
    for (std::size_t i = start; i < order.size(); ++i) {
      const VertexId x = order[i];
      for (auto [y, e] : tadj.out[x]) {
        if (e == fr.parent_edge[x]) continue;
        fr.parent_edge[y] = e;
        fr.root[y] = c;
        const WeightedEdge& we = g.edges[e];
        fr.potential[y] = fr.potential[x] + (we.tail == x ? we.gradient : -we.gradient);
        order.push_back(y);
      }
    }
  }
  if (static_cast<VertexId>(order.size()) != n) throw Error("lsd: tree does not span every component");

  // Cut T into pieces of bounded volume, bottom-up, keeping the smallest
  // child subtrees attached first.
  const double cap = piece_volume_cap(n, k, cfg);
  std::vector<double> vol(n, 0.0);
  for (const WeightedEdge& e : g.edges) {
    vol[e.tail] += 1.0;
    vol[e.head] += 1.0;
  }
  std::vector<double> pending(n, 0.0);
  std::vector<std::vector<VertexId>> children(n);
  for (VertexId v : order)
    if (fr.parent_edge[v] >= 0) children[parent_of(g, fr, v)].push_back(v);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const VertexId x = *it;
    auto& ch = children[x];
    std::sort(ch.begin(), ch.end(), [&](VertexId a, VertexId b) { return pending[a] < pending[b]; });
    double acc = 0.0;
    for (VertexId c : ch) {
      if (acc + pending[c] <= cap) {
        acc += pending[c];
      } else {
        fr.in_forest[fr.parent_edge[c]] = 0;
      }
    }
    pending[x] = acc + vol[x];
    if (pending[x] > cap && fr.parent_edge[x] >= 0) {
      fr.in_forest[fr.parent_edge[x]] = 0;
      pending[x] = 0.0;
    }
  }
  // Orient F: each component keeps the T root if it contains it, otherwise
  // the top vertex of the component.
  for (VertexId v : order)
    if (fr.parent_edge[v] < 0 || !fr.in_forest[fr.parent_edge[v]]) fr.parent_edge[v] = kNoEdge;
  for (VertexId v : order) fr.root[v] = fr.parent_edge[v] < 0 ? v : fr.root[parent_of(g, fr, v)];

  finalize(g, fr, order);
  return fr;
}

ForestRouting make_forest_routing(const WeightedGraph& g, std::span<const EdgeId> tree,
                                  std::span<const VertexId> roots, int k) {
  const VertexId n = g.num_vertices;
  ForestRouting fr;
  fr.num_vertices = n;
  fr.k = k;
  fr.in_tree.assign(g.edges.size(), 0);
  for (EdgeId e : tree) {
    if (e < 0 || e >= static_cast<EdgeId>(g.edges.size())) throw Error("lsd: unknown tree edge");
    fr.in_tree[e] = 1;
  }
  fr.in_forest = fr.in_tree;
  fr.parent_edge.assign(n, kNoEdge);
  fr.root.assign(n, kNoVertex);
  fr.potential.assign(n, 0.0);
  const Adjacency tadj(g, &fr.in_tree);
  std::vector<VertexId> starts(roots.begin(), roots.end());
  for (VertexId v = 0; v < n; ++v) starts.push_back(v);
  std::vector<VertexId> order;
  for (VertexId r : starts) {
    if (fr.root[r] >= 0) continue;
    fr.root[r] = r;
    const std::size_t begin = order.size();
    order.push_back(r);
    for (std::size_t i = begin; i < order.size(); ++i) {
      const VertexId x = order[i];
      for (auto [y, e] : tadj.out[x]) {
        if (e == fr.parent_edge[x]) continue;
        if (fr.root[y] >= 0) throw Error("lsd: tree edges contain a cycle");
        fr.parent_edge[y] = e;
        fr.root[y] = r;
        const WeightedEdge& we = g.edges[e];
        fr.potential[y] = fr.potential[x] + (we.tail == x ? we.gradient : -we.gradient);
        order.push_back(y);
      }
    }
  }
  finalize(g, fr, order);
  return fr;
}

void delete_forest_edge(ForestRouting& fr, const WeightedGraph& g, EdgeId e) {
  if (e < 0 || e >= static_cast<EdgeId>(fr.in_forest.size()) || !fr.in_forest[e])
    throw Error("lsd: edge " + std::to_string(e) + " is not a forest edge");
  const WeightedEdge& we = g.edges[e];
  const VertexId child = fr.parent_edge[we.tail] == e ? we.tail : we.head;
  fr.in_forest[e] = 0;
  fr.parent_edge[child] = kNoEdge;
  const Adjacency fadj(g, &fr.in_forest);
  orient_from(g, fr, fadj, child);
  ++fr.updates;
}

void insert_edge_hook(ForestRouting& fr, const WeightedGraph& g, EdgeId e) {
  if (e != static_cast<EdgeId>(fr.in_forest.size()) || e >= static_cast<EdgeId>(g.edges.size()))
    throw Error("lsd: inserted edge must be appended");
  fr.in_tree.push_back(0);
  fr.in_forest.push_back(0);
  fr.stretch_over.push_back(1.0);
  const WeightedEdge& we = g.edges[e];
  for (VertexId x : {we.tail, we.head})
    if (fr.parent_edge[x] >= 0) delete_forest_edge(fr, g, fr.parent_edge[x]);
  ++fr.updates;
}

std::vector<double> ForestCollection::average_stretch() const {
  if (forests.empty()) return {};
  std::vector<double> avg(forests.front().stretch_over.size(), 0.0);
  const double lambda = weight();
  for (const ForestRouting& fr : forests)
    for (std::size_t e = 0; e < avg.size(); ++e) avg[e] += lambda * fr.stretch_over[e];
  return avg;
}

ForestCollection mwu_build_collection(const WeightedGraph& g, int k, const LsdConfig& cfg) {
  const VertexId n = g.num_vertices;
  const std::size_t m = g.edges.size();
  const double beta = average_stretch_bound(n, cfg);
  int max_forests = std::max(cfg.min_forests, static_cast<int>(std::ceil(cfg.c_t * static_cast<double>(k) * log_n(n))));
  if (cfg.max_forests > 0) max_forests = std::max(cfg.min_forests, std::min(max_forests, cfg.max_forests));
  ForestCollection col;
  std::vector<double> weights(m, 1.0);
  std::vector<double> sum(m, 0.0);
  for (int t = 0; t < max_forests; ++t) {
    col.forests.push_back(build_lsd(g, weights, k, cfg));
    const ForestRouting& fr = col.forests.back();
    double worst = 0.0;
    for (std::size_t e = 0; e < m; ++e) {
      sum[e] += fr.stretch_over[e];
      worst = std::max(worst, sum[e] / static_cast<double>(t + 1));
    }
    if (worst <= beta && t + 1 >= cfg.min_forests) {
      col.worst_average = worst;
      return col;
    }
    // Edges that were stretched a lot get more weight in the next round.
    double total = 0.0;
    for (std::size_t e = 0; e < m; ++e) {
      weights[e] *= std::exp(std::min(20.0, fr.stretch_over[e] / beta));
      total += weights[e];
    }
    for (double& w : weights) w *= static_cast<double>(m) / total;
  }
  const auto avg = col.average_stretch();
  col.worst_average = 0.0;
  for (double a : avg) col.worst_average = std::max(col.worst_average, a);
  col.bound_met = col.worst_average <= beta;
  return col;
}

}  // namespace dynflow
