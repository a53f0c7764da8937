#include "dynflow/mrc_dynamic.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <thread>
#include <map>
#include <sstream>

namespace dynflow {

const char* to_string(QueryCase c) {
  switch (c) {
    case QueryCase::SpannerLevel: return "spanner-level";
    case QueryCase::TreeLevel: return "tree-level";
    case QueryCase::Bottom: return "bottom";
  }
  return "?";
}

namespace {

using Adj = std::vector<std::vector<std::pair<VertexId, OrientedEdge>>>;

struct SpannerState {
  std::vector<char> present;
  std::vector<char> in_spanner;
  std::vector<std::vector<OrientedEdge>> embedding;
  std::vector<std::vector<EdgeId>> dependents;
  std::vector<int> bucket;
  std::map<int, Adj> adj;
  std::vector<double> ratio;
  std::set<std::pair<double, EdgeId>> pq;
  std::int64_t edges = 0;
  std::int64_t spanner = 0;

  void grow(std::size_t m) {
    present.resize(m, 0);
    in_spanner.resize(m, 0);
    embedding.resize(m);
    dependents.resize(m);
    bucket.resize(m, 0);
    ratio.resize(m, 0.0);
  }
  bool embedded(EdgeId e) const { return present[e] && !in_spanner[e]; }
};

// e forward, then its embedding reversed; value along that orientation.
CycleValue sparsifier_value(const WeightedGraph& g, EdgeId e, const std::vector<OrientedEdge>& path) {
  CycleValue v{g.edges[e].gradient, g.edges[e].length};
  for (const OrientedEdge& p : path) {
    v.gradient -= p.sign * g.edges[p.id].gradient;
    v.length += g.edges[p.id].length;
  }
  return v;
}

std::vector<OrientedEdge> oriented_cycle(EdgeId e, const std::vector<OrientedEdge>& path, int orientation) {
  std::vector<OrientedEdge> cyc{{e, 1}};
  for (auto it = path.rbegin(); it != path.rend(); ++it) cyc.push_back({it->id, -it->sign});
  if (orientation < 0) {
    std::reverse(cyc.begin(), cyc.end());
    for (auto& oe : cyc) oe.sign = -oe.sign;
  }
  return cyc;
}

double best_orientation(const CycleValue& v) { return v.length > 0.0 ? -std::abs(v.gradient) / v.length : 0.0; }

WeightedGraph compact(const WeightedGraph& g, const std::vector<char>& keep, std::vector<EdgeId>& ids) {
  WeightedGraph out;
  out.num_vertices = g.num_vertices;
  ids.clear();
  for (EdgeId e = 0; e < static_cast<EdgeId>(keep.size()); ++e) {
    if (!keep[e]) continue;
    out.edges.push_back(g.edges[e]);
    ids.push_back(e);
  }
  return out;
}

}  // namespace

DichotomyEvidence dichotomy_evidence(const WeightedGraph& host, const SpannerWithEmbedding& sp) {
  DichotomyEvidence ev;
  const auto opt = min_ratio_cycle_exact(host);
  if (!opt) {
    ev.vacuous = true;
    return ev;
  }
  ev.opt_host = opt->ratio;
  std::vector<EdgeId> ids;
  const WeightedGraph h = spanner_graph(host, sp, ids);
  ev.opt_spanner = h.edges.empty() ? 0.0 : optimal_ratio(h);
  ev.best_sparsifier = 0.0;
  for (EdgeId e = 0; e < static_cast<EdgeId>(host.edges.size()); ++e) {
    if (!sp.is_embedded(e)) continue;
    ev.best_sparsifier = std::min(ev.best_sparsifier, best_orientation(sparsifier_value(host, e, sp.embedding[e])));
  }
  ev.bound = ev.opt_host / (5.0 * sp.gamma_l);
  const double tol = 1e-12 * std::max(1.0, std::abs(ev.opt_host));
  ev.holds = ev.best_sparsifier <= ev.bound + tol || ev.opt_spanner <= ev.bound + tol;
  if (!ev.holds) {
    std::ostringstream os;
    os << "dichotomy violated: opt " << ev.opt_host << ", spanner opt " << ev.opt_spanner << ", best sparsifier "
       << ev.best_sparsifier << ", bound " << ev.bound << "\nedges:";
    for (const auto& e : host.edges) os << " (" << e.tail << "," << e.head << "," << e.gradient << "," << e.length << ")";
    ev.dump = os.str();
  }
  return ev;
}

struct MrcHandle::Impl {
  VertexId n;
  MrcConfig cfg;
  WeightedGraph g;
  std::vector<char> alive;
  std::int64_t live = 0;

  bool fixed = false;
  int d_s = 0;
  int d_t = 0;
  int gamma_l = 1;
  double gamma_s = 1.0;
  std::vector<SpannerState> levels;
  std::vector<char> bottom;

  BranchingTreeChain chain;
  bool chain_valid = false;
  std::vector<double> chain_lengths;
  std::vector<std::vector<EdgeId>> forests{{}};
  std::uint64_t epoch = 0;

  std::mt19937_64 rng;
  MrcStats stats;
  std::vector<MrcTraceRecord> trace;

  Impl(VertexId nv, MrcConfig c) : n(nv), cfg(std::move(c)), rng(cfg.seed) {
    g.num_vertices = n;
    gamma_l = cfg.spanner.gamma_l > 0 ? cfg.spanner.gamma_l : default_gamma_l(n);
    if (cfg.m_hint > 0 || cfg.d_s >= 0) fix_depths();
  }

  void check_length(double l) const {
    if (!(l >= cfg.length_min && l <= cfg.length_max))
      throw Error("mrc: length " + std::to_string(l) + " outside the configured range");
  }

  void grow(std::size_t m) {
    if (g.edges.size() >= m) return;
    g.edges.resize(m);
    alive.resize(m, 0);
    bottom.resize(m, 0);
    for (auto& L : levels) L.grow(m);
  }

  void fix_depths() {
    fixed = true;
    const std::int64_t m = cfg.m_hint > 0 ? cfg.m_hint : std::max<std::int64_t>(live, 1);
    d_s = cfg.d_s >= 0 ? cfg.d_s : dynflow::spanner_depth(m, n, cfg.k);
    d_t = cfg.d_t >= 0 ? cfg.d_t : dynflow::tree_depth(n, cfg.k);
    levels.assign(d_s, {});
    for (auto& L : levels) L.grow(g.edges.size());
    rebuild_from(0);
  }

  void refresh_ratio(int i, EdgeId e) {
    SpannerState& L = levels[i];
    L.pq.erase({L.ratio[e], e});
    L.ratio[e] = best_orientation(sparsifier_value(g, e, L.embedding[e]));
    L.pq.insert({L.ratio[e], e});
  }

  void unregister(int i, EdgeId e) {
    SpannerState& L = levels[i];
    L.pq.erase({L.ratio[e], e});
    for (const OrientedEdge& p : L.embedding[e]) std::erase(L.dependents[p.id], e);
    L.embedding[e].clear();
  }

  bool try_embed(int i, EdgeId e) {
    SpannerState& L = levels[i];
    const WeightedEdge& we = g.edges[e];
    std::vector<OrientedEdge> path;
    if (we.tail != we.head) {
      const int b = length_bucket(we.length);
      std::map<VertexId, std::pair<int, OrientedEdge>> seen;  // hops, edge used to arrive
      std::vector<VertexId> queue{we.tail};
      seen[we.tail] = {0, {kNoEdge, 0}};
      bool found = false;
      for (std::size_t q = 0; q < queue.size() && !found; ++q) {
        const VertexId x = queue[q];
        const int hops = seen[x].first;
        if (hops >= gamma_l || static_cast<int>(queue.size()) > cfg.spanner.visit_cap) break;
        for (int bb = b - 1; bb <= b + 1 && !found; ++bb) {
          auto it = L.adj.find(bb);
          if (it == L.adj.end()) continue;
          for (auto [y, oe] : it->second[x]) {
            if (seen.contains(y) || !approx2(g.edges[oe.id].length, we.length)) continue;
            seen[y] = {hops + 1, oe};
            queue.push_back(y);
            if (y == we.head) {
              found = true;
              break;
            }
          }
        }
      }
      if (!found) return false;
      for (VertexId x = we.head; x != we.tail; x = start_of(g, seen[x].second)) path.push_back(seen[x].second);
      std::reverse(path.begin(), path.end());
    }
    L.embedding[e] = std::move(path);
    for (const OrientedEdge& p : L.embedding[e]) L.dependents[p.id].push_back(e);
    L.ratio[e] = best_orientation(sparsifier_value(g, e, L.embedding[e]));
    L.pq.insert({L.ratio[e], e});
    return true;
  }

  void adj_add(int i, EdgeId e) {
    SpannerState& L = levels[i];
    const WeightedEdge& we = g.edges[e];
    L.bucket[e] = length_bucket(we.length);
    Adj& a = L.adj[L.bucket[e]];
    if (a.empty()) a.resize(n);
    a[we.tail].push_back({we.head, {e, 1}});
    a[we.head].push_back({we.tail, {e, -1}});
  }

  void adj_remove(int i, EdgeId e) {
    SpannerState& L = levels[i];
    const WeightedEdge& we = g.edges[e];
    Adj& a = L.adj[L.bucket[e]];
    std::erase_if(a[we.tail], [&](const auto& x) { return x.second.id == e; });
    std::erase_if(a[we.head], [&](const auto& x) { return x.second.id == e; });
  }

  void make_spanner(int i, EdgeId e) {
    SpannerState& L = levels[i];
    L.in_spanner[e] = 1;
    L.embedding[e] = {{e, 1}};
    ++L.spanner;
    adj_add(i, e);
  }

  // Returns true when e became a spanner edge.
  bool level_add(int i, EdgeId e) {
    SpannerState& L = levels[i];
    L.present[e] = 1;
    ++L.edges;
    if (try_embed(i, e)) return false;
    make_spanner(i, e);
    return true;
  }

  void propagate_add(int i, EdgeId e) {
    for (int j = i; j <= d_s; ++j) {
      if (j == d_s) {
        bottom[e] = 1;
        chain_valid = false;
        return;
      }
      if (!level_add(j, e)) return;
      ++stats.promotions;
    }
  }

  // Re-embeds e at level i after its embedding broke.
  void reembed(int i, EdgeId e) {
    ++stats.reembeds;
    if (try_embed(i, e)) return;
    make_spanner(i, e);
    ++stats.promotions;
    propagate_add(i + 1, e);
  }

  void propagate_remove(int i, EdgeId e) {
    if (i == d_s) {
      bottom[e] = 0;
      chain_valid = false;
      return;
    }
    SpannerState& L = levels[i];
    if (!L.present[e]) return;
    L.present[e] = 0;
    --L.edges;
    if (!L.in_spanner[e]) {
      unregister(i, e);
      return;
    }
    adj_remove(i, e);
    L.in_spanner[e] = 0;
    L.embedding[e].clear();
    --L.spanner;
    propagate_remove(i + 1, e);
    const auto deps = std::move(L.dependents[e]);
    L.dependents[e].clear();
    for (EdgeId d : deps) {
      if (!L.embedded(d)) continue;
      unregister(i, d);
      reembed(i, d);
    }
  }

  bool path_valid(int i, EdgeId e) const {
    const SpannerState& L = levels[i];
    for (const OrientedEdge& p : L.embedding[e])
      if (!approx2(g.edges[p.id].length, g.edges[e].length)) return false;
    return true;
  }

  void level_update(int i, EdgeId e) {
    SpannerState& L = levels[i];
    if (!L.present[e]) return;
    if (!L.in_spanner[e]) {
      if (path_valid(i, e)) {
        refresh_ratio(i, e);
      } else {
        unregister(i, e);
        reembed(i, e);
      }
      return;
    }
    if (length_bucket(g.edges[e].length) != L.bucket[e]) {
      adj_remove(i, e);
      adj_add(i, e);
    }
    const auto deps = L.dependents[e];
    for (EdgeId d : deps) {
      if (!L.embedded(d)) continue;
      if (path_valid(i, d)) {
        refresh_ratio(i, d);
      } else {
        unregister(i, d);
        reembed(i, d);
      }
    }
  }

  void rebuild_from(int i) {
    std::vector<EdgeId> ids;
    const std::vector<char>& src = i == 0 ? alive : levels[i - 1].in_spanner;
    for (EdgeId e = 0; e < static_cast<EdgeId>(src.size()); ++e)
      if (src[e]) ids.push_back(e);
    for (int j = i; j < d_s; ++j) {
      SpannerState fresh;
      fresh.grow(g.edges.size());
      levels[j] = std::move(fresh);
      double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
      for (EdgeId e : ids) {
        lo = std::min(lo, g.edges[e].length);
        hi = std::max(hi, g.edges[e].length);
      }
      if (j == 0 || cfg.spanner.gamma_s > 0)
        gamma_s = cfg.spanner.gamma_s > 0 ? cfg.spanner.gamma_s : default_gamma_s(n, ids.empty() ? 1.0 : hi / lo);
      std::stable_sort(ids.begin(), ids.end(), [&](EdgeId a, EdgeId b) {
        const int ba = length_bucket(g.edges[a].length), bb = length_bucket(g.edges[b].length);
        return ba != bb ? ba < bb : g.edges[a].length < g.edges[b].length;
      });
      std::vector<EdgeId> next;
      for (EdgeId e : ids)
        if (level_add(j, e)) next.push_back(e);
      std::sort(next.begin(), next.end());
      ids = std::move(next);
    }
    std::fill(bottom.begin(), bottom.end(), 0);
    for (EdgeId e : ids) bottom[e] = 1;
    chain_valid = false;
  }

  void check_sizes() {
    for (int i = 0; i < d_s; ++i) {
      const SpannerState& L = levels[i];
      const double bound = (static_cast<double>(L.edges) / cfg.k + n) * gamma_s;
      if (static_cast<double>(L.spanner) > bound) {
        ++stats.spanner_rebuilds;
        rebuild_from(i);
        return;
      }
    }
  }

  bool lengths_drifted() const {
    for (EdgeId e = 0; e < static_cast<EdgeId>(bottom.size()); ++e) {
      if (!bottom[e]) continue;
      const double r = g.edges[e].length / chain_lengths[e];
      if (r > cfg.length_drift || r * cfg.length_drift < 1.0) return true;
    }
    return false;
  }

  void ensure_chain() {
    if (!fixed) fix_depths();
    if (chain_valid && lengths_drifted()) chain_valid = false;
    if (!chain_valid) {
      LevelGraph top;
      top.graph = compact(g, bottom, top.origin);
      top.parent = top.origin;
      chain = {};
      if (!top.graph.edges.empty()) {
        ChainConfig cc;
        cc.k = cfg.k;
        cc.d_s = d_s;
        cc.d_t = d_t;
        cc.spanner = cfg.spanner;
        cc.spanner.gamma_l = gamma_l;
        cc.lsd = cfg.lsd;
        cc.max_branching = cfg.max_branching;
        chain = build_branching_tree_chain(top, d_t, cc);
      }
      chain_lengths.assign(g.edges.size(), 0.0);
      for (std::size_t e = 0; e < g.edges.size(); ++e) chain_lengths[e] = g.edges[e].length;
      forests.assign(1, {});
      for (int leaf : chain.leaves) forests.push_back(chain_forest(chain, leaf));
      ++epoch;
      ++stats.tree_rebuilds;
      chain_valid = true;
    }
    if (chain.nodes.empty()) return;
    LevelGraph& top = chain.nodes[0].level_graph;
    for (std::size_t i = 0; i < top.graph.edges.size(); ++i) top.graph.edges[i].gradient = g.edges[top.origin[i]].gradient;
    refresh_chain_gradients(chain);
  }

  int forest_of_leaf(int leaf) const {
    const auto it = std::find(chain.leaves.begin(), chain.leaves.end(), leaf);
    return 1 + static_cast<int>(it - chain.leaves.begin());
  }

  std::optional<SparsifierCycle> best_spanner_level() const {
    std::optional<SparsifierCycle> best;
    for (int i = 0; i < d_s; ++i) {
      const SpannerState& L = levels[i];
      if (L.pq.empty()) continue;
      const auto [r, e] = *L.pq.begin();
      if (best && best->ratio <= r) continue;
      const CycleValue v = sparsifier_value(g, e, L.embedding[e]);
      const int orientation = v.gradient <= 0.0 ? 1 : -1;
      best = SparsifierCycle{QueryCase::SpannerLevel, i, -1, e, oriented_cycle(e, L.embedding[e], orientation),
                             orientation * v.gradient, v.length, r};
    }
    return best;
  }

  void scan_tree(std::vector<SparsifierCycle>* all, std::optional<SparsifierCycle>& best) const {
    for (std::size_t i = 0; i < chain.nodes.size(); ++i) {
      const TreeNode& node = chain.nodes[i];
      for (std::size_t bi = 0; bi < node.branches.size(); ++bi) {
        const TreeBranch& b = node.branches[bi];
        const WeightedGraph& cg = b.core.graph;
        for (EdgeId e = 0; e < static_cast<EdgeId>(cg.edges.size()); ++e) {
          if (!b.spanner.is_embedded(e)) continue;
          const CycleValue v = sparsifier_value(cg, e, b.spanner.embedding[e]);
          const double r = best_orientation(v);
          if (!all && best && best->ratio <= r) continue;
          const int orientation = v.gradient <= 0.0 ? 1 : -1;
          SparsifierCycle sc{QueryCase::TreeLevel, static_cast<int>(i), static_cast<int>(bi), e,
                             oriented_cycle(e, b.spanner.embedding[e], orientation), orientation * v.gradient,
                             v.length, r};
          if (!best || r < best->ratio) best = sc;
          if (all) all->push_back(std::move(sc));
        }
      }
    }
  }

  MrcQuery materialize(QueryCase which, int forest, std::vector<OrientedEdge> off_tree) const {
    MrcQuery q;
    q.which = which;
    q.cycle.forest = forest;
    q.cycle.off_tree = std::move(off_tree);
    const Circulation c = materialize_cycle<double>(g, q.cycle, forests[forest]);
    for (const auto& [id, v] : c.values) {
      q.gradient += v * g.edges[id].gradient;
      q.length += std::abs(v) * g.edges[id].length;
    }
    q.ratio = q.length > 0.0 ? q.gradient / q.length : 0.0;
    return q;
  }

  std::vector<int> draw_leaves() {
    const std::int64_t m = std::max<std::int64_t>(live, 2);
    const int b = cfg.samples > 0 ? cfg.samples : static_cast<int>(std::ceil(4.0 * std::log2(static_cast<double>(m))));
    if (static_cast<int>(chain.leaves.size()) <= b) return chain.leaves;
    std::vector<int> out;
    for (int s = 0; s < b; ++s) {
      int v = 0;
      while (!chain.nodes[v].branches.empty()) {
        const auto& br = chain.nodes[v].branches;
        v = br[rng() % br.size()].child;
      }
      if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
    }
    return out;
  }

  std::optional<MrcQuery> query() {
    ensure_chain();
    ++stats.queries;
    MrcTraceRecord rec;
    rec.query = static_cast<std::uint64_t>(stats.queries);
    std::optional<MrcQuery> best;
    auto consider = [&](MrcQuery q) {
      if (!best || q.ratio < best->ratio) best = std::move(q);
    };

    if (auto sc = best_spanner_level()) {
      rec.spanner_best = sc->ratio;
      consider(materialize(QueryCase::SpannerLevel, 0, sc->cycle));
    }
    std::optional<SparsifierCycle> tree_best;
    scan_tree(nullptr, tree_best);
    if (tree_best) {
      rec.tree_best = tree_best->ratio;
      const TreeNode& node = chain.nodes[tree_best->level];
      const int child = node.branches[tree_best->branch].child;
      consider(materialize(QueryCase::TreeLevel, forest_of_leaf(some_leaf_below(chain, child)),
                           lift_cycle(chain, tree_best->level, tree_best->cycle)));
    }
    if (!chain.nodes.empty()) {
      const auto leaves = draw_leaves();
      rec.samples = leaves;
      std::vector<std::future<std::optional<RatioCycle>>> jobs;
      for (int leaf : leaves) {
        const WeightedGraph* lg = &chain.nodes[leaf].level_graph.graph;
        jobs.push_back(std::async(leaves.size() > 1 && std::thread::hardware_concurrency() > 1 ? std::launch::async : std::launch::deferred,
                                  [lg]() -> std::optional<RatioCycle> {
                                    if (lg->edges.empty()) return std::nullopt;
                                    return min_ratio_cycle_exact(*lg);
                                  }));
      }
      int best_leaf = -1;
      std::optional<RatioCycle> bottom_best;
      for (std::size_t j = 0; j < jobs.size(); ++j) {
        auto r = jobs[j].get();
        if (r && (!bottom_best || r->ratio < bottom_best->ratio)) {
          bottom_best = std::move(r);
          best_leaf = leaves[j];
        }
      }
      if (bottom_best) {
        rec.bottom_best = bottom_best->ratio;
        consider(materialize(QueryCase::Bottom, forest_of_leaf(best_leaf),
                             lift_cycle(chain, best_leaf, bottom_best->edges)));
      }
    }
    if (best) {
      ++stats.cases[static_cast<int>(best->which)];
      rec.chosen = to_string(best->which);
      rec.ratio = best->ratio;
    } else {
      ++stats.cases[0];
      rec.chosen = "none";
    }
    if (cfg.trace) trace.push_back(std::move(rec));
    return best;
  }
};

MrcHandle::MrcHandle(VertexId num_vertices, MrcConfig cfg) : impl_(std::make_unique<Impl>(num_vertices, std::move(cfg))) {}
MrcHandle::~MrcHandle() = default;
MrcHandle::MrcHandle(MrcHandle&&) noexcept = default;
MrcHandle& MrcHandle::operator=(MrcHandle&&) noexcept = default;

void MrcHandle::insert(EdgeId e, VertexId tail, VertexId head, double gradient, double length) {
  Impl& s = *impl_;
  if (e < 0) throw Error("mrc insert: negative edge id");
  if (tail < 0 || tail >= s.n || head < 0 || head >= s.n) throw Error("mrc insert: endpoint out of range");
  if (contains(e)) throw Error("mrc insert: edge " + std::to_string(e) + " already present");
  s.check_length(length);
  s.grow(static_cast<std::size_t>(e) + 1);
  s.g.edges[e] = {tail, head, gradient, length};
  s.alive[e] = 1;
  ++s.live;
  if (!s.fixed) return;
  s.propagate_add(0, e);
  s.check_sizes();
}

void MrcHandle::remove(EdgeId e) {
  Impl& s = *impl_;
  if (!contains(e)) throw Error("mrc remove: unknown edge " + std::to_string(e));
  s.alive[e] = 0;
  --s.live;
  if (!s.fixed) return;
  s.propagate_remove(0, e);
  s.check_sizes();
}

void MrcHandle::update(EdgeId e, double gradient, double length) {
  Impl& s = *impl_;
  if (!contains(e)) throw Error("mrc update: unknown edge " + std::to_string(e));
  s.check_length(length);
  s.g.edges[e].gradient = gradient;
  s.g.edges[e].length = length;
  if (!s.fixed) return;
  for (int i = 0; i < s.d_s; ++i) s.level_update(i, e);
}

bool MrcHandle::contains(EdgeId e) const {
  return e >= 0 && e < static_cast<EdgeId>(impl_->alive.size()) && impl_->alive[e];
}
std::int64_t MrcHandle::num_edges() const { return impl_->live; }
VertexId MrcHandle::num_vertices() const { return impl_->n; }
const WeightedGraph& MrcHandle::graph() const { return impl_->g; }

WeightedGraph MrcHandle::live_graph(std::vector<EdgeId>& ids) const { return compact(impl_->g, impl_->alive, ids); }

std::optional<MrcQuery> MrcHandle::query() { return impl_->query(); }

std::optional<SparsifierCycle> MrcHandle::best_sparsifier_cycle() {
  impl_->ensure_chain();
  auto best = impl_->best_spanner_level();
  std::optional<SparsifierCycle> tree;
  impl_->scan_tree(nullptr, tree);
  if (tree && (!best || tree->ratio < best->ratio)) best = tree;
  return best;
}

std::vector<SparsifierCycle> MrcHandle::all_sparsifier_cycles() {
  Impl& s = *impl_;
  s.ensure_chain();
  std::vector<SparsifierCycle> out;
  for (int i = 0; i < s.d_s; ++i) {
    const SpannerState& L = s.levels[i];
    for (EdgeId e = 0; e < static_cast<EdgeId>(L.present.size()); ++e) {
      if (!L.embedded(e)) continue;
      const CycleValue v = sparsifier_value(s.g, e, L.embedding[e]);
      const int orientation = v.gradient <= 0.0 ? 1 : -1;
      out.push_back({QueryCase::SpannerLevel, i, -1, e, oriented_cycle(e, L.embedding[e], orientation),
                     orientation * v.gradient, v.length, best_orientation(v)});
    }
  }
  std::optional<SparsifierCycle> ignored;
  s.scan_tree(&out, ignored);
  return out;
}

const std::vector<std::vector<EdgeId>>& MrcHandle::forests() {
  impl_->ensure_chain();
  return impl_->forests;
}
std::uint64_t MrcHandle::forest_epoch() const { return impl_->epoch; }

double MrcHandle::kappa() const {
  const Impl& s = *impl_;
  // Tree levels see lengths up to length_drift off in either direction.
  const double drift = 1.0 / (s.cfg.length_drift * s.cfg.length_drift);
  if (!s.fixed) return drift;
  const double beta = average_stretch_bound(s.n, s.cfg.lsd);
  return std::pow(5.0 * s.gamma_l, -(s.d_s + s.d_t)) * std::pow(beta, -s.d_t) * drift;
}
double MrcHandle::kappa_strict() const { return kappa() / (5.0 * impl_->gamma_l); }
int MrcHandle::gamma_l() const { return impl_->gamma_l; }
int MrcHandle::spanner_depth() const { return impl_->d_s; }
int MrcHandle::tree_depth() const { return impl_->d_t; }
int MrcHandle::bottom_cycle_bound() const { return impl_->gamma_l * (impl_->d_t + 1) + 1; }

WeightedGraph MrcHandle::level_graph(int level, std::vector<EdgeId>& ids) const {
  const Impl& s = *impl_;
  if (level < 0 || level > s.d_s) throw Error("mrc: level out of range");
  return compact(s.g, level == s.d_s ? s.bottom : s.levels[level].present, ids);
}

SpannerWithEmbedding MrcHandle::level_spanner(int level, const std::vector<EdgeId>& ids) const {
  const Impl& s = *impl_;
  if (level < 0 || level >= s.d_s) throw Error("mrc: spanner level out of range");
  const SpannerState& L = s.levels[level];
  std::map<EdgeId, EdgeId> local;
  for (std::size_t i = 0; i < ids.size(); ++i) local[ids[i]] = static_cast<EdgeId>(i);
  SpannerWithEmbedding sp;
  sp.gamma_l = s.gamma_l;
  sp.gamma_s = s.gamma_s;
  sp.in_spanner.assign(ids.size(), 0);
  sp.excluded.assign(ids.size(), 0);
  sp.embedding.assign(ids.size(), {});
  for (std::size_t i = 0; i < ids.size(); ++i) {
    sp.in_spanner[i] = L.in_spanner[ids[i]];
    for (const OrientedEdge& p : L.embedding[ids[i]]) {
      const auto it = local.find(p.id);
      sp.embedding[i].push_back({it == local.end() ? kNoEdge : it->second, p.sign});
    }
  }
  return sp;
}

const BranchingTreeChain& MrcHandle::tree_chain() {
  impl_->ensure_chain();
  return impl_->chain;
}

std::vector<std::string> MrcHandle::invariant_violations() {
  Impl& s = *impl_;
  if (!s.fixed) s.fix_depths();
  std::vector<std::string> out;
  for (int i = 0; i < s.d_s; ++i) {
    const SpannerState& L = s.levels[i];
    const std::string tag = "level " + std::to_string(i) + ": ";
    const std::vector<char>& expect = i == 0 ? s.alive : s.levels[i - 1].in_spanner;
    for (EdgeId e = 0; e < static_cast<EdgeId>(L.present.size()); ++e) {
      if (L.present[e] != expect[e]) out.push_back(tag + "edge set differs from the level above at " + std::to_string(e));
      if (!L.embedded(e)) continue;
      const double r = best_orientation(sparsifier_value(s.g, e, L.embedding[e]));
      if (std::abs(r - L.ratio[e]) > 1e-12 * std::max(1.0, std::abs(r)))
        out.push_back(tag + "stale ratio on edge " + std::to_string(e));
      if (!L.pq.contains({L.ratio[e], e})) out.push_back(tag + "edge " + std::to_string(e) + " missing from the queue");
      for (const OrientedEdge& p : L.embedding[e])
        if (std::find(L.dependents[p.id].begin(), L.dependents[p.id].end(), e) == L.dependents[p.id].end())
          out.push_back(tag + "dependents index misses edge " + std::to_string(e));
    }
    std::int64_t embedded = 0;
    for (EdgeId e = 0; e < static_cast<EdgeId>(L.present.size()); ++e) embedded += L.embedded(e);
    if (static_cast<std::int64_t>(L.pq.size()) != embedded) out.push_back(tag + "queue size mismatch");
    std::vector<EdgeId> ids;
    const WeightedGraph lg = level_graph(i, ids);
    for (const std::string& v : spanner_violations(lg, level_spanner(i, ids), s.cfg.k)) out.push_back(tag + v);
  }
  const std::vector<char>& last = s.d_s == 0 ? s.alive : s.levels[s.d_s - 1].in_spanner;
  for (std::size_t e = 0; e < s.bottom.size(); ++e)
    if (s.bottom[e] != last[e]) out.push_back("bottom level differs from the last spanner at " + std::to_string(e));
  return out;
}

DichotomyEvidence MrcHandle::quality_dichotomy_check(int level) {
  std::vector<EdgeId> ids;
  const WeightedGraph lg = level_graph(level, ids);
  return dichotomy_evidence(lg, level_spanner(level, ids));
}

MrcStats MrcHandle::stats() const {
  const Impl& s = *impl_;
  MrcStats st = s.stats;
  for (const auto& L : s.levels) {
    st.level_edges.push_back(L.edges);
    st.level_spanner_edges.push_back(L.spanner);
  }
  st.level_edges.push_back(std::count(s.bottom.begin(), s.bottom.end(), 1));
  st.tree_nodes = static_cast<std::int64_t>(s.chain.nodes.size());
  st.tree_leaves = static_cast<std::int64_t>(s.chain.leaves.size());
  st.gamma_l = s.gamma_l;
  st.d_s = s.d_s;
  st.d_t = s.d_t;
  st.kappa = kappa();
  return st;
}

const std::vector<MrcTraceRecord>& MrcHandle::trace() const { return impl_->trace; }

}  // namespace dynflow
