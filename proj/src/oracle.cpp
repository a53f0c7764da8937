#include "dynflow/oracle.hpp"

#include <algorithm>
#include <deque>
#include <limits>

namespace dynflow {

namespace {

struct Arc {
  VertexId to;
  std::int64_t cap;
  std::int64_t cost;
  int rev;
};

struct Residual {
  std::vector<std::vector<Arc>> adj;
  explicit Residual(VertexId n) : adj(n) {}
  std::pair<int, int> add(VertexId u, VertexId v, std::int64_t cap, std::int64_t cost) {
    adj[u].push_back({v, cap, cost, static_cast<int>(adj[v].size())});
    adj[v].push_back({u, 0, -cost, static_cast<int>(adj[u].size()) - 1});
    return {u, static_cast<int>(adj[u].size()) - 1};
  }
};

constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;

}  // namespace

std::optional<IntegralCirculation> min_cost_circulation(VertexId n, std::span<const BoxEdge> edges) {
  // x = lower + y with 0 <= y <= upper - lower; negative-cost arcs start saturated.
  const VertexId S = n, T = n + 1;
  Residual r(n + 2);
  std::vector<std::int64_t> excess(n, 0);
  std::vector<std::pair<int, int>> where(edges.size());
  std::vector<char> flipped(edges.size(), 0);
  std::int64_t cost = 0;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const BoxEdge& e = edges[i];
    if (e.lower > e.upper) return std::nullopt;
    const std::int64_t width = e.upper - e.lower;
    std::int64_t base = e.lower;
    if (e.cost < 0 && e.tail != e.head) {
      base = e.upper;
      flipped[i] = 1;
      where[i] = r.add(e.head, e.tail, width, -e.cost);
    } else if (e.tail != e.head) {
      where[i] = r.add(e.tail, e.head, width, e.cost);
    } else {
      // A self-loop is a circulation on its own.
      base = e.cost < 0 ? e.upper : e.lower;
      where[i] = {-1, -1};
    }
    cost += base * e.cost;
    if (e.tail != e.head) {
      excess[e.head] += base;
      excess[e.tail] -= base;
    }
  }
  std::int64_t need = 0;
  for (VertexId v = 0; v < n; ++v) {
    if (excess[v] > 0) {
      r.add(S, v, excess[v], 0);
      need += excess[v];
    } else if (excess[v] < 0) {
      r.add(v, T, -excess[v], 0);
    }
  }
  // Successive shortest paths with a label-correcting search.
  std::int64_t routed = 0;
  const int N = n + 2;
  std::vector<std::int64_t> dist(N);
  std::vector<std::pair<int, int>> prev(N);
  std::vector<char> inq(N);
  while (routed < need) {
    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(inq.begin(), inq.end(), 0);
    dist[S] = 0;
    std::deque<int> q{S};
    inq[S] = 1;
    while (!q.empty()) {
      const int u = q.front();
      q.pop_front();
      inq[u] = 0;
      for (int a = 0; a < static_cast<int>(r.adj[u].size()); ++a) {
        const Arc& arc = r.adj[u][a];
        if (arc.cap <= 0 || dist[u] + arc.cost >= dist[arc.to]) continue;
        dist[arc.to] = dist[u] + arc.cost;
        prev[arc.to] = {u, a};
        if (!inq[arc.to]) {
          inq[arc.to] = 1;
          q.push_back(arc.to);
        }
      }
    }
    if (dist[T] >= kInf) return std::nullopt;
    std::int64_t push = need - routed;
    for (int v = T; v != S; v = prev[v].first) push = std::min(push, r.adj[prev[v].first][prev[v].second].cap);
    for (int v = T; v != S; v = prev[v].first) {
      Arc& arc = r.adj[prev[v].first][prev[v].second];
      arc.cap -= push;
      r.adj[arc.to][arc.rev].cap += push;
    }
    routed += push;
    cost += push * dist[T];
  }
  IntegralCirculation out;
  out.cost = cost;
  out.flow.resize(edges.size());
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const BoxEdge& e = edges[i];
    if (where[i].first < 0) {
      out.flow[i] = e.cost < 0 ? e.upper : e.lower;
      continue;
    }
    const Arc& arc = r.adj[where[i].first][where[i].second];
    const std::int64_t used = (e.upper - e.lower) - arc.cap;
    out.flow[i] = flipped[i] ? e.upper - used : e.lower + used;
  }
  return out;
}

MaxFlow max_flow(VertexId n, std::span<const CapEdge> edges, VertexId s, VertexId t) {
  if (s < 0 || s >= n || t < 0 || t >= n || s == t) throw Error("max_flow: bad terminals");
  Residual r(n);
  std::vector<std::pair<int, int>> where;
  for (const CapEdge& e : edges) {
    if (e.capacity < 0) throw Error("max_flow: negative capacity");
    where.push_back(r.add(e.tail, e.head, e.capacity, 0));
  }
  std::vector<int> level(n), it(n);
  auto bfs = [&] {
    std::fill(level.begin(), level.end(), -1);
    std::deque<int> q{s};
    level[s] = 0;
    while (!q.empty()) {
      const int u = q.front();
      q.pop_front();
      for (const Arc& a : r.adj[u])
        if (a.cap > 0 && level[a.to] < 0) {
          level[a.to] = level[u] + 1;
          q.push_back(a.to);
        }
    }
    return level[t] >= 0;
  };
  auto dfs = [&](auto&& self, int u, std::int64_t f) -> std::int64_t {
    if (u == t) return f;
    for (int& i = it[u]; i < static_cast<int>(r.adj[u].size()); ++i) {
      Arc& a = r.adj[u][i];
      if (a.cap <= 0 || level[a.to] != level[u] + 1) continue;
      const std::int64_t got = self(self, a.to, std::min(f, a.cap));
      if (got > 0) {
        a.cap -= got;
        r.adj[a.to][a.rev].cap += got;
        return got;
      }
    }
    return 0;
  };
  MaxFlow out;
  while (bfs()) {
    std::fill(it.begin(), it.end(), 0);
    while (const std::int64_t f = dfs(dfs, s, kInf)) out.value += f;
  }
  out.flow.resize(edges.size());
  for (std::size_t i = 0; i < edges.size(); ++i)
    out.flow[i] = edges[i].capacity - r.adj[where[i].first][where[i].second].cap;
  return out;
}

bool has_directed_cycle(VertexId n, std::span<const CapEdge> edges) {
  std::vector<std::vector<VertexId>> adj(n);
  for (const CapEdge& e : edges) {
    if (e.tail == e.head) return true;
    adj[e.tail].push_back(e.head);
  }
  std::vector<char> colour(n, 0);
  for (VertexId s = 0; s < n; ++s) {
    if (colour[s]) continue;
    std::vector<std::pair<VertexId, std::size_t>> stack{{s, 0}};
    colour[s] = 1;
    while (!stack.empty()) {
      auto& [v, i] = stack.back();
      if (i < adj[v].size()) {
        const VertexId w = adj[v][i++];
        if (colour[w] == 1) return true;
        if (colour[w] == 0) {
          colour[w] = 1;
          stack.push_back({w, 0});
        }
      } else {
        colour[v] = 2;
        stack.pop_back();
      }
    }
  }
  return false;
}

}  // namespace dynflow
