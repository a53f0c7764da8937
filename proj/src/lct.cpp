#include "dynflow/lct.hpp"

#include <string>
#include <utility>

namespace dynflow {

LinkCutForest::LinkCutForest(VertexId num_vertices)
    : num_vertices_(num_vertices), nodes_(static_cast<std::size_t>(num_vertices)) {}

bool LinkCutForest::is_aux_root(int x) const {
  const int p = nodes_[x].parent;
  return p < 0 || (nodes_[p].child[0] != x && nodes_[p].child[1] != x);
}

void LinkCutForest::apply_flip(int x) {
  if (x < 0) return;
  Node& n = nodes_[x];
  std::swap(n.child[0], n.child[1]);
  n.flip = !n.flip;
  n.sign = -n.sign;
  n.sum_gradient = -n.sum_gradient;
  n.pending_add = -n.pending_add;
}

void LinkCutForest::apply_add(int x, double amount) {
  if (x < 0) return;
  Node& n = nodes_[x];
  if (n.is_edge) n.flow += amount * n.sign;
  n.pending_add += amount;
}

void LinkCutForest::push(int x) {
  Node& n = nodes_[x];
  if (n.flip) {
    apply_flip(n.child[0]);
    apply_flip(n.child[1]);
    n.flip = false;
  }
  if (n.pending_add != 0.0) {
    apply_add(n.child[0], n.pending_add);
    apply_add(n.child[1], n.pending_add);
    n.pending_add = 0.0;
  }
}

void LinkCutForest::pull(int x) {
  Node& n = nodes_[x];
  n.sum_gradient = n.is_edge ? n.sign * n.gradient : 0.0;
  n.sum_length = n.is_edge ? n.length : 0.0;
  for (int c : n.child) {
    if (c < 0) continue;
    n.sum_gradient += nodes_[c].sum_gradient;
    n.sum_length += nodes_[c].sum_length;
  }
}

void LinkCutForest::rotate(int x) {
  const int p = nodes_[x].parent;
  const int g = nodes_[p].parent;
  const int dir = nodes_[p].child[1] == x ? 1 : 0;
  const int moved = nodes_[x].child[dir ^ 1];
  if (!is_aux_root(p)) nodes_[g].child[nodes_[g].child[1] == p ? 1 : 0] = x;
  nodes_[x].parent = g;
  nodes_[x].child[dir ^ 1] = p;
  nodes_[p].parent = x;
  nodes_[p].child[dir] = moved;
  if (moved >= 0) nodes_[moved].parent = p;
  pull(p);
  pull(x);
}

void LinkCutForest::splay(int x) {
  static thread_local std::vector<int> stack;
  stack.assign(1, x);
  for (int y = x; !is_aux_root(y); y = nodes_[y].parent) stack.push_back(nodes_[y].parent);
  for (auto it = stack.rbegin(); it != stack.rend(); ++it) push(*it);
  while (!is_aux_root(x)) {
    const int p = nodes_[x].parent;
    if (!is_aux_root(p)) {
      const int g = nodes_[p].parent;
      const bool zigzig = (nodes_[g].child[1] == p) == (nodes_[p].child[1] == x);
      rotate(zigzig ? p : x);
    }
    rotate(x);
  }
}

void LinkCutForest::access(int x) {
  int last = -1;
  for (int y = x; y >= 0; y = nodes_[y].parent) {
    splay(y);
    nodes_[y].child[1] = last;
    pull(y);
    last = y;
  }
  splay(x);
}

void LinkCutForest::evert(int x) {
  access(x);
  apply_flip(x);
}

int LinkCutForest::find_root(int x) {
  access(x);
  int r = x;
  for (;;) {
    push(r);
    if (nodes_[r].child[0] < 0) break;
    r = nodes_[r].child[0];
  }
  splay(r);
  return r;
}

void LinkCutForest::attach(int x, int y) {
  evert(x);
  nodes_[x].parent = y;
}

void LinkCutForest::detach(int x, int y) {
  evert(x);
  access(y);
  // After access(y) with x as the represented root, x is y's left neighbour.
  nodes_[y].child[0] = -1;
  nodes_[x].parent = -1;
  pull(y);
}

int LinkCutForest::edge_node(EdgeId id) const {
  auto it = edge_node_.find(id);
  if (it == edge_node_.end()) throw Error("link-cut: edge " + std::to_string(id) + " is not in the forest");
  return it->second;
}

bool LinkCutForest::connected(VertexId u, VertexId v) {
  if (u == v) return true;
  return find_root(u) == find_root(v);
}

void LinkCutForest::link(EdgeId id, VertexId tail, VertexId head, double gradient, double length) {
  if (edge_node_.contains(id)) throw Error("link-cut: edge already linked");
  if (tail < 0 || tail >= num_vertices_ || head < 0 || head >= num_vertices_)
    throw Error("link-cut: vertex out of range");
  if (connected(tail, head)) throw Error("link-cut: link would create a cycle");
  int e;
  if (!free_.empty()) {
    e = free_.back();
    free_.pop_back();
    nodes_[e] = Node{};
  } else {
    e = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
  }
  Node& n = nodes_[e];
  n.is_edge = true;
  n.id = id;
  n.tail = tail;
  n.head = head;
  n.gradient = gradient;
  n.length = length;
  n.sign = 1;
  pull(e);
  edge_node_.emplace(id, e);
  attach(tail, e);
  attach(e, head);
  // Orient the new edge relative to the path tail -> head.
  evert(tail);
  access(head);
  splay(e);
  nodes_[e].sign = 1;
  pull(e);
}

double LinkCutForest::cut(EdgeId id) {
  const int e = edge_node(id);
  access(e);
  const double flow = nodes_[e].flow;
  const VertexId tail = nodes_[e].tail;
  const VertexId head = nodes_[e].head;
  detach(e, tail);
  detach(e, head);
  edge_node_.erase(id);
  nodes_[e] = Node{};
  free_.push_back(e);
  return flow;
}

void LinkCutForest::expose_path(VertexId from, VertexId to) {
  if (!connected(from, to)) throw Error("link-cut: vertices are in different trees");
  evert(from);
  access(to);
}

PathSums LinkCutForest::path_sums(VertexId from, VertexId to) {
  if (from == to) return {};
  expose_path(from, to);
  return {nodes_[to].sum_gradient, nodes_[to].sum_length};
}

void LinkCutForest::path_add(VertexId from, VertexId to, double amount) {
  if (from == to) return;
  expose_path(from, to);
  apply_add(to, amount);
}

std::vector<OrientedEdge> LinkCutForest::path_edges(VertexId from, VertexId to) {
  std::vector<OrientedEdge> out;
  if (from == to) return out;
  expose_path(from, to);
  // Iterative in-order walk with lazy pushes.
  std::vector<int> stack;
  int x = to;
  while (x >= 0 || !stack.empty()) {
    while (x >= 0) {
      push(x);
      stack.push_back(x);
      x = nodes_[x].child[0];
    }
    x = stack.back();
    stack.pop_back();
    if (nodes_[x].is_edge) out.push_back({nodes_[x].id, nodes_[x].sign});
    x = nodes_[x].child[1];
  }
  return out;
}

double LinkCutForest::point_flow(EdgeId id) {
  const int e = edge_node(id);
  access(e);
  return nodes_[e].flow;
}

void LinkCutForest::set_values(EdgeId id, double gradient, double length) {
  const int e = edge_node(id);
  access(e);
  nodes_[e].gradient = gradient;
  nodes_[e].length = length;
  pull(e);
}

}  // namespace dynflow
