#pragma once

#include <unordered_map>
#include <vector>

#include "dynflow/common.hpp"

namespace dynflow {

struct PathSums {
  double gradient = 0.0;  // signed along the queried direction
  double length = 0.0;
};

// Splay-based link-cut forest over a fixed vertex set. Every tree edge is a
// node of its own, so it can carry a gradient, a length, and a lazily
// accumulated flow that is measured along the edge's tail->head orientation.
class LinkCutForest {
 public:
  explicit LinkCutForest(VertexId num_vertices);

  void link(EdgeId id, VertexId tail, VertexId head, double gradient, double length);
  // Removes the edge and returns the flow accumulated on it.
  double cut(EdgeId id);

  bool contains(EdgeId id) const { return edge_node_.contains(id); }
  bool connected(VertexId u, VertexId v);
  VertexId num_vertices() const { return num_vertices_; }
  std::size_t num_edges() const { return edge_node_.size(); }

  PathSums path_sums(VertexId from, VertexId to);
  void path_add(VertexId from, VertexId to, double amount);
  std::vector<OrientedEdge> path_edges(VertexId from, VertexId to);

  double point_flow(EdgeId id);
  void set_values(EdgeId id, double gradient, double length);

 private:
  struct Node {
    int child[2] = {-1, -1};
    int parent = -1;
    bool flip = false;
    bool is_edge = false;
    int sign = 0;  // +1 when in-order (left to right) runs tail -> head
    EdgeId id = kNoEdge;
    VertexId tail = kNoVertex;
    VertexId head = kNoVertex;
    double gradient = 0.0;
    double length = 0.0;
    double flow = 0.0;
    double sum_gradient = 0.0;
    double sum_length = 0.0;
    double pending_add = 0.0;
  };

  bool is_aux_root(int x) const;
  void apply_flip(int x);
  void apply_add(int x, double amount);
  void push(int x);
  void pull(int x);
  void rotate(int x);
  void splay(int x);
  void access(int x);
  void evert(int x);
  int find_root(int x);
  void attach(int x, int y);
  void detach(int x, int y);
  void expose_path(VertexId from, VertexId to);
  int edge_node(EdgeId id) const;

  VertexId num_vertices_;
  std::vector<Node> nodes_;
  std::vector<int> free_;
  std::unordered_map<EdgeId, int> edge_node_;
};

}  // namespace dynflow
