#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "dynflow/chain.hpp"
#include "dynflow/graph.hpp"
#include "dynflow/mrc_exact.hpp"
#include "dynflow/weighted_graph.hpp"

namespace dynflow {

struct MrcConfig {
  int k = 8;
  int d_s = -1;                // -1: from m_hint
  int d_t = -1;                // -1: from n
  std::int64_t m_hint = 0;     // expected edge count; 0 uses the live count at the first query
  SpannerParams spanner;
  LsdConfig lsd;
  int max_branching = 4;       // forests kept per tree node; 0 keeps the whole collection
  int samples = 0;             // bottom graphs drawn per query; 0: ceil(4 log2 m)
  double length_min = 1e-15;
  double length_max = 1e15;
  double length_drift = 2.0;   // tree chain rebuild once a length moved by this factor
  std::uint64_t seed = 1;
  bool trace = false;
};

enum class QueryCase { SpannerLevel = 1, TreeLevel = 2, Bottom = 3 };

const char* to_string(QueryCase c);

struct SparsifierCycle {
  QueryCase kind = QueryCase::SpannerLevel;
  int level = 0;   // spanner level, or tree node
  int branch = -1; // tree levels only
  EdgeId edge = kNoEdge;
  std::vector<OrientedEdge> cycle;  // ids of the level graph, best orientation
  double gradient = 0.0;
  double length = 0.0;
  double ratio = 0.0;
};

struct MrcQuery {
  ImplicitCycle cycle;     // forest index into MrcHandle::forests()
  double gradient = 0.0;   // recomputed in the input graph
  double length = 0.0;
  double ratio = 0.0;
  QueryCase which = QueryCase::Bottom;
};

struct MrcTraceRecord {
  std::uint64_t query = 0;
  double spanner_best = 0.0;
  double tree_best = 0.0;
  double bottom_best = 0.0;
  std::vector<int> samples;  // leaves solved in the bottom case
  std::string chosen;
  double ratio = 0.0;
};

struct MrcStats {
  std::vector<std::int64_t> level_edges;
  std::vector<std::int64_t> level_spanner_edges;
  std::int64_t tree_nodes = 0;
  std::int64_t tree_leaves = 0;
  std::int64_t tree_rebuilds = 0;
  std::int64_t spanner_rebuilds = 0;
  std::int64_t promotions = 0;
  std::int64_t reembeds = 0;
  std::int64_t queries = 0;
  std::int64_t cases[4] = {0, 0, 0, 0};
  int gamma_l = 0;
  int d_s = 0;
  int d_t = 0;
  double kappa = 1.0;
};

struct DichotomyEvidence {
  bool vacuous = false;
  bool holds = true;
  double opt_host = 0.0;
  double opt_spanner = 0.0;
  double best_sparsifier = 0.0;
  double bound = 0.0;  // opt_host / (5 gamma_l)
  std::string dump;
};

// Either some sparsifier cycle or the spanner itself is within 5 gamma_l of
// the host optimum.
DichotomyEvidence dichotomy_evidence(const WeightedGraph& host, const SpannerWithEmbedding& sp);

// Dynamic min-ratio cycle structure over a graph whose edge ids are chosen
// by the caller. Gradients and lengths are the caller's current values.
class MrcHandle {
 public:
  MrcHandle(VertexId num_vertices, MrcConfig cfg = {});
  ~MrcHandle();
  MrcHandle(MrcHandle&&) noexcept;
  MrcHandle& operator=(MrcHandle&&) noexcept;

  void insert(EdgeId e, VertexId tail, VertexId head, double gradient, double length);
  void remove(EdgeId e);
  void update(EdgeId e, double gradient, double length);

  bool contains(EdgeId e) const;
  std::int64_t num_edges() const;
  VertexId num_vertices() const;
  // Every slot ever inserted; values of removed edges are stale.
  const WeightedGraph& graph() const;
  WeightedGraph live_graph(std::vector<EdgeId>& ids) const;

  std::optional<MrcQuery> query();
  std::optional<SparsifierCycle> best_sparsifier_cycle();
  // Every sparsifier cycle of every level, recomputed from scratch.
  std::vector<SparsifierCycle> all_sparsifier_cycles();

  // forests()[0] is empty (explicit cycles); the others are chain forests of
  // the tree chain leaves. The epoch changes whenever the list does.
  const std::vector<std::vector<EdgeId>>& forests();
  std::uint64_t forest_epoch() const;

  double kappa() const;        // guarantee used by callers
  double kappa_strict() const; // one more factor 1/(5 gamma_l)
  int gamma_l() const;
  int spanner_depth() const;
  int tree_depth() const;
  int bottom_cycle_bound() const;  // L bound for the spanner and tree cases

  // Level i graph edges and spanner (i < spanner_depth()), for inspection.
  WeightedGraph level_graph(int level, std::vector<EdgeId>& ids) const;
  SpannerWithEmbedding level_spanner(int level, const std::vector<EdgeId>& ids) const;
  const BranchingTreeChain& tree_chain();
  std::vector<std::string> invariant_violations();

  DichotomyEvidence quality_dichotomy_check(int level);

  MrcStats stats() const;
  const std::vector<MrcTraceRecord>& trace() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace dynflow
