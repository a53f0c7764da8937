#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dynflow/graph.hpp"
#include "dynflow/lct.hpp"
#include "dynflow/mrc_dynamic.hpp"

namespace dynflow {

struct IpmConfig {
  std::int64_t m_cap = 1;  // insertion budget m
  std::int64_t C = 1;      // cost bound
  std::int64_t U = 1;      // capacity bound
  std::int64_t F = 0;      // threshold
  double kappa = 0.0;      // 0: the oracle's guarantee
  MrcConfig mrc;
  double eps_f = 0.0;      // target for |l~_e (f_e - f~_e)|; 0: kappa / 64
  int sample_reps = 0;     // 0: ceil(4 log2 m)
  std::uint64_t seed = 1;
  bool line_search = true;
  bool audit = false;           // full-state checks after every step
  bool exact_rational = false;  // high-precision potential recomputation in audits
  bool trace = false;
  std::int64_t max_steps_per_insertion = 2'000'000;

  double log_mcu() const;
  double alpha() const;
  double delta() const;
  double length_min() const;
  double length_max() const;
  double potential_cap() const;          // 200 m log(mCU)
  double decrease_bound(double kappa) const;  // (kappa alpha / 4)^2 / 500
  double step_budget(double kappa) const;     // m (alpha kappa)^-2 log(CU) log m
};

struct FlowData {
  std::span<const std::int64_t> capacity;
  std::span<const std::int64_t> cost;
};

// Potential, gradient and lengths at a strictly feasible f with c^T f > F;
// none signals "undefined" (boundary touched or c^T f <= F).
std::optional<double> potential(const IpmConfig& cfg, FlowData d, std::span<const double> f);
std::optional<std::vector<double>> gradient(const IpmConfig& cfg, FlowData d, std::span<const double> f);
std::optional<std::vector<double>> lengths(const IpmConfig& cfg, FlowData d, std::span<const double> f);
// Same value computed with 50 significant digits.
std::optional<double> potential_precise(const IpmConfig& cfg, FlowData d, std::span<const double> f);

// Step size of the analysis.
inline double analysis_step(double kappa, double alpha, double gradient_dot) {
  return (kappa * alpha) * (kappa * alpha) / (800.0 * std::abs(gradient_dot));
}

// Stalled: the accepted step no longer changes f in floating point.
enum class StepOutcome { Advanced, NoGoodCycle, Stalled };

struct ThresholdAnswer {
  bool yes = false;
  std::vector<std::int64_t> witness;  // per edge id, when yes
};

struct StepTrace {
  std::int64_t insertion = 0;
  std::int64_t step = 0;
  double phi = 0.0;
  double dphi = 0.0;
  double ratio = 0.0;
  double eta = 0.0;
  double eta_analysis = 0.0;
  std::string oracle_case;
  std::int64_t r_refreshes = 0;
};

struct IpmStats {
  std::int64_t steps = 0;
  std::vector<std::int64_t> steps_per_insertion;
  std::int64_t r_refreshes = 0;
  std::int64_t full_resyncs = 0;
  std::int64_t sampled_refreshes = 0;
  std::int64_t certifications = 0;
  std::int64_t local_roundings = 0;
  std::int64_t global_roundings = 0;
  std::int64_t no_confirmations = 0;
  std::int64_t rejected_steps = 0;
  std::int64_t stalls = 0;
  std::int64_t exact_fallbacks = 0;
  std::int64_t length_clamps = 0;
  std::int64_t forest_rebuilds = 0;
  std::int64_t oracle_cases[4] = {0, 0, 0, 0};
  // Potential accounting.
  double max_insert_increase = 0.0;
  double min_decrease = 0.0;          // smallest accepted decrease
  std::int64_t decrease_violations = 0;
  std::int64_t insert_violations = 0;
  std::int64_t cap_violations = 0;
  double max_phi = 0.0;
  // Audits.
  std::int64_t audits = 0;
  std::int64_t phi_mismatches = 0;
  std::int64_t feasibility_violations = 0;
  std::int64_t sampling_violations = 0;
  std::int64_t gradient_violations = 0;
  std::int64_t length_violations = 0;
  std::int64_t exact_no_checks = 0;
  std::int64_t exact_no_failures = 0;
  double observed_kappa = 1.0;  // worst returned / optimal ratio seen at a no
};

// Incremental thresholded mincost flow: after every insertion decides
// whether a feasible circulation of cost <= F exists.
class ThresholdSolver {
 public:
  ThresholdSolver(VertexId num_vertices, IpmConfig cfg);
  ~ThresholdSolver();
  ThresholdSolver(ThresholdSolver&&) noexcept;
  ThresholdSolver& operator=(ThresholdSolver&&) noexcept;

  // Inserts the edge and runs the method to a decision.
  ThresholdAnswer insert(VertexId tail, VertexId head, std::int64_t capacity, std::int64_t cost);

  // Lower-level pieces (insert() = handle_insertion + decide()).
  EdgeId handle_insertion(VertexId tail, VertexId head, std::int64_t capacity, std::int64_t cost);
  StepOutcome ipm_step();
  ThresholdAnswer decide();

  const DynGraph& graph() const;
  const IpmConfig& config() const;
  double kappa() const;
  double potential_value() const;        // tracked
  std::optional<double> recompute_potential() const;
  std::vector<double> flow() const;      // exact current f
  std::vector<double> approximate_flow() const;
  double cost_gap() const;               // c^T f - F, tracked
  bool settled_yes() const;
  std::vector<std::string> audit_violations();
  void resync();

  const IpmStats& stats() const;
  const std::vector<StepTrace>& trace() const;
  MrcStats oracle_stats() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct InsertRecord {
  VertexId tail = 0;
  VertexId head = 0;
  std::int64_t capacity = 0;
  std::int64_t cost = 0;
};

std::vector<ThresholdAnswer> run_threshold(VertexId n, const IpmConfig& cfg, std::span<const InsertRecord> stream);

}  // namespace dynflow
