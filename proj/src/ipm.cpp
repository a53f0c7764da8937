#include "dynflow/ipm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "dynflow/oracle.hpp"

namespace dynflow {

double IpmConfig::log_mcu() const {
  return std::max(1.0, std::log(static_cast<double>(m_cap) * static_cast<double>(C) * static_cast<double>(U)));
}
double IpmConfig::alpha() const { return 1.0 / (5000.0 * log_mcu()); }
double IpmConfig::delta() const {
  return 1.0 / (20.0 * static_cast<double>(m_cap) * static_cast<double>(m_cap) * static_cast<double>(C));
}
double IpmConfig::length_min() const { return std::exp(-3.0 * log_mcu()); }
double IpmConfig::length_max() const { return 1e200; }
double IpmConfig::potential_cap() const { return 200.0 * static_cast<double>(m_cap) * log_mcu(); }
double IpmConfig::decrease_bound(double kappa) const {
  const double k = kappa * alpha() / 4.0;
  return k * k / 500.0;
}
double IpmConfig::step_budget(double kappa) const {
  const double ak = alpha() * kappa;
  return static_cast<double>(m_cap) / (ak * ak) * std::max(1.0, std::log(static_cast<double>(C * U))) *
         std::max(1.0, std::log2(static_cast<double>(m_cap)));
}

namespace {

bool strictly_feasible(const IpmConfig& cfg, FlowData d, std::span<const double> f, double& cf) {
  cf = 0.0;
  const double delta = cfg.delta();
  for (std::size_t e = 0; e < f.size(); ++e) {
    if (!(f[e] > -delta && f[e] < static_cast<double>(d.capacity[e]))) return false;
    cf += static_cast<double>(d.cost[e]) * f[e];
  }
  return cf > static_cast<double>(cfg.F);
}

}  // namespace

std::optional<double> potential(const IpmConfig& cfg, FlowData d, std::span<const double> f) {
  double cf;
  if (!strictly_feasible(cfg, d, f, cf)) return std::nullopt;
  const double a = cfg.alpha(), delta = cfg.delta();
  double phi = 20.0 * static_cast<double>(cfg.m_cap) * std::log(cf - static_cast<double>(cfg.F));
  for (std::size_t e = 0; e < f.size(); ++e)
    phi += std::pow(static_cast<double>(d.capacity[e]) - f[e], -a) + std::pow(f[e] + delta, -a);
  return phi;
}

std::optional<double> potential_precise(const IpmConfig& cfg, FlowData d, std::span<const double> f) {
  using Big = boost::multiprecision::cpp_bin_float_50;
  double cf;
  if (!strictly_feasible(cfg, d, f, cf)) return std::nullopt;
  const Big a = Big(1) / (Big(5000) * Big(cfg.log_mcu()));
  const Big delta = Big(1) / (Big(20) * Big(cfg.m_cap) * Big(cfg.m_cap) * Big(cfg.C));
  Big c = 0;
  for (std::size_t e = 0; e < f.size(); ++e) c += Big(d.cost[e]) * Big(f[e]);
  Big phi = Big(20) * Big(cfg.m_cap) * log(c - Big(cfg.F));
  for (std::size_t e = 0; e < f.size(); ++e)
    phi += pow(Big(d.capacity[e]) - Big(f[e]), -a) + pow(Big(f[e]) + delta, -a);
  return static_cast<double>(phi);
}

std::optional<std::vector<double>> gradient(const IpmConfig& cfg, FlowData d, std::span<const double> f) {
  double cf;
  if (!strictly_feasible(cfg, d, f, cf)) return std::nullopt;
  const double a = cfg.alpha(), delta = cfg.delta();
  const double scale = 20.0 * static_cast<double>(cfg.m_cap) / (cf - static_cast<double>(cfg.F));
  std::vector<double> g(f.size());
  for (std::size_t e = 0; e < f.size(); ++e)
    g[e] = scale * static_cast<double>(d.cost[e]) + a * std::pow(static_cast<double>(d.capacity[e]) - f[e], -1.0 - a) -
           a * std::pow(f[e] + delta, -1.0 - a);
  return g;
}

std::optional<std::vector<double>> lengths(const IpmConfig& cfg, FlowData d, std::span<const double> f) {
  double cf;
  if (!strictly_feasible(cfg, d, f, cf)) return std::nullopt;
  const double a = cfg.alpha(), delta = cfg.delta();
  std::vector<double> l(f.size());
  for (std::size_t e = 0; e < f.size(); ++e)
    l[e] = std::pow(static_cast<double>(d.capacity[e]) - f[e], -1.0 - a) + std::pow(f[e] + delta, -1.0 - a);
  return l;
}

struct ThresholdSolver::Impl {
  IpmConfig cfg;
  DynGraph graph;
  MrcHandle mrc;
  double m;
  double alpha;
  double delta;
  double kappa = 1.0;
  double eps_f = 0.0;

  std::vector<double> u, c;
  std::vector<double> x;   // explicit part of f
  std::vector<double> ft;  // f~
  std::vector<double> lt;  // l~
  std::vector<double> gh;  // g~ without the common factor r / (c^T f - F)
  std::vector<std::vector<int>> member;
  std::vector<std::unique_ptr<LinkCutForest>> lct;
  std::vector<std::vector<EdgeId>> lct_edges;
  std::uint64_t epoch = ~std::uint64_t{0};

  double r = 1.0;
  bool fresh = false;  // no step since the last resync
  double cost_f = 0.0;
  double cost_ft = 0.0;
  double phi = 0.0;

  bool shortcut_yes = false;
  bool shortcut_no = false;
  bool yes = false;
  std::vector<std::int64_t> witness;
  double last_failed_gap = std::numeric_limits<double>::infinity();

  std::int64_t insertion = 0;
  std::mt19937_64 rng;
  IpmStats stats;
  std::vector<StepTrace> trace;

  static MrcConfig oracle_config(const IpmConfig& cfg) {
    MrcConfig mc = cfg.mrc;
    if (mc.m_hint <= 0) mc.m_hint = cfg.m_cap;
    mc.length_min = std::min(mc.length_min, cfg.length_min());
    mc.length_max = std::max(mc.length_max, cfg.length_max());
    mc.seed = cfg.seed;
    return mc;
  }

  Impl(VertexId n, IpmConfig c0)
      : cfg(std::move(c0)),
        graph(n, cfg.m_cap, cfg.C, cfg.U),
        mrc(n, oracle_config(cfg)),
        m(static_cast<double>(cfg.m_cap)),
        alpha(cfg.alpha()),
        delta(cfg.delta()),
        rng(cfg.seed) {
    if (cfg.C < 1 || cfg.U < 1 || cfg.m_cap < 1) throw Error("ipm: C, U and m must be positive");
    kappa = cfg.kappa > 0.0 ? cfg.kappa : mrc.kappa();
    if (!(kappa > 0.0 && kappa <= 1.0)) throw Error("ipm: kappa must lie in (0, 1]");
    eps_f = cfg.eps_f > 0.0 ? cfg.eps_f : kappa / 64.0;
    shortcut_yes = cfg.F >= 0;
    shortcut_no = static_cast<double>(cfg.F) < -m * static_cast<double>(cfg.C) * static_cast<double>(cfg.U);
    if (!settled()) {
      r = -static_cast<double>(cfg.F);
      phi = 20.0 * m * std::log(r);
      stats.max_phi = phi;
    }
    lct.resize(1);
    lct_edges.resize(1);
  }

  bool settled() const { return shortcut_yes || shortcut_no || yes; }
  double gap() const { return cost_f - static_cast<double>(cfg.F); }
  double gap_tilde() const { return cost_ft - static_cast<double>(cfg.F); }
  double scale() const { return r / gap(); }

  double clamp_length(double l) {
    const double lo = cfg.length_min(), hi = cfg.length_max();
    if (l < lo || l > hi) {
      ++stats.length_clamps;
      return std::clamp(l, lo, hi);
    }
    return l;
  }
  double length_at(EdgeId e, double fv) {
    return clamp_length(std::pow(u[e] - fv, -1.0 - alpha) + std::pow(fv + delta, -1.0 - alpha));
  }
  double ghat_at(EdgeId e, double fv) const {
    return 20.0 * m * c[e] / r + alpha * std::pow(u[e] - fv, -1.0 - alpha) - alpha * std::pow(fv + delta, -1.0 - alpha);
  }

  double f_exact(EdgeId e) const {
    double v = x[e];
    for (int i : member[e]) v += lct[i]->point_flow(e);
    return v;
  }

  void push_values(EdgeId e) {
    mrc.update(e, gh[e], lt[e]);
    for (int i : member[e]) lct[i]->set_values(e, gh[e], lt[e]);
  }

  void refresh_edge(EdgeId e, double fv) {
    cost_ft += c[e] * (fv - ft[e]);
    ft[e] = fv;
    lt[e] = length_at(e, fv);
    gh[e] = ghat_at(e, fv);
    push_values(e);
  }

  void set_r(double value) {
    r = value;
    ++stats.r_refreshes;
    for (EdgeId e = 0; e < static_cast<EdgeId>(gh.size()); ++e) {
      gh[e] = ghat_at(e, ft[e]);
      push_values(e);
    }
  }

  void check_r() {
    const double target = gap();
    if (std::abs(r - target) > kappa / 512.0 * target) set_r(target);
  }

  void sync_forests() {
    const auto& fs = mrc.forests();
    if (mrc.forest_epoch() == epoch) return;
    for (std::size_t i = 1; i < lct.size(); ++i)
      for (EdgeId e : lct_edges[i]) x[e] += lct[i]->cut(e);
    for (auto& mem : member) mem.clear();
    lct.clear();
    lct.resize(fs.size());
    lct_edges.assign(fs.size(), {});
    for (std::size_t i = 1; i < fs.size(); ++i) {
      lct[i] = std::make_unique<LinkCutForest>(graph.num_vertices());
      for (EdgeId e : fs[i]) {
        const Edge& ge = graph.edge(e);
        lct[i]->link(e, ge.tail, ge.head, gh[e], lt[e]);
        member[e].push_back(static_cast<int>(i));
      }
      lct_edges[i] = fs[i];
    }
    epoch = mrc.forest_epoch();
    ++stats.forest_rebuilds;
  }

  std::vector<double> flow() const {
    std::vector<double> f(x.size());
    for (EdgeId e = 0; e < static_cast<EdgeId>(x.size()); ++e) f[e] = f_exact(e);
    return f;
  }

  FlowData data() const {
    static thread_local std::vector<std::int64_t> cap, cost;
    cap.clear();
    cost.clear();
    for (const Edge& e : graph.slots()) {
      cap.push_back(e.capacity);
      cost.push_back(e.cost);
    }
    return {cap, cost};
  }

  std::optional<double> full_potential() const {
    const auto f = flow();
    return cfg.exact_rational ? potential_precise(cfg, data(), f) : potential(cfg, data(), f);
  }

  void resync() {
    ++stats.full_resyncs;
    fresh = true;
    const auto f = flow();
    cost_f = 0.0;
    for (EdgeId e = 0; e < static_cast<EdgeId>(f.size()); ++e) {
      cost_f += c[e] * f[e];
      cost_ft += c[e] * (f[e] - ft[e]);
      ft[e] = f[e];
      lt[e] = length_at(e, f[e]);
    }
    cost_ft = cost_f;
    if (auto p = potential(cfg, data(), f)) phi = *p;
    set_r(gap());
  }

  // Potential change along f + eta * delta, accurate for tiny steps.
  struct Line {
    std::vector<std::pair<EdgeId, double>> coef;
    std::vector<double> fv;
    double c_dot = 0.0;
    double gap = 0.0;
  };
  double dphi(const Line& L, double eta) const {
    double s = 20.0 * m * std::log1p(eta * L.c_dot / L.gap);
    for (std::size_t i = 0; i < L.coef.size(); ++i) {
      const auto [e, d] = L.coef[i];
      const double su = u[e] - L.fv[i], sl = L.fv[i] + delta;
      s += std::pow(su, -alpha) * std::expm1(-alpha * std::log1p(-eta * d / su));
      s += std::pow(sl, -alpha) * std::expm1(-alpha * std::log1p(eta * d / sl));
    }
    return s;
  }
  double max_step(const Line& L) const {
    double hi = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < L.coef.size(); ++i) {
      const auto [e, d] = L.coef[i];
      if (d > 0) hi = std::min(hi, (u[e] - L.fv[i]) / d);
      if (d < 0) hi = std::min(hi, (L.fv[i] + delta) / -d);
    }
    // The cost gap may shrink to 1/4 (or halve once below 1/2), never further.
    const double floor = L.gap > 0.5 ? 0.25 : L.gap / 2.0;
    if (L.c_dot < 0) hi = std::min(hi, (L.gap - floor) / -L.c_dot);
    return hi;
  }

  std::pair<double, double> line_search(const Line& L, double eta_p) {
    const double hi = max_step(L) * (1.0 - 1e-12);
    std::vector<double> cand;
    if (eta_p < hi) cand.push_back(eta_p);
    if (cfg.line_search || cand.empty()) {
      for (double t = eta_p * 2; t < hi; t *= 2) cand.push_back(t);
      for (int j = 1; j <= 60; ++j) cand.push_back(hi * (1.0 - std::ldexp(1.0, -j)));
    }
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
    std::size_t best = 0;
    std::vector<double> val(cand.size());
    for (std::size_t i = 0; i < cand.size(); ++i) {
      val[i] = dphi(L, cand[i]);
      if (val[i] < val[best]) best = i;
    }
    double eta = cand[best], v = val[best];
    if (cfg.line_search && cand.size() > 2) {
      double a = best > 0 ? cand[best - 1] : cand[best] / 2;
      double b = best + 1 < cand.size() ? cand[best + 1] : hi;
      const double phi_g = 0.6180339887498949;
      for (int it = 0; it < 40; ++it) {
        const double x1 = b - phi_g * (b - a), x2 = a + phi_g * (b - a);
        const double v1 = dphi(L, x1), v2 = dphi(L, x2);
        if (v1 < v) eta = x1, v = v1;
        if (v2 < v) eta = x2, v = v2;
        if (v1 < v2) b = x2;
        else a = x1;
      }
    }
    return {eta, v};
  }

  StepOutcome ipm_step() {
    const auto q = mrc.query();
    sync_forests();
    if (q) ++stats.oracle_cases[static_cast<int>(q->which)];
    else ++stats.oracle_cases[0];
    const double sc = scale();
    if (!q || sc * q->ratio > -kappa * alpha / 4.0) return StepOutcome::NoGoodCycle;
    return apply_cycle(q->cycle, sc * q->ratio, to_string(q->which), false);
  }

  // Min-ratio cycle of the current values, solved exactly; used once the
  // approximate steps no longer move f in floating point.
  StepOutcome exact_step() {
    ++stats.exact_fallbacks;
    std::vector<EdgeId> ids;
    const WeightedGraph g = mrc.live_graph(ids);
    if (g.edges.empty()) return StepOutcome::NoGoodCycle;
    const auto best = min_ratio_cycle_exact(g);
    const double sc = scale();
    if (!best || sc * best->ratio > -alpha / 4.0) return StepOutcome::NoGoodCycle;
    ImplicitCycle ic;
    for (const OrientedEdge& oe : best->edges) ic.off_tree.push_back({ids[oe.id], oe.sign});
    return apply_cycle(ic, sc * best->ratio, "exact", true);
  }

  StepOutcome apply_cycle(const ImplicitCycle& cycle, double ratio, const char* which, bool exact) {
    const double sc = scale();
    // Explicit cycle: off-tree edges plus forest paths between them.
    std::map<EdgeId, double> coef;
    std::vector<std::pair<VertexId, VertexId>> segments;
    const auto& off = cycle.off_tree;
    const int fi = cycle.forest;
    for (std::size_t j = 0; j < off.size(); ++j) {
      coef[off[j].id] += off[j].sign;
      const Edge& cur = graph.edge(off[j].id);
      const Edge& nxt = graph.edge(off[(j + 1) % off.size()].id);
      const VertexId from = off[j].sign > 0 ? cur.head : cur.tail;
      const VertexId to = off[(j + 1) % off.size()].sign > 0 ? nxt.tail : nxt.head;
      if (from == to) continue;
      if (fi <= 0) throw Error("ipm: explicit cycle is not closed");
      segments.push_back({from, to});
      for (const OrientedEdge& pe : lct[fi]->path_edges(from, to)) coef[pe.id] += pe.sign;
    }
    Line L;
    L.gap = gap();
    double g_dot = 0.0;
    for (const auto& [e, d] : coef) {
      if (d == 0.0) continue;
      L.coef.push_back({e, d});
      L.fv.push_back(f_exact(e));
      L.c_dot += d * c[e];
      g_dot += d * gh[e];
    }
    g_dot *= sc;
    const double eta_p = analysis_step(kappa, alpha, g_dot);
    const auto [eta, change] = line_search(L, eta_p);
    if (!(change < 0.0)) {
      ++stats.rejected_steps;
      if (fresh) return StepOutcome::NoGoodCycle;
      resync();
      return StepOutcome::Advanced;
    }
    bool moved = false;
    for (std::size_t i = 0; i < L.coef.size() && !moved; ++i) moved = L.fv[i] + eta * L.coef[i].second != L.fv[i];
    if (!moved || (!exact && -change < 1e-14 * std::max(1.0, std::abs(phi)))) {
      ++stats.stalls;
      return StepOutcome::Stalled;
    }
    fresh = false;

    for (const OrientedEdge& oe : off) x[oe.id] += eta * oe.sign;
    for (auto [from, to] : segments) lct[fi]->path_add(from, to, eta);
    phi += change;
    cost_f += eta * L.c_dot;
    ++stats.steps;
    const double bound = cfg.decrease_bound(kappa);
    if (-change < bound * (1.0 - 1e-9)) ++stats.decrease_violations;
    stats.min_decrease = stats.steps == 1 ? -change : std::min(stats.min_decrease, -change);
    stats.max_phi = std::max(stats.max_phi, phi);
    if (phi > cfg.potential_cap()) ++stats.cap_violations;

    const int reps = cfg.sample_reps > 0 ? cfg.sample_reps
                                         : static_cast<int>(std::ceil(4.0 * std::log2(std::max(2.0, m))));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t i = 0; i < L.coef.size(); ++i) {
      const auto [e, d] = L.coef[i];
      const double fnew = L.fv[i] + eta * d;
      if (member[e].empty()) {
        refresh_edge(e, fnew);
        continue;
      }
      const double p = std::min(1.0, 2.0 * eta * std::abs(d) * lt[e] / eps_f);
      bool hit = false;
      for (int rep = 0; rep < reps && !hit; ++rep) hit = unit(rng) < p;
      if (hit) {
        ++stats.sampled_refreshes;
        refresh_edge(e, f_exact(e));
      }
    }
    check_r();

    if (cfg.trace)
      trace.push_back({insertion, stats.steps, phi, change, ratio, eta, eta_p, which,
                       stats.r_refreshes});
    if (cfg.audit) {
      ++stats.audits;
      audit(true);
    }
    return StepOutcome::Advanced;
  }

  std::vector<std::string> audit(bool count) {
    std::vector<std::string> out;
    const auto f = flow();
    const FlowData d = data();
    auto note = [&](std::int64_t& counter, std::string msg) {
      if (count) ++counter;
      out.push_back(std::move(msg));
    };
    for (EdgeId e = 0; e < static_cast<EdgeId>(f.size()); ++e)
      if (!(f[e] > -delta && f[e] < u[e])) note(stats.feasibility_violations, "edge " + std::to_string(e) + " infeasible");
    const auto p = cfg.exact_rational ? potential_precise(cfg, d, f) : potential(cfg, d, f);
    if (!p) {
      out.push_back("potential undefined");
      return out;
    }
    if (std::abs(*p - phi) > 1e-9 * std::max(1.0, std::abs(*p)))
      note(stats.phi_mismatches, "tracked potential " + std::to_string(phi) + " vs " + std::to_string(*p));
    const auto g = *gradient(cfg, d, f);
    const auto l = *lengths(cfg, d, f);
    const double sc = scale();
    bool resample = false;
    for (EdgeId e = 0; e < static_cast<EdgeId>(f.size()); ++e) {
      const double lc = std::clamp(l[e], cfg.length_min(), cfg.length_max());
      if (lt[e] > 2.0 * lc || 2.0 * lt[e] < lc) note(stats.length_violations, "length estimate off on " + std::to_string(e));
      const double rounding = 8.0 * std::numeric_limits<double>::epsilon() * (std::abs(g[e]) + std::abs(sc * gh[e]));
      if ((std::abs(sc * gh[e] - g[e]) - rounding) / lc > kappa * alpha / 32.0) {
        note(stats.gradient_violations, "gradient estimate off on " + std::to_string(e) + " by " +
                                            std::to_string(std::abs(sc * gh[e] - g[e]) / lc) + " (f " + std::to_string(f[e]) +
                                            ", f~ " + std::to_string(ft[e]) + ")");
      }
      if (lt[e] * std::abs(f[e] - ft[e]) >= eps_f) {
        note(stats.sampling_violations, "flow estimate off on " + std::to_string(e));
        resample = true;
      }
    }
    if (count && resample) resync();
    return out;
  }

  bool try_certify() {
    const auto f = flow();
    double cf = 0.0;
    for (EdgeId e = 0; e < static_cast<EdgeId>(f.size()); ++e) cf += c[e] * f[e];
    if (cf - static_cast<double>(cfg.F) > 0.5) return false;
    ++stats.certifications;
    const auto& slots = graph.slots();
    auto attempt = [&](int widen) -> bool {
      std::vector<BoxEdge> box;
      for (EdgeId e = 0; e < static_cast<EdgeId>(slots.size()); ++e) {
        const Edge& s = slots[e];
        std::int64_t lo = 0, hi = s.capacity;
        if (widen >= 0) {
          lo = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor(f[e])) - widen);
          hi = std::min<std::int64_t>(s.capacity, static_cast<std::int64_t>(std::ceil(f[e])) + widen);
        }
        box.push_back({s.tail, s.head, lo, std::max(lo, hi), s.cost});
      }
      const auto sol = min_cost_circulation(graph.num_vertices(), box);
      if (!sol || sol->cost > cfg.F) return false;
      witness = sol->flow;
      return true;
    };
    if (attempt(0) || attempt(1)) {
      ++stats.local_roundings;
      return true;
    }
    if (attempt(-1)) {
      ++stats.global_roundings;
      return true;
    }
    return false;
  }

  void exact_no_check() {
    ++stats.exact_no_checks;
    std::vector<EdgeId> ids;
    WeightedGraph g = mrc.live_graph(ids);
    const double sc = scale();
    for (auto& e : g.edges) e.gradient *= sc;
    if (g.edges.empty()) return;
    const double opt = optimal_ratio(g);
    if (opt <= -alpha / 4.0) ++stats.exact_no_failures;
    if (opt < 0.0) {
      const auto q = mrc.query();
      const double got = q ? std::min(0.0, sc * q->ratio) : 0.0;
      stats.observed_kappa = std::min(stats.observed_kappa, got / opt);
    }
  }

  ThresholdAnswer decide() {
    ThresholdAnswer ans;
    const std::size_t slots = graph.slots().size();
    if (shortcut_no) return ans;
    if (shortcut_yes || yes) {
      witness.resize(slots, 0);
      ans.yes = true;
      ans.witness = witness;
      return ans;
    }
    bool confirmed = false;
    std::int64_t steps = 0;
    for (;;) {
      if (gap() <= 0.5 && gap() < last_failed_gap / 2) {
        if (try_certify()) {
          yes = true;
          stats.steps_per_insertion.push_back(steps);
          ans.yes = true;
          ans.witness = witness;
          return ans;
        }
        last_failed_gap = gap();
      }
      StepOutcome out = ipm_step();
      if (out == StepOutcome::Stalled && confirmed) out = exact_step();
      if (out == StepOutcome::Advanced) {
        confirmed = false;
        if (++steps > cfg.max_steps_per_insertion) throw Error("ipm: step budget exhausted");
        continue;
      }
      if (!confirmed) {
        resync();
        confirmed = true;
        ++stats.no_confirmations;
        continue;
      }
      if (cfg.audit) exact_no_check();
      stats.steps_per_insertion.push_back(steps);
      return ans;
    }
  }

  EdgeId handle_insertion(VertexId tail, VertexId head, std::int64_t capacity, std::int64_t cost) {
    if (capacity < 1) throw Error("ipm: capacities must be positive");
    const EdgeId e = graph.insert_edge(tail, head, capacity, cost);
    ++insertion;
    const std::size_t size = static_cast<std::size_t>(e) + 1;
    u.resize(size, 0.0);
    c.resize(size, 0.0);
    x.resize(size, 0.0);
    ft.resize(size, 0.0);
    lt.resize(size, 1.0);
    gh.resize(size, 0.0);
    member.resize(size);
    u[e] = static_cast<double>(capacity);
    c[e] = static_cast<double>(cost);
    if (settled()) return e;
    lt[e] = length_at(e, 0.0);
    gh[e] = ghat_at(e, 0.0);
    mrc.insert(e, tail, head, gh[e], lt[e]);
    const double inc = std::pow(u[e], -alpha) + std::pow(delta, -alpha);
    phi += inc;
    stats.max_insert_increase = std::max(stats.max_insert_increase, inc);
    if (inc > 3.0) ++stats.insert_violations;
    stats.max_phi = std::max(stats.max_phi, phi);
    if (phi > cfg.potential_cap()) ++stats.cap_violations;
    return e;
  }
};

ThresholdSolver::ThresholdSolver(VertexId n, IpmConfig cfg) : impl_(std::make_unique<Impl>(n, std::move(cfg))) {}
ThresholdSolver::~ThresholdSolver() = default;
ThresholdSolver::ThresholdSolver(ThresholdSolver&&) noexcept = default;
ThresholdSolver& ThresholdSolver::operator=(ThresholdSolver&&) noexcept = default;

ThresholdAnswer ThresholdSolver::insert(VertexId tail, VertexId head, std::int64_t capacity, std::int64_t cost) {
  impl_->handle_insertion(tail, head, capacity, cost);
  return impl_->decide();
}
EdgeId ThresholdSolver::handle_insertion(VertexId tail, VertexId head, std::int64_t capacity, std::int64_t cost) {
  return impl_->handle_insertion(tail, head, capacity, cost);
}
StepOutcome ThresholdSolver::ipm_step() {
  if (impl_->settled()) return StepOutcome::NoGoodCycle;
  return impl_->ipm_step();
}
ThresholdAnswer ThresholdSolver::decide() { return impl_->decide(); }
const DynGraph& ThresholdSolver::graph() const { return impl_->graph; }
const IpmConfig& ThresholdSolver::config() const { return impl_->cfg; }
double ThresholdSolver::kappa() const { return impl_->kappa; }
double ThresholdSolver::potential_value() const { return impl_->phi; }
std::optional<double> ThresholdSolver::recompute_potential() const { return impl_->full_potential(); }
std::vector<double> ThresholdSolver::flow() const { return impl_->flow(); }
std::vector<double> ThresholdSolver::approximate_flow() const { return impl_->ft; }
double ThresholdSolver::cost_gap() const { return impl_->gap(); }
bool ThresholdSolver::settled_yes() const { return impl_->shortcut_yes || impl_->yes; }
std::vector<std::string> ThresholdSolver::audit_violations() { return impl_->audit(false); }
void ThresholdSolver::resync() { impl_->resync(); }
const IpmStats& ThresholdSolver::stats() const { return impl_->stats; }
const std::vector<StepTrace>& ThresholdSolver::trace() const { return impl_->trace; }
MrcStats ThresholdSolver::oracle_stats() const { return impl_->mrc.stats(); }

std::vector<ThresholdAnswer> run_threshold(VertexId n, const IpmConfig& cfg, std::span<const InsertRecord> stream) {
  ThresholdSolver solver(n, cfg);
  std::vector<ThresholdAnswer> out;
  out.reserve(stream.size());
  for (const InsertRecord& rec : stream) out.push_back(solver.insert(rec.tail, rec.head, rec.capacity, rec.cost));
  return out;
}

}  // namespace dynflow
