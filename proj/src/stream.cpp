#include "dynflow/stream.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <future>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "dynflow/oracle.hpp"

namespace dynflow {

ParseError::ParseError(int line, const std::string& what)
    : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

namespace {

std::int64_t parse_int(const std::string& tok, int line, const char* what) {
  std::size_t used = 0;
  std::int64_t v = 0;
  try {
    v = std::stoll(tok, &used);
  } catch (const std::exception&) {
    throw ParseError(line, std::string("expected an integer for ") + what + ", got '" + tok + "'");
  }
  if (used != tok.size()) throw ParseError(line, std::string("expected an integer for ") + what + ", got '" + tok + "'");
  return v;
}

double parse_double(const std::string& tok, int line, const char* what) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(tok, &used);
  } catch (const std::exception&) {
    throw ParseError(line, std::string("expected a number for ") + what + ", got '" + tok + "'");
  }
  if (used != tok.size()) throw ParseError(line, std::string("expected a number for ") + what + ", got '" + tok + "'");
  return v;
}

void check_header(const StreamHeader& h, int line) {
  if (h.n < 1) throw ParseError(line, "n must be positive");
  if (h.m < 0) throw ParseError(line, "m must be nonnegative");
  if (h.C < 1) throw ParseError(line, "C must be positive");
  if (h.U < 1) throw ParseError(line, "U must be positive");
  if (h.mode == StreamMode::Maxflow) {
    if (!(h.eps > 0.0 && h.eps < 1.0)) throw ParseError(line, "eps must lie in (0, 1)");
    if (h.s < 0 || h.s >= h.n || h.t < 0 || h.t >= h.n) throw ParseError(line, "s and t must be vertices");
    if (h.s == h.t) throw ParseError(line, "s and t must differ");
  }
}

void check_record(const StreamHeader& h, const InsertRecord& r, int line) {
  if (r.tail < 0 || r.tail >= h.n || r.head < 0 || r.head >= h.n)
    throw ParseError(line, "endpoint outside [0, n)");
  if (r.capacity < 1 || r.capacity > h.U) throw ParseError(line, "capacity outside [1, U]");
  if (r.cost < -h.C || r.cost > h.C) throw ParseError(line, "cost outside [-C, C]");
}

}  // namespace

UpdateStream parse_stream(std::istream& in) {
  UpdateStream s;
  bool have_header = false;
  std::string text;
  int line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    std::istringstream ls(text);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty() || tok[0][0] == '#') continue;
    if (!have_header) {
      if (tok.size() < 2 || tok[0] != "DYNFLOW") throw ParseError(line, "expected the DYNFLOW header");
      if (tok[1] != "v1") throw ParseError(line, "unsupported version '" + tok[1] + "'");
      bool seen_n = false, seen_m = false, seen_mode = false, seen_f = false, seen_eps = false, seen_s = false,
           seen_t = false;
      StreamHeader& h = s.header;
      for (std::size_t i = 2; i < tok.size(); ++i) {
        const auto eq = tok[i].find('=');
        if (eq == std::string::npos) throw ParseError(line, "expected key=value, got '" + tok[i] + "'");
        const std::string key = tok[i].substr(0, eq), val = tok[i].substr(eq + 1);
        if (key == "n") h.n = static_cast<VertexId>(parse_int(val, line, "n")), seen_n = true;
        else if (key == "m") h.m = parse_int(val, line, "m"), seen_m = true;
        else if (key == "C") h.C = parse_int(val, line, "C");
        else if (key == "U") h.U = parse_int(val, line, "U");
        else if (key == "F") h.F = parse_int(val, line, "F"), seen_f = true;
        else if (key == "eps") h.eps = parse_double(val, line, "eps"), seen_eps = true;
        else if (key == "s") h.s = static_cast<VertexId>(parse_int(val, line, "s")), seen_s = true;
        else if (key == "t") h.t = static_cast<VertexId>(parse_int(val, line, "t")), seen_t = true;
        else if (key == "mode") {
          seen_mode = true;
          if (val == "threshold") h.mode = StreamMode::Threshold;
          else if (val == "maxflow") h.mode = StreamMode::Maxflow;
          else throw ParseError(line, "unknown mode '" + val + "'");
        } else {
          throw ParseError(line, "unknown header key '" + key + "'");
        }
      }
      if (!seen_n || !seen_m || !seen_mode) throw ParseError(line, "header needs n, m and mode");
      if (h.mode == StreamMode::Threshold && !seen_f) throw ParseError(line, "threshold mode needs F");
      if (h.mode == StreamMode::Maxflow && (!seen_eps || !seen_s || !seen_t))
        throw ParseError(line, "maxflow mode needs eps, s and t");
      check_header(h, line);
      have_header = true;
      continue;
    }
    if (tok[0] != "+") throw ParseError(line, "expected '+' record, got '" + tok[0] + "'");
    if (tok.size() != 5) throw ParseError(line, "record needs tail head cap cost");
    InsertRecord r;
    r.tail = static_cast<VertexId>(parse_int(tok[1], line, "tail"));
    r.head = static_cast<VertexId>(parse_int(tok[2], line, "head"));
    r.capacity = parse_int(tok[3], line, "capacity");
    r.cost = parse_int(tok[4], line, "cost");
    check_record(s.header, r, line);
    if (static_cast<std::int64_t>(s.records.size()) >= s.header.m) throw ParseError(line, "more records than m");
    s.records.push_back(r);
  }
  if (!have_header) throw ParseError(line, "missing DYNFLOW header");
  return s;
}

UpdateStream parse_stream_string(const std::string& text) {
  std::istringstream in(text);
  return parse_stream(in);
}

UpdateStream read_stream_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(0, "cannot open '" + path + "'");
  return parse_stream(in);
}

void validate_stream(const UpdateStream& s) {
  check_header(s.header, 0);
  if (static_cast<std::int64_t>(s.records.size()) > s.header.m) throw ParseError(0, "more records than m");
  for (const auto& r : s.records) check_record(s.header, r, 0);
}

std::string format_stream(const UpdateStream& s) {
  std::ostringstream out;
  const StreamHeader& h = s.header;
  out << "DYNFLOW v1 n=" << h.n << " m=" << h.m << " C=" << h.C << " U=" << h.U;
  if (h.mode == StreamMode::Threshold) {
    out << " mode=threshold F=" << h.F << '\n';
  } else {
    char buf[32];
    const auto end = std::to_chars(buf, buf + sizeof buf, h.eps).ptr;
    out << " mode=maxflow eps=" << std::string_view(buf, static_cast<std::size_t>(end - buf)) << " s=" << h.s << " t=" << h.t << '\n';
  }
  for (const auto& r : s.records) out << "+ " << r.tail << ' ' << r.head << ' ' << r.capacity << ' ' << r.cost << '\n';
  return out.str();
}

const char* to_string(StreamKind k) {
  switch (k) {
    case StreamKind::UniformRandom: return "uniform-random";
    case StreamKind::ThresholdStraddling: return "threshold-straddling";
    case StreamKind::CycleDetection: return "cycle-detection";
  }
  return "?";
}

std::optional<StreamKind> stream_kind_from_string(const std::string& s) {
  for (StreamKind k : {StreamKind::UniformRandom, StreamKind::ThresholdStraddling, StreamKind::CycleDetection})
    if (s == to_string(k)) return k;
  return std::nullopt;
}

std::int64_t static_min_cost(const UpdateStream& s, std::size_t k) {
  std::vector<BoxEdge> box;
  for (std::size_t i = 0; i < k; ++i) {
    const auto& r = s.records[i];
    box.push_back({r.tail, r.head, 0, r.capacity, r.cost});
  }
  return min_cost_circulation(s.header.n, box)->cost;
}

std::int64_t static_max_flow(const UpdateStream& s, std::size_t k) {
  std::vector<CapEdge> edges;
  for (std::size_t i = 0; i < k; ++i) edges.push_back({s.records[i].tail, s.records[i].head, s.records[i].capacity});
  return max_flow(s.header.n, edges, s.header.s, s.header.t).value;
}

namespace {

std::vector<InsertRecord> random_records(const GenerateOptions& o, std::mt19937_64& rng) {
  std::uniform_int_distribution<VertexId> v(0, o.n - 1);
  std::uniform_int_distribution<std::int64_t> cap(1, o.U), cost(-o.C, o.C);
  std::vector<InsertRecord> out;
  for (std::int64_t i = 0; i < o.m; ++i) {
    InsertRecord r{v(rng), v(rng), cap(rng), cost(rng)};
    if (o.mode == StreamMode::Maxflow) r.cost = 0;
    out.push_back(r);
  }
  return out;
}

}  // namespace

UpdateStream generate_stream(const GenerateOptions& o) {
  if (o.n < 1 || o.m < 0 || o.C < 1 || o.U < 1) throw Error("generate: bounds must be positive");
  std::mt19937_64 rng(o.seed);
  UpdateStream s;
  StreamHeader& h = s.header;
  h.n = o.n;
  h.m = o.m;
  h.C = o.C;
  h.U = o.U;
  h.mode = o.mode;
  h.eps = o.eps;
  if (o.mode == StreamMode::Maxflow) {
    if (o.n < 2) throw Error("generate: maxflow needs two vertices");
    h.s = 0;
    h.t = o.n - 1;
  }

  switch (o.kind) {
    case StreamKind::UniformRandom: {
      s.records = random_records(o, rng);
      if (o.F) h.F = *o.F;
      else h.F = -1 - static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(o.C * o.U));
      break;
    }
    case StreamKind::CycleDetection: {
      // Mostly forward edges along a hidden order, occasionally a back edge.
      std::vector<VertexId> order(o.n);
      for (VertexId i = 0; i < o.n; ++i) order[i] = i;
      std::shuffle(order.begin(), order.end(), rng);
      std::uniform_int_distribution<VertexId> v(0, o.n - 1);
      std::uniform_int_distribution<std::int64_t> cap(1, o.U);
      std::bernoulli_distribution back(0.08);
      for (std::int64_t i = 0; i < o.m; ++i) {
        VertexId a = v(rng), b = v(rng);
        while (o.n > 1 && a == b) b = v(rng);
        const bool forward = a < b;
        if (forward == back(rng)) std::swap(a, b);
        s.records.push_back({order[a], order[b], cap(rng), -1});
      }
      h.C = std::max<std::int64_t>(h.C, 1);
      h.F = -1;
      break;
    }
    case StreamKind::ThresholdStraddling: {
      // Redraw until the prefix optimum drops below zero somewhere, then put
      // F at the optimum reached around the middle of the stream.
      if (o.m < 2) throw Error("generate: threshold-straddling needs m >= 2");
      for (int attempt = 0;; ++attempt) {
        s.records = random_records(o, rng);
        if (attempt > 50) {
          // Force a negative two-cycle into the second half.
          const std::size_t at = static_cast<std::size_t>((o.m - 1) / 2);
          const VertexId a = 0, b = o.n > 1 ? 1 : 0;
          s.records[at] = {a, b, 1, -o.C};
          s.records[at + 1] = {b, a, 1, 0};
        }
        std::vector<std::int64_t> opt(s.records.size() + 1, 0);
        for (std::size_t k = 1; k <= s.records.size(); ++k) opt[k] = static_min_cost(s, k);
        if (opt.back() >= 0) continue;
        std::size_t pick = s.records.size() / 2;
        while (pick < s.records.size() && opt[pick] >= 0) ++pick;
        if (opt[pick] >= 0) continue;
        h.F = opt[pick];
        break;
      }
      break;
    }
  }
  return s;
}

std::vector<std::int64_t> maxflow_grid(double eps, std::int64_t top) {
  std::vector<std::int64_t> g{0};
  if (top < 1) return g;
  for (int i = 0;; ++i) {
    const double x = std::pow(1.0 + eps / 2.0, i);
    const std::int64_t v = std::min<std::int64_t>(top, static_cast<std::int64_t>(std::ceil(x - 1e-12)));
    if (v != g.back()) g.push_back(v);
    if (v >= top) break;
  }
  return g;
}

namespace {

IpmConfig solver_config(const StreamHeader& h, const RunOptions& o) {
  IpmConfig cfg;
  cfg.m_cap = std::max<std::int64_t>(1, h.m);
  cfg.C = h.C;
  cfg.U = h.U;
  cfg.F = o.threshold ? *o.threshold : h.F;
  cfg.kappa = o.kappa;
  cfg.seed = o.seed;
  cfg.trace = o.trace;
  cfg.audit = o.audit;
  cfg.exact_rational = o.exact_rational;
  cfg.mrc.k = o.k;
  return cfg;
}

void add_stats(IpmStats& into, const IpmStats& s) {
  into.steps += s.steps;
  into.r_refreshes += s.r_refreshes;
  into.full_resyncs += s.full_resyncs;
  into.sampled_refreshes += s.sampled_refreshes;
  into.certifications += s.certifications;
  into.local_roundings += s.local_roundings;
  into.global_roundings += s.global_roundings;
  into.no_confirmations += s.no_confirmations;
  into.rejected_steps += s.rejected_steps;
  into.stalls += s.stalls;
  into.exact_fallbacks += s.exact_fallbacks;
  into.length_clamps += s.length_clamps;
  into.forest_rebuilds += s.forest_rebuilds;
  for (int i = 0; i < 4; ++i) into.oracle_cases[i] += s.oracle_cases[i];
  into.max_insert_increase = std::max(into.max_insert_increase, s.max_insert_increase);
  if (s.steps > 0) into.min_decrease = into.steps == s.steps ? s.min_decrease : std::min(into.min_decrease, s.min_decrease);
  into.decrease_violations += s.decrease_violations;
  into.insert_violations += s.insert_violations;
  into.cap_violations += s.cap_violations;
  into.max_phi = std::max(into.max_phi, s.max_phi);
  into.audits += s.audits;
  into.phi_mismatches += s.phi_mismatches;
  into.feasibility_violations += s.feasibility_violations;
  into.sampling_violations += s.sampling_violations;
  into.gradient_violations += s.gradient_violations;
  into.length_violations += s.length_violations;
  into.exact_no_checks += s.exact_no_checks;
  into.exact_no_failures += s.exact_no_failures;
  into.observed_kappa = std::min(into.observed_kappa, s.observed_kappa);
}

using Clock = std::chrono::steady_clock;

}  // namespace

RunReport run_threshold_stream(const UpdateStream& s, const RunOptions& opt) {
  validate_stream(s);
  RunReport rep;
  rep.header = s.header;
  rep.options = opt;
  const auto t0 = Clock::now();
  IpmConfig cfg = solver_config(s.header, opt);
  ThresholdSolver solver(s.header.n, cfg);
  rep.kappa = solver.kappa();
  rep.alpha = cfg.alpha();
  std::int64_t prev_steps = 0;
  for (std::size_t i = 0; i < s.records.size(); ++i) {
    const auto& r = s.records[i];
    const auto t1 = Clock::now();
    const auto ans = solver.insert(r.tail, r.head, r.capacity, r.cost);
    InsertionResult res;
    res.micros = std::chrono::duration<double, std::micro>(Clock::now() - t1).count();
    res.yes = ans.yes;
    res.steps = solver.stats().steps - prev_steps;
    prev_steps = solver.stats().steps;
    if (ans.yes) rep.witness = ans.witness;
    else rep.witness.clear();
    if (opt.oracle_check) {
      res.oracle = static_min_cost(s, i + 1);
      res.mismatch = (*res.oracle <= cfg.F) != ans.yes;
      if (ans.yes && !res.mismatch) {
        // The witness itself must certify the answer.
        std::vector<std::int64_t> bal(s.header.n, 0);
        std::int64_t cost = 0;
        bool ok = ans.witness.size() == i + 1;
        for (std::size_t e = 0; ok && e <= i; ++e) {
          const auto w = ans.witness[e];
          ok = w >= 0 && w <= s.records[e].capacity;
          bal[s.records[e].tail] -= w;
          bal[s.records[e].head] += w;
          cost += w * s.records[e].cost;
        }
        for (auto b : bal) ok = ok && b == 0;
        res.mismatch = !(ok && cost <= cfg.F);
      }
      if (res.mismatch) ++rep.mismatches;
    }
    rep.results.push_back(res);
  }
  rep.total_steps = solver.stats().steps;
  rep.ipm = solver.stats();
  rep.oracle = solver.oracle_stats();
  rep.trace = solver.trace();
  rep.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return rep;
}

RunReport run_maxflow_stream(const UpdateStream& s, const RunOptions& opt) {
  validate_stream(s);
  if (s.header.mode != StreamMode::Maxflow) throw Error("maxflow driver needs a maxflow stream");
  RunReport rep;
  rep.header = s.header;
  rep.options = opt;
  const auto t0 = Clock::now();
  const double eps = opt.epsilon ? *opt.epsilon : s.header.eps;
  if (!(eps > 0.0 && eps < 1.0)) throw Error("epsilon must lie in (0, 1)");
  const StreamHeader& h = s.header;
  const std::int64_t top = static_cast<std::int64_t>(h.n) * h.U;
  rep.thresholds = maxflow_grid(eps, top);

  // Reduced instance: auxiliary t->s edge (capacity n U, cost -1) first, then
  // the stream edges at cost 0.
  struct Instance {
    std::int64_t value;
    std::unique_ptr<ThresholdSolver> solver;
    ThresholdAnswer last;
    std::int64_t steps = 0;
  };
  std::vector<Instance> inst;
  for (std::int64_t v : rep.thresholds) {
    IpmConfig cfg;
    cfg.m_cap = h.m + 1;
    cfg.C = 1;
    cfg.U = top;
    cfg.F = -v;
    cfg.kappa = opt.kappa;
    cfg.seed = opt.seed;
    cfg.trace = false;
    cfg.audit = opt.audit;
    cfg.exact_rational = opt.exact_rational;
    cfg.mrc.k = opt.k;
    auto solver = std::make_unique<ThresholdSolver>(h.n, cfg);
    if (rep.kappa == 0.0) {
      rep.kappa = solver->kappa();
      rep.alpha = cfg.alpha();
    }
    solver->handle_insertion(h.t, h.s, top, -1);
    inst.push_back({v, std::move(solver), {}, 0});
  }

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned workers = opt.workers > 0 ? static_cast<unsigned>(opt.workers) : hw;
  std::vector<std::int64_t> best_witness;  // per G edge, aux first
  std::int64_t best_value = 0;
  for (std::size_t i = 0; i < s.records.size(); ++i) {
    const auto& r = s.records[i];
    const auto t1 = Clock::now();
    auto work = [&](std::size_t from, std::size_t to) {
      for (std::size_t j = from; j < to; ++j) {
        Instance& in = inst[j];
        const auto before = in.solver->stats().steps;
        in.last = in.solver->insert(r.tail, r.head, r.capacity, 0);
        in.steps = in.solver->stats().steps - before;
      }
    };
    if (workers > 1 && inst.size() > 1) {
      std::vector<std::future<void>> jobs;
      const std::size_t chunk = (inst.size() + workers - 1) / workers;
      for (std::size_t from = 0; from < inst.size(); from += chunk)
        jobs.push_back(std::async(std::launch::async, work, from, std::min(inst.size(), from + chunk)));
      for (auto& j : jobs) j.get();
    } else {
      work(0, inst.size());
    }
    InsertionResult res;
    res.micros = std::chrono::duration<double, std::micro>(Clock::now() - t1).count();
    for (const Instance& in : inst) {
      res.steps += in.steps;
      if (in.last.yes) res.accepted = std::max(res.accepted, in.value);
    }
    for (const Instance& in : inst) {
      if (in.value != res.accepted || !in.last.yes) continue;
      const std::int64_t v = in.value == 0 ? 0 : in.last.witness.front();
      if (v > best_value || best_witness.empty()) {
        best_value = v;
        best_witness = in.value == 0 ? std::vector<std::int64_t>(i + 2, 0) : in.last.witness;
      }
    }
    best_witness.resize(i + 2, 0);
    res.value = best_value;
    if (opt.oracle_check) {
      res.oracle = static_max_flow(s, i + 1);
      res.mismatch = static_cast<double>(res.value) < (1.0 - eps) * static_cast<double>(*res.oracle);
      // The witness must be a feasible s-t flow of the reported value.
      std::vector<std::int64_t> bal(h.n, 0);
      bool ok = best_witness.front() == res.value;
      bal[h.t] -= best_witness.front();
      bal[h.s] += best_witness.front();
      for (std::size_t e = 0; e <= i; ++e) {
        const auto w = best_witness[e + 1];
        ok = ok && w >= 0 && w <= s.records[e].capacity;
        bal[s.records[e].tail] -= w;
        bal[s.records[e].head] += w;
      }
      for (auto b : bal) ok = ok && b == 0;
      if (!ok) res.mismatch = true;
      if (res.mismatch) ++rep.mismatches;
    }
    rep.results.push_back(res);
  }
  if (!best_witness.empty()) {
    rep.witness_aux = best_witness.front();
    rep.witness.assign(best_witness.begin() + 1, best_witness.end());
  }
  std::size_t largest = 0;
  for (std::size_t j = 0; j < inst.size(); ++j) {
    add_stats(rep.ipm, inst[j].solver->stats());
    if (inst[j].solver->oracle_stats().queries > inst[largest].solver->oracle_stats().queries) largest = j;
  }
  rep.total_steps = rep.ipm.steps;
  rep.oracle = inst[largest].solver->oracle_stats();
  rep.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return rep;
}

RunReport run_stream(const UpdateStream& s, const RunOptions& opt) {
  return s.header.mode == StreamMode::Threshold ? run_threshold_stream(s, opt) : run_maxflow_stream(s, opt);
}

std::string report_json(const RunReport& r, bool with_timing) {
  using nlohmann::json;
  json j;
  j["schema"] = RunReport::schema;
  const StreamHeader& h = r.header;
  j["header"] = {{"n", h.n}, {"m", h.m}, {"C", h.C}, {"U", h.U},
                 {"mode", h.mode == StreamMode::Threshold ? "threshold" : "maxflow"}};
  if (h.mode == StreamMode::Threshold) j["header"]["F"] = h.F;
  else j["header"].update({{"eps", h.eps}, {"s", h.s}, {"t", h.t}});
  const RunOptions& o = r.options;
  j["config"] = {{"seed", o.seed}, {"k", o.k}, {"kappa", o.kappa}, {"oracle_check", o.oracle_check},
                 {"trace", o.trace}, {"exact_rational", o.exact_rational}, {"audit", o.audit}};
  if (o.threshold) j["config"]["threshold"] = *o.threshold;
  if (o.epsilon) j["config"]["epsilon"] = *o.epsilon;
  j["kappa"] = r.kappa;
  j["alpha"] = r.alpha;
  json res = json::array();
  for (const auto& x : r.results) {
    json e;
    if (h.mode == StreamMode::Threshold) e["answer"] = x.yes ? "yes" : "no";
    else e.update({{"value", x.value}, {"accepted", x.accepted}});
    e["steps"] = x.steps;
    if (x.oracle) e.update({{"oracle", *x.oracle}, {"mismatch", x.mismatch}});
    if (with_timing) e["micros"] = x.micros;
    res.push_back(e);
  }
  j["results"] = res;
  j["witness"] = r.witness;
  if (h.mode == StreamMode::Maxflow) {
    j["witness_aux"] = r.witness_aux;
    j["thresholds"] = r.thresholds;
  }
  j["total_steps"] = r.total_steps;
  j["mismatches"] = r.mismatches;
  const IpmStats& s = r.ipm;
  j["ipm"] = {{"steps", s.steps},
              {"r_refreshes", s.r_refreshes},
              {"full_resyncs", s.full_resyncs},
              {"sampled_refreshes", s.sampled_refreshes},
              {"certifications", s.certifications},
              {"local_roundings", s.local_roundings},
              {"global_roundings", s.global_roundings},
              {"no_confirmations", s.no_confirmations},
              {"rejected_steps", s.rejected_steps},
              {"stalls", s.stalls},
              {"exact_fallbacks", s.exact_fallbacks},
              {"forest_rebuilds", s.forest_rebuilds},
              {"oracle_cases",
               {{"none", s.oracle_cases[0]}, {"spanner", s.oracle_cases[1]}, {"tree", s.oracle_cases[2]},
                {"bottom", s.oracle_cases[3]}}},
              {"max_insert_increase", s.max_insert_increase},
              {"min_decrease", s.min_decrease},
              {"max_phi", s.max_phi},
              {"decrease_violations", s.decrease_violations},
              {"insert_violations", s.insert_violations},
              {"cap_violations", s.cap_violations}};
  const MrcStats& c = r.oracle;
  j["chain"] = {{"level_edges", c.level_edges},
                {"level_spanner_edges", c.level_spanner_edges},
                {"tree_nodes", c.tree_nodes},
                {"tree_leaves", c.tree_leaves},
                {"tree_rebuilds", c.tree_rebuilds},
                {"spanner_rebuilds", c.spanner_rebuilds},
                {"queries", c.queries},
                {"gamma_l", c.gamma_l},
                {"d_s", c.d_s},
                {"d_t", c.d_t}};
  if (!r.trace.empty()) {
    json t = json::array();
    for (const auto& x : r.trace)
      t.push_back({{"insertion", x.insertion}, {"step", x.step}, {"phi", x.phi}, {"dphi", x.dphi},
                   {"ratio", x.ratio}, {"eta", x.eta}, {"eta_analysis", x.eta_analysis}, {"case", x.oracle_case}});
    j["trace"] = t;
  }
  if (with_timing) j["seconds"] = r.seconds;
  return j.dump(2);
}

std::string report_csv(const RunReport& r) {
  std::ostringstream out;
  const bool thr = r.header.mode == StreamMode::Threshold;
  out << "insertion," << (thr ? "answer" : "value") << ",steps,micros,oracle,mismatch\n";
  for (std::size_t i = 0; i < r.results.size(); ++i) {
    const auto& x = r.results[i];
    out << i + 1 << ',';
    if (thr) out << (x.yes ? "yes" : "no");
    else out << x.value;
    out << ',' << x.steps << ',' << x.micros << ',';
    if (x.oracle) out << *x.oracle << ',' << (x.mismatch ? 1 : 0);
    else out << ',';
    out << '\n';
  }
  return out.str();
}

}  // namespace dynflow
