#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dynflow/ipm.hpp"

namespace dynflow {

enum class StreamMode { Threshold, Maxflow };

struct StreamHeader {
  VertexId n = 0;
  std::int64_t m = 0;  // insertion budget
  std::int64_t C = 1;
  std::int64_t U = 1;
  StreamMode mode = StreamMode::Threshold;
  std::int64_t F = 0;    // threshold mode
  double eps = 0.5;      // maxflow mode
  VertexId s = 0;
  VertexId t = 0;
};

struct UpdateStream {
  StreamHeader header;
  std::vector<InsertRecord> records;
};

// Thrown for malformed input; line() is 1-based, 0 when not tied to a line.
class ParseError : public Error {
 public:
  ParseError(int line, const std::string& what);
  int line() const { return line_; }

 private:
  int line_;
};

// Line format:
//   DYNFLOW v1 n=<n> m=<m> C=<C> U=<U> mode=threshold F=<F>
//   DYNFLOW v1 n=<n> m=<m> C=<C> U=<U> mode=maxflow eps=<e> s=<s> t=<t>
//   + <tail> <head> <cap> <cost>
// Blank lines and lines starting with '#' are ignored.
UpdateStream parse_stream(std::istream& in);
UpdateStream parse_stream_string(const std::string& text);
UpdateStream read_stream_file(const std::string& path);
std::string format_stream(const UpdateStream& s);
void validate_stream(const UpdateStream& s);  // throws ParseError

enum class StreamKind { UniformRandom, ThresholdStraddling, CycleDetection };

const char* to_string(StreamKind k);
std::optional<StreamKind> stream_kind_from_string(const std::string& s);

struct GenerateOptions {
  StreamKind kind = StreamKind::UniformRandom;
  VertexId n = 10;
  std::int64_t m = 30;
  std::int64_t C = 4;
  std::int64_t U = 4;
  std::uint64_t seed = 1;
  StreamMode mode = StreamMode::Threshold;
  std::optional<std::int64_t> F;  // uniform-random threshold; drawn when absent
  double eps = 0.5;
};

// Deterministic in the options. Threshold-straddling streams pick F so the
// answer flips from no to yes; cycle-detection streams use cost -1 and F = -1.
UpdateStream generate_stream(const GenerateOptions& opt);

// Exact optimum of the stream prefix of length k (threshold semantics).
std::int64_t static_min_cost(const UpdateStream& s, std::size_t k);
// Exact s-t maxflow of the prefix of length k.
std::int64_t static_max_flow(const UpdateStream& s, std::size_t k);

struct RunOptions {
  std::uint64_t seed = 1;
  int k = 8;
  double kappa = 0.0;       // 0: oracle default
  bool oracle_check = false;
  bool trace = false;
  bool exact_rational = false;
  bool audit = false;
  std::optional<std::int64_t> threshold;  // overrides the header F
  std::optional<double> epsilon;          // overrides the header eps
  int workers = 0;                        // 0: hardware threads
};

struct InsertionResult {
  bool yes = false;            // threshold mode
  std::int64_t value = 0;      // maxflow mode: certified flow value
  std::int64_t accepted = 0;   // maxflow mode: largest accepted threshold value
  std::int64_t steps = 0;      // accepted IPM steps during this insertion (summed over instances)
  double micros = 0.0;
  std::optional<std::int64_t> oracle;  // min cost or maxflow, when checked
  bool mismatch = false;
};

struct RunReport {
  static constexpr const char* schema = "dynflow-report/1";
  StreamHeader header;
  RunOptions options;
  double kappa = 0.0;
  double alpha = 0.0;
  std::vector<InsertionResult> results;
  std::vector<std::int64_t> witness;  // for the last insertion, per stream record (maxflow: value on each edge)
  std::int64_t witness_aux = 0;       // maxflow: flow on the t->s edge
  std::vector<std::int64_t> thresholds;  // maxflow grid
  std::int64_t total_steps = 0;
  std::int64_t mismatches = 0;
  IpmStats ipm;        // threshold mode, or summed over instances
  MrcStats oracle;     // threshold mode, or the largest instance
  std::vector<StepTrace> trace;
  double seconds = 0.0;
};

RunReport run_threshold_stream(const UpdateStream& s, const RunOptions& opt);
RunReport run_maxflow_stream(const UpdateStream& s, const RunOptions& opt);
RunReport run_stream(const UpdateStream& s, const RunOptions& opt);

// Threshold values v with -v the instance thresholds: ceil((1+eps/2)^i) up
// to the first value reaching n U, capped at n U, deduplicated, plus 0.
std::vector<std::int64_t> maxflow_grid(double eps, std::int64_t top);

std::string report_json(const RunReport& r, bool with_timing = true);
std::string report_csv(const RunReport& r);

}  // namespace dynflow
