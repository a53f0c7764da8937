#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "dynflow/stream.hpp"

using namespace dynflow;

namespace {

bool write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
  return static_cast<bool>(out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Incremental thresholded mincost flow and approximate maxflow on edge-insertion streams"};
  app.set_version_flag("--version", "dynflow 1.0");

  std::string input;
  std::string mode;
  std::optional<std::int64_t> threshold;
  std::optional<double> epsilon;
  RunOptions opt;
  std::string report_path, csv_path;
  std::string generate;
  GenerateOptions gen;
  bool quiet = false;

  app.add_option("stream", input, "Stream file ('-' for stdin)");
  app.add_option("--mode", mode, "Override the stream mode")->check(CLI::IsMember({"threshold", "maxflow"}));
  app.add_option("--threshold", threshold, "Threshold F (threshold mode)");
  app.add_option("--epsilon", epsilon, "Approximation epsilon in (0, 1) (maxflow mode)");
  app.add_flag("--oracle-check", opt.oracle_check, "Compare every answer against a static recomputation");
  app.add_flag("--trace", opt.trace, "Record the per-step potential trace in the report");
  app.add_option("--seed", opt.seed, "Random seed");
  app.add_option("--k", opt.k, "Spanner sparsification parameter")->check(CLI::PositiveNumber);
  app.add_option("--kappa", opt.kappa, "Oracle quality used by the solver (0: structure default)")
      ->check(CLI::Range(0.0, 1.0));
  app.add_option("--report", report_path, "Write the JSON report here");
  app.add_option("--csv", csv_path, "Write per-insertion answers as CSV here");
  app.add_flag("--exact-rational", opt.exact_rational, "Recompute the potential in high precision in audits");
  app.add_flag("--audit", opt.audit, "Check solver invariants after every step");
  app.add_option("--workers", opt.workers, "Worker threads for maxflow instances (0: hardware)");
  app.add_flag("-q,--quiet", quiet, "Only print the summary line");

  auto* g = app.add_option("--generate", generate, "Print a generated stream instead of solving")
                ->check(CLI::IsMember({"uniform-random", "threshold-straddling", "cycle-detection"}));
  app.add_option("--n", gen.n, "Generated vertex count")->needs(g);
  app.add_option("--m", gen.m, "Generated edge count")->needs(g);
  app.add_option("--C", gen.C, "Generated cost bound")->needs(g);
  app.add_option("--U", gen.U, "Generated capacity bound")->needs(g);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (!generate.empty()) {
      gen.kind = *stream_kind_from_string(generate);
      gen.seed = opt.seed;
      if (mode == "maxflow") gen.mode = StreamMode::Maxflow;
      if (threshold) gen.F = *threshold;
      if (epsilon) gen.eps = *epsilon;
      std::cout << format_stream(generate_stream(gen));
      return 0;
    }
    if (input.empty()) {
      std::cerr << "error: a stream file is required\n";
      return 1;
    }
    UpdateStream s = input == "-" ? parse_stream(std::cin) : read_stream_file(input);
    if (mode == "threshold" && s.header.mode != StreamMode::Threshold) {
      if (!threshold) throw ParseError(0, "--mode threshold on a maxflow stream needs --threshold");
      s.header.mode = StreamMode::Threshold;
    } else if (mode == "maxflow" && s.header.mode != StreamMode::Maxflow) {
      throw ParseError(0, "--mode maxflow needs a maxflow stream header (s and t)");
    }
    opt.threshold = threshold;
    opt.epsilon = epsilon;
    const RunReport rep = run_stream(s, opt);

    if (!quiet) {
      for (std::size_t i = 0; i < rep.results.size(); ++i) {
        const auto& r = rep.results[i];
        std::cout << i + 1 << ' ';
        if (s.header.mode == StreamMode::Threshold) std::cout << (r.yes ? "yes" : "no");
        else std::cout << r.value;
        if (r.oracle) std::cout << " oracle=" << *r.oracle << (r.mismatch ? " MISMATCH" : "");
        std::cout << '\n';
      }
    }
    std::cout << "insertions=" << rep.results.size() << " steps=" << rep.total_steps << " kappa=" << rep.kappa
              << " seconds=" << rep.seconds;
    if (opt.oracle_check) std::cout << " mismatches=" << rep.mismatches;
    std::cout << '\n';
    if (!report_path.empty() && !write_file(report_path, report_json(rep) + "\n")) {
      std::cerr << "error: cannot write " << report_path << '\n';
      return 1;
    }
    if (!csv_path.empty() && !write_file(csv_path, report_csv(rep))) {
      std::cerr << "error: cannot write " << csv_path << '\n';
      return 1;
    }
    return rep.mismatches > 0 ? 2 : 0;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
