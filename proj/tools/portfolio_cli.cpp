// Command-line front end: solve a single instance, run the benchmark
// protocol, or run the identity-verification battery.
//
// Exit codes: 0 success, 1 usage error, 2 verification failure, 3 I/O failure.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "infoproj/bench.hpp"
#include "infoproj/io.hpp"
#include "infoproj/oracle.hpp"
#include "infoproj/solvers.hpp"

namespace {

int run_solve(const std::string& instance_path, const std::string& method, double rho,
              long max_iters, double tol, const std::string& out_path) {
  const infoproj::MarketInstance instance = infoproj::load_instance_file(instance_path);
  const infoproj::RiskProfile profile(rho);
  infoproj::SolverConfig config(profile);
  config.max_iters = max_iters;
  config.tol = tol;

  const infoproj::Portfolio b0 = infoproj::Portfolio::uniform(instance.assets());
  const infoproj::RunTrace trace = infoproj::run_method(method, instance, b0, config);
  const infoproj::Portfolio final_portfolio(trace.final_weights);

  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path, std::ios::binary);
    if (!file) {
      std::cerr << "cannot write output file: " << out_path << "\n";
      return 3;
    }
    out = &file;
  }
  *out << "method,rho,iter,objective,error,accepted_eta,wall_ns\n";
  for (const auto& rec : trace.records)
    *out << method << ',' << infoproj::detail::format_double(rho) << ',' << rec.iter << ','
         << infoproj::detail::format_double(rec.objective) << ','
         << infoproj::detail::format_double(rec.error) << ','
         << infoproj::detail::format_double(rec.eta) << ',' << rec.wall_ns << '\n';

  std::cerr << "status: " << infoproj::to_string(trace.status) << "\n";
  std::cerr << "ce_growth_rate: "
            << infoproj::detail::format_double(
                   infoproj::ce_growth_rate(instance, final_portfolio, profile))
            << "\n";
  std::cerr << "weights:";
  for (double w : final_portfolio.values())
    std::cerr << ' ' << infoproj::detail::format_double(w);
  std::cerr << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CRRA portfolio selection via Renyi information projection"};
  app.require_subcommand(1);

  // solve
  auto* solve = app.add_subcommand("solve", "solve one instance file with one method");
  std::string instance_path;
  std::string method = "info_proj_eg";
  double rho = 1.0;
  long max_iters = 5000;
  double tol = 1e-12;
  std::string out_path;
  solve->add_option("--instance", instance_path, "instance JSON file")->required();
  solve->add_option("--method", method, "info_proj_eg | naive_eg | cover");
  solve->add_option("--rho", rho, "relative risk aversion");
  solve->add_option("--max-iters", max_iters, "iteration cap");
  solve->add_option("--tol", tol, "objective-improvement stopping tolerance");
  solve->add_option("--out", out_path, "CSV output path (stdout when omitted)");

  // bench
  auto* bench = app.add_subcommand("bench", "run the benchmark protocol");
  infoproj::BenchConfig bench_config;
  bench->add_option("--k", bench_config.k, "number of market states");
  bench->add_option("--m", bench_config.m, "number of assets");
  bench->add_option("--seed", bench_config.seed, "instance seed");
  bench->add_option("--rho", bench_config.rho_list, "rho values (repeatable)");
  bench->add_option("--method", bench_config.methods, "methods (repeatable)");
  bench->add_option("--max-iters", bench_config.max_iters, "iteration cap per run");
  bench->add_option("--tol", bench_config.tol, "objective-improvement stopping tolerance");
  bench->add_option("--error-target", bench_config.error_target,
                    "optimization-error threshold for the summary");
  bench->add_option("--out", bench_config.output_path, "output directory")->required();

  // verify
  auto* verify = app.add_subcommand("verify", "run the identity battery");
  infoproj::VerifyConfig verify_config;
  verify->add_option("--seed", verify_config.seed, "base seed");
  verify->add_option("--instances", verify_config.instances, "instances per check");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return run_solve(instance_path, method, rho, max_iters, tol, out_path);
    if (bench->parsed()) {
      const infoproj::BenchResult result = infoproj::run_benchmark(bench_config);
      for (const auto& cell : result.cells)
        std::cout << cell.method << " rho=" << cell.rho
                  << " iters_to_target=" << cell.iters_to_target << "\n";
      for (const auto& file : result.written_files) std::cout << "wrote " << file << "\n";
      return 0;
    }
    if (verify->parsed()) {
      const infoproj::VerifyReport report = infoproj::verify_suite(verify_config);
      for (const auto& check : report.checks)
        std::printf("%-34s %s  gap=%.3e\n", check.name.c_str(),
                    check.pass ? "PASS" : "FAIL", check.gap);
      return report.all_pass() ? 0 : 2;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 1;
}
