#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "infoproj/info_measures.hpp"
#include "infoproj/market.hpp"
#include "infoproj/oracle.hpp"
#include "infoproj/solvers.hpp"

namespace infoproj {

// ---------------------------------------------------------------------------
// Deterministic instance generation
// ---------------------------------------------------------------------------

/// State probabilities drawn Dirichlet(10 * 1_k) via normalized Gamma(10,1)
/// draws; payoff entries i.i.d. Uniform[0.5, 1.5] so every simplex portfolio
/// has strictly positive wealth.
inline MarketInstance generate_instance(std::size_t k, std::size_t m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::gamma_distribution<double> gamma(10.0, 1.0);
  std::vector<double> probs(k);
  for (double& v : probs) v = gamma(rng);
  std::uniform_real_distribution<double> uniform(0.5, 1.5);
  std::vector<double> entries(k * m);
  for (double& v : entries) v = uniform(rng);
  PayoffMatrix payoff(k, m, std::move(entries));
  MarketLaw law{ProbabilityVector::normalized(std::move(probs))};
  return MarketInstance(std::move(payoff), std::move(law));
}

/// Diagonal-dominant square instance whose optimum sits in the simplex
/// interior; used by the Jacobian probe and its tests.
inline MarketInstance make_interior_instance(std::size_t m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::gamma_distribution<double> gamma(10.0, 1.0);
  std::vector<double> probs(m);
  for (double& v : probs) v = gamma(rng);
  std::uniform_real_distribution<double> noise(0.05, 0.25);
  std::vector<double> entries(m * m);
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t i = 0; i < m; ++i) entries[j * m + i] = (i == j ? 2.0 : 0.0) + noise(rng);
  PayoffMatrix payoff(m, m, std::move(entries));
  MarketLaw law{ProbabilityVector::normalized(std::move(probs))};
  return MarketInstance(std::move(payoff), std::move(law));
}

/// Exponential draws normalized onto the simplex.
inline std::vector<double> random_simplex_point(std::mt19937_64& rng, std::size_t n) {
  std::exponential_distribution<double> expo(1.0);
  std::vector<double> w(n);
  double sum = 0.0;
  for (double& v : w) {
    v = expo(rng);
    sum += v;
  }
  for (double& v : w) v /= sum;
  return w;
}

// ---------------------------------------------------------------------------
// Benchmark protocol and CSV emission
// ---------------------------------------------------------------------------

struct BenchConfig {
  std::size_t k = 100;
  std::size_t m = 50;
  std::uint64_t seed = 1;
  std::vector<double> rho_list{0.5, 1.0, 1.5};
  std::vector<std::string> methods{"info_proj_eg", "naive_eg", "cover"};
  long max_iters = 5000;
  double tol = 0.0;  // rely on the error target; 0 disables improvement stops
  double error_target = 1e-6;
  std::string output_path;  // directory; empty keeps results in memory only

  void validate() const {
    if (k < 1 || m < 1) throw std::invalid_argument("benchmark needs k >= 1 and m >= 1");
    for (double rho : rho_list)
      if (!(rho > 0.0 && rho < 2.0))
        throw std::invalid_argument("benchmark rho values must lie in (0, 2)");
    for (const auto& method : methods)
      if (method != "info_proj_eg" && method != "naive_eg" && method != "cover")
        throw std::invalid_argument("unknown method: " + method);
    if (max_iters < 1) throw std::invalid_argument("max_iters must be positive");
  }
};

struct BenchCell {
  std::string method;
  double rho = 0.0;
  long iters_to_target = -1;  // -1 when the target was never reached
  RunTrace trace;
};

struct BenchResult {
  std::vector<BenchCell> cells;
  std::vector<std::string> written_files;
};

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string rho_tag(double rho) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", rho);
  std::string tag(buf);
  for (char& c : tag)
    if (c == '.') c = 'p';
  return tag;
}

}  // namespace detail

inline RunTrace run_method(const std::string& method, const MarketInstance& instance,
                           const Portfolio& b0, const SolverConfig& config) {
  if (method == "info_proj_eg") return run_info_proj_eg(instance, b0, config);
  if (method == "naive_eg") return run_naive_eg(instance, b0, config);
  if (method == "cover") return run_cover_fixed_point(instance, b0, config);
  throw std::invalid_argument("unknown method: " + method);
}

inline long iterations_to_target(const RunTrace& trace, double error_target) {
  for (const auto& rec : trace.records)
    if (std::isfinite(rec.error) && rec.error <= error_target) return rec.iter;
  return -1;
}

/// Runs the benchmark protocol: one instance per config, uniform start, every
/// (method, rho) pair traced against the high-precision reference. Writes one
/// CSV per rho plus a summary when output_path is set.
inline BenchResult run_benchmark(const BenchConfig& config) {
  config.validate();
  const MarketInstance instance = generate_instance(config.k, config.m, config.seed);
  const Portfolio b0 = Portfolio::uniform(config.m);

  BenchResult result;
  const bool write = !config.output_path.empty();
  if (write) std::filesystem::create_directories(config.output_path);

  std::ostringstream summary;
  summary << "method,rho,iters_to_target\n";
  for (double rho : config.rho_list) {
    const RiskProfile profile(rho);
    const ReferenceOptimum ref = reference_optimum(instance, profile);

    std::ofstream csv;
    std::string csv_path;
    if (write) {
      csv_path = (std::filesystem::path(config.output_path) /
                  ("bench_rho_" + detail::rho_tag(rho) + ".csv"))
                     .string();
      csv.open(csv_path, std::ios::binary);  // LF line endings on all platforms
      if (!csv) throw std::runtime_error("cannot write benchmark file: " + csv_path);
      csv << "method,rho,iter,objective,error,accepted_eta,wall_ns\n";
    }

    for (const auto& method : config.methods) {
      SolverConfig solver_config(profile);
      solver_config.max_iters = config.max_iters;
      solver_config.tol = config.tol;
      solver_config.reference_value = ref.value;
      solver_config.error_target = config.error_target;

      BenchCell cell;
      cell.method = method;
      cell.rho = rho;
      cell.trace = run_method(method, instance, b0, solver_config);
      cell.iters_to_target = iterations_to_target(cell.trace, config.error_target);
      if (write) {
        for (const auto& rec : cell.trace.records) {
          csv << method << ',' << detail::format_double(rho) << ',' << rec.iter << ','
              << detail::format_double(rec.objective) << ',' << detail::format_double(rec.error)
              << ',' << detail::format_double(rec.eta) << ',' << rec.wall_ns << '\n';
        }
      }
      summary << method << ',' << detail::format_double(rho) << ',' << cell.iters_to_target
              << '\n';
      result.cells.push_back(std::move(cell));
    }
    if (write) result.written_files.push_back(csv_path);
  }

  if (write) {
    const std::string summary_path =
        (std::filesystem::path(config.output_path) / "summary.csv").string();
    std::ofstream out(summary_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write summary file: " + summary_path);
    out << summary.str();
    result.written_files.push_back(summary_path);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Identity-verification battery
// ---------------------------------------------------------------------------

struct CheckResult {
  std::string name;
  bool pass = false;
  double gap = 0.0;  // measured worst-case gap, in the check's own units
};

struct VerifyConfig {
  std::uint64_t seed = 7;
  int instances = 20;
};

/// Decomposition identity: reconstructed divergence/entropy/log-gamma total vs
/// the direct CE growth rate.
inline CheckResult check_ce_decomposition(const MarketInstance& instance, int portfolios,
                                          std::mt19937_64& rng) {
  double worst = 0.0;
  for (double rho : {0.25, 0.5, 1.0, 1.5, 1.9}) {
    const RiskProfile profile(rho);
    for (int t = 0; t < portfolios; ++t) {
      const Portfolio b(random_simplex_point(rng, instance.assets()));
      const double direct = ce_growth_rate(instance, b, profile);
      const double total = decompose_ce(instance, b, profile).total;
      worst = std::max(worst, std::abs(direct - total));
    }
  }
  return {"ce_decomposition_identity", worst <= 1e-9, worst};
}

/// Partition-function invariance: spread across random portfolios and
/// agreement with the covering's gamma.
inline CheckResult check_partition_invariance(const SymmetricCovering& covering, int portfolios,
                                              std::mt19937_64& rng) {
  double lo = kInfinity;
  double hi = -kInfinity;
  for (int t = 0; t < portfolios; ++t) {
    const Portfolio b(random_simplex_point(rng, covering.dimension()));
    const double z = partition_function(covering, b);
    lo = std::min(lo, z);
    hi = std::max(hi, z);
  }
  const double scale = std::max(std::abs(covering.gamma), 1e-300);
  const double gap =
      std::max((hi - lo) / scale, std::max(std::abs(hi - covering.gamma),
                                           std::abs(lo - covering.gamma)) /
                                      scale);
  return {"partition_function_invariance", gap <= 1e-10, gap};
}

/// Utility upper bound: worst slack of bound - E_p[u(W)] over random portfolios.
inline CheckResult check_utility_bound(const MarketInstance& instance, int portfolios,
                                       std::mt19937_64& rng) {
  double worst = kInfinity;
  for (double rho : {0.25, 0.5, 1.0, 1.5, 1.9}) {
    const RiskProfile profile(rho);
    const double bound = utility_upper_bound(instance, profile);
    for (int t = 0; t < portfolios; ++t) {
      const Portfolio b(random_simplex_point(rng, instance.assets()));
      worst = std::min(worst, bound - expected_utility(instance, b, profile));
    }
  }
  return {"expected_utility_upper_bound", worst >= -1e-10, worst};
}

/// Variational minimizer: the closed form attains (1-rho) D_rho and no lattice
/// point beats it beyond tolerance.
inline CheckResult check_variational_minimizer(std::mt19937_64& rng) {
  double worst = 0.0;
  for (double rho : {0.5, 1.5}) {
    const RiskProfile profile(rho);
    for (int t = 0; t < 5; ++t) {
      const ProbabilityVector p_tilde(random_simplex_point(rng, 3));
      const ProbabilityVector q_bar(random_simplex_point(rng, 3));
      const ProbabilityVector r_star = variational_minimizer(p_tilde, q_bar, profile);
      const double at_star = variational_objective(r_star, p_tilde, q_bar, profile);
      const double target = (1.0 - rho) * renyi_divergence(p_tilde, q_bar, rho);
      worst = std::max(worst, std::abs(at_star - target));
      for_each_simplex_lattice_point(3, 100, [&](const std::vector<double>& r) {
        const double value = variational_objective(ProbabilityVector(r), p_tilde, q_bar, profile);
        worst = std::max(worst, at_star - value);
      });
    }
  }
  return {"variational_minimizer_optimality", worst <= 1e-9, worst};
}

/// Projection equivalence at grid scale: the lattice argmax of expected utility
/// and the lattice argmin of the projection divergence coincide.
inline CheckResult check_projection_equivalence(const MarketInstance& instance,
                                                const RiskProfile& profile) {
  const GridSpec spec{0.01, 4};
  const GridOptimum util_best = grid_search_optimum(instance, profile, spec);

  const double beta = profile.is_log ? 1.0 : 1.0 / profile.rho;
  const ProbabilityVector p_tilde = tilt_measure(instance.extended_law(), beta);
  std::vector<double> div_best;
  double div_min = kInfinity;
  for_each_simplex_lattice_point(instance.assets(), 100, [&](const std::vector<double>& b) {
    const std::vector<double> q = instance.wealth(Portfolio(b));
    for (std::size_t j : instance.law().support)
      if (!(q[j] > 0.0)) return;
    const ProbabilityVector q_bar = induced_measure(instance.covering(), Portfolio(b));
    const double d = profile.is_log ? kl_divergence(p_tilde, q_bar)
                                    : renyi_divergence(p_tilde, q_bar, profile.rho);
    if (d < div_min) {
      div_min = d;
      div_best = b;
    }
  });

  double mismatch = 0.0;
  for (std::size_t i = 0; i < util_best.weights.size(); ++i)
    mismatch = std::max(mismatch, std::abs(util_best.weights[i] - div_best[i]));
  return {"projection_equivalence_grid", mismatch == 0.0, mismatch};
}

/// Contraction factor: Jacobian probe of the alternating map vs |1 - rho|.
inline CheckResult check_contractivity_factor(std::uint64_t seed) {
  double worst = 0.0;
  for (double rho : {0.5, 0.9, 1.5}) {
    const MarketInstance instance = make_interior_instance(3, seed);
    const double factor = jacobian_probe(instance, RiskProfile(rho), 1e-5);
    worst = std::max(worst, std::abs(factor - std::abs(1.0 - rho)));
  }
  return {"alternating_map_contractivity", worst <= 0.05, worst};
}

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool all_pass() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const CheckResult& c) { return c.pass; });
  }
};

/// Runs the full identity battery on seeded random instances.
inline VerifyReport verify_suite(const VerifyConfig& config) {
  std::mt19937_64 rng(config.seed);
  std::uniform_int_distribution<std::size_t> k_dist(2, 12);
  std::uniform_int_distribution<std::size_t> m_dist(2, 6);

  VerifyReport report;
  CheckResult decomposition{"ce_decomposition_identity", true, 0.0};
  CheckResult partition{"partition_function_invariance", true, 0.0};
  CheckResult bound{"expected_utility_upper_bound", true, kInfinity};
  for (int n = 0; n < config.instances; ++n) {
    const MarketInstance instance =
        generate_instance(k_dist(rng), m_dist(rng), config.seed + 1000 + n);
    const CheckResult d = check_ce_decomposition(instance, 10, rng);
    decomposition.pass &= d.pass;
    decomposition.gap = std::max(decomposition.gap, d.gap);
    const CheckResult z = check_partition_invariance(instance.covering(), 100, rng);
    partition.pass &= z.pass;
    partition.gap = std::max(partition.gap, z.gap);
    const CheckResult u = check_utility_bound(instance, 20, rng);
    bound.pass &= u.pass;
    bound.gap = std::min(bound.gap, u.gap);
  }
  report.checks.push_back(decomposition);
  report.checks.push_back(partition);
  report.checks.push_back(bound);
  report.checks.push_back(check_variational_minimizer(rng));

  CheckResult equivalence{"projection_equivalence_grid", true, 0.0};
  for (int n = 0; n < std::min(config.instances, 5); ++n) {
    const MarketInstance instance = generate_instance(6, 3, config.seed + 2000 + n);
    for (double rho : {0.5, 1.0, 1.5}) {
      const CheckResult e = check_projection_equivalence(instance, RiskProfile(rho));
      equivalence.pass &= e.pass;
      equivalence.gap = std::max(equivalence.gap, e.gap);
    }
  }
  report.checks.push_back(equivalence);
  report.checks.push_back(check_contractivity_factor(config.seed + 3000));
  return report;
}

}  // namespace infoproj
