#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "infoproj/info_measures.hpp"
#include "infoproj/market.hpp"

namespace infoproj {

struct SolverConfig {
  RiskProfile profile;
  double eta0 = 1.0;
  double armijo_c = 1e-4;
  double backtrack_factor = 0.5;
  int max_backtracks = 50;
  long max_iters = 1000;
  double tol = 1e-12;  // stop when the objective improvement drops below this
  // When reference_value is finite, every record carries the CE-growth gap to
  // it, and the run stops once the gap reaches error_target (if finite).
  double reference_value = std::numeric_limits<double>::quiet_NaN();
  double error_target = std::numeric_limits<double>::quiet_NaN();

  explicit SolverConfig(RiskProfile p) : profile(p) { validate(); }

  void validate() const {
    if (!(eta0 > 0.0)) throw std::invalid_argument("eta0 must be positive");
    if (!(armijo_c > 0.0 && armijo_c < 1.0))
      throw std::invalid_argument("armijo_c must lie in (0,1)");
    if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0))
      throw std::invalid_argument("backtrack_factor must lie in (0,1)");
    if (max_backtracks < 1) throw std::invalid_argument("max_backtracks must be positive");
    if (max_iters < 1) throw std::invalid_argument("max_iters must be positive");
    if (!(tol >= 0.0)) throw std::invalid_argument("tol must be nonnegative");
  }
};

enum class SolveStatus { converged, max_iters, stalled };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::max_iters: return "max_iters";
    case SolveStatus::stalled: return "stalled";
  }
  return "unknown";
}

struct IterationRecord {
  long iter = 0;  // 1-based accepted-iteration index
  std::vector<double> weights;
  double objective = 0.0;
  double error = std::numeric_limits<double>::quiet_NaN();
  double eta = 0.0;  // accepted stepsize; 0 for fixed-point updates
  long first_order_iters = 0;
  long long wall_ns = 0;
};

struct RunTrace {
  std::vector<IterationRecord> records;
  SolveStatus status = SolveStatus::max_iters;
  std::vector<double> final_weights;
};

struct ObjectiveEval {
  double value = 0.0;
  std::vector<double> gradient;
};

using Objective = std::function<ObjectiveEval(const std::vector<double>&)>;

/// Multiplicative mirror-descent step: b_i exp(-eta g_i), renormalized.
inline std::vector<double> eg_step(const std::vector<double>& b,
                                   const std::vector<double>& gradient, double eta) {
  if (b.size() != gradient.size())
    throw std::invalid_argument("gradient dimension does not match portfolio");
  if (!(eta >= 0.0)) throw std::invalid_argument("stepsize must be nonnegative");
  for (double g : gradient)
    if (!std::isfinite(g)) throw std::invalid_argument("gradient has non-finite entries");

  double max_exponent = -std::numeric_limits<double>::infinity();
  for (double g : gradient) max_exponent = std::max(max_exponent, -eta * g);
  std::vector<double> next(b.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    next[i] = b[i] * std::exp(-eta * gradient[i] - max_exponent);
    sum += next[i];
  }
  for (double& v : next) v /= sum;
  return next;
}

inline std::vector<double> eg_step(const Portfolio& b, const std::vector<double>& gradient,
                                   double eta) {
  return eg_step(b.values(), gradient, eta);
}

struct LineSearchStep {
  double eta = 0.0;
  std::vector<double> next;
  ObjectiveEval next_eval;
  bool accepted = false;
};

/// Backtracking along the EG path until the sufficient-decrease test
/// F(b+) <= F(b) + c <grad F(b), b+ - b> holds.
inline LineSearchStep armijo_search(const Objective& objective, const std::vector<double>& b,
                                    const ObjectiveEval& at_b, const SolverConfig& config) {
  if (!std::isfinite(at_b.value))
    throw std::invalid_argument("objective is non-finite at the current point");
  LineSearchStep step;
  double eta = config.eta0;
  for (int attempt = 0; attempt < config.max_backtracks; ++attempt) {
    std::vector<double> candidate = eg_step(b, at_b.gradient, eta);
    double directional = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i)
      directional += at_b.gradient[i] * (candidate[i] - b[i]);
    ObjectiveEval cand_eval = objective(candidate);
    if (std::isfinite(cand_eval.value) &&
        cand_eval.value <= at_b.value + config.armijo_c * directional) {
      step.eta = eta;
      step.next = std::move(candidate);
      step.next_eval = std::move(cand_eval);
      step.accepted = true;
      return step;
    }
    eta *= config.backtrack_factor;
  }
  return step;
}

/// Fixed-r logarithmic portfolio objective f_r(b) = -sum_j r_j log q_j(b).
inline ObjectiveEval info_proj_objective(const MarketInstance& instance,
                                         const std::vector<double>& b,
                                         const ProbabilityVector& r) {
  if (r.size() != instance.states())
    throw std::invalid_argument("auxiliary law size does not match state count");
  const Portfolio pb(b);
  const std::vector<double> q = instance.wealth(pb);
  const std::size_t m = instance.assets();
  ObjectiveEval eval;
  eval.gradient.assign(m, 0.0);
  for (std::size_t j = 0; j < instance.states(); ++j) {
    if (r[j] == 0.0) continue;
    if (!(q[j] > 0.0))
      throw std::invalid_argument("nonpositive wealth on the support of the auxiliary law");
    eval.value -= r[j] * std::log(q[j]);
    const double scale = r[j] / q[j];
    for (std::size_t i = 0; i < m; ++i) eval.gradient[i] -= scale * instance.payoff()(j, i);
  }
  return eval;
}

/// CRRA-equivalent loss: -sum p_j q_j^(1-rho) for rho < 1, -sum p_j log q_j at
/// rho = 1, +sum p_j q_j^(1-rho) for rho > 1. Minimizing it is order-equivalent
/// to maximizing expected utility in each regime.
inline ObjectiveEval naive_objective(const MarketInstance& instance, const std::vector<double>& b,
                                     const RiskProfile& profile) {
  if (profile.is_log) return info_proj_objective(instance, b, instance.law().probs);
  const Portfolio pb(b);
  const std::vector<double> q = instance.wealth(pb);
  const auto& p = instance.law().probs;
  const std::size_t m = instance.assets();
  const double sign = profile.rho < 1.0 ? -1.0 : 1.0;
  ObjectiveEval eval;
  eval.gradient.assign(m, 0.0);
  for (std::size_t j : instance.law().support) {
    if (!(q[j] > 0.0))
      throw std::invalid_argument("nonpositive wealth in a support state");
    eval.value += sign * p[j] * std::pow(q[j], 1.0 - profile.rho);
    const double scale = sign * (1.0 - profile.rho) * p[j] * std::pow(q[j], -profile.rho);
    for (std::size_t i = 0; i < m; ++i) eval.gradient[i] += scale * instance.payoff()(j, i);
  }
  return eval;
}

/// Closed-form auxiliary law r_j proportional to p_j q_j^(1-rho); exactly p at
/// rho = 1.
inline ProbabilityVector auxiliary_law(const MarketInstance& instance, const std::vector<double>& b,
                                       const RiskProfile& profile) {
  if (profile.is_log) return instance.law().probs;
  const Portfolio pb(b);
  const std::vector<double> q = instance.wealth(pb);
  const auto& p = instance.law().probs;
  std::vector<double> weights(instance.states(), 0.0);
  for (std::size_t j : instance.law().support) {
    if (!(q[j] > 0.0))
      throw std::invalid_argument("nonpositive wealth in a support state");
    weights[j] = p[j] * std::pow(q[j], 1.0 - profile.rho);
  }
  return ProbabilityVector::normalized(std::move(weights));
}

inline ProbabilityVector auxiliary_law(const MarketInstance& instance, const Portfolio& b,
                                       const RiskProfile& profile) {
  return auxiliary_law(instance, b.values(), profile);
}

/// FOC residual E_p[<b,X>^(-rho) X_i] / E_p[<b,X>^(1-rho)]; equals 1 on the
/// active assets at the optimum and stays <= 1 elsewhere.
inline std::vector<double> foc_residual(const MarketInstance& instance, const Portfolio& b,
                                        const RiskProfile& profile) {
  const std::vector<double> q = instance.wealth(b);
  const auto& p = instance.law().probs;
  const std::size_t m = instance.assets();
  std::vector<double> numerator(m, 0.0);
  double denominator = 0.0;
  for (std::size_t j : instance.law().support) {
    if (!(q[j] > 0.0))
      throw std::invalid_argument("nonpositive wealth in a support state");
    const double w = p[j] * std::pow(q[j], -profile.rho);
    denominator += w * q[j];
    for (std::size_t i = 0; i < m; ++i) numerator[i] += w * instance.payoff()(j, i);
  }
  for (double& v : numerator) v /= denominator;
  return numerator;
}

namespace detail {

// FOC residual recovered from an objective evaluation: res = grad / ((1-rho) F)
// for the power branches and res = -grad at rho = 1.
inline std::vector<double> residual_from_eval(const ObjectiveEval& eval,
                                              const RiskProfile& profile) {
  std::vector<double> res = eval.gradient;
  if (profile.is_log) {
    for (double& v : res) v = -v;
  } else {
    const double scale = (1.0 - profile.rho) * eval.value;
    for (double& v : res) v /= scale;
  }
  return res;
}

struct CommonLoopState {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  long long elapsed_ns() const {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(
               std::chrono::steady_clock::now() - start)
        .count();
  }
};

inline double trace_error(const MarketInstance& instance, const std::vector<double>& b,
                          const SolverConfig& config) {
  if (!std::isfinite(config.reference_value))
    return std::numeric_limits<double>::quiet_NaN();
  return config.reference_value -
         ce_growth_rate(instance, Portfolio(b), config.profile);
}

}  // namespace detail

namespace detail {

// Shared EG/Armijo outer loop. make_objective(b) returns the objective used
// for the current outer iteration (refreshing the auxiliary law when needed).
template <typename MakeObjective>
RunTrace run_eg_loop(const MarketInstance& instance, const Portfolio& b0,
                     const SolverConfig& config, MakeObjective&& make_objective) {
  config.validate();
  for (double v : b0.values())
    if (!(v > 0.0))
      throw std::invalid_argument("EG solvers require a strictly positive starting portfolio");

  RunTrace trace;
  CommonLoopState clock;
  std::vector<double> b = b0.values();
  for (long t = 1; t <= config.max_iters; ++t) {
    Objective objective = make_objective(b);
    const ObjectiveEval at_b = objective(b);
    const LineSearchStep step = armijo_search(objective, b, at_b, config);
    if (!step.accepted) {
      trace.status = SolveStatus::stalled;
      break;
    }
    const double improvement = at_b.value - step.next_eval.value;
    b = step.next;

    IterationRecord rec;
    rec.iter = t;
    rec.weights = b;
    rec.objective = step.next_eval.value;
    rec.error = trace_error(instance, b, config);
    rec.eta = step.eta;
    rec.first_order_iters = t;
    rec.wall_ns = clock.elapsed_ns();
    trace.records.push_back(std::move(rec));

    if (std::isfinite(config.error_target) && std::isfinite(trace.records.back().error) &&
        trace.records.back().error <= config.error_target) {
      trace.status = SolveStatus::converged;
      break;
    }
    if (improvement < config.tol) {
      trace.status = SolveStatus::converged;
      break;
    }
  }
  trace.final_weights = b;
  return trace;
}

}  // namespace detail

/// Alternating method: refresh the auxiliary law, then take one accepted
/// EG/Armijo step on the fixed-r logarithmic objective.
inline RunTrace run_info_proj_eg(const MarketInstance& instance, const Portfolio& b0,
                                 const SolverConfig& config) {
  return detail::run_eg_loop(instance, b0, config, [&](const std::vector<double>& b) {
    ProbabilityVector r = auxiliary_law(instance, b, config.profile);
    return Objective([&instance, r](const std::vector<double>& u) {
      return info_proj_objective(instance, u, r);
    });
  });
}

/// EG/Armijo applied directly to the CRRA-equivalent loss.
inline RunTrace run_naive_eg(const MarketInstance& instance, const Portfolio& b0,
                             const SolverConfig& config) {
  Objective objective = [&instance, profile = config.profile](const std::vector<double>& u) {
    return naive_objective(instance, u, profile);
  };
  return detail::run_eg_loop(instance, b0, config,
                             [&](const std::vector<double>&) { return objective; });
}

/// FOC-induced multiplicative fixed-point update; Cover's algorithm at rho = 1,
/// a fixed-point reference for other orders.
inline RunTrace run_cover_fixed_point(const MarketInstance& instance, const Portfolio& b0,
                                      const SolverConfig& config) {
  config.validate();
  for (double v : b0.values())
    if (!(v > 0.0))
      throw std::invalid_argument("fixed-point updates require a strictly positive start");

  RunTrace trace;
  detail::CommonLoopState clock;
  const auto& p = instance.law().probs;
  const std::size_t m = instance.assets();
  std::vector<double> b = b0.values();
  double prev_objective = naive_objective(instance, b, config.profile).value;
  for (long t = 1; t <= config.max_iters; ++t) {
    const std::vector<double> q = instance.wealth(Portfolio(b));
    std::vector<double> numerator(m, 0.0);
    double denominator = 0.0;
    for (std::size_t j : instance.law().support) {
      if (!(q[j] > 0.0))
        throw std::invalid_argument("nonpositive wealth in a support state");
      const double w = p[j] * std::pow(q[j], -config.profile.rho);
      denominator += w * q[j];
      for (std::size_t i = 0; i < m; ++i) numerator[i] += w * instance.payoff()(j, i);
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      b[i] *= numerator[i] / denominator;
      sum += b[i];
    }
    for (double& v : b) v /= sum;

    const double objective = naive_objective(instance, b, config.profile).value;
    IterationRecord rec;
    rec.iter = t;
    rec.weights = b;
    rec.objective = objective;
    rec.error = detail::trace_error(instance, b, config);
    rec.eta = 0.0;
    rec.first_order_iters = t;
    rec.wall_ns = clock.elapsed_ns();
    trace.records.push_back(std::move(rec));

    if (std::isfinite(config.error_target) && std::isfinite(trace.records.back().error) &&
        trace.records.back().error <= config.error_target) {
      trace.status = SolveStatus::converged;
      break;
    }
    if (std::abs(prev_objective - objective) < config.tol) {
      trace.status = SolveStatus::converged;
      break;
    }
    prev_objective = objective;
  }
  trace.final_weights = b;
  return trace;
}

namespace detail {

struct FocSolveResult {
  std::vector<double> weights;
  double value = 0.0;  // CE growth rate at the returned portfolio
  bool converged = false;
  long iterations = 0;
};

// Naive EG driven to the FOC certificate: residual within foc_tol of 1 on
// coordinates above active_floor and below 1 + foc_tol everywhere.
inline FocSolveResult solve_to_foc(const MarketInstance& instance, const RiskProfile& profile,
                                   const std::vector<double>& b0, double foc_tol,
                                   double active_floor, long max_iters) {
  SolverConfig config(profile);
  config.max_iters = 1;
  FocSolveResult out;
  std::vector<double> b = b0;
  Objective objective = [&instance, profile](const std::vector<double>& u) {
    return naive_objective(instance, u, profile);
  };
  // Once Armijo can no longer certify a strict decrease (objective
  // improvements fall under double rounding) we polish with the
  // multiplicative residual update b_i <- b_i * res_i, which iterates the
  // residual map directly instead of comparing objective values and so keeps
  // making progress at tolerances a descent test cannot certify. A zeroed
  // coordinate whose residual climbs above 1 + foc_tol is re-seeded.
  bool polishing = false;
  std::vector<std::vector<double>> history;
  const auto renormalize = [&b] {
    double sum = 0.0;
    for (double v : b) sum += v;
    for (double& v : b) v /= sum;
  };
  for (long t = 1; t <= max_iters; ++t) {
    const ObjectiveEval at_b = objective(b);
    const std::vector<double> res = residual_from_eval(at_b, profile);
    bool reactivated = false;
    for (std::size_t i = 0; i < b.size(); ++i)
      if (b[i] == 0.0 && res[i] > 1.0 + foc_tol) {
        b[i] = 1e-4;
        reactivated = true;
      }
    if (reactivated) {
      renormalize();
      history.clear();
      out.iterations = t;
      continue;
    }
    bool ok = true;
    for (std::size_t i = 0; i < b.size(); ++i) {
      if (res[i] > 1.0 + foc_tol) ok = false;
      if (b[i] > active_floor && std::abs(res[i] - 1.0) > foc_tol) ok = false;
    }
    if (ok) {
      out.converged = true;
      out.iterations = t - 1;
      break;
    }
    out.iterations = t;
    if (!polishing) {
      const LineSearchStep step = armijo_search(objective, b, at_b, config);
      // an accepted step with no strict decrease means the line search is at
      // its rounding floor, which is as much of a stall as a rejection
      if (step.accepted && step.next_eval.value < at_b.value) {
        b = step.next;
        continue;
      }
      polishing = true;
    }
    for (std::size_t i = 0; i < b.size(); ++i) b[i] *= res[i];
    renormalize();
    // The polish sequence is locally geometric per coordinate, so Aitken's
    // delta-squared extrapolation jumps (near-)degenerate coordinates to
    // their limit instead of crawling there one factor of (1 - eps) at a time.
    history.push_back(b);
    if (history.size() == 3) {
      bool changed = false;
      std::vector<double> accelerated = history[2];
      for (std::size_t i = 0; i < b.size(); ++i) {
        const double d1 = history[1][i] - history[0][i];
        const double d2 = history[2][i] - history[1][i];
        const double denom = d2 - d1;
        if (denom != 0.0) {
          const double limit = history[2][i] - d2 * d2 / denom;
          if (std::isfinite(limit) && limit >= 0.0 && limit != accelerated[i]) {
            accelerated[i] = limit;
            changed = true;
          }
        }
      }
      history.clear();
      if (changed) {
        b = accelerated;
        renormalize();
      }
    }
  }
  out.weights = b;
  out.value = ce_growth_rate(instance, Portfolio(b), profile);
  return out;
}

// Exact alternating map T(b): refresh r(b), then minimize the fixed-r
// objective to its interior FOC (sum_j r_j x_ji / q_j = 1) at high precision.
inline std::vector<double> alternating_map(const MarketInstance& instance,
                                           const RiskProfile& profile,
                                           const std::vector<double>& b,
                                           const std::vector<double>& warm_start,
                                           double inner_tol, long max_iters) {
  const ProbabilityVector r = auxiliary_law(instance, b, profile);
  // The fixed-r objective is a log-optimal problem under the law r, so the
  // multiplicative update u_i <- u_i * (-g_i) iterates its residual map
  // directly and reaches tolerances an Armijo descent cannot certify.
  std::vector<double> u = warm_start;
  for (long t = 0; t < max_iters; ++t) {
    const ObjectiveEval at_u = info_proj_objective(instance, u, r);
    double worst = 0.0;
    for (double g : at_u.gradient) worst = std::max(worst, std::abs(1.0 + g));
    if (worst <= inner_tol) return u;
    double sum = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      u[i] *= -at_u.gradient[i];
      sum += u[i];
    }
    for (double& v : u) v /= sum;
  }
  throw std::runtime_error("inner solve of the alternating map did not reach tolerance");
}

}  // namespace detail

/// Finite-difference probe of the alternating map's local linear factor at an
/// interior optimum; the expected value is |1 - rho|.
inline double jacobian_probe(const MarketInstance& instance, const RiskProfile& profile,
                             double probe_radius, std::uint64_t seed = 20240817,
                             int num_probes = 8) {
  if (!(probe_radius > 0.0)) throw std::invalid_argument("probe radius must be positive");
  if (!(profile.rho < 2.0))
    throw std::invalid_argument("the local-contractivity probe covers rho in (0,2)");

  const std::size_t m = instance.assets();
  const detail::FocSolveResult ref = detail::solve_to_foc(
      instance, profile, Portfolio::uniform(m).values(), 1e-10, 1e-12, 500000);
  if (!ref.converged)
    throw std::runtime_error("reference optimum for the probe did not converge");
  const double probe_floor = 10.0 * probe_radius;
  for (double v : ref.weights)
    if (v <= probe_floor)
      throw std::invalid_argument("optimum is too close to the boundary for the probe");

  const double inner_tol = 1e-12;
  const long inner_iters = 200000;
  const std::vector<double> t_at_star =
      detail::alternating_map(instance, profile, ref.weights, ref.weights, inner_tol, inner_iters);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  double ratio_sum = 0.0;
  for (int n = 0; n < num_probes; ++n) {
    std::vector<double> delta(m);
    double mean = 0.0;
    for (double& d : delta) {
      d = normal(rng);
      mean += d;
    }
    mean /= static_cast<double>(m);
    double norm = 0.0;
    for (double& d : delta) {
      d -= mean;  // tangent to the simplex
      norm += d * d;
    }
    norm = std::sqrt(norm);
    std::vector<double> perturbed(m);
    for (std::size_t i = 0; i < m; ++i)
      perturbed[i] = ref.weights[i] + delta[i] * probe_radius / norm;

    const std::vector<double> mapped =
        detail::alternating_map(instance, profile, perturbed, ref.weights, inner_tol, inner_iters);
    double moved = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double d = mapped[i] - t_at_star[i];
      moved += d * d;
    }
    ratio_sum += std::sqrt(moved) / probe_radius;
  }
  return ratio_sum / static_cast<double>(num_probes);
}

}  // namespace infoproj
