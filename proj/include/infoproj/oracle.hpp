#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "infoproj/info_measures.hpp"
#include "infoproj/market.hpp"
#include "infoproj/solvers.hpp"

namespace infoproj {

struct GridSpec {
  double resolution = 0.01;
  std::size_t max_dimension = 4;

  void validate() const {
    if (!(resolution > 0.0 && resolution <= 0.5))
      throw std::invalid_argument("grid resolution must lie in (0, 0.5]");
    if (max_dimension < 1) throw std::invalid_argument("max_dimension must be positive");
  }
};

namespace detail {

inline std::size_t simplex_lattice_size(std::size_t steps, std::size_t m) {
  // C(steps + m - 1, m - 1)
  std::size_t count = 1;
  for (std::size_t i = 1; i < m; ++i) {
    count = count * (steps + i) / i;
    if (count > 100000000) return count;  // caller checks the cap
  }
  return count;
}

}  // namespace detail

/// Visits every lattice point of the simplex with the given number of steps,
/// in lexicographically ascending order of the weight vector.
template <typename Visitor>
void for_each_simplex_lattice_point(std::size_t m, std::size_t steps, Visitor&& visit) {
  std::vector<std::size_t> counts(m, 0);
  std::vector<double> point(m, 0.0);
  const double step = 1.0 / static_cast<double>(steps);
  // counts[0..m-2] are free; the last coordinate absorbs the remainder.
  auto recurse = [&](auto&& self, std::size_t index, std::size_t remaining) -> void {
    if (index + 1 == m) {
      counts[index] = remaining;
      for (std::size_t i = 0; i < m; ++i) point[i] = static_cast<double>(counts[i]) * step;
      visit(const_cast<const std::vector<double>&>(point));
      return;
    }
    for (std::size_t c = 0; c <= remaining; ++c) {
      counts[index] = c;
      self(self, index + 1, remaining - c);
    }
  };
  recurse(recurse, 0, steps);
}

struct GridOptimum {
  std::vector<double> weights;
  double value = 0.0;  // CE growth rate at the best lattice point
  bool found = false;
};

/// Exhaustive simplex lattice search for the expected-utility maximizer,
/// evaluated through the CE growth rate (same ordering). Ties keep the
/// lexicographically smallest point.
inline GridOptimum grid_search_optimum(const MarketInstance& instance, const RiskProfile& profile,
                                       const GridSpec& spec) {
  spec.validate();
  const std::size_t m = instance.assets();
  if (m > spec.max_dimension)
    throw std::invalid_argument("grid search is capped at max_dimension assets");
  const std::size_t steps = static_cast<std::size_t>(std::llround(1.0 / spec.resolution));
  if (detail::simplex_lattice_size(steps, m) > 10000000)
    throw std::invalid_argument("grid enumeration exceeds the lattice-size cap");

  GridOptimum best;
  best.value = -kInfinity;
  for_each_simplex_lattice_point(m, steps, [&](const std::vector<double>& b) {
    const std::vector<double> q = instance.wealth(Portfolio(b));
    for (std::size_t j : instance.law().support)
      if (!(q[j] > 0.0)) return;  // infeasible lattice point
    const double value = ce_growth_rate(instance, Portfolio(b), profile);
    if (value > best.value) {
      best.value = value;
      best.weights = b;
      best.found = true;
    }
  });
  if (!best.found) throw std::runtime_error("no feasible lattice point on the simplex grid");
  return best;
}

struct ReferenceOptimum {
  Portfolio portfolio;
  double value = 0.0;  // CE growth rate
  bool converged = false;
  long iterations = 0;
};

/// High-precision reference: Naive EG run until the FOC residual certifies
/// optimality (the expected-utility objective is concave on the simplex, so
/// the certified value is the global optimum).
inline ReferenceOptimum reference_optimum(const MarketInstance& instance,
                                          const RiskProfile& profile, double foc_tol = 1e-7,
                                          long max_iters = 2000000) {
  const detail::FocSolveResult res = detail::solve_to_foc(
      instance, profile, Portfolio::uniform(instance.assets()).values(), foc_tol, 1e-9,
      max_iters);
  return ReferenceOptimum{Portfolio(res.weights), res.value, res.converged, res.iterations};
}

}  // namespace infoproj
