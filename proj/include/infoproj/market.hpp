#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace infoproj {

inline constexpr double kSimplexTol = 1e-12;
inline constexpr double kCoveringRelTol = 1e-10;

namespace detail {

// pow with the 0^a = 0 convention for a > 0; routes through exp/log so that
// small bases never produce NaN.
inline double pow_zero_safe(double base, double expo) {
  if (base == 0.0) return 0.0;
  return std::exp(expo * std::log(base));
}

inline bool nearly_equal(double a, double b, double tol) {
  return std::abs(a - b) <= tol;
}

}  // namespace detail

/// Normalized nonnegative weights over a finite alphabet.
class ProbabilityVector {
 public:
  explicit ProbabilityVector(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.empty()) throw std::invalid_argument("probability vector must be non-empty");
    double sum = 0.0;
    for (double v : probs_) {
      if (!(v >= 0.0) || !std::isfinite(v))
        throw std::invalid_argument("probability entries must be finite and nonnegative");
      sum += v;
    }
    if (std::abs(sum - 1.0) > kSimplexTol)
      throw std::invalid_argument("probabilities must sum to 1");
  }

  static ProbabilityVector uniform(std::size_t n) {
    return ProbabilityVector(std::vector<double>(n, 1.0 / static_cast<double>(n)));
  }

  // Rescales nonnegative weights to sum 1.
  static ProbabilityVector normalized(std::vector<double> weights) {
    double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (!(sum > 0.0) || !std::isfinite(sum))
      throw std::invalid_argument("weights must have a positive finite sum");
    for (double& w : weights) w /= sum;
    return ProbabilityVector(std::move(weights));
  }

  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  const std::vector<double>& values() const { return probs_; }

 private:
  std::vector<double> probs_;
};

/// k x m nonnegative matrix; rows are market states, columns are assets.
class PayoffMatrix {
 public:
  PayoffMatrix(std::size_t k, std::size_t m, std::vector<double> entries)
      : k_(k), m_(m), entries_(std::move(entries)) {
    if (k_ < 1 || m_ < 1) throw std::invalid_argument("payoff matrix needs k >= 1 and m >= 1");
    if (entries_.size() != k_ * m_)
      throw std::invalid_argument("payoff entry count does not match k*m");
    for (double v : entries_) {
      if (!(v >= 0.0) || !std::isfinite(v))
        throw std::invalid_argument("payoff entries must be finite and nonnegative");
    }
    for (std::size_t j = 0; j < k_; ++j) {
      bool has_positive = false;
      for (std::size_t i = 0; i < m_; ++i) has_positive |= ((*this)(j, i) > 0.0);
      if (!has_positive)
        throw std::invalid_argument("payoff row " + std::to_string(j) +
                                    " has no strictly positive entry");
    }
  }

  double operator()(std::size_t state, std::size_t asset) const {
    return entries_[state * m_ + asset];
  }
  std::size_t states() const { return k_; }
  std::size_t assets() const { return m_; }
  const std::vector<double>& entries() const { return entries_; }

  std::vector<double> row(std::size_t state) const {
    return {entries_.begin() + static_cast<std::ptrdiff_t>(state * m_),
            entries_.begin() + static_cast<std::ptrdiff_t>((state + 1) * m_)};
  }

  double max_entry() const { return *std::max_element(entries_.begin(), entries_.end()); }

 private:
  std::size_t k_;
  std::size_t m_;
  std::vector<double> entries_;
};

/// Market law over the k states, with its support index set.
struct MarketLaw {
  ProbabilityVector probs;
  std::vector<std::size_t> support;

  explicit MarketLaw(ProbabilityVector p) : probs(std::move(p)) {
    for (std::size_t j = 0; j < probs.size(); ++j)
      if (probs[j] > 0.0) support.push_back(j);
  }
};

/// Point on the m-asset simplex.
class Portfolio {
 public:
  explicit Portfolio(std::vector<double> weights) : weights_(std::move(weights)) {
    if (weights_.empty()) throw std::invalid_argument("portfolio must be non-empty");
    double sum = 0.0;
    for (double v : weights_) {
      if (!(v >= 0.0) || !std::isfinite(v))
        throw std::invalid_argument("portfolio weights must be finite and nonnegative");
      sum += v;
    }
    if (std::abs(sum - 1.0) > kSimplexTol)
      throw std::invalid_argument("portfolio weights must sum to 1");
  }

  static Portfolio uniform(std::size_t m) {
    return Portfolio(std::vector<double>(m, 1.0 / static_cast<double>(m)));
  }

  std::size_t size() const { return weights_.size(); }
  double operator[](std::size_t i) const { return weights_[i]; }
  const std::vector<double>& values() const { return weights_; }

 private:
  std::vector<double> weights_;
};

/// Finite point set whose coordinate-wise sum is gamma * 1. Original states
/// come first; reflected points are appended.
struct SymmetricCovering {
  std::vector<std::vector<double>> points;
  double a_max = 0.0;
  double gamma = 0.0;
  std::vector<std::size_t> origin_index;  // state j -> position in points

  std::size_t size() const { return points.size(); }
  std::size_t dimension() const { return points.empty() ? 0 : points.front().size(); }
};

namespace detail {

inline bool same_point(const std::vector<double>& a, const std::vector<double>& b, double tol) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!nearly_equal(a[i], b[i], tol)) return false;
  return true;
}

inline std::size_t find_point(const std::vector<std::vector<double>>& pts,
                              const std::vector<double>& x, double tol) {
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (same_point(pts[i], x, tol)) return i;
  return pts.size();
}

// Column sums must agree within relative tolerance; returns their mean.
inline double checked_gamma(const std::vector<std::vector<double>>& points, std::size_t m) {
  std::vector<double> colsum(m, 0.0);
  for (const auto& pt : points)
    for (std::size_t i = 0; i < m; ++i) colsum[i] += pt[i];
  const double lo = *std::min_element(colsum.begin(), colsum.end());
  const double hi = *std::max_element(colsum.begin(), colsum.end());
  const double scale = std::max(std::abs(lo), std::abs(hi));
  if (!(scale > 0.0)) throw std::invalid_argument("covering has zero coordinate sums");
  if ((hi - lo) > kCoveringRelTol * scale)
    throw std::invalid_argument("covering coordinate sums are not all equal");
  return std::accumulate(colsum.begin(), colsum.end(), 0.0) / static_cast<double>(m);
}

}  // namespace detail

/// Reflection construction: X u {a_max*1 - x : x in X}, coincident points
/// stored once. Accepts any finite nonnegative reference set.
inline SymmetricCovering build_reflection_covering(
    const std::vector<std::vector<double>>& states) {
  if (states.empty()) throw std::invalid_argument("reference set must be non-empty");
  const std::size_t m = states.front().size();
  double a_max = 0.0;
  for (const auto& x : states) {
    if (x.size() != m) throw std::invalid_argument("reference points have mixed dimensions");
    for (double v : x) {
      if (!(v >= 0.0) || !std::isfinite(v))
        throw std::invalid_argument("reference points must be finite and nonnegative");
      a_max = std::max(a_max, v);
    }
  }
  if (!(a_max > 0.0))
    throw std::invalid_argument("all-zero reference set has a degenerate covering");
  const double tol = 1e-12 * std::max(1.0, a_max);

  SymmetricCovering cov;
  cov.a_max = a_max;
  cov.origin_index.resize(states.size());
  for (std::size_t j = 0; j < states.size(); ++j) {
    std::vector<double> x = states[j];
    std::size_t pos = detail::find_point(cov.points, x, tol);
    if (pos == cov.points.size()) cov.points.push_back(std::move(x));
    cov.origin_index[j] = pos;
  }
  const std::size_t num_original = cov.points.size();
  for (std::size_t t = 0; t < num_original; ++t) {
    std::vector<double> reflected(m);
    for (std::size_t i = 0; i < m; ++i) reflected[i] = a_max - cov.points[t][i];
    if (detail::find_point(cov.points, reflected, tol) == cov.points.size())
      cov.points.push_back(std::move(reflected));
  }
  cov.gamma = detail::checked_gamma(cov.points, m);
  return cov;
}

inline SymmetricCovering build_reflection_covering(const PayoffMatrix& payoff) {
  std::vector<std::vector<double>> states;
  states.reserve(payoff.states());
  for (std::size_t j = 0; j < payoff.states(); ++j) states.push_back(payoff.row(j));
  return build_reflection_covering(states);
}

/// Accepts an arbitrary covering after validating the gamma-sum invariant.
/// The first num_original points are taken as the market states in order.
inline SymmetricCovering make_covering(std::vector<std::vector<double>> points,
                                       std::size_t num_original) {
  if (points.empty() || num_original == 0 || num_original > points.size())
    throw std::invalid_argument("covering needs at least the original points");
  const std::size_t m = points.front().size();
  double a_max = 0.0;
  for (const auto& pt : points) {
    if (pt.size() != m) throw std::invalid_argument("covering points have mixed dimensions");
    for (double v : pt) {
      if (!(v >= 0.0) || !std::isfinite(v))
        throw std::invalid_argument("covering points must be finite and nonnegative");
      a_max = std::max(a_max, v);
    }
  }
  SymmetricCovering cov;
  cov.points = std::move(points);
  cov.a_max = a_max;
  cov.gamma = detail::checked_gamma(cov.points, m);
  cov.origin_index.resize(num_original);
  std::iota(cov.origin_index.begin(), cov.origin_index.end(), std::size_t{0});
  return cov;
}

/// Z_q = sum over the covering of <b, x>; equals gamma for every portfolio.
inline double partition_function(const SymmetricCovering& covering, const Portfolio& b) {
  if (covering.dimension() != b.size())
    throw std::invalid_argument("portfolio dimension does not match covering");
  double z = 0.0;
  for (const auto& pt : covering.points)
    z += std::inner_product(pt.begin(), pt.end(), b.values().begin(), 0.0);
  return z;
}

/// p^beta renormalized; zeros stay zeros.
inline ProbabilityVector tilt_measure(const ProbabilityVector& p, double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("tilt order beta must be positive");
  std::vector<double> powered(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) powered[i] = detail::pow_zero_safe(p[i], beta);
  return ProbabilityVector::normalized(std::move(powered));
}

/// Normalized wealth values <b, x> over the covering points.
inline ProbabilityVector induced_measure(const SymmetricCovering& covering, const Portfolio& b) {
  if (covering.dimension() != b.size())
    throw std::invalid_argument("portfolio dimension does not match covering");
  std::vector<double> wealth(covering.size());
  for (std::size_t t = 0; t < covering.size(); ++t)
    wealth[t] = std::inner_product(covering.points[t].begin(), covering.points[t].end(),
                                   b.values().begin(), 0.0);
  return ProbabilityVector::normalized(std::move(wealth));
}

/// Immutable problem statement: payoff, law, covering, and the law extended
/// to the covering (zero mass on reflected points).
class MarketInstance {
 public:
  MarketInstance(PayoffMatrix payoff, MarketLaw law)
      : MarketInstance(std::move(payoff), std::move(law), std::nullopt) {}

  MarketInstance(PayoffMatrix payoff, MarketLaw law, SymmetricCovering covering)
      : MarketInstance(std::move(payoff), std::move(law),
                       std::optional<SymmetricCovering>(std::move(covering))) {}

  const PayoffMatrix& payoff() const { return payoff_; }
  const MarketLaw& law() const { return law_; }
  const SymmetricCovering& covering() const { return covering_; }
  const ProbabilityVector& extended_law() const { return extended_law_; }
  std::size_t states() const { return payoff_.states(); }
  std::size_t assets() const { return payoff_.assets(); }

  /// Wealth <b, x_j> per state.
  std::vector<double> wealth(const Portfolio& b) const {
    if (b.size() != assets())
      throw std::invalid_argument("portfolio dimension does not match instance");
    std::vector<double> q(states());
    for (std::size_t j = 0; j < states(); ++j) {
      double w = 0.0;
      for (std::size_t i = 0; i < assets(); ++i) w += payoff_(j, i) * b[i];
      q[j] = w;
    }
    return q;
  }

  /// Throws unless <b, x_j> > 0 on every support state.
  void require_positive_wealth(const Portfolio& b) const {
    const std::vector<double> q = wealth(b);
    for (std::size_t j : law_.support)
      if (!(q[j] > 0.0))
        throw std::invalid_argument("portfolio yields nonpositive wealth in support state " +
                                    std::to_string(j));
  }

 private:
  MarketInstance(PayoffMatrix payoff, MarketLaw law, std::optional<SymmetricCovering> covering)
      : payoff_(std::move(payoff)),
        law_(std::move(law)),
        covering_(covering ? std::move(*covering) : build_reflection_covering(payoff_)),
        extended_law_(build_extended_law(payoff_, law_, covering_)) {
    if (law_.probs.size() != payoff_.states())
      throw std::invalid_argument("market law size does not match state count");
    if (covering_.dimension() != payoff_.assets())
      throw std::invalid_argument("covering dimension does not match asset count");
  }

  static ProbabilityVector build_extended_law(const PayoffMatrix& payoff, const MarketLaw& law,
                                              const SymmetricCovering& covering) {
    if (law.probs.size() != payoff.states())
      throw std::invalid_argument("market law size does not match state count");
    if (covering.origin_index.size() != payoff.states())
      throw std::invalid_argument("covering does not index all original states");
    std::vector<double> extended(covering.size(), 0.0);
    for (std::size_t j = 0; j < payoff.states(); ++j)
      extended[covering.origin_index[j]] += law.probs[j];
    return ProbabilityVector(std::move(extended));
  }

  PayoffMatrix payoff_;
  MarketLaw law_;
  SymmetricCovering covering_;
  ProbabilityVector extended_law_;
};

}  // namespace infoproj
