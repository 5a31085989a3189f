#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "infoproj/market.hpp"

namespace infoproj {

// Orders within this band of 1 route to the logarithmic / KL / Shannon branch.
inline constexpr double kRhoOneEpsilon = 1e-9;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// CRRA investor: constant coefficient of relative risk aversion rho.
struct RiskProfile {
  double rho;
  bool is_log;

  explicit RiskProfile(double rho_in)
      : rho(rho_in), is_log(std::abs(rho_in - 1.0) < kRhoOneEpsilon) {
    if (!(rho_in > 0.0) || !std::isfinite(rho_in))
      throw std::invalid_argument("risk aversion rho must be positive and finite");
  }
};

/// w^(1-rho)/(1-rho), or log w in the logarithmic branch.
inline double crra_utility(double w, const RiskProfile& profile) {
  if (!(w > 0.0)) throw std::invalid_argument("wealth must be positive");
  if (profile.is_log) return std::log(w);
  return std::pow(w, 1.0 - profile.rho) / (1.0 - profile.rho);
}

/// (alpha_u(w), rho_u(w)) = (rho/w, rho); relative risk aversion is constant.
inline std::pair<double, double> risk_coefficients(double w, const RiskProfile& profile) {
  if (!(w > 0.0)) throw std::invalid_argument("wealth must be positive");
  return {profile.rho / w, profile.rho};
}

/// Sum p log(p/q), with 0 log(0/.) = 0; +inf when supp(p) is not inside supp(q).
inline double kl_divergence(const ProbabilityVector& p, const ProbabilityVector& q) {
  if (p.size() != q.size()) throw std::invalid_argument("alphabet sizes differ");
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) return kInfinity;
    d += p[i] * std::log(p[i] / q[i]);
  }
  return d;
}

inline double shannon_entropy(const ProbabilityVector& p) {
  double h = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] > 0.0) h -= p[i] * std::log(p[i]);
  return h;
}

/// Renyi divergence of order alpha; reduces to KL near alpha = 1.
inline double renyi_divergence(const ProbabilityVector& p, const ProbabilityVector& q,
                               double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("order alpha must be positive");
  if (p.size() != q.size()) throw std::invalid_argument("alphabet sizes differ");
  if (std::abs(alpha - 1.0) < kRhoOneEpsilon) return kl_divergence(p, q);
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) {
      if (alpha > 1.0) return kInfinity;
      continue;  // alpha < 1: q^(1-alpha) = 0
    }
    sum += detail::pow_zero_safe(p[i], alpha) * detail::pow_zero_safe(q[i], 1.0 - alpha);
  }
  if (sum == 0.0) return kInfinity;
  return std::log(sum) / (alpha - 1.0);
}

/// Renyi entropy of order alpha; Shannon entropy near alpha = 1.
inline double renyi_entropy(const ProbabilityVector& p, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("order alpha must be positive");
  if (std::abs(alpha - 1.0) < kRhoOneEpsilon) return shannon_entropy(p);
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) sum += detail::pow_zero_safe(p[i], alpha);
  return std::log(sum) / (1.0 - alpha);
}

/// E_p[u(<b, X>)] over the market support.
inline double expected_utility(const MarketInstance& instance, const Portfolio& b,
                               const RiskProfile& profile) {
  instance.require_positive_wealth(b);
  const std::vector<double> q = instance.wealth(b);
  const auto& p = instance.law().probs;
  double value = 0.0;
  for (std::size_t j : instance.law().support) value += p[j] * crra_utility(q[j], profile);
  return value;
}

/// Certainty-equivalent growth rate G_rho.
inline double ce_growth_rate(const MarketInstance& instance, const Portfolio& b,
                             const RiskProfile& profile) {
  instance.require_positive_wealth(b);
  const std::vector<double> q = instance.wealth(b);
  const auto& p = instance.law().probs;
  if (profile.is_log) {
    double g = 0.0;
    for (std::size_t j : instance.law().support) g += p[j] * std::log(q[j]);
    return g;
  }
  double moment = 0.0;
  for (std::size_t j : instance.law().support)
    moment += p[j] * std::pow(q[j], 1.0 - profile.rho);
  return std::log(moment) / (1.0 - profile.rho);
}

/// Certainty-equivalent wealth exp(G_rho); satisfies u(w_ce) = E_p[u(W)].
inline double ce_wealth(const MarketInstance& instance, const Portfolio& b,
                        const RiskProfile& profile) {
  return std::exp(ce_growth_rate(instance, b, profile));
}

/// The three terms of the CE-growth decomposition plus their reconstruction:
/// total = -divergence_term - entropy_term + log_partition.
struct CEDecomposition {
  double divergence_term = 0.0;  // D_rho(p_tilde || q_bar_b), stored nonnegative
  double entropy_term = 0.0;     // H_rho(p_tilde)
  double log_partition = 0.0;    // log Z_q
  double total = 0.0;
};

inline CEDecomposition decompose_ce(const MarketInstance& instance, const Portfolio& b,
                                    const RiskProfile& profile) {
  instance.require_positive_wealth(b);
  const double beta = profile.is_log ? 1.0 : 1.0 / profile.rho;
  const ProbabilityVector p_tilde = tilt_measure(instance.extended_law(), beta);
  const ProbabilityVector q_bar = induced_measure(instance.covering(), b);
  CEDecomposition out;
  if (profile.is_log) {
    out.divergence_term = kl_divergence(p_tilde, q_bar);
    out.entropy_term = shannon_entropy(p_tilde);
  } else {
    out.divergence_term = renyi_divergence(p_tilde, q_bar, profile.rho);
    out.entropy_term = renyi_entropy(p_tilde, profile.rho);
  }
  out.log_partition = std::log(instance.covering().gamma);
  out.total = -out.divergence_term - out.entropy_term + out.log_partition;
  return out;
}

/// Portfolio-independent upper bound on expected CRRA utility.
inline double utility_upper_bound(const MarketInstance& instance, const RiskProfile& profile) {
  const double log_z = std::log(instance.covering().gamma);
  if (profile.is_log) return -shannon_entropy(instance.extended_law()) + log_z;
  const ProbabilityVector p_tilde = tilt_measure(instance.extended_law(), 1.0 / profile.rho);
  const double exponent = (1.0 - profile.rho) * (-renyi_entropy(p_tilde, profile.rho) + log_z);
  return std::exp(exponent) / (1.0 - profile.rho);
}

/// rho*KL(r||p_tilde) + (1-rho)*KL(r||q_bar); the variational objective whose
/// minimum equals (1-rho)*D_rho(p_tilde||q_bar).
inline double variational_objective(const ProbabilityVector& r, const ProbabilityVector& p_tilde,
                                    const ProbabilityVector& q_bar, const RiskProfile& profile) {
  if (profile.is_log) throw std::invalid_argument("variational objective requires rho != 1");
  const double kl_p = kl_divergence(r, p_tilde);
  const double kl_q = kl_divergence(r, q_bar);
  if (kl_p == kInfinity || kl_q == kInfinity) {
    // With rho > 1 the q-term has a negative weight, so an infinite KL to
    // p_tilde dominates; to q_bar it sends the objective to -inf.
    if (kl_p == kInfinity) return kInfinity;
    return profile.rho < 1.0 ? kInfinity : -kInfinity;
  }
  return profile.rho * kl_p + (1.0 - profile.rho) * kl_q;
}

/// Closed-form minimizer r* proportional to p_tilde^rho * q_bar^(1-rho).
inline ProbabilityVector variational_minimizer(const ProbabilityVector& p_tilde,
                                               const ProbabilityVector& q_bar,
                                               const RiskProfile& profile) {
  if (profile.is_log) throw std::invalid_argument("variational minimizer requires rho != 1");
  if (p_tilde.size() != q_bar.size()) throw std::invalid_argument("alphabet sizes differ");
  std::vector<double> weights(p_tilde.size(), 0.0);
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (p_tilde[i] == 0.0) continue;
    if (q_bar[i] == 0.0) {
      if (profile.rho > 1.0)
        throw std::invalid_argument("q_bar vanishes on the support of p_tilde with rho > 1");
      continue;
    }
    weights[i] = detail::pow_zero_safe(p_tilde[i], profile.rho) *
                 detail::pow_zero_safe(q_bar[i], 1.0 - profile.rho);
  }
  return ProbabilityVector::normalized(std::move(weights));  // throws on zero mass
}

}  // namespace infoproj
