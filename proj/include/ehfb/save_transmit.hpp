#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include "ehfb/energy_model.hpp"
#include "ehfb/gaussian.hpp"
#include "ehfb/math.hpp"
#include "ehfb/report.hpp"

// Achievability side: the Chernoff bound on the energy-outage probability,
// its per-block adaptation, the saving-phase length, the achievable message
// size, and the second-order lower bounds.
//
// Logarithms are base 2 throughout, including the log(1/eps1) inside the
// tilt.  The concentration exponent itself is e-based, so the delivered
// outage guarantee exp(log2(eps1)) = eps1^{1/ln 2} is strictly stronger than
// eps1.

namespace ehfb {

/// Exponent coefficients of the outage bound exp(-a t m + b t^2 n).
/// a_t, b_t are per-symbol (unit coherence time); alpha_t, beta_0, beta_t
/// are their per-block counterparts for coherence time L.
struct ChernoffParams {
  double a_t = 0.0;
  double b_t = 0.0;
  double alpha_t = 0.0;
  double beta_0 = 0.0;
  double beta_t = 0.0;
  double t = 0.0;
};

/// Raw value of exp(-a t m + b t^2 n).  May exceed 1 (vacuous bound); use
/// clamp_probability for reporting.
inline double chernoff_outage_bound(double a_t, double b_t, double t,
                                    double m, double n) {
  if (!(t > 0.0)) {
    throw std::domain_error("chernoff_outage_bound: tilt t must be positive");
  }
  if (!(a_t > 0.0)) {
    throw std::domain_error(
        "chernoff_outage_bound: infeasible tilt, a_t must be positive");
  }
  if (m < 0.0 || n < 0.0) {
    throw std::domain_error("chernoff_outage_bound: lengths must be >= 0");
  }
  return std::exp(-a_t * t * m + b_t * t * t * n);
}

inline double clamp_probability(double x) {
  return std::min(1.0, std::max(0.0, x));
}

namespace detail {

// E[G^4 exp(t G^2)] for G ~ N(0, s2), finite for t < 1/(2 s2).
inline double gaussian_fourth_exp_moment(double s2, double t) {
  const double base = 1.0 - 2.0 * s2 * t;
  return 3.0 * s2 * s2 / (base * base * std::sqrt(base));
}

// max{0, (m2+Q)/2 - mu^2 + t mu (m2-Q)/2 + t^2 m2 Q / 2} with
// Q = E[X^4 e^{tX^2}]; shared by the per-symbol and per-block variants.
inline double chernoff_b(double mu, double m2, double Q, double t) {
  const double raw = 0.5 * (m2 + Q) - mu * mu + 0.5 * t * mu * (m2 - Q) +
                     0.5 * t * t * m2 * Q;
  return std::max(0.0, raw);
}

}  // namespace detail

/// Exponent coefficients for the block energy-arrival process with Gaussian
/// codeword symbols of power P = model.mean().  Valid for 0 <= t < 1/(2LP);
/// t = 0 returns the limits a_0 = P, alpha_0 = LP, b_0 = (m2+P^2)/2 = beta_0.
inline ChernoffParams block_chernoff_params(const EnergyModel& model,
                                            long long L, double t) {
  if (L < 1) throw std::domain_error("block_chernoff_params: L must be >= 1");
  const double P = model.mean();
  const double m2 = model.m2();
  const double Ld = static_cast<double>(L);
  if (!(t >= 0.0) || !(t < 1.0 / (2.0 * Ld * P))) {
    throw std::domain_error(
        "block_chernoff_params: divergent moment, need 0 <= t < 1/(2LP)");
  }

  ChernoffParams c;
  c.t = t;
  c.a_t = P - 0.5 * t * m2;
  c.b_t = detail::chernoff_b(P, m2, detail::gaussian_fourth_exp_moment(P, t), t);
  c.alpha_t = Ld * (P - 0.5 * t * Ld * m2);
  c.beta_0 = Ld * Ld * (m2 + P * P) / 2.0;
  const double block_m2 = Ld * Ld * m2;
  const double block_Q = detail::gaussian_fourth_exp_moment(Ld * P, t);
  c.beta_t = detail::chernoff_b(Ld * P, block_m2, block_Q, t);
  return c;
}

/// Tilt choice t_n = sqrt(log2(1/eps1) / (ceil(n/L) beta_0)).
inline double saving_tilt(const EnergyModel& model, long long L, long long n,
                          double eps1) {
  if (n < 1 || L < 1) throw std::domain_error("saving_tilt: n, L must be >= 1");
  if (!(eps1 > 0.0) || !(eps1 < 1.0)) {
    throw std::domain_error("saving_tilt: eps1 must lie strictly in (0,1)");
  }
  const double beta_0 = block_chernoff_params(model, L, 0.0).beta_0;
  const double blocks = static_cast<double>((n + L - 1) / L);
  return std::sqrt(std::log2(1.0 / eps1) / (blocks * beta_0));
}

struct SavingLength {
  double t_n = 0.0;
  std::optional<long long> m;  // absent when the tilt is out of range
  bool feasible = false;
  std::string violated;  // name of the failed condition, if any
};

/// Saving-phase length m = ceil(sqrt((n/L+1) log2(1/eps1)) L (beta_t+beta_0)
/// / (alpha_t sqrt(beta_0)) + 2L), with feasibility of the tilt-range
/// condition n > L^3 log2(1/eps1)/beta_0 * max{4P^2, m2^2/(4P^2)} reported
/// rather than enforced.
inline SavingLength saving_length(const EnergyModel& model, long long L,
                                  long long n, double eps1) {
  SavingLength out;
  out.t_n = saving_tilt(model, L, n, eps1);

  const double P = model.mean();
  const double m2 = model.m2();
  const double Ld = static_cast<double>(L);
  const double log_eps = std::log2(1.0 / eps1);
  const double beta_0 = Ld * Ld * (m2 + P * P) / 2.0;
  const double threshold =
      Ld * Ld * Ld * log_eps / beta_0 *
      std::max(4.0 * P * P, m2 * m2 / (4.0 * P * P));
  out.feasible = static_cast<double>(n) > threshold;
  if (!out.feasible) out.violated = "block_tilt_range";

  // The formula stays evaluable whenever the tilt is strictly inside the
  // valid range, even if the feasibility margin above fails.
  if (out.t_n < 1.0 / (2.0 * Ld * P)) {
    const ChernoffParams c = block_chernoff_params(model, L, out.t_n);
    if (c.alpha_t > 0.0) {
      const double raw =
          std::sqrt((static_cast<double>(n) / Ld + 1.0) * log_eps) * Ld *
              (c.beta_t + beta_0) / (c.alpha_t * std::sqrt(beta_0)) +
          2.0 * Ld;
      out.m = static_cast<long long>(std::ceil(raw));
    }
  }
  return out;
}

/// End-to-end outage guarantee for the chosen tilt: the per-block Chernoff
/// bound evaluated with floor(m/L)-1 saved blocks and ceil(n/L) transmission
/// blocks.  At most eps1 whenever m comes from saving_length on a feasible
/// configuration.
inline double designed_outage_bound(const EnergyModel& model, long long L,
                                     long long n, long long m, double eps1) {
  const double t_n = saving_tilt(model, L, n, eps1);
  const ChernoffParams c = block_chernoff_params(model, L, t_n);
  if (!(c.alpha_t > 0.0)) {
    throw std::domain_error("designed_outage_bound: infeasible tilt");
  }
  const double saved_blocks = static_cast<double>(m / L) - 1.0;
  const double tx_blocks = static_cast<double>((n + L - 1) / L);
  return std::exp(-c.alpha_t * t_n * saved_blocks +
                  c.beta_t * t_n * t_n * tx_blocks);
}

/// Achievable message size in bits:
/// n C(P) + sqrt(n P log2(e)^2/(1+P)) PhiInv(eps2) - 0.5 log2 n - kappa1.
/// The decoding-margin condition eps2 - eps2^2 - (tau1+1)/sqrt(n) >= 0 is
/// reported, never enforced.
inline BoundReport achievable_log_M(double snr, long long n, double eps2) {
  if (n < 1) throw std::domain_error("achievable_log_M: n must be >= 1");
  const InfoDensityStats s = info_density_stats(snr);
  const double nd = static_cast<double>(n);

  BoundReport r;
  r.first_order = nd * s.mu;
  r.second_order = std::sqrt(nd) * s.sigma * normal_inv_cdf(eps2);
  r.log_term = -0.5 * std::log2(nd);
  r.residual = -kappa1(snr, eps2);
  r.value = r.first_order + r.second_order + r.log_term + r.residual;
  r.add_condition("decoding_margin",
                  eps2 - eps2 * eps2 - (s.tau1 + 1.0) / std::sqrt(nd) >= 0.0);
  return r;
}

/// Regime selector for the second-order bounds: either L grows without bound
/// (sublinearly in n) or L is a fixed constant.
struct Regime {
  bool growing = false;
  long long L = 1;

  static Regime growing_L() { return {true, 0}; }
  static Regime constant_L(long long L) {
    if (L < 1) throw std::domain_error("Regime: constant L must be >= 1");
    return {false, L};
  }
};

namespace detail {

inline double v_minus_objective(const EnergyModel& model, long long L,
                                double eps, double eps1) {
  const double P = model.mean();
  const double gaussian_coeff =
      std::sqrt(P * kLog2E * kLog2E / (static_cast<double>(L) * (1.0 + P)));
  return -capacity(P) * std::sqrt(varrho(model) * std::log2(1.0 / eps1)) +
         gaussian_coeff * normal_inv_cdf(eps - eps1);
}

// Coarse log-spaced grid followed by golden-section refinement.  The
// objective is unimodal in practice, but the grid guards against a bad
// bracket either way.
inline double v_minus_constant_L(const EnergyModel& model, long long L,
                                 double eps) {
  const double lo = 1e-6 * eps;
  const double hi = eps - 1e-6 * eps;
  constexpr int kGrid = 256;
  double best_x = lo;
  double best_v = -std::numeric_limits<double>::infinity();
  const double ratio = std::log(hi / lo) / (kGrid - 1);
  for (int i = 0; i < kGrid; ++i) {
    const double x = lo * std::exp(ratio * i);
    const double v = v_minus_objective(model, L, eps, x);
    if (v > best_v) {
      best_v = v;
      best_x = x;
    }
  }

  // Golden-section around the best grid point.
  double a = std::max(lo, best_x * std::exp(-ratio));
  double b = std::min(hi, best_x * std::exp(ratio));
  constexpr double kInvPhi = 0.6180339887498949;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = v_minus_objective(model, L, eps, c);
  double fd = v_minus_objective(model, L, eps, d);
  for (int it = 0; it < 200 && (b - a) > 1e-14 * eps; ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = v_minus_objective(model, L, eps, c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = v_minus_objective(model, L, eps, d);
    }
  }
  return std::max(best_v, std::max(fc, fd));
}

}  // namespace detail

/// Second-order lower bound V^- in bits.  Growing-L regime:
/// -C(P) sqrt(varrho log2(1/eps)).  Constant-L regime: the supremum over
/// splits eps1 + eps2 = eps of the two-term objective.
inline double v_minus(const EnergyModel& model, const Regime& regime,
                      double eps) {
  if (!(eps > 0.0) || !(eps < 1.0)) {
    throw std::domain_error("v_minus: eps must lie strictly in (0,1)");
  }
  const double P = model.mean();
  if (regime.growing) {
    return -capacity(P) * std::sqrt(varrho(model) * std::log2(1.0 / eps));
  }
  return detail::v_minus_constant_L(model, regime.L, eps);
}

/// Simplified lower bound V^-- in bits, valid for eps in (0, 1/2).
inline double v_minus_minus(const EnergyModel& model, const Regime& regime,
                            double eps) {
  if (!(eps > 0.0) || !(eps < 0.5)) {
    throw std::domain_error("v_minus_minus: eps must lie strictly in (0,1/2)");
  }
  const double P = model.mean();
  const double C = capacity(P);
  const double rho = varrho(model);
  if (regime.growing) {
    return -C * std::sqrt(rho * std::log2(1.0 / eps));
  }
  return -(C * std::sqrt(2.0 * rho) +
           std::sqrt(4.0 * P * kLog2E / (1.0 + P))) *
         std::sqrt(std::log2(1.0 / eps));
}

struct SecondOrderLower {
  double v_minus = 0.0;
  double v_minus_minus = 0.0;
};

inline SecondOrderLower second_order_lower(const EnergyModel& model,
                                           const Regime& regime, double eps) {
  SecondOrderLower out;
  out.v_minus = v_minus(model, regime, eps);
  out.v_minus_minus = v_minus_minus(model, regime, eps);
  return out;
}

/// Full save-and-transmit design at blocklength n: the eps1/eps2 split, the
/// tilt, the saving length, the achievable message size, and all four named
/// feasibility conditions.
struct SaveTransmitDesign {
  long long n = 0;
  long long L = 1;
  double eps = 0.0;
  double eps1 = 0.0;
  double eps2 = 0.0;
  double t_n = 0.0;
  std::optional<long long> m;
  double log_M = 0.0;
  std::vector<Condition> conditions;
  bool feasible = true;
};

inline SaveTransmitDesign design_save_transmit(const EnergyModel& model,
                                               long long L, long long n,
                                               double eps, double eps1) {
  if (!(eps > 0.0) || !(eps < 1.0) || !(eps1 > 0.0) || !(eps1 < eps)) {
    throw std::domain_error(
        "design_save_transmit: need 0 < eps1 < eps < 1");
  }
  SaveTransmitDesign d;
  d.n = n;
  d.L = L;
  d.eps = eps;
  d.eps1 = eps1;
  d.eps2 = eps - eps1;

  const double P = model.mean();
  const double m2 = model.m2();
  const double Ld = static_cast<double>(L);
  const double log_eps = std::log2(1.0 / eps1);

  const SavingLength sl = saving_length(model, L, n, eps1);
  d.t_n = sl.t_n;
  d.m = sl.m;

  const BoundReport ach = achievable_log_M(P, n, d.eps2);
  d.log_M = ach.value;

  const double nd = static_cast<double>(n);
  const bool tilt_margin =
      nd > 2.0 * Ld * log_eps / (m2 + P * P) *
               std::max(4.0 * P * P, m2 * m2 / (4.0 * P * P));
  const bool moment_margin = nd >= Ld * m2 * m2 * log_eps / std::pow(P, 4.0);

  d.conditions.push_back({"saving_tilt_margin", tilt_margin});
  d.conditions.push_back({"saving_moment_margin", moment_margin});
  d.conditions.push_back({"decoding_margin", ach.conditions.at(0).ok});
  d.conditions.push_back({"block_tilt_range", sl.feasible});
  for (const Condition& c : d.conditions) d.feasible = d.feasible && c.ok;
  return d;
}

}  // namespace ehfb
