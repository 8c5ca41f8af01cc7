#pragma once

#include <cmath>
#include <stdexcept>

#include "ehfb/energy_model.hpp"
#include "ehfb/gaussian.hpp"
#include "ehfb/math.hpp"
#include "ehfb/report.hpp"
#include "ehfb/save_transmit.hpp"

// Converse side: the upper bound on the message size, the second-order upper
// bound V^+, the three-bound sandwich with the explicit gap bound, and the
// sublinear-regime eps-capacity.

namespace ehfb {

/// Per-block statistics of the converse comparison variable.
struct ConverseStats {
  double sigma_conv = 0.0;  // bits, per-block standard deviation
  double tau2 = 0.0;
  double kappa2 = 0.0;  // bits
};

inline ConverseStats converse_stats(const EnergyModel& model, long long L,
                                    double eps) {
  const double P = model.mean();
  const double Ld = static_cast<double>(L);
  ConverseStats s;
  s.sigma_conv = Ld * kLog2E / (2.0 * (1.0 + P)) *
                 std::sqrt(2.0 * P * (P + 2.0) / Ld + model.m2() - P * P);
  s.tau2 = tau2(model, L);
  s.kappa2 = kappa2(model, L, eps);
  return s;
}

/// Upper bound on log M in bits:
/// (n+L) C(P) + sqrt(n+L) log2(e)/(2(1+P)) sqrt(2P(P+2)+L(m2-P^2)) PhiInv(eps)
///   + 0.5 log2(n+L) + kappa2.
/// Valid once n >= 4 L tau2^2 / (1-eps)^4; the margin is reported, not
/// enforced.
inline BoundReport converse_log_M(const EnergyModel& model, long long n,
                                  long long L, double eps) {
  if (n < 1 || L < 1) {
    throw std::domain_error("converse_log_M: n and L must be >= 1");
  }
  if (!(eps > 0.0) || !(eps < 1.0)) {
    throw std::domain_error("converse_log_M: eps must lie strictly in (0,1)");
  }
  const double P = model.mean();
  const double m2 = model.m2();
  const double nl = static_cast<double>(n + L);
  const ConverseStats s = converse_stats(model, L, eps);

  BoundReport r;
  r.first_order = nl * capacity(P);
  r.second_order = std::sqrt(nl) * kLog2E / (2.0 * (1.0 + P)) *
                   std::sqrt(2.0 * P * (P + 2.0) +
                             static_cast<double>(L) * (m2 - P * P)) *
                   normal_inv_cdf(eps);
  r.log_term = 0.5 * std::log2(nl);
  r.residual = s.kappa2;
  r.value = r.first_order + r.second_order + r.log_term + r.residual;
  const double min_n = 4.0 * static_cast<double>(L) * s.tau2 * s.tau2 /
                       std::pow(1.0 - eps, 4.0);
  r.add_condition("blocklength_above_minimum",
                  static_cast<double>(n) >= min_n);
  return r;
}

/// Second-order upper bound V^+ in bits:
/// log2(e)/(2(1+P)) sqrt(2P^2 + m2) PhiInv(eps).
inline double second_order_upper(const EnergyModel& model, double eps) {
  if (!(eps > 0.0) || !(eps < 1.0)) {
    throw std::domain_error(
        "second_order_upper: eps must lie strictly in (0,1)");
  }
  const double P = model.mean();
  return kLog2E / (2.0 * (1.0 + P)) * std::sqrt(2.0 * P * P + model.m2()) *
         normal_inv_cdf(eps);
}

/// eps-capacity when L is constant or sublinear in n: C(P) for every eps
/// (the strong converse holds in this regime).
inline double epsilon_capacity_sublinear(double snr) { return capacity(snr); }

/// Explicit upper bound on V^+ - V^- from the simplified lower bound; only
/// claimed for eps below normal_cdf(-1).
inline double sandwich_gap_bound(const EnergyModel& model,
                                 const Regime& regime, double eps) {
  const double P = model.mean();
  const double C = capacity(P);
  const double rho = varrho(model);
  const double converse_coeff =
      std::sqrt((2.0 * P * P + model.m2()) * kLog2E /
                (2.0 * (1.0 + P) * (1.0 + P)));
  const double achievable_coeff =
      regime.growing
          ? C * std::sqrt(rho)
          : C * std::sqrt(2.0 * rho) + std::sqrt(4.0 * P * kLog2E / (1.0 + P));
  return (achievable_coeff - converse_coeff) * std::sqrt(std::log2(1.0 / eps));
}

/// Ordered triple (V^--, V^-, V^+) with the ordering check and, for eps
/// below normal_cdf(-1), the explicit gap check.
struct SandwichReport {
  double v_minus_minus = 0.0;
  double v_minus = 0.0;
  double v_plus = 0.0;
  bool ordering_ok = false;
  bool gap_checked = false;  // true iff eps < normal_cdf(-1)
  double gap = 0.0;
  double gap_bound = 0.0;
  bool gap_ok = false;
};

inline SandwichReport sandwich_report(const EnergyModel& model,
                                      const Regime& regime, double eps) {
  if (!(eps > 0.0) || !(eps < 0.5)) {
    throw std::domain_error(
        "sandwich_report: the ordering claim needs eps in (0,1/2)");
  }
  SandwichReport s;
  s.v_minus = v_minus(model, regime, eps);
  s.v_minus_minus = v_minus_minus(model, regime, eps);
  s.v_plus = second_order_upper(model, eps);
  s.ordering_ok =
      s.v_minus_minus <= s.v_minus && s.v_minus <= s.v_plus;
  s.gap = s.v_plus - s.v_minus;
  s.gap_bound = sandwich_gap_bound(model, regime, eps);
  if (eps < normal_cdf(-1.0)) {
    s.gap_checked = true;
    s.gap_ok = s.gap <= s.gap_bound;
  }
  return s;
}

}  // namespace ehfb
