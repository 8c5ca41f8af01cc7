#pragma once

#include <cmath>
#include <stdexcept>

#include "ehfb/energy_model.hpp"
#include "ehfb/math.hpp"

// Statistics of the per-symbol information density of the Gaussian channel
// with input power P, and the residual constants of the achievability and
// converse bounds built from them.

namespace ehfb {

/// Mean, standard deviation, and a closed-form upper bound on the normalized
/// third absolute moment of the per-symbol information density.
struct InfoDensityStats {
  double mu = 0.0;     // bits per channel use, equals capacity(P)
  double sigma = 0.0;  // bits per channel use
  double tau1 = 0.0;   // dimensionless Berry-Esseen ratio bound
};

/// Upper bound on E|i - mu|^3 / sigma^3 for the information density,
/// (15^{1/3} sqrt(P) + 8/sqrt(pi))^3 / (1+P)^{3/2}.
inline double tau1(double snr) {
  if (!(snr > 0.0) || !std::isfinite(snr)) {
    throw std::domain_error("tau1: snr must be positive and finite");
  }
  const double a = std::cbrt(15.0) * std::sqrt(snr) + 8.0 / std::sqrt(M_PI);
  return a * a * a / std::pow(1.0 + snr, 1.5);
}

inline InfoDensityStats info_density_stats(double snr) {
  if (!(snr > 0.0) || !std::isfinite(snr)) {
    throw std::domain_error("info_density_stats: snr must be positive");
  }
  InfoDensityStats s;
  s.mu = capacity(snr);
  s.sigma = std::sqrt(snr * kLog2E * kLog2E / (1.0 + snr));
  s.tau1 = tau1(snr);
  return s;
}

/// Residual constant of the achievable message-size bound (bits):
/// sqrt(P/(1+P)) (tau1+1) log2(e) / N(PhiInv(min{eps2^2, 1-eps2}); 0, 1) + 1.
inline double kappa1(double snr, double eps2) {
  if (!(snr > 0.0) || !std::isfinite(snr)) {
    throw std::domain_error("kappa1: snr must be positive");
  }
  if (!(eps2 > 0.0) || !(eps2 < 1.0)) {
    throw std::domain_error("kappa1: eps2 must lie strictly in (0,1)");
  }
  const double level = std::min(eps2 * eps2, 1.0 - eps2);
  const double density = normal_pdf_at_quantile(level);
  return std::sqrt(snr / (1.0 + snr)) * (tau1(snr) + 1.0) * kLog2E / density +
         1.0;
}

/// Berry-Esseen ratio bound for the per-block converse statistic.  The
/// denominator is the block variance expression 2P(P+2)/L + E[E^2] - P^2,
/// which is positive for every model with positive mean.
inline double tau2(const EnergyModel& model, long long L) {
  if (L < 1) throw std::domain_error("tau2: L must be >= 1");
  const double P = model.mean();
  if (!(P > 0.0)) throw std::domain_error("tau2: model mean must be positive");
  const double numerator_root = std::cbrt(15.0) * P +
                                2.0 * std::cbrt(2.0 * std::sqrt(2.0 / M_PI)) *
                                    std::cbrt(model.m3half()) +
                                std::cbrt(model.m3());
  const double denom =
      2.0 * P * (P + 2.0) / static_cast<double>(L) + model.m2() - P * P;
  return numerator_root * numerator_root * numerator_root /
         std::pow(denom, 1.5);
}

/// Residual constant of the converse bound (bits).  Shares the
/// density-at-quantile denominator pattern with kappa1; the min expression
/// always resolves to eps*(1-eps) but is kept verbatim.
inline double kappa2(const EnergyModel& model, long long L, double eps) {
  if (!(eps > 0.0) || !(eps < 1.0)) {
    throw std::domain_error("kappa2: eps must lie strictly in (0,1)");
  }
  const double P = model.mean();
  const double t2 = tau2(model, L);
  const double level = std::min(eps, eps * (1.0 - eps));
  const double density = normal_pdf_at_quantile(level);
  const double Ld = static_cast<double>(L);
  const double block_sd =
      std::sqrt(2.0 * Ld * P * (P + 2.0) + Ld * Ld * (model.m2() - P * P));
  return t2 / (1.0 + P) * block_sd * kLog2E / density -
         std::log2(t2 * std::sqrt(Ld));
}

}  // namespace ehfb
