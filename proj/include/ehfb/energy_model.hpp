#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "ehfb/math.hpp"
#include "ehfb/rng.hpp"

// Energy-arrival distribution families with closed-form moments, plus the
// block-i.i.d. process sampler.
//
// The family set covers four qualitatively different cases: zero variance
// (deterministic), unbounded with light tail (exponential), discrete
// (two-point), and bounded continuous (uniform on [0, 2P]).

namespace ehfb {

enum class EnergyFamily { deterministic, exponential, two_point, uniform };

inline const char* family_name(EnergyFamily f) {
  switch (f) {
    case EnergyFamily::deterministic: return "deterministic";
    case EnergyFamily::exponential: return "exponential";
    case EnergyFamily::two_point: return "two-point";
    case EnergyFamily::uniform: return "uniform";
  }
  return "?";
}

class EnergyModel {
 public:
  static EnergyModel deterministic(double P) {
    require_positive_mean(P);
    EnergyModel m(EnergyFamily::deterministic, P);
    m.m2_ = P * P;
    m.m3_ = P * P * P;
    m.m3half_ = std::pow(P, 1.5);
    return m;
  }

  static EnergyModel exponential(double mean) {
    require_positive_mean(mean);
    EnergyModel m(EnergyFamily::exponential, mean);
    m.m2_ = 2.0 * mean * mean;
    m.m3_ = 6.0 * mean * mean * mean;
    // E[E^{3/2}] = Gamma(5/2) * mean^{3/2} = (3/4)sqrt(pi) mean^{3/2}
    m.m3half_ = 0.75 * std::sqrt(M_PI) * std::pow(mean, 1.5);
    return m;
  }

  /// Uniform on [0, 2*mean].
  static EnergyModel uniform(double mean) {
    require_positive_mean(mean);
    EnergyModel m(EnergyFamily::uniform, mean);
    const double b = 2.0 * mean;
    m.m2_ = b * b / 3.0;
    m.m3_ = b * b * b / 4.0;
    m.m3half_ = 0.4 * std::pow(b, 1.5);
    return m;
  }

  static EnergyModel two_point(double e0, double e1, double p0) {
    if (!(e0 >= 0.0) || !(e1 > e0)) {
      throw std::domain_error("two_point: requires 0 <= e0 < e1");
    }
    if (!(p0 > 0.0) || !(p0 < 1.0)) {
      throw std::domain_error("two_point: p0 must lie in (0,1)");
    }
    const double p1 = 1.0 - p0;
    const double mean = p0 * e0 + p1 * e1;
    require_positive_mean(mean);
    EnergyModel m(EnergyFamily::two_point, mean);
    m.e0_ = e0;
    m.e1_ = e1;
    m.p0_ = p0;
    m.m2_ = p0 * e0 * e0 + p1 * e1 * e1;
    m.m3_ = p0 * e0 * e0 * e0 + p1 * e1 * e1 * e1;
    m.m3half_ = p0 * std::pow(e0, 1.5) + p1 * std::pow(e1, 1.5);
    return m;
  }

  /// Degenerate E = 0 process.  Violates the positive-mean invariant and is
  /// admitted only for exercising the outage simulator's trivial case.
  static EnergyModel zero_energy_for_testing() {
    EnergyModel m(EnergyFamily::deterministic, 0.0);
    m.m2_ = 0.0;
    m.m3_ = 0.0;
    m.m3half_ = 0.0;
    m.conforming_ = false;
    return m;
  }

  EnergyFamily family() const { return family_; }
  bool conforming() const { return conforming_; }

  /// Mean arrival P in joules per channel use.
  double mean() const { return m1_; }
  double m2() const { return m2_; }
  double m3() const { return m3_; }
  double m3half() const { return m3half_; }
  double variance() const { return m2_ - m1_ * m1_; }

  double e0() const { return e0_; }
  double e1() const { return e1_; }
  double p0() const { return p0_; }

  bool has_continuous_strictly_increasing_cdf() const {
    return family_ == EnergyFamily::exponential ||
           family_ == EnergyFamily::uniform;
  }

  double cdf(double e) const {
    switch (family_) {
      case EnergyFamily::deterministic:
        return e < m1_ ? 0.0 : 1.0;
      case EnergyFamily::exponential:
        return e <= 0.0 ? 0.0 : 1.0 - std::exp(-e / m1_);
      case EnergyFamily::uniform: {
        if (e <= 0.0) return 0.0;
        const double b = 2.0 * m1_;
        return e >= b ? 1.0 : e / b;
      }
      case EnergyFamily::two_point:
        if (e < e0_) return 0.0;
        if (e < e1_) return p0_;
        return 1.0;
    }
    return 0.0;
  }

  /// Generalized inverse cdf, inf{e : cdf(e) >= u}, valid for u in (0,1).
  double quantile(double u) const {
    if (!(u > 0.0) || !(u < 1.0)) {
      throw std::domain_error("quantile: u must lie strictly in (0,1)");
    }
    switch (family_) {
      case EnergyFamily::deterministic:
        return m1_;
      case EnergyFamily::exponential:
        return -m1_ * std::log1p(-u);
      case EnergyFamily::uniform:
        return 2.0 * m1_ * u;
      case EnergyFamily::two_point:
        return u <= p0_ ? e0_ : e1_;
    }
    return m1_;
  }

  double sample(CounterRng& rng) const {
    if (family_ == EnergyFamily::deterministic) return m1_;
    return quantile(rng.uniform01());
  }

  std::string name() const { return family_name(family_); }

 private:
  EnergyModel(EnergyFamily f, double mean) : family_(f), m1_(mean) {}

  static void require_positive_mean(double P) {
    if (!(P > 0.0) || !std::isfinite(P)) {
      throw std::domain_error("EnergyModel: mean energy must be positive");
    }
  }

  EnergyFamily family_;
  double m1_;
  double m2_ = 0.0;
  double m3_ = 0.0;
  double m3half_ = 0.0;
  double e0_ = 0.0;
  double e1_ = 0.0;
  double p0_ = 0.0;
  bool conforming_ = true;
};

/// Dimensionless constant 2*(E[E^2]/P^2 + 1) entering the saving-phase
/// asymptotics; equals 4 for the deterministic family.
inline double varrho(const EnergyModel& model) {
  const double P = model.mean();
  if (!(P > 0.0)) {
    throw std::domain_error("varrho: model must have positive mean");
  }
  return 2.0 * (model.m2() / (P * P) + 1.0);
}

/// Block layout: blocklength n split into coherence blocks of length L.
struct BlockStructure {
  long long n = 0;
  long long L = 1;

  BlockStructure(long long n_, long long L_) : n(n_), L(L_) {
    if (n < 1 || L < 1) {
      throw std::domain_error("BlockStructure: n and L must be >= 1");
    }
  }

  /// First channel use of 1-based block ell, i.e. (ell-1)*L + 1.
  long long block_start(long long ell) const { return (ell - 1) * L + 1; }

  /// Number of blocks needed to cover n symbols.
  long long num_blocks() const { return (n + L - 1) / L; }
};

/// Block-i.i.d. energy sequence: the value drawn for block ell depends only
/// on (seed, ell), so any subrange can be generated independently.
inline std::vector<double> sample_block_sequence(const EnergyModel& model,
                                                 long long n, long long L,
                                                 std::uint64_t seed) {
  BlockStructure blocks(n, L);
  std::vector<double> e(static_cast<std::size_t>(n));
  for (long long ell = 1; ell <= blocks.num_blocks(); ++ell) {
    CounterRng rng(seed, StreamPurpose::energy_process,
                   static_cast<std::uint64_t>(ell));
    const double value = model.sample(rng);
    const long long first = blocks.block_start(ell) - 1;
    const long long last = std::min<long long>(n, first + L);
    for (long long k = first; k < last; ++k) {
      e[static_cast<std::size_t>(k)] = value;
    }
  }
  return e;
}

}  // namespace ehfb
