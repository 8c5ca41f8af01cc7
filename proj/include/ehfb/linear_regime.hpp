#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "ehfb/energy_model.hpp"
#include "ehfb/math.hpp"

// Machinery for coherence times that grow linearly with the blocklength,
// L = floor(lambda n): the induced block structure, the energy quantizer and
// the per-block bit budget of the adaptive save-and-transmit scheme, the
// pilot-based energy-level estimator, and the rate-quantile bounds.

namespace ehfb {

struct LinearBlockStructure {
  double lambda = 0.0;
  long long n = 0;
  long long L = 0;       // floor(lambda n)
  long long q = 0;       // floor(1/lambda)
  double d = 0.0;        // 1 - q*lambda
  long long rho = 0;     // floor(n/L)
  long long last_block_len = 0;  // n - rho*L
  // Whether rho == q and nd <= n - rho L <= nd + floor(1/lambda) at this n;
  // both can fail for small n and are reported, not enforced.
  bool identities_hold = false;
};

inline LinearBlockStructure block_structure(double lambda, long long n) {
  if (!(lambda > 0.0) || !(lambda <= 1.0)) {
    throw std::domain_error("block_structure: lambda must lie in (0,1]");
  }
  if (n < 1) throw std::domain_error("block_structure: n must be >= 1");
  LinearBlockStructure b;
  b.lambda = lambda;
  b.n = n;
  b.L = static_cast<long long>(std::floor(lambda * static_cast<double>(n)));
  if (b.L < 1) throw std::domain_error("block_structure: lambda*n below 1");
  b.q = static_cast<long long>(std::floor(1.0 / lambda));
  b.d = 1.0 - static_cast<double>(b.q) * lambda;
  b.rho = n / b.L;
  b.last_block_len = n - b.rho * b.L;
  const double nd = static_cast<double>(n) * b.d;
  b.identities_hold =
      b.rho == b.q &&
      nd <= static_cast<double>(b.last_block_len) + 1e-9 &&
      static_cast<double>(b.last_block_len) <=
          nd + static_cast<double>(b.q) + 1e-9;
  return b;
}

/// Quantizer step sqrt(4P+2) / L^{1/6}.
inline double adaptive_delta(double snr, long long L) {
  if (!(snr > 0.0)) throw std::domain_error("adaptive_delta: snr must be > 0");
  if (L < 1) throw std::domain_error("adaptive_delta: L must be >= 1");
  return std::sqrt(4.0 * snr + 2.0) /
         std::pow(static_cast<double>(L), 1.0 / 6.0);
}

namespace detail {

// Largest integer v >= 0 with v*step <= a, corrected for rounding in the
// division so that the comparison holds on the computed products themselves.
inline long long grid_floor_index(double a, double step) {
  long long v = static_cast<long long>(std::floor(a / step));
  if (v < 0) v = 0;
  while (static_cast<double>(v + 1) * step <= a) ++v;
  while (v > 0 && static_cast<double>(v) * step > a) --v;
  return v;
}

}  // namespace detail

/// Largest grid point 2v*delta not exceeding a, so that
/// quantize(a) <= a < quantize(a) + 2*delta holds exactly.
inline double quantize(double a, double delta) {
  if (!(a >= 0.0)) throw std::domain_error("quantize: a must be >= 0");
  if (!(delta > 0.0)) throw std::domain_error("quantize: delta must be > 0");
  const double step = 2.0 * delta;
  return static_cast<double>(detail::grid_floor_index(a, step)) * step;
}

struct Quantizer {
  double delta = 0.0;

  explicit Quantizer(double delta_) : delta(delta_) {
    if (!(delta > 0.0)) throw std::domain_error("Quantizer: delta must be > 0");
  }
  double operator()(double a) const { return quantize(a, delta); }
  double grid_point(long long v) const {
    return 2.0 * static_cast<double>(v) * delta;
  }
};

/// Bits deliverable in a block of length l at quantized energy level
/// g = quantize(e, delta):  max{0, floor((l - ceil(l^{2/3})) C(g) -
/// 2 l^{3/4})}.  Negative raw budgets are clamped; a zero-bit code always
/// exists.
inline long long adaptive_bits(long long block_length, double e,
                               double delta) {
  if (block_length < 1) {
    throw std::domain_error("adaptive_bits: block length must be >= 1");
  }
  if (!(e >= 0.0)) throw std::domain_error("adaptive_bits: e must be >= 0");
  const double ld = static_cast<double>(block_length);
  const double g = quantize(e, delta);
  const double data_slots = ld - std::ceil(std::pow(ld, 2.0 / 3.0));
  const double raw = std::floor(data_slots * capacity(g) -
                                2.0 * std::pow(ld, 0.75));
  return raw > 0.0 ? static_cast<long long>(raw) : 0;
}

/// Grid point minimizing |mean_sq - v - 1|; ties resolve to the smaller
/// point.  The argmin is always one of the two grid neighbours of
/// mean_sq - 1, so the search is closed-form.
inline double estimate_energy_level(double mean_sq, double delta) {
  if (!(mean_sq >= 0.0)) {
    throw std::domain_error("estimate_energy_level: mean_sq must be >= 0");
  }
  if (!(delta > 0.0)) {
    throw std::domain_error("estimate_energy_level: delta must be > 0");
  }
  const double target = mean_sq - 1.0;
  const double step = 2.0 * delta;
  const long long v =
      target > 0.0 ? detail::grid_floor_index(target, step) : 0;
  const double lo = static_cast<double>(v) * step;
  const double hi = static_cast<double>(v + 1) * step;
  const double dlo = std::fabs(target - lo);
  const double dhi = std::fabs(target - hi);
  return dlo <= dhi ? lo : hi;  // min of the argmin set on ties
}

enum class QuantileMode { lower, upper, threshold };

namespace detail {

// cdf of w*C(E) at c.
inline double scaled_rate_cdf(const EnergyModel& model, double w, double c) {
  if (c < 0.0) return 0.0;
  const double e = std::exp2(2.0 * c / w) - 1.0;
  return model.cdf(e);
}

struct RateSumDistribution {
  // Lattice masses for the first k-1 terms; value(i) = (i + off)*h.
  std::vector<double> mass;
  double h = 0.0;
  double offset = 0.0;
  // Last term mixed in exactly through its cdf.
  double last_weight = 0.0;
  double upper = 0.0;  // upper end of the support (after tail truncation)
  const EnergyModel* model = nullptr;

  double cdf(double r) const {
    if (mass.empty()) {
      return scaled_rate_cdf(*model, last_weight, r);
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < mass.size(); ++i) {
      if (mass[i] == 0.0) continue;
      const double x = (static_cast<double>(i) + offset) * h;
      acc += mass[i] * scaled_rate_cdf(*model, last_weight, r - x);
    }
    return acc;
  }
};

inline RateSumDistribution build_rate_sum(const EnergyModel& model,
                                          const std::vector<double>& weights) {
  constexpr int kGridBits = 14;
  constexpr double kTail = 1e-12;

  RateSumDistribution dist;
  dist.model = &model;
  dist.last_weight = weights.back();

  const double e_hi = model.family() == EnergyFamily::exponential
                          ? model.quantile(1.0 - kTail)
                          : 2.0 * model.mean();
  double grid_max = 0.0;
  for (std::size_t j = 0; j + 1 < weights.size(); ++j) {
    grid_max += weights[j] * capacity(e_hi);
  }
  dist.upper = grid_max + dist.last_weight * capacity(e_hi);

  if (weights.size() == 1) return dist;

  const std::size_t N = std::size_t{1} << kGridBits;
  const double h = grid_max / static_cast<double>(N);
  dist.h = h;

  auto term_masses = [&](double w) {
    std::vector<double> m(N);
    double prev = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double cur = i + 1 == N
                             ? 1.0
                             : scaled_rate_cdf(model, w,
                                               static_cast<double>(i + 1) * h);
      m[i] = cur - prev;
      prev = cur;
    }
    return m;
  };

  // Midpoint-mass convolution of the first k-1 terms.
  dist.mass = term_masses(weights[0]);
  dist.offset = 0.5;
  for (std::size_t j = 1; j + 1 < weights.size(); ++j) {
    const std::vector<double> next = term_masses(weights[j]);
    std::vector<double> conv(dist.mass.size() + next.size() - 1, 0.0);
    for (std::size_t a = 0; a < dist.mass.size(); ++a) {
      const double ma = dist.mass[a];
      if (ma == 0.0) continue;
      for (std::size_t b = 0; b < next.size(); ++b) {
        conv[a + b] += ma * next[b];
      }
    }
    dist.mass.swap(conv);
    dist.offset += 0.5;
  }
  return dist;
}

// Discrete exact path: atoms of sum_j w_j C(E_j) for atom-valued models.
inline std::map<double, double> rate_sum_atoms(
    const EnergyModel& model, const std::vector<double>& weights) {
  std::vector<double> values;
  std::vector<double> probs;
  if (model.family() == EnergyFamily::deterministic) {
    values = {model.mean()};
    probs = {1.0};
  } else {
    values = {model.e0(), model.e1()};
    probs = {model.p0(), 1.0 - model.p0()};
  }
  std::map<double, double> atoms{{0.0, 1.0}};
  for (double w : weights) {
    std::map<double, double> next;
    for (const auto& [s, p] : atoms) {
      for (std::size_t i = 0; i < values.size(); ++i) {
        next[s + w * capacity(values[i])] += p * probs[i];
      }
    }
    atoms.swap(next);
  }
  return atoms;
}

}  // namespace detail

/// Quantile-style bounds on the rate random variable
/// S = sum_{l=1}^q lambda C(E_l) + d C(E_{q+1}) with independent draws.
///   lower:     sup{r : Pr{S < r} < eps}
///   upper:     inf{r : Pr{S < r} > eps}
///   threshold: the unique r with Pr{S < r} = eps; requires a continuous and
///              strictly increasing energy cdf.
inline double rate_quantile(const EnergyModel& model, double lambda,
                            double eps, QuantileMode mode) {
  if (!(lambda > 0.0) || !(lambda <= 1.0)) {
    throw std::domain_error("rate_quantile: lambda must lie in (0,1]");
  }
  if (!(eps > 0.0) || !(eps < 1.0)) {
    throw std::domain_error("rate_quantile: eps must lie strictly in (0,1)");
  }
  const long long q = static_cast<long long>(std::floor(1.0 / lambda));
  const double d = 1.0 - static_cast<double>(q) * lambda;
  std::vector<double> weights(static_cast<std::size_t>(q), lambda);
  if (d > 1e-12) weights.push_back(d);

  if (!model.has_continuous_strictly_increasing_cdf()) {
    if (mode == QuantileMode::threshold) {
      throw std::domain_error(
          "rate_quantile: threshold mode needs a continuous strictly "
          "increasing energy cdf");
    }
    const auto atoms = detail::rate_sum_atoms(model, weights);
    constexpr double kTieTol = 1e-12;
    double cum = 0.0;
    for (auto it = atoms.begin(); it != atoms.end(); ++it) {
      cum += it->second;
      const bool last = std::next(it) == atoms.end();
      if (mode == QuantileMode::lower) {
        if (cum >= eps - kTieTol || last) return it->first;
      } else {
        // upper: skip past any atom where the cdf sits exactly at eps.
        if (cum > eps + kTieTol || last) return it->first;
      }
    }
    return 0.0;  // unreachable
  }

  // Continuous path: single closed-form term when q == 1 and d == 0,
  // otherwise lattice convolution with the last term mixed in exactly.
  if (weights.size() == 1) {
    return weights[0] * capacity(model.quantile(eps));
  }
  const detail::RateSumDistribution dist =
      detail::build_rate_sum(model, weights);
  double lo = 0.0;
  double hi = dist.upper + 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-12 * (1.0 + hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (dist.cdf(mid) < eps) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Message budget floor(n R - 2 n eta) clamped at zero bits.
inline long long adaptive_message_size(long long n, double rate, double eta) {
  if (n < 1) throw std::domain_error("adaptive_message_size: n must be >= 1");
  if (!(eta >= 0.0)) {
    throw std::domain_error("adaptive_message_size: eta must be >= 0");
  }
  const double raw = std::floor(static_cast<double>(n) * rate -
                                2.0 * static_cast<double>(n) * eta);
  return raw > 0.0 ? static_cast<long long>(raw) : 0;
}

/// Overhead budget precondition for the adaptive scheme at slack eta and
/// capacity cap chi:  n eta >= (q+1)(L delta + ceil(L^{2/3})(chi+delta) +
/// 2 L^{3/4} + chi + 1).
struct BudgetPrecondition {
  double lhs = 0.0;
  double rhs = 0.0;
  bool ok = false;
};

inline BudgetPrecondition adaptive_budget_precondition(long long n,
                                                       double eta,
                                                       double lambda,
                                                       double snr,
                                                       double chi) {
  const LinearBlockStructure b = block_structure(lambda, n);
  const double Ld = static_cast<double>(b.L);
  const double delta = adaptive_delta(snr, b.L);
  BudgetPrecondition out;
  out.lhs = static_cast<double>(n) * eta;
  out.rhs = static_cast<double>(b.q + 1) *
            (Ld * delta +
             std::ceil(std::pow(Ld, 2.0 / 3.0)) * (chi + delta) +
             2.0 * std::pow(Ld, 0.75) + chi + 1.0);
  out.ok = out.lhs >= out.rhs;
  return out;
}

/// Bit budget of the constant-energy block code, with the three largeness
/// conditions under which it is guaranteed.
struct ConstantEnergyBits {
  long long bits = 0;
  bool cond_length_vs_log4 = false;   // L >= (log2(2L + sqrt(L)))^4
  bool cond_length_vs_error = false;  // L/log2(L) >= max{12 sqrt 2, e^{0.4}(2 sqrt L + 1)}
  bool cond_backoff_margin = false;   // (2-sqrt 3) L^{3/4} >= (L-ceil(L^{2/3}))^{1/4}+1
};

inline ConstantEnergyBits constant_energy_log_M(long long L, double p_tilde) {
  if (L < 2) throw std::domain_error("constant_energy_log_M: L must be >= 2");
  if (!(p_tilde > 0.0)) {
    throw std::domain_error("constant_energy_log_M: energy must be positive");
  }
  const double Ld = static_cast<double>(L);
  const double data_slots = Ld - std::ceil(std::pow(Ld, 2.0 / 3.0));
  const double raw =
      std::floor(data_slots * capacity(p_tilde) - 2.0 * std::pow(Ld, 0.75));

  ConstantEnergyBits out;
  out.bits = raw > 0.0 ? static_cast<long long>(raw) : 0;
  out.cond_length_vs_log4 =
      Ld >= std::pow(std::log2(2.0 * Ld + std::sqrt(Ld)), 4.0);
  out.cond_length_vs_error =
      Ld / std::log2(Ld) >=
      std::max(12.0 * std::sqrt(2.0),
               std::exp(0.4) * (2.0 * std::sqrt(Ld) + 1.0));
  out.cond_backoff_margin =
      (2.0 - std::sqrt(3.0)) * std::pow(Ld, 0.75) >=
      std::pow(data_slots, 0.25) + 1.0;
  return out;
}

}  // namespace ehfb
