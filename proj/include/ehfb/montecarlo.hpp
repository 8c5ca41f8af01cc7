#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <vector>

#include "ehfb/energy_model.hpp"
#include "ehfb/gaussian.hpp"
#include "ehfb/linear_regime.hpp"
#include "ehfb/math.hpp"
#include "ehfb/rng.hpp"

// Stochastic oracles that validate the analytic bounds: energy-outage
// simulation, information-density simulation, converse-statistic moments,
// pilot-based energy-level estimation, rate-quantile estimation, and the
// adaptive-scheme bit-budget simulation.
//
// Every operation is embarrassingly parallel across trials.  Trials are
// keyed by (seed, purpose, trial index) and partial results are accumulated
// over fixed-size chunks combined in chunk order, so estimates are
// bit-identical for any worker count.

namespace ehfb {

/// Per-trajectory breach of an identity that holds by construction; points
/// at an implementation bug, never at bad luck.
class ConsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SimEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  long long trials = 0;
  std::uint64_t seed = 0;
};

struct McOptions {
  long long trials = 0;
  std::uint64_t seed = 0;
  int workers = 1;
};

namespace detail {

constexpr long long kChunkTrials = 4096;

template <typename Partial, typename ChunkFn>
std::vector<Partial> run_chunked(long long trials, int workers, ChunkFn fn) {
  if (trials < 1) throw std::domain_error("monte carlo: trials must be >= 1");
  const long long nchunks = (trials + kChunkTrials - 1) / kChunkTrials;
  std::vector<Partial> parts(static_cast<std::size_t>(nchunks));

  auto run_range = [&](long long chunk) {
    const long long begin = chunk * kChunkTrials;
    const long long end = std::min(trials, begin + kChunkTrials);
    parts[static_cast<std::size_t>(chunk)] = fn(begin, end);
  };

  const int nw = std::max(1, workers);
  if (nw == 1 || nchunks == 1) {
    for (long long c = 0; c < nchunks; ++c) run_range(c);
    return parts;
  }

  std::atomic<long long> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const long long c = next.fetch_add(1);
      if (c >= nchunks) return;
      try {
        run_range(c);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const int spawn = static_cast<int>(
      std::min<long long>(nw, nchunks));
  pool.reserve(static_cast<std::size_t>(spawn));
  for (int i = 0; i < spawn; ++i) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
  return parts;
}

inline SimEstimate probability_estimate(long long successes, long long trials,
                                        std::uint64_t seed) {
  SimEstimate e;
  e.trials = trials;
  e.seed = seed;
  e.estimate = static_cast<double>(successes) / static_cast<double>(trials);
  e.std_error =
      std::sqrt(e.estimate * (1.0 - e.estimate) / static_cast<double>(trials));
  return e;
}

}  // namespace detail

/// Monte Carlo estimate of the energy-outage probability
/// Pr{ exists k <= n : sum_{i<=k} X_i^2 >= sum_{i<=m+k} E_i }
/// with X i.i.d. N(0,P) and E block-i.i.d. with coherence time L.
///
/// Every trajectory additionally verifies three identities that hold by
/// construction and aborts with ConsistencyError on any breach:
///   - the stopped-sequence recursion reproduces the union event exactly,
///   - a clipping encoder mismatch during the transmission phase implies
///     the union event,
///   - the union event implies the aggregated per-block outage event.
inline SimEstimate simulate_outage(const EnergyModel& model, double snr,
                                   long long n, long long L, long long m,
                                   const McOptions& opts) {
  if (n < 1 || L < 1 || m < 0) {
    throw std::domain_error("simulate_outage: need n >= 1, L >= 1, m >= 0");
  }
  if (!(snr > 0.0)) {
    throw std::domain_error("simulate_outage: snr must be positive");
  }
  const long long nbar = ((n + L - 1) / L) * L;
  const long long mbar = (m / L) * L;
  const long long energy_blocks = (m + n + L - 1) / L;
  const long long x_blocks = nbar / L;
  const double sqrt_p = std::sqrt(snr);

  auto chunk_fn = [&](long long begin, long long end) -> long long {
    std::vector<double> x(static_cast<std::size_t>(nbar));
    std::vector<double> e(static_cast<std::size_t>(energy_blocks));
    long long outages = 0;

    for (long long trial = begin; trial < end; ++trial) {
      CounterRng rng(opts.seed, StreamPurpose::outage,
                     static_cast<std::uint64_t>(trial));
      for (long long i = 0; i < nbar; ++i) {
        x[static_cast<std::size_t>(i)] = sqrt_p * rng.gaussian();
      }
      for (long long b = 0; b < energy_blocks; ++b) {
        e[static_cast<std::size_t>(b)] = model.sample(rng);
      }
      auto energy_at = [&](long long pos) {  // 1-based channel use
        return e[static_cast<std::size_t>((pos - 1) / L)];
      };

      // Union event over the transmission phase.
      double cum_x = 0.0;
      double cum_e = 0.0;
      for (long long pos = 1; pos <= m; ++pos) cum_e += energy_at(pos);
      const double saved_energy = cum_e;
      bool outage = false;
      for (long long k = 1; k <= n; ++k) {
        cum_x += x[static_cast<std::size_t>(k - 1)] *
                 x[static_cast<std::size_t>(k - 1)];
        cum_e += energy_at(m + k);
        if (cum_x >= cum_e) {
          outage = true;
          break;
        }
      }
      if (outage) ++outages;

      // Stopped-sequence recursion: start from the saved energy, add
      // E_k - X_{k-m}^2 per transmission step, freeze at the first
      // nonpositive value.  Freezing begins with the first transmission
      // step (a zero saved-energy prefix is not itself an outage: models
      // with an atom at zero can still fund the codeword from arrivals
      // inside the transmission phase).  Final value <= 0 must coincide
      // with the union event on every trajectory, for every m >= 0.
      {
        double b_value = saved_energy;
        bool frozen = false;
        for (long long k = 1; k <= n && !frozen; ++k) {
          b_value += energy_at(m + k) - x[static_cast<std::size_t>(k - 1)] *
                                            x[static_cast<std::size_t>(k - 1)];
          frozen = b_value <= 0.0;
        }
        if (frozen != outage) {
          throw ConsistencyError(
              "simulate_outage: stopped-sequence event disagrees with the "
              "outage union");
        }
      }

      // Clipping encoder: transmit x only when the running energy budget
      // allows it.  A mismatch in the transmission phase implies outage.
      {
        double cum_energy = 0.0;
        double cum_sent = 0.0;
        bool mismatch = false;
        for (long long pos = 1; pos <= m + n; ++pos) {
          cum_energy += energy_at(pos);
          const double intended =
              pos <= m ? 0.0 : x[static_cast<std::size_t>(pos - m - 1)];
          if (intended * intended <= cum_energy - cum_sent) {
            cum_sent += intended * intended;
          } else if (intended != 0.0) {
            mismatch = true;
            break;
          }
        }
        if (mismatch && !outage) {
          throw ConsistencyError(
              "simulate_outage: encoder mismatch outside the outage union");
        }
      }

      // Aggregated per-block event with floor(m/L)-1 saved blocks; must be
      // implied by the per-symbol union.
      if (outage) {
        const long long shift = mbar / L - 1;
        bool block_event = false;
        double block_x = 0.0;
        double block_e = 0.0;
        for (long long b = 0; b < shift; ++b) {
          block_e += static_cast<double>(L) * e[static_cast<std::size_t>(b)];
        }
        for (long long ell = 1; ell <= x_blocks && !block_event; ++ell) {
          for (long long j = 0; j < L; ++j) {
            const double xv =
                x[static_cast<std::size_t>((ell - 1) * L + j)];
            block_x += xv * xv;
          }
          const long long eb = shift + ell;
          if (eb >= 1) {
            block_e += static_cast<double>(L) *
                       e[static_cast<std::size_t>(eb - 1)];
          }
          block_event = block_x >= block_e;
        }
        if (!block_event) {
          throw ConsistencyError(
              "simulate_outage: per-symbol outage without aggregated-block "
              "outage");
        }
      }
    }
    return outages;
  };

  const auto parts =
      detail::run_chunked<long long>(opts.trials, opts.workers, chunk_fn);
  long long total = 0;
  for (long long c : parts) total += c;
  return detail::probability_estimate(total, opts.trials, opts.seed);
}

/// Empirical moments of the per-symbol information density and the
/// Berry-Esseen sup-gap of the normalized n-symbol sum.
struct InfoDensitySim {
  double mean = 0.0;            // bits per channel use
  double mean_std_error = 0.0;
  double variance = 0.0;
  double third_abs_moment = 0.0;  // about the analytic mean
  double be_sup_gap = 0.0;        // sup over the evaluation grid
  long long symbols = 0;
  long long trials = 0;
  std::uint64_t seed = 0;
};

inline InfoDensitySim simulate_info_density(double snr, long long n,
                                            const McOptions& opts) {
  if (n < 1) throw std::domain_error("simulate_info_density: n must be >= 1");
  const InfoDensityStats stats = info_density_stats(snr);
  const double scale = kLog2E / (2.0 * (1.0 + snr));
  const double sqrt_p = std::sqrt(snr);
  constexpr int kGridPoints = 101;
  std::array<double, kGridPoints> grid{};
  for (int j = 0; j < kGridPoints; ++j) grid[j] = -5.0 + 0.1 * j;

  struct Partial {
    double sum_v = 0.0;
    double sum_v2 = 0.0;
    double sum_abs3 = 0.0;
    std::array<long long, kGridPoints> counts{};
  };

  auto chunk_fn = [&](long long begin, long long end) -> Partial {
    Partial p;
    for (long long trial = begin; trial < end; ++trial) {
      CounterRng rng(opts.seed, StreamPurpose::info_density,
                     static_cast<std::uint64_t>(trial));
      double sum = 0.0;
      for (long long k = 0; k < n; ++k) {
        const double xv = sqrt_p * rng.gaussian();
        const double zv = rng.gaussian();
        const double v = stats.mu +
                         scale * (-snr * zv * zv + 2.0 * xv * zv + xv * xv);
        p.sum_v += v;
        p.sum_v2 += v * v;
        const double centered = std::fabs(v - stats.mu);
        p.sum_abs3 += centered * centered * centered;
        sum += v;
      }
      const double normalized =
          (sum - static_cast<double>(n) * stats.mu) /
          (stats.sigma * std::sqrt(static_cast<double>(n)));
      for (int j = 0; j < kGridPoints; ++j) {
        if (normalized <= grid[j]) ++p.counts[static_cast<std::size_t>(j)];
      }
    }
    return p;
  };

  const auto parts =
      detail::run_chunked<Partial>(opts.trials, opts.workers, chunk_fn);
  double sum_v = 0.0;
  double sum_v2 = 0.0;
  double sum_abs3 = 0.0;
  std::array<long long, kGridPoints> counts{};
  for (const auto& p : parts) {
    sum_v += p.sum_v;
    sum_v2 += p.sum_v2;
    sum_abs3 += p.sum_abs3;
    for (int j = 0; j < kGridPoints; ++j) {
      counts[static_cast<std::size_t>(j)] +=
          p.counts[static_cast<std::size_t>(j)];
    }
  }

  InfoDensitySim out;
  out.symbols = n * opts.trials;
  out.trials = opts.trials;
  out.seed = opts.seed;
  const double count = static_cast<double>(out.symbols);
  out.mean = sum_v / count;
  out.variance = (sum_v2 - count * out.mean * out.mean) / (count - 1.0);
  out.mean_std_error = std::sqrt(out.variance / count);
  out.third_abs_moment = sum_abs3 / count;
  double gap = 0.0;
  for (int j = 0; j < kGridPoints; ++j) {
    const double empirical =
        static_cast<double>(counts[static_cast<std::size_t>(j)]) /
        static_cast<double>(opts.trials);
    gap = std::max(gap, std::fabs(empirical - normal_cdf(grid[j])));
  }
  out.be_sup_gap = gap;
  return out;
}

/// Empirical mean and variance of the per-block converse statistic
/// (log2(e)/(2(1+P))) (-P sum Z_i^2 + 2 sqrt(E) sum Z_i + L E).
struct ConverseStatsSim {
  double mean = 0.0;
  double variance = 0.0;
  long long trials = 0;
  std::uint64_t seed = 0;
};

inline ConverseStatsSim simulate_converse_stats(const EnergyModel& model,
                                                long long L,
                                                const McOptions& opts) {
  if (L < 1) throw std::domain_error("simulate_converse_stats: L must be >= 1");
  const double P = model.mean();
  const double scale = kLog2E / (2.0 * (1.0 + P));

  struct Partial {
    double sum = 0.0;
    double sum_sq = 0.0;
  };
  auto chunk_fn = [&](long long begin, long long end) -> Partial {
    Partial p;
    for (long long trial = begin; trial < end; ++trial) {
      CounterRng rng(opts.seed, StreamPurpose::converse_stats,
                     static_cast<std::uint64_t>(trial));
      const double energy = model.sample(rng);
      double sum_z = 0.0;
      double sum_z2 = 0.0;
      for (long long i = 0; i < L; ++i) {
        const double z = rng.gaussian();
        sum_z += z;
        sum_z2 += z * z;
      }
      const double v = scale * (-P * sum_z2 + 2.0 * std::sqrt(energy) * sum_z +
                                static_cast<double>(L) * energy);
      p.sum += v;
      p.sum_sq += v * v;
    }
    return p;
  };

  const auto parts =
      detail::run_chunked<Partial>(opts.trials, opts.workers, chunk_fn);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (const auto& p : parts) {
    sum += p.sum;
    sum_sq += p.sum_sq;
  }
  ConverseStatsSim out;
  out.trials = opts.trials;
  out.seed = opts.seed;
  const double count = static_cast<double>(opts.trials);
  out.mean = sum / count;
  out.variance = (sum_sq - count * out.mean * out.mean) / (count - 1.0);
  return out;
}

/// Success probability of the pilot-based energy-level estimator: a block
/// sends ceil(sqrt(L)) constant symbols sqrt(quantize(E)); the destination
/// recovers the quantized level from the received mean square.
inline SimEstimate simulate_energy_estimation(const EnergyModel& model,
                                              long long L,
                                              const McOptions& opts) {
  if (L < 2) {
    throw std::domain_error("simulate_energy_estimation: L must be >= 2");
  }
  const double delta = adaptive_delta(model.mean(), L);
  const long long pilots = static_cast<long long>(
      std::ceil(std::sqrt(static_cast<double>(L))));

  auto chunk_fn = [&](long long begin, long long end) -> long long {
    long long successes = 0;
    for (long long trial = begin; trial < end; ++trial) {
      CounterRng rng(opts.seed, StreamPurpose::energy_estimation,
                     static_cast<std::uint64_t>(trial));
      const double energy = model.sample(rng);
      const double g = quantize(energy, delta);
      const double amplitude = std::sqrt(g);
      double mean_sq = 0.0;
      for (long long i = 0; i < pilots; ++i) {
        const double y = amplitude + rng.gaussian();
        mean_sq += y * y;
      }
      mean_sq /= static_cast<double>(pilots);
      if (estimate_energy_level(mean_sq, delta) == g) ++successes;
    }
    return successes;
  };

  const auto parts =
      detail::run_chunked<long long>(opts.trials, opts.workers, chunk_fn);
  long long total = 0;
  for (long long c : parts) total += c;
  return detail::probability_estimate(total, opts.trials, opts.seed);
}

/// Empirical lower eps-quantile of S = sum_l lambda C(E_l) + d C(E_{q+1})
/// with a bootstrap standard error over 100 resamples.
inline SimEstimate empirical_rate_quantile(const EnergyModel& model,
                                           double lambda, double eps,
                                           const McOptions& opts) {
  if (!(lambda > 0.0) || !(lambda <= 1.0)) {
    throw std::domain_error("empirical_rate_quantile: lambda must be in (0,1]");
  }
  if (!(eps > 0.0) || !(eps < 1.0)) {
    throw std::domain_error("empirical_rate_quantile: eps must be in (0,1)");
  }
  const long long q = static_cast<long long>(std::floor(1.0 / lambda));
  const double d = 1.0 - static_cast<double>(q) * lambda;
  const bool has_tail = d > 1e-12;

  std::vector<double> samples(static_cast<std::size_t>(opts.trials));
  auto chunk_fn = [&](long long begin, long long end) -> int {
    for (long long trial = begin; trial < end; ++trial) {
      CounterRng rng(opts.seed, StreamPurpose::rate_quantile,
                     static_cast<std::uint64_t>(trial));
      double s = 0.0;
      for (long long ell = 0; ell < q; ++ell) {
        s += lambda * capacity(model.sample(rng));
      }
      if (has_tail) s += d * capacity(model.sample(rng));
      samples[static_cast<std::size_t>(trial)] = s;
    }
    return 0;
  };
  detail::run_chunked<int>(opts.trials, opts.workers, chunk_fn);

  const std::size_t order = static_cast<std::size_t>(std::min<long long>(
      opts.trials - 1,
      std::max<long long>(
          0, static_cast<long long>(
                 std::ceil(eps * static_cast<double>(opts.trials))) -
                 1)));
  std::vector<double> work = samples;
  std::nth_element(work.begin(), work.begin() + static_cast<std::ptrdiff_t>(order),
                   work.end());
  const double point = work[order];

  // Bootstrap over full resamples from a single sequential substream.
  constexpr int kResamples = 100;
  CounterRng boot(opts.seed, StreamPurpose::bootstrap, 0);
  std::vector<double> resample(samples.size());
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int b = 0; b < kResamples; ++b) {
    for (std::size_t i = 0; i < resample.size(); ++i) {
      const std::uint64_t idx = boot.next_u64() %
                                static_cast<std::uint64_t>(samples.size());
      resample[i] = samples[static_cast<std::size_t>(idx)];
    }
    std::nth_element(resample.begin(),
                     resample.begin() + static_cast<std::ptrdiff_t>(order),
                     resample.end());
    const double v = resample[order];
    sum += v;
    sum_sq += v * v;
  }
  const double mean_b = sum / kResamples;

  SimEstimate out;
  out.trials = opts.trials;
  out.seed = opts.seed;
  out.estimate = point;
  out.std_error =
      std::sqrt(std::max(0.0, (sum_sq - kResamples * mean_b * mean_b) /
                                  (kResamples - 1.0)));
  return out;
}

/// Probability that the adaptive scheme's realized bit budget
/// sum_l gamma(L_l, E_l) falls short of floor(n R - 2 n eta).
inline SimEstimate simulate_adaptive_budget(const EnergyModel& model,
                                            double lambda, long long n,
                                            double eta, double rate,
                                            const McOptions& opts) {
  const LinearBlockStructure b = block_structure(lambda, n);
  const long long log_m = adaptive_message_size(n, rate, eta);
  const long long last_len =
      static_cast<long long>(std::floor(b.d * static_cast<double>(n)));
  const double delta_main = adaptive_delta(model.mean(), b.L);
  const double delta_last =
      last_len >= 1 ? adaptive_delta(model.mean(), last_len) : 0.0;

  auto chunk_fn = [&](long long begin, long long end) -> long long {
    long long shortfalls = 0;
    for (long long trial = begin; trial < end; ++trial) {
      CounterRng rng(opts.seed, StreamPurpose::adaptive_budget,
                     static_cast<std::uint64_t>(trial));
      long long total = 0;
      for (long long ell = 0; ell < b.rho; ++ell) {
        total += adaptive_bits(b.L, model.sample(rng), delta_main);
      }
      if (last_len >= 1) {
        total += adaptive_bits(last_len, model.sample(rng), delta_last);
      }
      if (total < log_m) ++shortfalls;
    }
    return shortfalls;
  };

  const auto parts =
      detail::run_chunked<long long>(opts.trials, opts.workers, chunk_fn);
  long long total = 0;
  for (long long c : parts) total += c;
  return detail::probability_estimate(total, opts.trials, opts.seed);
}

}  // namespace ehfb
