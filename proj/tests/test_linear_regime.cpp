#include <doctest.h>

#include <cmath>

#include "ehfb/linear_regime.hpp"
#include "ehfb/rng.hpp"

using namespace ehfb;

TEST_CASE("block structure exact divisions") {
  const LinearBlockStructure a = block_structure(0.5, 100);
  CHECK(a.L == 50);
  CHECK(a.q == 2);
  CHECK(a.d == 0.0);
  CHECK(a.rho == 2);
  CHECK(a.identities_hold);

  const LinearBlockStructure b = block_structure(0.3, 1000);
  CHECK(b.L == 300);
  CHECK(b.q == 3);
  CHECK(b.d == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(b.rho == 3);
  CHECK(b.last_block_len == 100);
  CHECK(b.identities_hold);

  const LinearBlockStructure c = block_structure(1.0, 64);
  CHECK(c.q == 1);
  CHECK(c.d == 0.0);
  CHECK(c.rho == 1);

  CHECK_THROWS_AS(block_structure(0.0, 100), std::domain_error);
  CHECK_THROWS_AS(block_structure(1.5, 100), std::domain_error);
}

TEST_CASE("quantizer step closed forms") {
  CHECK(adaptive_delta(1.0, 64) ==
        doctest::Approx(std::sqrt(6.0) / 2.0).epsilon(1e-15));
  CHECK(adaptive_delta(1.0, 1000000) ==
        doctest::Approx(std::sqrt(6.0) / 10.0).epsilon(1e-15));
  CHECK(adaptive_delta(1.0, 5000) ==
        doctest::Approx(0.5923530438729456).epsilon(1e-13));
}

TEST_CASE("quantize basics with unit step") {
  CHECK(quantize(1.9, 1.0) == 0.0);
  CHECK(quantize(2.0, 1.0) == 2.0);
  CHECK(quantize(0.0, 1.0) == 0.0);
  CHECK_THROWS_AS(quantize(-0.1, 1.0), std::domain_error);
}

TEST_CASE("quantizer sandwich holds exactly for random inputs") {
  CounterRng rng(17, StreamPurpose::energy_process, 12345);
  const Quantizer grid(adaptive_delta(1.0, 729));
  for (int i = 0; i < 100000; ++i) {
    const double a = 100.0 * rng.uniform01();
    const double g = grid(a);
    CHECK(g <= a);
    CHECK(a < g + 2.0 * grid.delta);
  }
}

TEST_CASE("quantize is monotone and fixes grid points") {
  const double delta = adaptive_delta(2.0, 4096);
  const Quantizer grid(delta);
  double prev = 0.0;
  for (int i = 0; i <= 2000; ++i) {
    const double g = grid(0.01 * i);
    CHECK(g >= prev);
    prev = g;
  }
  for (long long v = 0; v <= 64; ++v) {
    CHECK(grid(grid.grid_point(v)) == grid.grid_point(v));
  }
}

TEST_CASE("adaptive bit budget closed cases") {
  // l = 1e4, quantized capacity 1 bit: floor(9535 - 2000)
  CHECK(adaptive_bits(10000, 3.0, 1e-9) == 7535);
  // tiny block: negative raw budget clamps to zero
  CHECK(adaptive_bits(64, 0.0, 1.0) == 0);
  // P=1, L=5000: the zero cell captures e=1 since 2*delta > 1
  const double d5000 = adaptive_delta(1.0, 5000);
  CHECK(quantize(1.0, d5000) == 0.0);
  CHECK(adaptive_bits(5000, 1.0, d5000) == 0);
}

TEST_CASE("energy level estimator closed cases") {
  CHECK(estimate_energy_level(3.1, 1.0) == 2.0);
  CHECK(estimate_energy_level(2.0, 1.0) == 0.0);  // tie resolves downward
  CHECK(estimate_energy_level(0.5, 1.0) == 0.0);
  CHECK_THROWS_AS(estimate_energy_level(-1.0, 1.0), std::domain_error);
}

TEST_CASE("estimator recovers every grid point under bounded noise") {
  const double delta = adaptive_delta(1.0, 4096);
  for (long long v = 0; v <= 100; ++v) {
    const double g = 2.0 * static_cast<double>(v) * delta;
    for (int j = -99; j <= 99; ++j) {
      const double u = 0.01 * j * delta;
      CHECK(estimate_energy_level(g + 1.0 + u, delta) == g);
    }
  }
}

TEST_CASE("rate quantile: exponential closed form at lambda = 1") {
  const EnergyModel expo = EnergyModel::exponential(1.0);
  const double eps = 1.0 - std::exp(-1.0);
  CHECK(rate_quantile(expo, 1.0, eps, QuantileMode::threshold) ==
        doctest::Approx(0.5).epsilon(1e-9));
  // all three coincide for a continuous strictly increasing cdf
  CHECK(rate_quantile(expo, 1.0, eps, QuantileMode::lower) ==
        doctest::Approx(0.5).epsilon(1e-9));
  CHECK(rate_quantile(expo, 1.0, eps, QuantileMode::upper) ==
        doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("rate quantile: deterministic model degenerates to C(P)") {
  const EnergyModel det = EnergyModel::deterministic(1.0);
  for (double lambda : {0.5, 0.4, 1.0}) {
    for (double eps : {0.05, 0.5, 0.95}) {
      CHECK(rate_quantile(det, lambda, eps, QuantileMode::lower) ==
            doctest::Approx(0.5).epsilon(1e-12));
      CHECK(rate_quantile(det, lambda, eps, QuantileMode::upper) ==
            doctest::Approx(0.5).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(rate_quantile(det, 0.5, 0.5, QuantileMode::threshold),
                  std::domain_error);
}

TEST_CASE("rate quantile: two-point atoms and tie rules") {
  // lambda=1: S = C(E) with atoms at C(1)=0.5 (prob .5) and C(3)=1 (prob .5)
  const EnergyModel tp = EnergyModel::two_point(1.0, 3.0, 0.5);
  CHECK(rate_quantile(tp, 1.0, 0.3, QuantileMode::lower) == 0.5);
  CHECK(rate_quantile(tp, 1.0, 0.3, QuantileMode::upper) == 0.5);
  // at eps exactly on the atom's cdf value the two sides split
  CHECK(rate_quantile(tp, 1.0, 0.5, QuantileMode::lower) == 0.5);
  CHECK(rate_quantile(tp, 1.0, 0.5, QuantileMode::upper) == 1.0);
  CHECK(rate_quantile(tp, 1.0, 0.7, QuantileMode::lower) == 1.0);
  CHECK_THROWS_AS(rate_quantile(tp, 1.0, 0.5, QuantileMode::threshold),
                  std::domain_error);
}

TEST_CASE("rate quantile: convolution path against frozen fine-grid values") {
  // lambda=0.4 (q=2, d=0.2), exponential(1); oracle: 2^17-cell convolution
  // cross-checked against a 1e7-draw Monte Carlo quantile.
  const EnergyModel expo = EnergyModel::exponential(1.0);
  CHECK(rate_quantile(expo, 0.4, 0.3, QuantileMode::threshold) ==
        doctest::Approx(0.3209378372491814).epsilon(2e-3));
  CHECK(rate_quantile(expo, 0.4, 0.5, QuantileMode::threshold) ==
        doctest::Approx(0.4152117954733128).epsilon(2e-3));
  CHECK(rate_quantile(expo, 0.4, 0.7, QuantileMode::threshold) ==
        doctest::Approx(0.5175865402538755).epsilon(2e-3));
}

TEST_CASE("rate quantile: lower <= threshold <= upper and eps-monotone") {
  const EnergyModel expo = EnergyModel::exponential(1.0);
  double prev = 0.0;
  for (double eps : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    const double lo = rate_quantile(expo, 0.4, eps, QuantileMode::lower);
    const double th = rate_quantile(expo, 0.4, eps, QuantileMode::threshold);
    const double hi = rate_quantile(expo, 0.4, eps, QuantileMode::upper);
    CHECK(lo <= th + 1e-4);
    CHECK(th <= hi + 1e-4);
    CHECK(th + 1e-4 >= prev);
    prev = th;
  }
}

TEST_CASE("rate quantile: closed form matches the general path at lambda=1") {
  const EnergyModel uni = EnergyModel::uniform(1.0);
  for (double eps : {0.2, 0.5, 0.8}) {
    const double closed = capacity(uni.quantile(eps));
    CHECK(rate_quantile(uni, 1.0, eps, QuantileMode::threshold) ==
          doctest::Approx(closed).epsilon(1e-4));
  }
}

TEST_CASE("adaptive message size") {
  CHECK(adaptive_message_size(1000, 0.5, 0.1) == 300);
  CHECK(adaptive_message_size(1000, 0.1, 0.1) == 0);
  CHECK_THROWS_AS(adaptive_message_size(0, 0.5, 0.1), std::domain_error);
}

TEST_CASE("adaptive budget precondition evaluates both sides") {
  // q=1, L=500, P=1, chi=10, eta=0.05, n=1000: overhead far exceeds n*eta
  const BudgetPrecondition bad =
      adaptive_budget_precondition(1000, 0.05, 0.5, 1.0, 10.0);
  CHECK(bad.lhs == doctest::Approx(50.0));
  CHECK(bad.rhs > bad.lhs);
  CHECK_FALSE(bad.ok);
  // the pilot overhead scales like (lambda n)^{5/6}, so a generous slack
  // passes once n is large
  const BudgetPrecondition good =
      adaptive_budget_precondition(6000000, 0.5, 0.5, 1.0, 10.0);
  CHECK(good.lhs >= good.rhs);
  CHECK(good.ok);
}

TEST_CASE("constant-energy bit budget and largeness conditions") {
  const ConstantEnergyBits a = constant_energy_log_M(10000, 3.0);
  CHECK(a.bits == 7535);
  CHECK_FALSE(a.cond_length_vs_log4);  // 1e4 < (log2(2e4+100))^4

  // smallest L satisfying the first condition, found by scanning the
  // analytic crossover near 9.44e4
  CHECK_FALSE(constant_energy_log_M(94413, 1.0).cond_length_vs_log4);
  CHECK(constant_energy_log_M(94414, 1.0).cond_length_vs_log4);

  // L=64 at capacity 1/2 bit: floor(48*0.5 - 45.25) < 0 clamps to zero
  CHECK(constant_energy_log_M(64, std::sqrt(2.0) - 1.0).bits == 0);
  CHECK_THROWS_AS(constant_energy_log_M(1, 1.0), std::domain_error);
}
