// Acceptance suite: one line per criterion, nonzero exit if any fail.
//
// Workers default to 2; the estimates themselves are worker-count invariant
// by construction (criterion 9 checks exactly that).

#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ehfb/converse.hpp"
#include "ehfb/montecarlo.hpp"
#include "ehfb/runner.hpp"
#include "ehfb/save_transmit.hpp"

using namespace ehfb;
using nlohmann::json;

namespace {

int g_failures = 0;
constexpr int kWorkers = 2;

void criterion(int number, const char* title, const std::function<bool(std::string&)>& body) {
  std::string detail;
  bool ok = false;
  try {
    ok = body(detail);
  } catch (const std::exception& e) {
    ok = false;
    detail = std::string("exception: ") + e.what();
  }
  std::printf("criterion %d: %s — %s%s%s\n", number, ok ? "PASS" : "FAIL",
              title, detail.empty() ? "" : " | ", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

bool chernoff_dominance(std::string& detail) {
  bool ok = true;
  const double eps1 = 0.1;
  int cell = 0;
  for (bool exponential : {false, true}) {
    for (double P : {0.5, 1.0}) {
      const EnergyModel model = exponential ? EnergyModel::exponential(P)
                                            : EnergyModel::deterministic(P);
      for (long long L : {1LL, 4LL}) {
        for (long long n : {200LL, 1000LL}) {
          const SavingLength sl = saving_length(model, L, n, eps1);
          if (!sl.feasible || !sl.m) {
            detail += " infeasible cell";
            ok = false;
            continue;
          }
          const double bound = designed_outage_bound(model, L, n, *sl.m, eps1);
          const SimEstimate est = simulate_outage(
              model, P, n, L, *sl.m,
              {100000, static_cast<std::uint64_t>(1000 + cell), kWorkers});
          ++cell;
          if (!(est.estimate <= bound + 3.0 * est.std_error) ||
              !(est.estimate <= eps1 + 3.0 * est.std_error)) {
            char buf[160];
            std::snprintf(buf, sizeof(buf),
                          " [%s P=%.1f L=%lld n=%lld: est %.4g vs bound %.4g]",
                          model.name().c_str(), P, L, n, est.estimate, bound);
            detail += buf;
            ok = false;
          }
        }
      }
    }
  }
  return ok;
}

bool event_identities(std::string& detail) {
  // The simulator checks the stopped-sequence identity, the encoder
  // containment, and the block aggregation on every trajectory and throws
  // on any breach; the zero-energy model pins the trivial case.
  for (const EnergyModel& m :
       {EnergyModel::deterministic(1.0), EnergyModel::exponential(1.0)}) {
    for (long long L : {1LL, 4LL}) {
      simulate_outage(m, 1.0, 200, L, 60, {10000, 77, kWorkers});
    }
  }
  simulate_outage(EnergyModel::exponential(1.0), 1.0, 100, 8, 3,
                  {10000, 78, kWorkers});
  const SimEstimate zero = simulate_outage(
      EnergyModel::zero_energy_for_testing(), 1.0, 10, 1, 3, {10000, 79, 1});
  if (zero.estimate != 1.0) {
    detail = "zero-energy estimate below one";
    return false;
  }
  return true;
}

bool info_density_moments(std::string& detail) {
  const InfoDensitySim moments = simulate_info_density(1.0, 1, {1000000, 101, kWorkers});
  const double sigma2 = 1.0406844905028039;
  bool ok = true;
  if (std::fabs(moments.mean - 0.5) > 4.0 * moments.mean_std_error) {
    detail += " mean outside 4 stderr";
    ok = false;
  }
  if (std::fabs(moments.variance - sigma2) > 0.01 * sigma2) {
    detail += " variance off by more than 1%";
    ok = false;
  }
  const InfoDensitySim gap = simulate_info_density(1.0, 100, {100000, 102, kWorkers});
  if (!(gap.be_sup_gap <= tau1(1.0) / 10.0)) {
    detail += " sup-gap above tau1/sqrt(n)";
    ok = false;
  }
  if (!(gap.be_sup_gap <= 0.05)) {
    detail += " sup-gap above 0.05";
    ok = false;
  }
  char buf[96];
  std::snprintf(buf, sizeof(buf), " (mean %.5f, var %.5f, gap %.4f)",
                moments.mean, moments.variance, gap.be_sup_gap);
  detail += buf;
  return ok;
}

bool converse_variance(std::string& detail) {
  bool ok = true;
  for (bool exponential : {false, true}) {
    const EnergyModel model = exponential ? EnergyModel::exponential(1.0)
                                          : EnergyModel::deterministic(1.0);
    for (long long L : {1LL, 4LL}) {
      const ConverseStatsSim sim =
          simulate_converse_stats(model, L, {1000000, 201, kWorkers});
      const double sigma2 = std::pow(converse_stats(model, L, 0.5).sigma_conv, 2);
      if (std::fabs(sim.variance - sigma2) > 0.02 * sigma2) {
        char buf[120];
        std::snprintf(buf, sizeof(buf), " [%s L=%lld: mc %.5f vs %.5f]",
                      model.name().c_str(), L, sim.variance, sigma2);
        detail += buf;
        ok = false;
      }
    }
  }
  return ok;
}

bool second_order_sandwich(std::string& detail) {
  bool ordering_ok = true;
  int gap_fails_growing = 0;
  int gap_fails_constant = 0;
  int gap_cells = 0;
  for (int fam = 0; fam < 3; ++fam) {
    for (double P : {0.5, 1.0, 2.0, 4.0}) {
      const EnergyModel model = fam == 0   ? EnergyModel::deterministic(P)
                                : fam == 1 ? EnergyModel::exponential(P)
                                           : EnergyModel::uniform(P);
      for (double eps : {0.01, 0.05, 0.1, 0.2, 0.4}) {
        for (const Regime& regime :
             {Regime::growing_L(), Regime::constant_L(1)}) {
          const SandwichReport s = sandwich_report(model, regime, eps);
          if (!s.ordering_ok) ordering_ok = false;
          if (eps <= 0.1 && s.gap_checked) {
            ++gap_cells;
            if (!s.gap_ok) {
              ++(regime.growing ? gap_fails_growing : gap_fails_constant);
            }
          }
        }
      }
    }
  }
  if (!ordering_ok) detail += " ordering violated;";
  if (gap_fails_growing + gap_fails_constant > 0) {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  " gap bound violated at %d/%d growing-L and %d/%d "
                  "constant-L cells",
                  gap_fails_growing, gap_cells / 2, gap_fails_constant,
                  gap_cells / 2);
    detail += buf;
  } else {
    detail += " ordering and gap bound hold at every cell";
  }
  return ordering_ok && gap_fails_growing + gap_fails_constant == 0;
}

bool saving_asymptotics(std::string& detail) {
  const EnergyModel det = EnergyModel::deterministic(1.0);
  const double limit = std::sqrt(4.0 * std::log2(10.0));
  double prev = 1e9;
  bool ok = true;
  double final_dev = 0.0;
  for (long long n : {10000LL, 100000LL, 1000000LL}) {
    const SavingLength sl = saving_length(det, 1, n, 0.1);
    if (!sl.m) return false;
    const double dev =
        std::fabs(static_cast<double>(*sl.m) / std::sqrt(static_cast<double>(n)) -
                  limit) /
        limit;
    if (dev >= prev) {
      detail += " deviation not decreasing";
      ok = false;
    }
    prev = dev;
    final_dev = dev;
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), " (final deviation %.3f%%)", 100.0 * final_dev);
  detail += buf;
  return ok && final_dev < 0.10;
}

bool linear_capacity(std::string& detail) {
  const EnergyModel expo = EnergyModel::exponential(1.0);
  bool ok = true;

  const double eps_star = 1.0 - std::exp(-1.0);
  const double closed = rate_quantile(expo, 1.0, eps_star, QuantileMode::threshold);
  if (std::fabs(closed - 0.5) > 1e-6) {
    detail += " closed form off";
    ok = false;
  }
  const SimEstimate mc1 =
      empirical_rate_quantile(expo, 1.0, eps_star, {1000000, 301, kWorkers});
  if (std::fabs(closed - mc1.estimate) > 0.01) {
    detail += " lambda=1 MC mismatch";
    ok = false;
  }

  int idx = 0;
  for (double eps : {0.3, 0.5, 0.7}) {
    const double conv = rate_quantile(expo, 0.4, eps, QuantileMode::threshold);
    const SimEstimate mc = empirical_rate_quantile(
        expo, 0.4, eps, {1000000, static_cast<std::uint64_t>(310 + idx++), kWorkers});
    if (std::fabs(conv - mc.estimate) > 3.0 * mc.std_error) {
      char buf[120];
      std::snprintf(buf, sizeof(buf),
                    " [eps=%.1f: conv %.5f vs mc %.5f (se %.2g)]", eps, conv,
                    mc.estimate, mc.std_error);
      detail += buf;
      ok = false;
    }
  }
  return ok;
}

bool energy_estimation(std::string& detail) {
  bool ok = true;
  int idx = 0;
  for (bool exponential : {false, true}) {
    const EnergyModel model = exponential ? EnergyModel::exponential(1.0)
                                          : EnergyModel::deterministic(1.0);
    for (long long L : {4096LL, 1000000LL}) {
      const SimEstimate est = simulate_energy_estimation(
          model, L, {10000, static_cast<std::uint64_t>(400 + idx++), kWorkers});
      const double floor_bound =
          1.0 - std::pow(static_cast<double>(L), -1.0 / 6.0);
      if (!(est.estimate >= floor_bound - 3.0 * est.std_error)) {
        char buf[120];
        std::snprintf(buf, sizeof(buf), " [%s L=%lld: %.4f < %.4f]",
                      model.name().c_str(), L, est.estimate, floor_bound);
        detail += buf;
        ok = false;
      }
    }
  }
  return ok;
}

bool cli_determinism(std::string& detail) {
  const std::vector<const char*> configs = {
      R"({"command":"bounds","model":{"family":"deterministic","params":{"P":1.0}},
          "n":[100,10000],"L":[1,4],"eps":[0.1,0.5]})",
      R"({"command":"second-order","model":{"family":"exponential","params":{"P":1.0}},
          "regime":"constant-L","L":[1,8],"eps":[0.05,0.2]})",
      R"({"command":"design","model":{"family":"deterministic","params":{"P":1.0}},
          "n":[1000],"L":[1],"eps":[0.6],"eps1":[0.1]})",
      R"({"command":"linear-capacity","model":{"family":"exponential","params":{"P":1.0}},
          "lambda":[1.0,0.4],"eps":[0.3,0.5]})",
      R"({"command":"outage-sim","model":{"family":"exponential","params":{"P":1.0}},
          "n":[100],"L":[2],"eps1":[0.1],"trials":4000,"seed":5})",
      R"({"command":"quantile-sim","model":{"family":"exponential","params":{"P":1.0}},
          "lambda":[0.4],"eps":[0.5],"trials":10000,"seed":5})",
      R"({"command":"adaptive-sim","model":{"family":"exponential","params":{"P":1.0}},
          "lambda":[0.5],"n":[20000],"eta":[0.02],"eps":0.3,"trials":2000,"seed":5})",
      R"({"command":"selftest","trials":1000,"seed":5})",
  };
  for (const char* raw : configs) {
    json cfg = json::parse(raw);
    cfg["workers"] = 1;
    const cli::RunResult a = cli::run(cfg);
    const cli::RunResult a2 = cli::run(cfg);
    cfg["workers"] = 8;
    const cli::RunResult b = cli::run(cfg);
    if (a.exit_code != 0 || a.output != b.output || a.output != a2.output) {
      detail += std::string(" [") + cfg["command"].get<std::string>() + "]";
      return false;
    }
  }
  return true;
}

}  // namespace

int main() {
  criterion(1, "Chernoff dominance of the Monte Carlo outage estimate",
            chernoff_dominance);
  criterion(2, "per-trajectory event identities hold without exception",
            event_identities);
  criterion(3, "information-density moments and Berry-Esseen sup-gap",
            info_density_moments);
  criterion(4, "converse statistic variance matches sigma^2 within 2%",
            converse_variance);
  criterion(5, "second-order sandwich ordering and explicit gap bound",
            second_order_sandwich);
  criterion(6, "saving-phase length approaches its asymptotic coefficient",
            saving_asymptotics);
  criterion(7, "linear-regime capacity: closed form, convolution, Monte Carlo",
            linear_capacity);
  criterion(8, "energy-level estimation success rate beats the analytic floor",
            energy_estimation);
  criterion(9, "byte-identical CLI output across reruns and worker counts",
            cli_determinism);

  if (g_failures > 0) {
    std::printf("%d criterion(s) failed\n", g_failures);
  } else {
    std::printf("all criteria passed\n");
  }
  return g_failures;
}
