#pragma once

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ehfb/converse.hpp"
#include "ehfb/energy_model.hpp"
#include "ehfb/linear_regime.hpp"
#include "ehfb/model_json.hpp"
#include "ehfb/montecarlo.hpp"
#include "ehfb/save_transmit.hpp"

// Config-driven front end shared by the command-line tool and the test
// suite.  A run takes one JSON config, sweeps the cartesian grid of its
// list-valued parameters, and produces one output record per grid point as
// CSV or JSON.
//
// Determinism contract: identical configs produce byte-identical output for
// any worker count.  The embedded resolved config therefore excludes the
// execution-only fields (workers, output path), which cannot influence any
// computed value.

namespace ehfb::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitConsistency = 3;

struct RunResult {
  int exit_code = kExitOk;
  std::string output;      // full file contents (CSV or JSON)
  std::string diagnostic;  // single-line error message when exit_code != 0
};

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::vector<double> number_list(const json& cfg, const char* key) {
  if (!cfg.contains(key)) {
    throw ValidationError(std::string("config: missing '") + key + "'");
  }
  const json& v = cfg.at(key);
  std::vector<double> out;
  if (v.is_array()) {
    for (const auto& x : v) out.push_back(x.get<double>());
  } else {
    out.push_back(v.get<double>());
  }
  if (out.empty()) {
    throw ValidationError(std::string("config: '") + key + "' is empty");
  }
  return out;
}

inline std::vector<long long> integer_list(const json& cfg, const char* key) {
  std::vector<long long> out;
  for (double v : number_list(cfg, key)) {
    out.push_back(static_cast<long long>(v));
  }
  return out;
}

inline double scalar(const json& cfg, const char* key, double fallback) {
  return cfg.contains(key) ? cfg.at(key).get<double>() : fallback;
}

inline void require_probability(double eps, const char* what) {
  if (!(eps > 0.0) || !(eps < 1.0)) {
    throw ValidationError(std::string("config: ") + what +
                          " must lie strictly in (0,1)");
  }
}

/// Rows keep insertion order so the CSV column order matches the documented
/// header exactly.
struct Table {
  std::vector<ojson> rows;

  void add(ojson row) { rows.push_back(std::move(row)); }
};

inline std::string render_csv(const ojson& resolved, const Table& table) {
  std::string out = "# config " + resolved.dump() + "\n";
  if (!table.rows.empty()) {
    bool first = true;
    for (auto it = table.rows.front().begin(); it != table.rows.front().end();
         ++it) {
      if (!first) out += ',';
      out += it.key();
      first = false;
    }
    out += '\n';
  }
  for (const ojson& row : table.rows) {
    bool first = true;
    for (auto it = row.begin(); it != row.end(); ++it) {
      if (!first) out += ',';
      first = false;
      const json& v = it.value();
      if (v.is_number_float()) {
        out += format_double(v.get<double>());
      } else if (v.is_number_integer()) {
        out += std::to_string(v.get<long long>());
      } else if (v.is_boolean()) {
        out += v.get<bool>() ? '1' : '0';
      } else {
        out += v.get<std::string>();
      }
    }
    out += '\n';
  }
  return out;
}

inline std::string render_json(const ojson& resolved, const Table& table) {
  ojson doc;
  doc["config"] = resolved;
  doc["rows"] = ojson::array();
  for (const ojson& row : table.rows) doc["rows"].push_back(row);
  return doc.dump(2) + "\n";
}

struct GridConfig {
  EnergyModel model = EnergyModel::deterministic(1.0);
  std::string command;
  std::string format = "csv";
  long long trials = 10000;
  std::uint64_t seed = 0;
  int workers = 1;
  json raw;

  McOptions mc() const { return {trials, seed, workers}; }
};

inline GridConfig parse_common(const json& cfg, bool needs_model) {
  GridConfig g;
  g.raw = cfg;
  if (!cfg.contains("command")) {
    throw ValidationError("config: missing 'command'");
  }
  g.command = cfg.at("command").get<std::string>();
  if (needs_model) {
    if (!cfg.contains("model")) throw ValidationError("config: missing 'model'");
    try {
      g.model = model_from_json(cfg.at("model"));
    } catch (const std::domain_error& e) {
      throw ValidationError(e.what());
    }
  }
  if (cfg.contains("trials")) g.trials = cfg.at("trials").get<long long>();
  if (cfg.contains("seed")) g.seed = cfg.at("seed").get<std::uint64_t>();
  if (cfg.contains("workers")) g.workers = cfg.at("workers").get<int>();
  if (cfg.contains("format")) g.format = cfg.at("format").get<std::string>();
  if (g.format != "csv" && g.format != "json") {
    throw ValidationError("config: format must be 'csv' or 'json'");
  }
  if (g.trials < 1) throw ValidationError("config: trials must be >= 1");
  return g;
}

/// Canonical resolved config: fixed key order, execution-only fields
/// excluded so outputs are byte-identical across worker counts.
inline ojson resolved_config(const GridConfig& g,
                             const std::vector<const char*>& grid_keys,
                             bool with_model, bool with_mc) {
  ojson r;
  r["command"] = g.command;
  if (with_model) r["model"] = model_to_json(g.model);
  for (const char* key : grid_keys) {
    if (g.raw.contains(key)) r[key] = g.raw.at(key);
  }
  if (with_mc) {
    r["trials"] = g.trials;
    r["seed"] = g.seed;
  }
  r["format"] = g.format;
  return r;
}

// ---- command implementations -------------------------------------------

inline Table run_bounds(const GridConfig& g) {
  Table t;
  const auto ns = integer_list(g.raw, "n");
  const auto ls = integer_list(g.raw, "L");
  const auto epss = number_list(g.raw, "eps");
  for (double eps : epss) require_probability(eps, "eps");
  for (long long n : ns) {
    for (long long L : ls) {
      for (double eps : epss) {
        const BoundReport ach = achievable_log_M(g.model.mean(), n, eps);
        const BoundReport conv = converse_log_M(g.model, n, L, eps);
        ojson row;
        row["family"] = g.model.name();
        row["P"] = g.model.mean();
        row["n"] = n;
        row["L"] = L;
        row["eps"] = eps;
        row["achievable_bits"] = ach.value;
        row["achievable_feasible"] = ach.feasible;
        row["decoding_margin"] = ach.conditions.at(0).ok;
        row["converse_bits"] = conv.value;
        row["converse_feasible"] = conv.feasible;
        row["blocklength_above_minimum"] = conv.conditions.at(0).ok;
        t.add(std::move(row));
      }
    }
  }
  return t;
}

inline Table run_second_order(const GridConfig& g) {
  Table t;
  const std::string regime_name =
      g.raw.contains("regime") ? g.raw.at("regime").get<std::string>()
                               : "growing-L";
  const bool growing = regime_name == "growing-L";
  if (!growing && regime_name != "constant-L") {
    throw ValidationError("config: regime must be 'growing-L' or 'constant-L'");
  }
  const auto ls = growing ? std::vector<long long>{0}
                          : integer_list(g.raw, "L");
  const auto epss = number_list(g.raw, "eps");
  for (double eps : epss) {
    if (!(eps > 0.0) || !(eps < 0.5)) {
      throw ValidationError("config: second-order needs eps in (0,1/2)");
    }
  }
  for (long long L : ls) {
    const Regime regime =
        growing ? Regime::growing_L() : Regime::constant_L(L);
    for (double eps : epss) {
      const SandwichReport s = sandwich_report(g.model, regime, eps);
      ojson row;
      row["family"] = g.model.name();
      row["P"] = g.model.mean();
      row["regime"] = regime_name;
      row["L"] = L;
      row["eps"] = eps;
      row["v_minus_minus"] = s.v_minus_minus;
      row["v_minus"] = s.v_minus;
      row["v_plus"] = s.v_plus;
      row["ordering_ok"] = s.ordering_ok;
      row["gap_checked"] = s.gap_checked;
      row["gap"] = s.gap;
      row["gap_bound"] = s.gap_bound;
      row["gap_ok"] = s.gap_ok;
      t.add(std::move(row));
    }
  }
  return t;
}

inline Table run_design(const GridConfig& g) {
  Table t;
  const auto ns = integer_list(g.raw, "n");
  const auto ls = integer_list(g.raw, "L");
  const auto epss = number_list(g.raw, "eps");
  const auto eps1s = number_list(g.raw, "eps1");
  for (long long n : ns) {
    for (long long L : ls) {
      for (double eps : epss) {
        require_probability(eps, "eps");
        for (double eps1 : eps1s) {
          if (!(eps1 > 0.0) || !(eps1 < eps)) {
            throw ValidationError("config: need 0 < eps1 < eps");
          }
          const SaveTransmitDesign d =
              design_save_transmit(g.model, L, n, eps, eps1);
          ojson row;
          row["family"] = g.model.name();
          row["P"] = g.model.mean();
          row["n"] = n;
          row["L"] = L;
          row["eps"] = eps;
          row["eps1"] = eps1;
          row["eps2"] = d.eps2;
          row["t_n"] = d.t_n;
          row["m"] = d.m ? *d.m : -1;
          row["log_M"] = d.log_M;
          for (const Condition& c : d.conditions) row[c.name] = c.ok;
          row["feasible"] = d.feasible;
          t.add(std::move(row));
        }
      }
    }
  }
  return t;
}

inline Table run_linear_capacity(const GridConfig& g) {
  Table t;
  const auto lambdas = number_list(g.raw, "lambda");
  const auto epss = number_list(g.raw, "eps");
  const bool threshold_supported =
      g.model.has_continuous_strictly_increasing_cdf();
  for (double lambda : lambdas) {
    for (double eps : epss) {
      require_probability(eps, "eps");
      const long long q = static_cast<long long>(std::floor(1.0 / lambda));
      ojson row;
      row["family"] = g.model.name();
      row["P"] = g.model.mean();
      row["lambda"] = lambda;
      row["eps"] = eps;
      row["q"] = q;
      row["d"] = 1.0 - static_cast<double>(q) * lambda;
      row["lower"] = rate_quantile(g.model, lambda, eps, QuantileMode::lower);
      row["upper"] = rate_quantile(g.model, lambda, eps, QuantileMode::upper);
      row["threshold"] =
          threshold_supported
              ? rate_quantile(g.model, lambda, eps, QuantileMode::threshold)
              : std::numeric_limits<double>::quiet_NaN();
      row["threshold_supported"] = threshold_supported;
      t.add(std::move(row));
    }
  }
  return t;
}

inline Table run_outage_sim(const GridConfig& g) {
  Table t;
  const auto ns = integer_list(g.raw, "n");
  const auto ls = integer_list(g.raw, "L");
  const bool explicit_m = g.raw.contains("m");
  const auto eps1s = explicit_m ? std::vector<double>{}
                                : number_list(g.raw, "eps1");
  const auto ms = explicit_m ? integer_list(g.raw, "m")
                             : std::vector<long long>{};
  const double nan = std::numeric_limits<double>::quiet_NaN();

  auto emit = [&](long long n, long long L, double eps1,
                  std::optional<long long> m) {
    ojson row;
    row["family"] = g.model.name();
    row["P"] = g.model.mean();
    row["n"] = n;
    row["L"] = L;
    row["eps1"] = eps1;
    row["m"] = m ? *m : -1;
    double t_n = nan;
    double bound = nan;
    if (!std::isnan(eps1) && m) {
      t_n = saving_tilt(g.model, L, n, eps1);
      bound = designed_outage_bound(g.model, L, n, *m, eps1);
    }
    row["t_n"] = t_n;
    row["bound"] = bound;
    if (m) {
      const SimEstimate est = simulate_outage(g.model, g.model.mean(), n, L,
                                              *m, g.mc());
      row["estimate"] = est.estimate;
      row["std_error"] = est.std_error;
    } else {
      row["estimate"] = nan;
      row["std_error"] = nan;
    }
    row["trials"] = g.trials;
    row["seed"] = g.seed;
    t.add(std::move(row));
  };

  for (long long n : ns) {
    for (long long L : ls) {
      if (explicit_m) {
        const double eps1 = scalar(g.raw, "eps1", nan);
        for (long long m : ms) emit(n, L, eps1, m);
      } else {
        for (double eps1 : eps1s) {
          require_probability(eps1, "eps1");
          const SavingLength sl = saving_length(g.model, L, n, eps1);
          emit(n, L, eps1, sl.m);
        }
      }
    }
  }
  return t;
}

inline Table run_quantile_sim(const GridConfig& g) {
  Table t;
  const auto lambdas = number_list(g.raw, "lambda");
  const auto epss = number_list(g.raw, "eps");
  for (double lambda : lambdas) {
    for (double eps : epss) {
      require_probability(eps, "eps");
      const SimEstimate est =
          empirical_rate_quantile(g.model, lambda, eps, g.mc());
      ojson row;
      row["family"] = g.model.name();
      row["P"] = g.model.mean();
      row["lambda"] = lambda;
      row["eps"] = eps;
      row["estimate"] = est.estimate;
      row["std_error"] = est.std_error;
      row["trials"] = g.trials;
      row["seed"] = g.seed;
      t.add(std::move(row));
    }
  }
  return t;
}

inline Table run_adaptive_sim(const GridConfig& g) {
  Table t;
  const std::string mode =
      g.raw.contains("sim") ? g.raw.at("sim").get<std::string>() : "budget";
  if (mode == "estimate") {
    for (long long L : integer_list(g.raw, "L")) {
      const SimEstimate est = simulate_energy_estimation(g.model, L, g.mc());
      ojson row;
      row["family"] = g.model.name();
      row["P"] = g.model.mean();
      row["L"] = L;
      row["delta"] = adaptive_delta(g.model.mean(), L);
      row["estimate"] = est.estimate;
      row["std_error"] = est.std_error;
      row["floor_bound"] =
          1.0 - std::pow(static_cast<double>(L), -1.0 / 6.0);
      row["trials"] = g.trials;
      row["seed"] = g.seed;
      t.add(std::move(row));
    }
    return t;
  }
  if (mode != "budget") {
    throw ValidationError("config: sim must be 'budget' or 'estimate'");
  }
  const auto lambdas = number_list(g.raw, "lambda");
  const auto ns = integer_list(g.raw, "n");
  const auto etas = number_list(g.raw, "eta");
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double explicit_rate = scalar(g.raw, "R_eps", nan);
  const double eps = scalar(g.raw, "eps", nan);
  if (std::isnan(explicit_rate) && std::isnan(eps)) {
    throw ValidationError("config: adaptive-sim budget needs 'R_eps' or 'eps'");
  }
  for (double lambda : lambdas) {
    const double rate =
        !std::isnan(explicit_rate)
            ? explicit_rate
            : rate_quantile(g.model, lambda, eps, QuantileMode::lower);
    for (long long n : ns) {
      for (double eta : etas) {
        const SimEstimate est =
            simulate_adaptive_budget(g.model, lambda, n, eta, rate, g.mc());
        ojson row;
        row["family"] = g.model.name();
        row["P"] = g.model.mean();
        row["lambda"] = lambda;
        row["n"] = n;
        row["eta"] = eta;
        row["eps"] = eps;
        row["R_eps"] = rate;
        row["log_M"] = adaptive_message_size(n, rate, eta);
        row["estimate"] = est.estimate;
        row["std_error"] = est.std_error;
        row["trials"] = g.trials;
        row["seed"] = g.seed;
        t.add(std::move(row));
      }
    }
  }
  return t;
}

inline Table run_selftest(const GridConfig& g, bool& all_ok) {
  Table t;
  all_ok = true;
  auto record = [&](const char* name, bool ok) {
    ojson row;
    row["check"] = name;
    row["pass"] = ok;
    t.add(std::move(row));
    all_ok = all_ok && ok;
  };

  {  // inverse-cdf round trips (x-side limited to where the density can
     // resolve the probability in binary64)
    bool ok = true;
    for (int i = -70; i <= 56; ++i) {
      const double x = 0.1 * i;
      ok = ok && std::fabs(normal_inv_cdf(normal_cdf(x)) - x) <= 1e-8;
    }
    for (int i = 1; i <= 99; ++i) {
      const double p = 0.01 * i;
      ok = ok && std::fabs(normal_cdf(normal_inv_cdf(p)) - p) <= 1e-12;
    }
    record("normal_inverse_round_trip", ok);
  }
  {  // cdf monotone
    bool ok = true;
    double prev = normal_cdf(-10.0);
    for (int i = -99; i <= 100; ++i) {
      const double cur = normal_cdf(0.1 * i);
      ok = ok && cur >= prev;
      prev = cur;
    }
    record("normal_cdf_monotone", ok);
  }
  {  // chernoff coefficients at zero tilt
    bool ok = true;
    for (const EnergyModel& m :
         {EnergyModel::deterministic(1.0), EnergyModel::exponential(1.0)}) {
      for (long long L : {1LL, 4LL}) {
        const ChernoffParams c = block_chernoff_params(m, L, 0.0);
        ok = ok && c.beta_t == c.beta_0;
      }
    }
    record("chernoff_beta_continuity_at_zero", ok);
  }
  {  // quantizer sandwich
    bool ok = true;
    CounterRng rng(g.seed, StreamPurpose::energy_process, 999);
    const double delta = adaptive_delta(1.0, 64);
    for (int i = 0; i < 10000; ++i) {
      const double a = 50.0 * rng.uniform01();
      const double q = quantize(a, delta);
      ok = ok && q <= a && a < q + 2.0 * delta;
    }
    record("quantizer_sandwich", ok);
  }
  {  // estimator consistency on grid neighbourhoods
    bool ok = true;
    const double delta = adaptive_delta(1.0, 4096);
    for (long long v = 0; v <= 40; ++v) {
      const double gp = 2.0 * static_cast<double>(v) * delta;
      for (int u = -9; u <= 9; ++u) {
        const double noise = 0.1 * u * delta;
        ok = ok && estimate_energy_level(gp + 1.0 + noise, delta) == gp;
      }
    }
    record("estimator_consistency", ok);
  }
  {  // outage trajectory identities (ConsistencyError would propagate)
    bool ok = true;
    for (const EnergyModel& m :
         {EnergyModel::deterministic(1.0), EnergyModel::exponential(1.0)}) {
      for (long long L : {1LL, 3LL}) {
        const SimEstimate est =
            simulate_outage(m, 1.0, 160, L, 40, {2000, g.seed, g.workers});
        ok = ok && est.estimate >= 0.0 && est.estimate <= 1.0;
      }
    }
    record("outage_trajectory_identities", ok);
  }
  {  // second-order ordering
    bool ok = true;
    for (const EnergyModel& m :
         {EnergyModel::deterministic(1.0), EnergyModel::exponential(2.0),
          EnergyModel::uniform(0.5)}) {
      for (double eps : {0.05, 0.2, 0.4}) {
        for (const Regime& r : {Regime::growing_L(), Regime::constant_L(1)}) {
          const SandwichReport s = sandwich_report(m, r, eps);
          ok = ok && s.ordering_ok;
        }
      }
    }
    record("second_order_ordering", ok);
  }
  {  // block sequence constancy and reproducibility
    const EnergyModel m = EnergyModel::exponential(1.0);
    const auto a = sample_block_sequence(m, 64, 8, g.seed);
    const auto b = sample_block_sequence(m, 64, 8, g.seed);
    bool ok = a == b;
    for (std::size_t k = 0; k < a.size(); ++k) {
      ok = ok && a[k] == a[(k / 8) * 8];
    }
    record("block_sequence_deterministic", ok);
  }
  {  // rate quantile closed forms
    const EnergyModel expo = EnergyModel::exponential(1.0);
    const double eps = 1.0 - std::exp(-1.0);
    const double thr = rate_quantile(expo, 1.0, eps, QuantileMode::threshold);
    bool ok = std::fabs(thr - 0.5) <= 1e-6;
    const EnergyModel det = EnergyModel::deterministic(2.0);
    ok = ok &&
         rate_quantile(det, 0.5, 0.3, QuantileMode::lower) ==
             rate_quantile(det, 0.5, 0.3, QuantileMode::upper);
    record("rate_quantile_closed_form", ok);
  }
  {  // per-block Berry-Esseen ratio bound grows with the block length
    const EnergyModel det = EnergyModel::deterministic(1.0);
    bool ok = true;
    double prev = tau2(det, 1);
    for (long long L : {2LL, 4LL, 8LL}) {
      const double cur = tau2(det, L);
      ok = ok && cur > prev && cur > 0.0;
      prev = cur;
    }
    record("tau2_positive_and_growing_in_L", ok);
  }
  return t;
}

}  // namespace detail

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {
      "bounds",      "second-order", "design",       "linear-capacity",
      "outage-sim",  "quantile-sim", "adaptive-sim", "selftest"};
  return names;
}

/// Executes one config; never throws.  Validation problems yield exit code
/// 2, per-trajectory consistency breaches yield exit code 3.
inline RunResult run(const nlohmann::json& config) {
  using namespace detail;
  RunResult result;
  try {
    const std::string command =
        config.contains("command") ? config.at("command").get<std::string>()
                                   : "";
    if (std::find(command_names().begin(), command_names().end(), command) ==
        command_names().end()) {
      throw ValidationError("config: unknown command '" + command + "'");
    }
    const bool is_selftest = command == "selftest";
    Table table;
    ojson resolved;
    bool selftest_ok = true;
    GridConfig g = parse_common(config, !is_selftest);
    if (command == "bounds") {
      table = run_bounds(g);
      resolved = resolved_config(g, {"n", "L", "eps"}, true, false);
    } else if (command == "second-order") {
      table = run_second_order(g);
      resolved = resolved_config(g, {"regime", "L", "eps"}, true, false);
    } else if (command == "design") {
      table = run_design(g);
      resolved = resolved_config(g, {"n", "L", "eps", "eps1"}, true, false);
    } else if (command == "linear-capacity") {
      table = run_linear_capacity(g);
      resolved = resolved_config(g, {"lambda", "eps"}, true, false);
    } else if (command == "outage-sim") {
      table = run_outage_sim(g);
      resolved = resolved_config(g, {"n", "L", "eps1", "m"}, true, true);
    } else if (command == "quantile-sim") {
      table = run_quantile_sim(g);
      resolved = resolved_config(g, {"lambda", "eps"}, true, true);
    } else if (command == "adaptive-sim") {
      table = run_adaptive_sim(g);
      resolved = resolved_config(
          g, {"sim", "lambda", "n", "eta", "eps", "R_eps", "L"}, true, true);
    } else if (is_selftest) {
      table = run_selftest(g, selftest_ok);
      resolved = resolved_config(g, {}, false, true);
    } else {
      throw ValidationError("config: unknown command '" + command + "'");
    }

    result.output = g.format == "csv" ? render_csv(resolved, table)
                                      : render_json(resolved, table);
    if (!selftest_ok) {
      result.exit_code = kExitConsistency;
      result.diagnostic = "selftest: at least one invariant check failed";
    } else {
      result.exit_code = kExitOk;
    }
  } catch (const ValidationError& e) {
    result.exit_code = kExitValidation;
    result.diagnostic = e.what();
  } catch (const ConsistencyError& e) {
    result.exit_code = kExitConsistency;
    result.diagnostic = e.what();
  } catch (const nlohmann::json::exception& e) {
    result.exit_code = kExitValidation;
    result.diagnostic = e.what();
  } catch (const std::exception& e) {
    result.exit_code = kExitValidation;
    result.diagnostic = e.what();
  }
  return result;
}

}  // namespace ehfb::cli
