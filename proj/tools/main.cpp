#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ehfb/runner.hpp"

// ehfb: finite-blocklength rate bounds for AWGN channels powered by block
// energy arrival, with Monte Carlo validation of every bound.

namespace {

using nlohmann::json;

const char* kColumnHelp = R"(output columns per command
  bounds           family,P,n,L,eps,achievable_bits,achievable_feasible,
                   decoding_margin,converse_bits,converse_feasible,
                   blocklength_above_minimum
  second-order     family,P,regime,L,eps,v_minus_minus,v_minus,v_plus,
                   ordering_ok,gap_checked,gap,gap_bound,gap_ok
  design           family,P,n,L,eps,eps1,eps2,t_n,m,log_M,saving_tilt_margin,
                   saving_moment_margin,decoding_margin,block_tilt_range,
                   feasible
  linear-capacity  family,P,lambda,eps,q,d,lower,upper,threshold,
                   threshold_supported
  outage-sim       family,P,n,L,eps1,m,t_n,bound,estimate,std_error,trials,seed
  quantile-sim     family,P,lambda,eps,estimate,std_error,trials,seed
  adaptive-sim     budget:   family,P,lambda,n,eta,eps,R_eps,log_M,estimate,
                             std_error,trials,seed
                   estimate: family,P,L,delta,estimate,std_error,floor_bound,
                             trials,seed
  selftest         check,pass

config keys
  command, model {family, params}, grids (n, L, lambda, eps, eps1, eta, m),
  trials, seed, workers, format (csv|json), sim (adaptive-sim only),
  R_eps / eps (adaptive-sim budget), out.
numeric CSV fields are printed with 17 significant digits (round-trip exact
for doubles); identical configs give byte-identical output for any worker
count.)";

// "a.b.c" path assignment into the config object.
void set_path(json& config, const std::string& key, const json& value) {
  json* node = &config;
  std::size_t start = 0;
  for (;;) {
    const std::size_t dot = key.find('.', start);
    const std::string part = key.substr(start, dot - start);
    if (part.empty()) throw ehfb::cli::ValidationError("--set: empty key part");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finite-blocklength bounds for energy-harvesting AWGN channels"};
  app.footer(kColumnHelp);

  std::string command;
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_path;
  std::string format;
  long long seed = -1;
  int workers = -1;
  long long trials = -1;

  app.add_option("command", command,
                 "one of: bounds second-order design linear-capacity "
                 "outage-sim quantile-sim adaptive-sim selftest");
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--set", overrides,
                 "key=value config override (dots for nesting)");
  app.add_option("--seed", seed, "RNG seed");
  app.add_option("--workers", workers,
                 "worker threads (else EHFB_WORKERS, else 1)");
  app.add_option("--trials", trials, "Monte Carlo trials");
  app.add_option("--out", out_path, "output path (default stdout)");
  app.add_option("--format", format, "csv or json");

  CLI11_PARSE(app, argc, argv);

  json config = json::object();
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) {
      std::fprintf(stderr, "error: cannot read config file %s\n",
                   config_path.c_str());
      return ehfb::cli::kExitValidation;
    }
    try {
      in >> config;
    } catch (const std::exception& e) {
      std::fprintf(stderr, "error: %s\n", e.what());
      return ehfb::cli::kExitValidation;
    }
  }
  if (!command.empty()) config["command"] = command;
  for (const std::string& kv : overrides) {
    const std::size_t eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "error: --set expects key=value, got %s\n",
                   kv.c_str());
      return ehfb::cli::kExitValidation;
    }
    const std::string key = kv.substr(0, eq);
    const std::string raw = kv.substr(eq + 1);
    json value;
    try {
      value = json::parse(raw);
    } catch (...) {
      value = raw;  // plain string
    }
    try {
      set_path(config, key, value);
    } catch (const std::exception& e) {
      std::fprintf(stderr, "error: %s\n", e.what());
      return ehfb::cli::kExitValidation;
    }
  }
  if (seed >= 0) config["seed"] = seed;
  if (trials >= 0) config["trials"] = trials;
  if (!format.empty()) config["format"] = format;
  if (workers >= 0) {
    config["workers"] = workers;
  } else if (!config.contains("workers")) {
    if (const char* env = std::getenv("EHFB_WORKERS")) {
      config["workers"] = std::atoi(env);
    }
  }
  if (!out_path.empty()) config["out"] = out_path;

  const ehfb::cli::RunResult result = ehfb::cli::run(config);
  if (result.exit_code != ehfb::cli::kExitOk && result.output.empty()) {
    std::fprintf(stderr, "error: %s\n", result.diagnostic.c_str());
    return result.exit_code;
  }

  const std::string sink =
      config.contains("out") ? config.at("out").get<std::string>() : "";
  if (sink.empty()) {
    std::fputs(result.output.c_str(), stdout);
  } else {
    std::ofstream out(sink, std::ios::binary);
    if (!out) {
      std::fprintf(stderr, "error: cannot write output path %s\n",
                   sink.c_str());
      return ehfb::cli::kExitValidation;
    }
    out << result.output;
    if (!out) {
      std::fprintf(stderr, "error: write failed for %s\n", sink.c_str());
      return ehfb::cli::kExitValidation;
    }
  }
  if (result.exit_code != ehfb::cli::kExitOk) {
    std::fprintf(stderr, "error: %s\n", result.diagnostic.c_str());
  }
  return result.exit_code;
}
