#pragma once

#include <stdexcept>
#include <string>

#include <json.hpp>

#include "ehfb/energy_model.hpp"

// JSON wire format for energy models:
//   {"family": "deterministic" | "exponential" | "uniform", "params": {"P": x}}
//   {"family": "two-point", "params": {"e0": a, "e1": b, "p0": p}}

namespace ehfb {

inline EnergyModel model_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("family")) {
    throw std::domain_error("model: expected {\"family\":..., \"params\":...}");
  }
  const std::string family = j.at("family").get<std::string>();
  const nlohmann::json params =
      j.contains("params") ? j.at("params") : nlohmann::json::object();
  auto param = [&](const char* name) -> double {
    if (!params.contains(name)) {
      throw std::domain_error(std::string("model: missing param '") + name +
                              "' for family " + family);
    }
    return params.at(name).get<double>();
  };
  if (family == "deterministic") return EnergyModel::deterministic(param("P"));
  if (family == "exponential") return EnergyModel::exponential(param("P"));
  if (family == "uniform") return EnergyModel::uniform(param("P"));
  if (family == "two-point") {
    return EnergyModel::two_point(param("e0"), param("e1"), param("p0"));
  }
  throw std::domain_error("model: unknown family '" + family + "'");
}

inline nlohmann::ordered_json model_to_json(const EnergyModel& m) {
  nlohmann::ordered_json j;
  j["family"] = m.name();
  nlohmann::ordered_json params;
  if (m.family() == EnergyFamily::two_point) {
    params["e0"] = m.e0();
    params["e1"] = m.e1();
    params["p0"] = m.p0();
  } else {
    params["P"] = m.mean();
  }
  j["params"] = params;
  return j;
}

}  // namespace ehfb
