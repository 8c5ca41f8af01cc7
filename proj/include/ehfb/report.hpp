#pragma once

#include <string>
#include <vector>

namespace ehfb {

/// One named precondition of a bound, with the outcome of checking it.
struct Condition {
  std::string name;
  bool ok = false;
};

/// A finite-blocklength bound broken into its terms, with the provenance of
/// every condition that was checked.  value = first_order + second_order +
/// log_term + residual.
struct BoundReport {
  double first_order = 0.0;   // bits
  double second_order = 0.0;  // bits (the sqrt(n)-scale term)
  double log_term = 0.0;      // bits (the +-0.5*log2 term)
  double residual = 0.0;      // bits (kappa constant, sign included)
  double value = 0.0;         // bits
  std::vector<Condition> conditions;
  bool feasible = true;  // conjunction of all conditions

  void add_condition(std::string name, bool ok) {
    conditions.push_back({std::move(name), ok});
    feasible = feasible && ok;
  }
};

}  // namespace ehfb
