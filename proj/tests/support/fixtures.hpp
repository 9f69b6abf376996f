#pragma once

#include <string>

#include "oss/runner.hpp"
#include "oss/scenarios.hpp"

namespace oss::testing {

inline ScenarioSet bundled_set(const std::string& name, const std::string& variant = "") {
  return load_scenario_set(read_scenario_document(name), variant);
}

inline Scenario bundled_base(const std::string& name, const std::string& variant = "") {
  return bundled_set(name, variant).base;
}

/// The run with the given label.
inline Scenario bundled_run(const std::string& name, const std::string& label) {
  for (auto& r : bundled_set(name).runs) {
    if (r.label == label) return r;
  }
  throw std::invalid_argument("no run " + label + " in " + name);
}

}  // namespace oss::testing
