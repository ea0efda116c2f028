#pragma once

#include <limits>
#include <string>
#include <vector>

#include "fracval/scenario.hpp"

namespace fracval::testing {

inline std::string scenario_path(const std::string& name) {
  return std::string(FRACVAL_SCENARIO_DIR) + "/" + name;
}

inline std::string data_path(const std::string& name) {
  return std::string(FRACVAL_TEST_DATA_DIR) + "/" + name;
}

inline const ScenarioFile& f6_case() {
  static const ScenarioFile sf = load_scenario(scenario_path("f6_case.scenario"));
  return sf;
}

inline SubsystemSpec unit(std::string id, KiloDollars cost, Kilograms mass, ReplacementLaw law,
                          Role role = Role::payload) {
  SubsystemSpec s;
  s.id = id;
  s.name = std::move(id);
  s.build_cost = cost;
  s.mass = mass;
  s.replacement = std::move(law);
  s.role = role;
  return s;
}

inline ReplacementLaw at(double t) { return {PointMass::make(t), std::nullopt}; }
inline ReplacementLaw never() { return at(std::numeric_limits<double>::infinity()); }
inline ReplacementLaw weibull(double scale, double shape = 1.7) {
  return {WeibullLaw::make(scale, shape), std::nullopt};
}

/// One fraction with the given members and a bus of the given cost/law.
inline Fraction fraction(std::vector<SubsystemSpec> members, KiloDollars bus_cost, ReplacementLaw bus_law,
                         std::string bus_id = "bus") {
  Fraction f;
  f.members = std::move(members);
  f.bus = unit(std::move(bus_id), bus_cost, 0.0, std::move(bus_law), Role::bus);
  return f;
}

}  // namespace fracval::testing
