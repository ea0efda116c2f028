#pragma once

// Scenario files: a JSON document holding the component catalog, scenario
// parameters, named architectures and sweeps. Unknown keys are rejected and
// every reference is resolved before anything is simulated.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fracval/analytics.hpp"
#include "fracval/archmodel.hpp"
#include "fracval/error.hpp"
#include "fracval/simengine.hpp"
#include "fracval/stochastic.hpp"

namespace fracval {

using Json = nlohmann::ordered_json;

struct NamedArchitecture {
  std::string label;
  Partition partition;
};

/// Sweep as written in the file: architectures referenced by label.
struct SweepDecl {
  std::string name;
  std::string baseline;
  std::string alternative;
  std::vector<SweepParameter> parameters;
  std::vector<Years> years;
  std::vector<std::string> labels;
};

struct ScenarioFile {
  Catalog catalog;
  ScenarioConfig config;
  std::vector<NamedArchitecture> architectures;
  bool enumerate_all = false;
  std::vector<SweepDecl> sweeps;

  /// Declared architectures, followed by every enumerated allocation not
  /// already declared (in any block order) when enumerate_all is set.
  [[nodiscard]] std::vector<NamedArchitecture> all_architectures() const {
    std::vector<NamedArchitecture> out = architectures;
    if (enumerate_all) {
      std::set<std::string> declared;
      for (const auto& a : architectures) declared.insert(canonical_partition(a.partition, catalog).label());
      for (auto& p : enumerate_partitions(catalog.ids())) {
        if (!declared.count(p.label())) out.push_back({p.label(), std::move(p)});
      }
    }
    return out;
  }

  /// Declared labels first; with enumerate_all, any canonical allocation
  /// label also resolves, including ones shadowed by a declared name.
  [[nodiscard]] NamedArchitecture find_architecture(std::string_view label) const {
    for (const auto& a : architectures) {
      if (a.label == label) return a;
    }
    if (enumerate_all) {
      for (auto& p : enumerate_partitions(catalog.ids())) {
        if (p.label() == label) return {p.label(), std::move(p)};
      }
    }
    throw ConfigError("unknown architecture label \"" + std::string(label) + "\"");
  }

  [[nodiscard]] Architecture build(std::string_view label) const {
    const auto named = find_architecture(label);
    try {
      return build_architecture(named.partition, catalog, named.label);
    } catch (const ConfigError& e) {
      throw ConfigError("architecture \"" + named.label + "\": " + e.what());
    }
  }

  [[nodiscard]] const SweepDecl& find_sweep(std::string_view name) const {
    for (const auto& s : sweeps) {
      if (s.name == name) return s;
    }
    throw ConfigError("unknown sweep \"" + std::string(name) + "\"");
  }

  [[nodiscard]] SweepSpec sweep_spec(std::string_view name) const {
    const auto& d = find_sweep(name);
    SweepSpec spec;
    spec.name = d.name;
    spec.baseline = find_architecture(d.baseline).partition;
    spec.alternative = find_architecture(d.alternative).partition;
    spec.parameters = d.parameters;
    spec.years = d.years;
    spec.point_labels = d.labels;
    return spec;
  }
};

namespace detail {

inline void check_keys(const Json& obj, std::initializer_list<std::string_view> allowed,
                       const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || item.key() == a;
    if (!ok) throw ConfigError(where + ": unknown key \"" + item.key() + "\"");
  }
}

inline const Json& require(const Json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(where + ": missing \"" + key + "\"");
  return *it;
}

inline double number(const Json& v, const std::string& where) {
  if (!v.is_number()) throw ConfigError(where + ": expected a number");
  return v.get<double>();
}

inline std::string text(const Json& v, const std::string& where) {
  if (!v.is_string()) throw ConfigError(where + ": expected a string");
  return v.get<std::string>();
}

inline std::vector<double> numbers(const Json& v, const std::string& where) {
  if (!v.is_array()) throw ConfigError(where + ": expected an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) out.push_back(number(x, where));
  return out;
}

inline std::vector<std::string> texts(const Json& v, const std::string& where) {
  if (!v.is_array()) throw ConfigError(where + ": expected an array of strings");
  std::vector<std::string> out;
  for (const auto& x : v) out.push_back(text(x, where));
  return out;
}

inline TimeLaw parse_law(const Json& j, const std::string& where) {
  if (!j.is_object() || j.size() != 1) {
    throw ConfigError(where + ": a law is an object with exactly one of "
                              "\"weibull\", \"lognormal\", \"point\", \"never\"");
  }
  const auto& [kind, body] = *j.items().begin();
  const std::string w = where + "." + kind;
  try {
    if (kind == "weibull") {
      check_keys(body, {"scale", "shape"}, w);
      return WeibullLaw::make(number(require(body, "scale", w), w + ".scale"),
                              number(require(body, "shape", w), w + ".shape"));
    }
    if (kind == "lognormal") {
      check_keys(body, {"mean", "std_dev"}, w);
      return LogNormalLaw::from_moments(number(require(body, "mean", w), w + ".mean"),
                                        number(require(body, "std_dev", w), w + ".std_dev"));
    }
    if (kind == "point") {
      check_keys(body, {"at"}, w);
      return PointMass::make(number(require(body, "at", w), w + ".at"));
    }
    if (kind == "never") {
      check_keys(body, {}, w);
      return PointMass{std::numeric_limits<double>::infinity()};
    }
  } catch (const ConfigError& e) {
    if (std::string_view(e.what()).starts_with(where)) throw;
    throw ConfigError(w + ": " + e.what());
  }
  throw ConfigError(where + ": unknown law kind \"" + kind + "\"");
}

inline Json law_to_json(const TimeLaw& law) {
  return std::visit(
      [](const auto& l) -> Json {
        using L = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<L, WeibullLaw>) {
          return {{"weibull", {{"scale", l.scale}, {"shape", l.shape}}}};
        } else if constexpr (std::is_same_v<L, LogNormalLaw>) {
          return {{"lognormal", {{"mean", l.mean}, {"std_dev", l.std_dev}}}};
        } else {
          if (std::isinf(l.at)) return {{"never", Json::object()}};
          return {{"point", {{"at", l.at}}}};
        }
      },
      law);
}

inline ReplacementLaw parse_replacement(const Json& obj, const std::string& where,
                                        bool obsolescence_allowed) {
  ReplacementLaw law;
  law.failure = parse_law(require(obj, "failure", where), where + ".failure");
  if (auto it = obj.find("obsolescence"); it != obj.end() && !it->is_null()) {
    if (!obsolescence_allowed) throw ConfigError(where + ": buses and tech packages never become obsolete");
    law.obsolescence = parse_law(*it, where + ".obsolescence");
  }
  return law;
}

inline SubsystemSpec parse_subsystem(const Json& j, const std::string& where, bool is_techpackage) {
  check_keys(j, {"id", "name", "role", "cost", "mass", "failure", "obsolescence"}, where);
  SubsystemSpec s;
  s.id = text(require(j, "id", where), where + ".id");
  const std::string w = where + " \"" + s.id + "\"";
  if (s.id.empty() || s.id.find_first_of(".|+: ") != std::string::npos) {
    throw ConfigError(w + ": ids must be nonempty and free of '.', '|', '+', ':' and spaces");
  }
  s.name = j.contains("name") ? text(j["name"], w + ".name") : s.id;
  if (j.contains("role")) {
    auto r = role_from_string(text(j["role"], w + ".role"));
    if (!r) throw ConfigError(w + ": unknown role \"" + j["role"].get<std::string>() + "\"");
    s.role = *r;
  } else {
    s.role = is_techpackage ? Role::techpackage : Role::payload;
  }
  s.build_cost = number(require(j, "cost", w), w + ".cost");
  s.mass = number(require(j, "mass", w), w + ".mass");
  s.replacement = parse_replacement(j, w, !is_techpackage);
  return s;
}

inline Json subsystem_to_json(const SubsystemSpec& s) {
  Json j;
  j["id"] = s.id;
  j["name"] = s.name;
  j["role"] = std::string(to_string(s.role));
  j["cost"] = s.build_cost;
  j["mass"] = s.mass;
  j["failure"] = law_to_json(s.replacement.failure);
  if (s.replacement.obsolescence) j["obsolescence"] = law_to_json(*s.replacement.obsolescence);
  return j;
}

inline std::vector<Years> default_checkpoints(Years lifetime) {
  std::vector<Years> out;
  for (Years y = 5.0; y < lifetime; y += 5.0) out.push_back(y);
  out.push_back(lifetime);
  return out;
}

}  // namespace detail

/// Validates and resolves a parsed scenario document.
inline ScenarioFile scenario_from_json(const Json& root) {
  using namespace detail;
  check_keys(root, {"format", "scenario", "catalog", "architectures", "enumerate_all", "sweeps"},
             "scenario file");
  if (root.contains("format") && text(root["format"], "format") != "fracval-scenario/1") {
    throw ConfigError("format: unsupported \"" + root["format"].get<std::string>() + "\"");
  }
  ScenarioFile sf;

  // scenario parameters
  ScenarioConfig& cfg = sf.config;
  const Json sc = root.contains("scenario") ? root["scenario"] : Json::object();
  check_keys(sc,
             {"lifetime", "discount_rate", "launch_rate", "trials", "seed", "checkpoints",
              "var_probabilities", "histogram_bins", "threads"},
             "scenario");
  if (sc.contains("lifetime")) cfg.lifetime = number(sc["lifetime"], "scenario.lifetime");
  if (sc.contains("discount_rate")) cfg.discount_rate = number(sc["discount_rate"], "scenario.discount_rate");
  if (sc.contains("launch_rate")) cfg.launch_rate = number(sc["launch_rate"], "scenario.launch_rate");
  if (sc.contains("trials")) {
    if (!sc["trials"].is_number_unsigned()) throw ConfigError("scenario.trials: expected a positive integer");
    cfg.trials = sc["trials"].get<std::size_t>();
  }
  if (sc.contains("seed")) {
    if (!sc["seed"].is_number_unsigned()) throw ConfigError("scenario.seed: expected a nonnegative integer");
    cfg.master_seed = sc["seed"].get<std::uint64_t>();
  }
  cfg.checkpoints = sc.contains("checkpoints") ? numbers(sc["checkpoints"], "scenario.checkpoints")
                                               : default_checkpoints(cfg.lifetime);
  if (sc.contains("var_probabilities")) {
    cfg.var_probabilities = numbers(sc["var_probabilities"], "scenario.var_probabilities");
  }
  if (sc.contains("histogram_bins")) {
    if (!sc["histogram_bins"].is_number_unsigned()) throw ConfigError("scenario.histogram_bins: expected a positive integer");
    cfg.histogram_bins = sc["histogram_bins"].get<std::size_t>();
  }
  if (sc.contains("threads")) {
    if (!sc["threads"].is_number_unsigned()) throw ConfigError("scenario.threads: expected a nonnegative integer");
    cfg.threads = sc["threads"].get<unsigned>();
  }
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }

  // catalog
  const Json& cj = require(root, "catalog", "scenario file");
  check_keys(cj, {"subsystems", "techpackage", "buses", "bus_overrides"}, "catalog");
  Catalog& cat = sf.catalog;
  const Json& subs = require(cj, "subsystems", "catalog");
  if (!subs.is_array()) throw ConfigError("catalog.subsystems: expected an array");
  for (const auto& s : subs) cat.subsystems.push_back(parse_subsystem(s, "catalog.subsystems", false));
  if (cj.contains("techpackage") && !cj["techpackage"].is_null()) {
    cat.techpackage = parse_subsystem(cj["techpackage"], "catalog.techpackage", true);
    cat.techpackage->role = Role::techpackage;
  }
  if (cj.contains("buses")) {
    if (!cj["buses"].is_array()) throw ConfigError("catalog.buses: expected an array");
    for (const auto& b : cj["buses"]) {
      check_keys(b, {"name", "capacity", "cost", "mass", "failure"}, "catalog.buses");
      BusCatalogEntry e;
      e.name = text(require(b, "name", "catalog.buses"), "catalog.buses.name");
      const std::string w = "bus \"" + e.name + "\"";
      e.capacity = number(require(b, "capacity", w), w + ".capacity");
      e.build_cost = number(require(b, "cost", w), w + ".cost");
      e.mass = number(require(b, "mass", w), w + ".mass");
      e.replacement = parse_replacement(b, w, false);
      cat.buses.push_back(std::move(e));
    }
  }
  if (cj.contains("bus_overrides")) {
    if (!cj["bus_overrides"].is_array()) throw ConfigError("catalog.bus_overrides: expected an array");
    for (const auto& b : cj["bus_overrides"]) {
      check_keys(b, {"members", "name", "cost", "mass", "failure"}, "catalog.bus_overrides");
      BusOverride o;
      o.name = text(require(b, "name", "catalog.bus_overrides"), "catalog.bus_overrides.name");
      const std::string w = "bus override \"" + o.name + "\"";
      o.members = texts(require(b, "members", w), w + ".members");
      o.build_cost = number(require(b, "cost", w), w + ".cost");
      o.mass = number(require(b, "mass", w), w + ".mass");
      o.replacement = parse_replacement(b, w, false);
      for (const auto& m : o.members) {
        if (!cat.index_of(m)) throw ConfigError(w + ": unknown subsystem id \"" + m + "\"");
      }
      cat.bus_overrides.push_back(std::move(o));
    }
  }
  cat.validate();

  // architectures
  std::set<std::string> labels;
  if (root.contains("architectures")) {
    if (!root["architectures"].is_array()) throw ConfigError("architectures: expected an array");
    for (const auto& a : root["architectures"]) {
      check_keys(a, {"label", "fractions"}, "architectures");
      NamedArchitecture na;
      na.label = text(require(a, "label", "architectures"), "architectures.label");
      const std::string w = "architecture \"" + na.label + "\"";
      if (na.label.empty()) throw ConfigError("architectures: empty label");
      if (!labels.insert(na.label).second) throw ConfigError(w + ": duplicate label");
      const Json& fr = require(a, "fractions", w);
      if (!fr.is_array()) throw ConfigError(w + ".fractions: expected an array of id arrays");
      for (const auto& block : fr) na.partition.blocks.push_back(texts(block, w + ".fractions"));
      try {
        (void)build_architecture(na.partition, cat, na.label);
      } catch (const ConfigError& e) {
        throw ConfigError(w + ": " + e.what());
      }
      sf.architectures.push_back(std::move(na));
    }
  }
  if (root.contains("enumerate_all")) {
    if (!root["enumerate_all"].is_boolean()) throw ConfigError("enumerate_all: expected true or false");
    sf.enumerate_all = root["enumerate_all"].get<bool>();
  }

  // sweeps
  if (root.contains("sweeps")) {
    if (!root["sweeps"].is_array()) throw ConfigError("sweeps: expected an array");
    std::set<std::string> names;
    for (const auto& s : root["sweeps"]) {
      check_keys(s, {"name", "baseline", "alternative", "years", "parameters", "labels"}, "sweeps");
      SweepDecl d;
      d.name = text(require(s, "name", "sweeps"), "sweeps.name");
      const std::string w = "sweep \"" + d.name + "\"";
      if (!names.insert(d.name).second) throw ConfigError(w + ": duplicate name");
      d.baseline = text(require(s, "baseline", w), w + ".baseline");
      d.alternative = text(require(s, "alternative", w), w + ".alternative");
      d.years = s.contains("years") ? numbers(s["years"], w + ".years") : std::vector<Years>{cfg.lifetime};
      if (s.contains("labels")) d.labels = texts(s["labels"], w + ".labels");
      const Json& params = require(s, "parameters", w);
      if (!params.is_array()) throw ConfigError(w + ".parameters: expected an array");
      for (const auto& p : params) {
        check_keys(p, {"path", "values"}, w + ".parameters");
        d.parameters.push_back({text(require(p, "path", w), w + ".path"),
                                numbers(require(p, "values", w), w + ".values")});
      }
      sf.sweeps.push_back(std::move(d));
      // Resolve labels and dry-run every grid point's parameter assignment.
      try {
        const SweepSpec spec = sf.sweep_spec(sf.sweeps.back().name);
        spec.validate();
        for (std::size_t i = 0; i < spec.grid_size(); ++i) {
          Catalog c = cat;
          ScenarioConfig sc2 = cfg;
          sc2.checkpoints = spec.years;
          sc2.lifetime = spec.years.back();
          for (const auto& p : spec.parameters) apply_parameter(c, sc2, p.path, p.values[i]);
          (void)build_architecture(spec.baseline, c);
          (void)build_architecture(spec.alternative, c);
        }
      } catch (const ConfigError& e) {
        if (std::string_view(e.what()).starts_with(w)) throw;
        throw ConfigError(w + ": " + e.what());
      }
    }
  }
  return sf;
}

inline Json scenario_to_json(const ScenarioFile& sf) {
  using namespace detail;
  Json root;
  root["format"] = "fracval-scenario/1";
  const auto& cfg = sf.config;
  root["scenario"] = {{"lifetime", cfg.lifetime},
                      {"discount_rate", cfg.discount_rate},
                      {"launch_rate", cfg.launch_rate},
                      {"trials", cfg.trials},
                      {"seed", cfg.master_seed},
                      {"checkpoints", cfg.checkpoints},
                      {"var_probabilities", cfg.var_probabilities},
                      {"histogram_bins", cfg.histogram_bins},
                      {"threads", cfg.threads}};
  Json cat;
  cat["subsystems"] = Json::array();
  for (const auto& s : sf.catalog.subsystems) cat["subsystems"].push_back(subsystem_to_json(s));
  if (sf.catalog.techpackage) cat["techpackage"] = subsystem_to_json(*sf.catalog.techpackage);
  cat["buses"] = Json::array();
  for (const auto& b : sf.catalog.buses) {
    cat["buses"].push_back({{"name", b.name},
                            {"capacity", b.capacity},
                            {"cost", b.build_cost},
                            {"mass", b.mass},
                            {"failure", law_to_json(b.replacement.failure)}});
  }
  cat["bus_overrides"] = Json::array();
  for (const auto& o : sf.catalog.bus_overrides) {
    cat["bus_overrides"].push_back({{"members", o.members},
                                    {"name", o.name},
                                    {"cost", o.build_cost},
                                    {"mass", o.mass},
                                    {"failure", law_to_json(o.replacement.failure)}});
  }
  root["catalog"] = std::move(cat);
  root["architectures"] = Json::array();
  for (const auto& a : sf.architectures) {
    root["architectures"].push_back({{"label", a.label}, {"fractions", a.partition.blocks}});
  }
  root["enumerate_all"] = sf.enumerate_all;
  root["sweeps"] = Json::array();
  for (const auto& s : sf.sweeps) {
    Json params = Json::array();
    for (const auto& p : s.parameters) params.push_back({{"path", p.path}, {"values", p.values}});
    Json js = {{"name", s.name},
               {"baseline", s.baseline},
               {"alternative", s.alternative},
               {"years", s.years},
               {"parameters", std::move(params)}};
    if (!s.labels.empty()) js["labels"] = s.labels;
    root["sweeps"].push_back(std::move(js));
  }
  return root;
}

inline std::string serialize_scenario(const ScenarioFile& sf) {
  return scenario_to_json(sf).dump(2) + "\n";
}

/// Parses scenario text; syntax errors carry line and column.
inline ScenarioFile parse_scenario(std::string_view text) {
  Json root;
  try {
    root = Json::parse(text.begin(), text.end(), nullptr, true, /*ignore_comments=*/true);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("parse error: ") + e.what());
  }
  return scenario_from_json(root);
}

inline ScenarioFile load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read scenario file \"" + path + "\"");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_scenario(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace fracval
