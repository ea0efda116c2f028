#pragma once

// The enumerate / simulate / compare / sweep commands. Each one stages its
// files in an OutputSet and prints a short table; the CLI commits the set.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "fracval/analytics.hpp"
#include "fracval/archmodel.hpp"
#include "fracval/report.hpp"
#include "fracval/scenario.hpp"
#include "fracval/simengine.hpp"

namespace fracval {

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::optional<unsigned> threads;
  double display_scale = 1.0;  // printed money = K$ / display_scale
  bool events = false;
  bool raw = false;
};

inline void apply_overrides(ScenarioFile& sf, const RunOptions& opts) {
  if (opts.seed) sf.config.master_seed = *opts.seed;
  if (opts.trials) sf.config.trials = *opts.trials;
  if (opts.threads) sf.config.threads = *opts.threads;
  sf.config.validate();
}

namespace detail {

inline Json bundle_header(const ScenarioFile& sf, std::string_view command) {
  return {{"tool", "fracval"},
          {"version", std::string(kToolVersion)},
          {"csv_schema", std::string(kCsvSchema)},
          {"command", std::string(command)},
          {"seed", sf.config.master_seed},
          {"trials", sf.config.trials},
          {"config_digest", config_digest(sf)},
          {"scenario", scenario_to_json(sf)}};
}

inline Json summary_json(double year, const Summary& s) {
  Json var = Json::object();
  for (const auto& [p, v] : s.var_at) var[fmt::format("{}", p)] = v;
  return {{"year", year},  {"ev", s.expected_value}, {"q1", s.q1},
          {"median", s.median}, {"q3", s.q3},      {"var", std::move(var)}};
}

inline std::string money(double k_dollars, double scale) {
  return fmt::format("{:.1f}", k_dollars / scale);
}

}  // namespace detail

struct EnumerationRow {
  std::size_t index = 0;
  std::string label;
  std::string level;
  std::size_t fractions = 0;
  KiloDollars deploy_cost = 0.0;
  std::string buses;
  std::string error;  // bus capacity gap, if any
};

inline std::vector<EnumerationRow> cmd_enumerate(const ScenarioFile& sf, OutputSet& outputs,
                                                 std::ostream& os, const RunOptions& opts = {}) {
  std::vector<EnumerationRow> rows;
  const auto partitions = enumerate_partitions(sf.catalog.ids());
  for (std::size_t i = 0; i < partitions.size(); ++i) {
    EnumerationRow row;
    row.index = i;
    row.label = partitions[i].label();
    row.fractions = partitions[i].blocks.size();
    row.level = std::string(to_string(row.fractions > 1 ? ModularityLevel::M3 : ModularityLevel::M2));
    try {
      const auto arch = build_architecture(partitions[i], sf.catalog);
      row.deploy_cost = arch.deploy_cost(sf.config.launch_rate);
      for (std::size_t f = 0; f < arch.fractions.size(); ++f) {
        if (f) row.buses += ';';
        row.buses += arch.fractions[f].bus.name;
      }
    } catch (const ConfigError& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }

  std::string csv = "index,label,level,fractions,deploy_cost,buses,error\n";
  for (const auto& r : rows) {
    csv += fmt::format("{},{},{},{},{},\"{}\",\"{}\"\n", r.index, r.label, r.level, r.fractions,
                       r.error.empty() ? fmt_money(r.deploy_cost) : std::string(), r.buses, r.error);
  }
  outputs.add("enumerate.csv", std::move(csv));

  os << fmt::format("{:>3}  {:<28} {:<5} {:>14}  {}\n", "#", "allocation", "level", "deploy cost",
                    "buses");
  for (const auto& r : rows) {
    os << fmt::format("{:>3}  {:<28} {:<5} {:>14}  {}\n", r.index, r.label, r.level,
                      r.error.empty() ? detail::money(r.deploy_cost, opts.display_scale) : "-",
                      r.error.empty() ? r.buses : "error: " + r.error);
  }
  return rows;
}

inline void cmd_simulate(const ScenarioFile& sf, std::vector<std::string> labels, OutputSet& outputs,
                         std::ostream& os, const RunOptions& opts = {}) {
  if (labels.empty()) {
    for (const auto& a : sf.all_architectures()) labels.push_back(a.label);
  }
  const auto& cfg = sf.config;
  Json bundle = detail::bundle_header(sf, "simulate");
  bundle["architectures"] = Json::array();
  for (const auto& label : labels) {
    const auto arch = sf.build(label);
    std::vector<TrialCostSeries> series(cfg.trials);
    std::vector<std::vector<ReplacementEvent>> events(opts.events ? cfg.trials : 0);
    detail::parallel_for(cfg.trials, cfg.threads, [&](std::size_t t) {
      series[t] = simulate_trial(arch, cfg, t, opts.events ? &events[t] : nullptr);
    });
    outputs.add("costs_" + file_stem(label) + ".csv", costs_csv(series, cfg));
    if (opts.events) {
      std::string log;
      for (std::size_t t = 0; t < events.size(); ++t) {
        for (const auto& e : events[t]) log += event_ndjson(t, e);
      }
      outputs.add("events_" + file_stem(label) + ".ndjson", std::move(log));
    }
    Json costs = Json::array();
    std::vector<double> column(series.size());
    os << fmt::format("{} ({}, {} fractions, deploy {})\n", label, to_string(arch.level),
                      arch.fractions.size(), detail::money(arch.deploy_cost(cfg.launch_rate), opts.display_scale));
    for (std::size_t c = 0; c < cfg.checkpoints.size(); ++c) {
      for (std::size_t t = 0; t < series.size(); ++t) column[t] = series[t].cost_at_checkpoint[c];
      const auto s = summarize(column, {}, 1);
      costs.push_back(detail::summary_json(cfg.checkpoints[c], s));
      os << fmt::format("  year {:>5}  ev {:>12}  q1 {:>12}  median {:>12}  q3 {:>12}\n",
                        fmt_year(cfg.checkpoints[c]), detail::money(s.expected_value, opts.display_scale),
                        detail::money(s.q1, opts.display_scale), detail::money(s.median, opts.display_scale),
                        detail::money(s.q3, opts.display_scale));
    }
    bundle["architectures"].push_back({{"label", label},
                                       {"level", std::string(to_string(arch.level))},
                                       {"deploy_cost", arch.deploy_cost(cfg.launch_rate)},
                                       {"costs", std::move(costs)}});
  }
  outputs.add("bundle.json", bundle.dump(2) + "\n");
}

/// The first label is the baseline; every other label is compared against it.
inline std::vector<std::vector<Summary>> cmd_compare(const ScenarioFile& sf,
                                                     const std::vector<std::string>& labels,
                                                     OutputSet& outputs, std::ostream& os,
                                                     const RunOptions& opts = {}) {
  if (labels.size() < 2) throw ConfigError("compare needs a baseline and at least one alternative");
  const auto& cfg = sf.config;
  std::vector<Architecture> archs;
  for (const auto& l : labels) archs.push_back(sf.build(l));
  for (std::size_t i = 1; i < archs.size(); ++i) {
    if (archs[i].main_ids() != archs[0].main_ids()) {
      throw ConfigError("architectures \"" + labels[0] + "\" and \"" + labels[i] +
                        "\" cover different subsystems");
    }
  }

  Json bundle = detail::bundle_header(sf, "compare");
  bundle["architectures"] = Json::array();
  std::vector<std::vector<TrialCostSeries>> series;
  for (std::size_t i = 0; i < archs.size(); ++i) {
    series.push_back(simulate(archs[i], cfg));
    outputs.add("costs_" + file_stem(labels[i]) + ".csv", costs_csv(series.back(), cfg));
    bundle["architectures"].push_back({{"label", labels[i]},
                                       {"level", std::string(to_string(archs[i].level))},
                                       {"deploy_cost", archs[i].deploy_cost(cfg.launch_rate)}});
  }

  bundle["comparisons"] = Json::array();
  std::vector<std::vector<Summary>> all;
  for (std::size_t i = 1; i < archs.size(); ++i) {
    const auto dist = paired_values(series[0], series[i], cfg.checkpoints);
    std::vector<Summary> summaries;
    for (const auto& v : dist.values) summaries.push_back(summarize(v, cfg.var_probabilities, cfg.histogram_bins));
    const std::string stem = pair_stem(labels[0], labels[i]);
    outputs.add("value_" + stem + ".csv", value_csv(dist, summaries, cfg));
    for (std::size_t c = 0; c < dist.checkpoints.size(); ++c) {
      outputs.add("hist_" + stem + "_" + fmt_year(dist.checkpoints[c]) + ".csv",
                  histogram_csv(summaries[c].histogram));
    }
    if (opts.raw) outputs.add("raw_" + stem + ".csv", raw_values_csv(dist));

    Json js = Json::array();
    os << fmt::format("value of {} over {}\n", labels[i], labels[0]);
    for (std::size_t c = 0; c < dist.checkpoints.size(); ++c) {
      js.push_back(detail::summary_json(dist.checkpoints[c], summaries[c]));
      std::string line = fmt::format("  year {:>5}  ev {:>10}", fmt_year(dist.checkpoints[c]),
                                     detail::money(summaries[c].expected_value, opts.display_scale));
      for (const auto& [p, v] : summaries[c].var_at) {
        line += fmt::format("  var({}) {:>10}", p, detail::money(v, opts.display_scale));
      }
      os << line << '\n';
    }
    bundle["comparisons"].push_back(
        {{"baseline", labels[0]}, {"alternative", labels[i]}, {"summary", std::move(js)}});
    all.push_back(std::move(summaries));
  }
  outputs.add("bundle.json", bundle.dump(2) + "\n");
  return all;
}

inline std::vector<SweepRow> cmd_sweep(const ScenarioFile& sf, const std::string& name,
                                       OutputSet& outputs, std::ostream& os,
                                       const RunOptions& opts = {}) {
  const SweepSpec spec = sf.sweep_spec(name);
  auto rows = run_sweep(spec, sf.catalog, sf.config);

  std::string csv = "point,label";
  for (const auto& p : spec.parameters) csv += "," + p.path;
  for (auto y : spec.years) {
    const std::string ys = fmt_year(y);
    csv += fmt::format(",ev_{0},q1_{0},median_{0},q3_{0}", ys);
    for (auto p : sf.config.var_probabilities) csv += fmt::format(",var_{}_{}", p, ys);
  }
  csv += '\n';
  Json jrows = Json::array();
  for (const auto& r : rows) {
    csv += fmt::format("{},{}", r.point, r.label);
    for (auto v : r.parameter_values) csv += fmt::format(",{}", v);
    Json jy = Json::array();
    for (std::size_t y = 0; y < spec.years.size(); ++y) {
      const auto& s = r.at_year[y];
      csv += "," + fmt_money(s.expected_value) + "," + fmt_money(s.q1) + "," + fmt_money(s.median) +
             "," + fmt_money(s.q3);
      for (const auto& [p, v] : s.var_at) csv += "," + fmt_money(v);
      jy.push_back(detail::summary_json(spec.years[y], s));
    }
    csv += '\n';
    jrows.push_back({{"point", r.point}, {"label", r.label}, {"values", r.parameter_values}, {"summary", std::move(jy)}});

    std::string line = fmt::format("{:<12}", r.label);
    for (std::size_t y = 0; y < spec.years.size(); ++y) {
      line += fmt::format("  y{} ev {:>10}", fmt_year(spec.years[y]),
                          detail::money(r.at_year[y].expected_value, opts.display_scale));
    }
    os << line << '\n';
  }
  outputs.add("sweep_" + file_stem(name) + ".csv", std::move(csv));
  Json bundle = detail::bundle_header(sf, "sweep");
  bundle["sweep"] = name;
  bundle["rows"] = std::move(jrows);
  outputs.add("bundle.json", bundle.dump(2) + "\n");
  return rows;
}

}  // namespace fracval
