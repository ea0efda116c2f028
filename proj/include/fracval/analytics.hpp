#pragma once

// Summary statistics over per-trial value samples (expected value,
// quartiles, Value at Risk, histograms), bootstrap intervals, and parameter
// sweeps over the catalog.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fracval/archmodel.hpp"
#include "fracval/error.hpp"
#include "fracval/simengine.hpp"
#include "fracval/stochastic.hpp"

namespace fracval {

/// Type-7 (linear interpolation) empirical quantile of already sorted data.
inline double quantile_sorted(std::span<const double> sorted, Probability p) {
  if (sorted.empty()) throw UsageError("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw UsageError("quantile probability outside [0, 1]");
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

inline double quantile(std::vector<double> samples, Probability p) {
  std::sort(samples.begin(), samples.end());
  return quantile_sorted(samples, p);
}

/// Threshold below which a fraction p of the values fall, in the same sign
/// convention as the values themselves (a negative VaR is a loss).
inline KiloDollars value_at_risk(std::span<const double> samples, Probability p) {
  if (samples.empty()) throw UsageError("value at risk of an empty sample");
  if (!(p > 0.0 && p < 1.0)) throw UsageError("VaR probability must lie in (0, 1)");
  return quantile(std::vector<double>(samples.begin(), samples.end()), p);
}

struct Histogram {
  std::vector<double> edges;  // bins + 1 entries
  std::vector<std::size_t> counts;

  /// Fraction of samples in bins lying entirely below `x`.
  [[nodiscard]] double mass_below(double x) const {
    std::size_t total = 0, below = 0;
    for (std::size_t b = 0; b < counts.size(); ++b) {
      total += counts[b];
      if (edges[b + 1] <= x) below += counts[b];
    }
    return total ? static_cast<double>(below) / static_cast<double>(total) : 0.0;
  }
};

/// Equal-width bins over [min, max]; the last bin is closed. A sample with
/// zero range collapses to one bin.
inline Histogram make_histogram(std::span<const double> sorted, std::size_t bins) {
  if (sorted.empty()) throw UsageError("histogram of an empty sample");
  if (bins == 0) throw UsageError("histogram needs at least one bin");
  const double lo = sorted.front();
  const double hi = sorted.back();
  Histogram h;
  if (!(hi > lo)) {
    h.edges = {lo, hi};
    h.counts = {sorted.size()};
    return h;
  }
  const double width = (hi - lo) / static_cast<double>(bins);
  h.edges.resize(bins + 1);
  for (std::size_t b = 0; b <= bins; ++b) h.edges[b] = lo + width * static_cast<double>(b);
  h.edges[bins] = hi;
  h.counts.assign(bins, 0);
  for (double x : sorted) {
    auto b = static_cast<std::size_t>((x - lo) / width);
    h.counts[std::min(b, bins - 1)]++;
  }
  return h;
}

struct Summary {
  double expected_value = 0.0;
  double std_dev = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::vector<std::pair<Probability, double>> var_at;
  Histogram histogram;

  [[nodiscard]] double var(Probability p) const {
    for (const auto& [q, v] : var_at) {
      if (q == p) return v;
    }
    throw UsageError("VaR at p=" + std::to_string(p) + " was not computed");
  }
};

/// Sums in sorted order, so the result does not depend on sample order.
inline Summary summarize(std::span<const double> samples, std::span<const Probability> var_probabilities,
                         std::size_t bins = 100) {
  if (samples.empty()) throw UsageError("summary of an empty sample");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(sorted.size());

  Summary s;
  double sum = 0.0;
  for (double x : sorted) sum += x;
  s.expected_value = sum / n;
  if (sorted.front() == sorted.back()) s.expected_value = sorted.front();
  double ss = 0.0;
  for (double x : sorted) ss += (x - s.expected_value) * (x - s.expected_value);
  s.std_dev = sorted.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  s.q1 = quantile_sorted(sorted, 0.25);
  s.median = quantile_sorted(sorted, 0.5);
  s.q3 = quantile_sorted(sorted, 0.75);
  s.min = sorted.front();
  s.max = sorted.back();
  for (auto p : var_probabilities) {
    if (!(p > 0.0 && p < 1.0)) throw UsageError("VaR probability must lie in (0, 1)");
    s.var_at.emplace_back(p, quantile_sorted(sorted, p));
  }
  s.histogram = make_histogram(sorted, bins);
  return s;
}

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Percentile bootstrap interval for `statistic`, which is evaluated on a
/// vector of resampled trial indices in [0, n).
template <typename Statistic>
Interval bootstrap_interval(std::size_t n, Statistic&& statistic, double confidence = 0.95,
                            std::size_t resamples = 1000, std::uint64_t seed = 1) {
  if (n == 0) throw UsageError("bootstrap of an empty sample");
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> idx(n);
  std::vector<double> stats(resamples);
  for (auto& s : stats) {
    for (auto& i : idx) i = static_cast<std::size_t>(rng() % n);
    s = statistic(idx);
  }
  std::sort(stats.begin(), stats.end());
  const double tail = 0.5 * (1.0 - confidence);
  return {quantile_sorted(stats, tail), quantile_sorted(stats, 1.0 - tail)};
}

inline Interval bootstrap_mean_interval(std::span<const double> samples, double confidence = 0.95,
                                        std::size_t resamples = 1000, std::uint64_t seed = 1) {
  return bootstrap_interval(
      samples.size(),
      [&](const std::vector<std::size_t>& idx) {
        double sum = 0.0;
        for (auto i : idx) sum += samples[i];
        return sum / static_cast<double>(idx.size());
      },
      confidence, resamples, seed);
}

// ---------------------------------------------------------------------------
// Sweeps

struct SweepParameter {
  std::string path;
  std::vector<double> values;
};

/// Grid point i sets every parameter path to its i-th value, rebuilds both
/// architectures from their partitions and compares them.
struct SweepSpec {
  std::string name;
  Partition baseline;
  Partition alternative;
  std::vector<SweepParameter> parameters;
  std::vector<Years> years;
  std::vector<std::string> point_labels;  // optional, one per grid point

  [[nodiscard]] std::size_t grid_size() const {
    return parameters.empty() ? 0 : parameters.front().values.size();
  }

  void validate() const {
    if (parameters.empty()) throw ConfigError("sweep \"" + name + "\" has no parameters");
    for (const auto& p : parameters) {
      if (p.values.empty()) {
        throw ConfigError("sweep \"" + name + "\": parameter \"" + p.path + "\" has an empty grid");
      }
      if (p.values.size() != grid_size()) {
        throw ConfigError("sweep \"" + name + "\": parameter grids differ in length");
      }
    }
    if (!point_labels.empty() && point_labels.size() != grid_size()) {
      throw ConfigError("sweep \"" + name + "\": one label per grid point required");
    }
    if (years.empty()) throw ConfigError("sweep \"" + name + "\" has no years");
    for (std::size_t i = 0; i < years.size(); ++i) {
      if (!(years[i] > 0.0) || (i && !(years[i] > years[i - 1]))) {
        throw ConfigError("sweep \"" + name + "\": years must be positive and ascending");
      }
    }
  }
};

namespace detail {

inline void set_law_parameter(TimeLaw& law, std::string_view field, double value,
                              const std::string& path) {
  if (auto* w = std::get_if<WeibullLaw>(&law)) {
    if (field == "scale") *w = WeibullLaw::make(value, w->shape);
    else if (field == "shape") *w = WeibullLaw::make(w->scale, value);
    else throw ConfigError("parameter path \"" + path + "\": weibull laws have scale and shape");
  } else if (auto* l = std::get_if<LogNormalLaw>(&law)) {
    if (field == "mean") *l = LogNormalLaw::from_moments(value, l->std_dev);
    else if (field == "std_dev") *l = LogNormalLaw::from_moments(l->mean, value);
    else throw ConfigError("parameter path \"" + path + "\": log-normal laws have mean and std_dev");
  } else if (auto* p = std::get_if<PointMass>(&law)) {
    if (field == "at") *p = PointMass::make(value);
    else throw ConfigError("parameter path \"" + path + "\": point-mass laws have at");
  }
}

inline void set_unit_parameter(std::string_view rest, double value, KiloDollars& cost,
                               Kilograms& mass, ReplacementLaw& law, const std::string& path,
                               Kilograms* capacity = nullptr) {
  if (rest == "cost") {
    cost = value;
  } else if (rest == "mass") {
    mass = value;
  } else if (rest == "capacity" && capacity) {
    *capacity = value;
  } else if (rest.starts_with("failure.")) {
    set_law_parameter(law.failure, rest.substr(8), value, path);
  } else if (rest.starts_with("obsolescence.")) {
    if (!law.obsolescence) throw ConfigError("parameter path \"" + path + "\": no obsolescence law");
    set_law_parameter(*law.obsolescence, rest.substr(13), value, path);
  } else {
    throw ConfigError("invalid parameter path \"" + path + "\"");
  }
}

}  // namespace detail

/// Recognised paths:
///   subsystem.<id>.{cost,mass,failure.<p>,obsolescence.<p>}
///   techpackage.{cost,mass,failure.<p>}
///   bus.<name>.{cost,mass,capacity,failure.<p>}   (catalog entries and overrides)
///   scenario.{discount_rate,launch_rate}
/// where <p> is scale/shape (weibull), mean/std_dev (log-normal) or at.
inline void apply_parameter(Catalog& catalog, ScenarioConfig& cfg, const std::string& path,
                            double value) {
  auto dot = path.find('.');
  if (dot == std::string::npos) throw ConfigError("invalid parameter path \"" + path + "\"");
  const std::string_view head = std::string_view(path).substr(0, dot);
  std::string_view tail = std::string_view(path).substr(dot + 1);

  if (head == "scenario") {
    if (tail == "discount_rate") cfg.discount_rate = value;
    else if (tail == "launch_rate") cfg.launch_rate = value;
    else throw ConfigError("invalid parameter path \"" + path + "\"");
  } else if (head == "techpackage") {
    if (!catalog.techpackage) throw ConfigError("parameter path \"" + path + "\": no techpackage");
    auto& t = *catalog.techpackage;
    detail::set_unit_parameter(tail, value, t.build_cost, t.mass, t.replacement, path);
  } else if (head == "subsystem") {
    // Subsystem ids may not contain dots; the field follows the next dot.
    auto dot2 = tail.find('.');
    if (dot2 == std::string_view::npos) throw ConfigError("invalid parameter path \"" + path + "\"");
    const std::string key(tail.substr(0, dot2));
    auto i = catalog.index_of(key);
    if (!i) throw ConfigError("parameter path \"" + path + "\": unknown subsystem \"" + key + "\"");
    auto& s = catalog.subsystems[*i];
    detail::set_unit_parameter(tail.substr(dot2 + 1), value, s.build_cost, s.mass, s.replacement, path);
  } else if (head == "bus") {
    // Bus names are free text and may contain dots, so match them by prefix.
    auto field_of = [&](const std::string& name) -> std::optional<std::string_view> {
      if (tail.size() > name.size() + 1 && tail.starts_with(name) && tail[name.size()] == '.') {
        return tail.substr(name.size() + 1);
      }
      return std::nullopt;
    };
    bool found = false;
    for (auto& b : catalog.buses) {
      if (auto field = field_of(b.name)) {
        detail::set_unit_parameter(*field, value, b.build_cost, b.mass, b.replacement, path, &b.capacity);
        found = true;
      }
    }
    for (auto& o : catalog.bus_overrides) {
      if (auto field = field_of(o.name)) {
        detail::set_unit_parameter(*field, value, o.build_cost, o.mass, o.replacement, path);
        found = true;
      }
    }
    if (!found) throw ConfigError("parameter path \"" + path + "\": unknown bus");
  } else {
    throw ConfigError("invalid parameter path \"" + path + "\"");
  }
  catalog.validate();
  cfg.validate();
}

struct SweepRow {
  std::size_t point = 0;
  std::string label;
  std::vector<double> parameter_values;
  std::vector<Summary> at_year;  // aligned with SweepSpec::years
  ValueDistribution values;
};

/// Rows come back in grid order. Every row reuses the scenario's master
/// seed, so neighbouring grid points share random streams.
inline std::vector<SweepRow> run_sweep(const SweepSpec& spec, const Catalog& catalog,
                                       const ScenarioConfig& base_cfg) {
  spec.validate();
  std::vector<SweepRow> rows;
  for (std::size_t i = 0; i < spec.grid_size(); ++i) {
    Catalog cat = catalog;
    ScenarioConfig cfg = base_cfg;
    cfg.checkpoints = spec.years;
    cfg.lifetime = spec.years.back();
    SweepRow row;
    row.point = i;
    for (const auto& p : spec.parameters) {
      apply_parameter(cat, cfg, p.path, p.values[i]);
      row.parameter_values.push_back(p.values[i]);
    }
    row.label = spec.point_labels.empty() ? std::to_string(i) : spec.point_labels[i];
    const auto base = build_architecture(spec.baseline, cat);
    const auto alt = build_architecture(spec.alternative, cat);
    row.values = compare(base, alt, cfg);
    for (const auto& v : row.values.values) {
      row.at_year.push_back(summarize(v, cfg.var_probabilities, cfg.histogram_bins));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace fracval
