#pragma once

// Per-trial renewal simulation of an architecture's fractions, discounted
// cost accumulation, and paired (common random number) comparison.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "fracval/archmodel.hpp"
#include "fracval/error.hpp"
#include "fracval/stochastic.hpp"

namespace fracval {

struct ScenarioConfig {
  Years lifetime = 30.0;
  double discount_rate = 0.02;  // continuous, per year
  double launch_rate = 30.0;    // K$ per kg
  std::size_t trials = 10000;
  std::uint64_t master_seed = 0;
  std::vector<Years> checkpoints;  // ascending, within [0, lifetime]
  std::vector<Probability> var_probabilities{0.25};
  std::size_t histogram_bins = 100;
  unsigned threads = 0;  // 0: hardware concurrency

  void validate() const {
    if (!(lifetime > 0.0) || !std::isfinite(lifetime)) throw ConfigError("lifetime must be > 0");
    if (!std::isfinite(discount_rate)) throw ConfigError("discount rate must be finite");
    if (!(launch_rate >= 0.0) || !std::isfinite(launch_rate)) {
      throw ConfigError("launch rate must be >= 0");
    }
    if (trials < 1) throw ConfigError("trials must be >= 1");
    if (histogram_bins < 1) throw ConfigError("histogram_bins must be >= 1");
    for (std::size_t i = 0; i < checkpoints.size(); ++i) {
      if (!(checkpoints[i] >= 0.0 && checkpoints[i] <= lifetime)) {
        throw ConfigError("checkpoint " + std::to_string(checkpoints[i]) +
                          " outside [0, lifetime]");
      }
      if (i && !(checkpoints[i] > checkpoints[i - 1])) {
        throw ConfigError("checkpoints must be strictly ascending");
      }
    }
    for (auto p : var_probabilities) {
      if (!(p > 0.0 && p < 1.0)) throw ConfigError("VaR probabilities must lie in (0, 1)");
    }
  }
};

/// Replacement of a whole fraction at `time`, triggered by one of its units.
struct ReplacementEvent {
  Years time = 0.0;
  std::size_t fraction_index = 0;
  std::string triggering_subsystem_id;
  ReplacementCause cause = ReplacementCause::failure;
  KiloDollars discounted_cost = 0.0;
};

struct TrialCostSeries {
  std::size_t trial_index = 0;
  std::vector<KiloDollars> cost_at_checkpoint;  // aligned with ScenarioConfig::checkpoints
  KiloDollars total = 0.0;                      // all deployments before the lifetime ends
};

/// Runs one trial of the renewal process.
///
/// Every fraction is deployed at t = 0. Each unit (members, bus, tech
/// package) carries an absolute replacement time. The globally earliest one,
/// t*, triggers redeployment of its fraction at cost C_F e^(-r t*), after
/// which every unit of that fraction is redrawn from t*. The loop stops at the
/// first t* >= lifetime. Ties go to the lower fraction index, then the lower
/// subsystem id.
///
/// Checkpoint y accumulates the initial deployment plus replacements with
/// time < y.
inline TrialCostSeries simulate_trial(const Architecture& arch, const ScenarioConfig& cfg,
                                      std::size_t trial_index,
                                      std::vector<ReplacementEvent>* events = nullptr) {
  struct Unit {
    const SubsystemSpec* spec;
    std::size_t fraction;
    std::uint64_t draws;
    Years next;
    ReplacementCause cause;
  };

  const std::size_t nf = arch.fractions.size();
  std::vector<KiloDollars> deploy(nf);
  std::vector<Unit> units;
  std::vector<std::size_t> first_unit(nf + 1, 0);
  for (std::size_t j = 0; j < nf; ++j) {
    deploy[j] = fraction_deploy_cost(arch.fractions[j], cfg.launch_rate);
    auto us = arch.fractions[j].units();
    std::sort(us.begin(), us.end(),
              [](const SubsystemSpec* a, const SubsystemSpec* b) { return a->id < b->id; });
    first_unit[j] = units.size();
    for (const auto* s : us) {
      const auto d = sample_replacement_time(s->replacement, {trial_index, s->id, 0}, cfg.master_seed);
      units.push_back({s, j, 0, d.time, d.cause});
    }
  }
  first_unit[nf] = units.size();

  KiloDollars initial = 0.0;
  for (auto c : deploy) initial += c;

  // Replacements in time order; times are nondecreasing by construction.
  std::vector<Years> times;
  std::vector<KiloDollars> costs;

  for (;;) {
    std::size_t k = 0;
    for (std::size_t u = 1; u < units.size(); ++u) {
      if (units[u].next < units[k].next) k = u;
    }
    const Years t = units[k].next;
    if (!(t < cfg.lifetime)) break;

    const std::size_t j = units[k].fraction;
    const KiloDollars cost = deploy[j] * std::exp(-cfg.discount_rate * t);
    times.push_back(t);
    costs.push_back(cost);
    if (events) {
      events->push_back({t, j, units[k].spec->id, units[k].cause, cost});
    }
    for (std::size_t u = first_unit[j]; u < first_unit[j + 1]; ++u) {
      Unit& unit = units[u];
      ++unit.draws;
      const auto d = sample_replacement_time(unit.spec->replacement,
                                             {trial_index, unit.spec->id, unit.draws},
                                             cfg.master_seed);
      unit.next = t + d.time;
      if (!(unit.next > t)) unit.next = std::nextafter(t, std::numeric_limits<double>::infinity());
      unit.cause = d.cause;
    }
  }

  TrialCostSeries series;
  series.trial_index = trial_index;
  series.cost_at_checkpoint.reserve(cfg.checkpoints.size());
  KiloDollars running = initial;
  std::size_t e = 0;
  for (Years y : cfg.checkpoints) {
    while (e < times.size() && times[e] < y) running += costs[e++];
    series.cost_at_checkpoint.push_back(running);
  }
  while (e < times.size()) running += costs[e++];
  series.total = running;
  return series;
}

namespace detail {

/// Runs body(i) for i in [0, n) on up to `threads` workers; the first
/// exception is rethrown on the calling thread.
template <typename Body>
void parallel_for(std::size_t n, unsigned threads, Body&& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> workers;
    workers.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) {
      workers.emplace_back([&] {
        try {
          for (std::size_t i = next++; i < n; i = next++) body(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next = n;
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace detail

/// Trials 0..trials-1, collected in trial order whatever the scheduling.
inline std::vector<TrialCostSeries> simulate(const Architecture& arch, const ScenarioConfig& cfg) {
  cfg.validate();
  validate_architecture(arch);
  std::vector<TrialCostSeries> out(cfg.trials);
  detail::parallel_for(cfg.trials, cfg.threads,
                       [&](std::size_t i) { out[i] = simulate_trial(arch, cfg, i); });
  return out;
}

/// Per-trial value of the alternative over the baseline at each checkpoint:
/// cost(baseline) - cost(alternative). Positive favours the alternative.
struct ValueDistribution {
  std::vector<Years> checkpoints;
  std::vector<std::vector<KiloDollars>> values;  // [checkpoint][trial]
};

inline ValueDistribution paired_values(const std::vector<TrialCostSeries>& baseline,
                                       const std::vector<TrialCostSeries>& alternative,
                                       const std::vector<Years>& checkpoints) {
  if (baseline.size() != alternative.size()) {
    throw UsageError("paired comparison needs equal trial counts");
  }
  ValueDistribution dist;
  dist.checkpoints = checkpoints;
  dist.values.assign(checkpoints.size(), std::vector<KiloDollars>(baseline.size()));
  for (std::size_t t = 0; t < baseline.size(); ++t) {
    for (std::size_t c = 0; c < checkpoints.size(); ++c) {
      dist.values[c][t] = baseline[t].cost_at_checkpoint[c] - alternative[t].cost_at_checkpoint[c];
    }
  }
  return dist;
}

/// Both architectures run on the same (trial, subsystem, draw) streams, so
/// they differ only through their architecture-dependent resets.
inline ValueDistribution compare(const Architecture& baseline, const Architecture& alternative,
                                 const ScenarioConfig& cfg) {
  if (baseline.main_ids() != alternative.main_ids()) {
    throw ConfigError("architectures \"" + baseline.label + "\" and \"" + alternative.label +
                      "\" cover different subsystems");
  }
  return paired_values(simulate(baseline, cfg), simulate(alternative, cfg), cfg.checkpoints);
}

}  // namespace fracval
