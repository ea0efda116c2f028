// fracval: command-line front end.
//
//   fracval enumerate --scenario f6_case.scenario --out results/
//   fracval compare   --scenario f6_case.scenario --out results/ --arch monolith --arch four_fraction
//
// Exit codes: 0 success, 2 configuration error, 3 runtime error.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fracval/commands.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct Common {
  std::string scenario;
  std::string out = ".";
  std::string units = "k";
  fracval::RunOptions opts;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--scenario", c.scenario, "Scenario file")->required();
  cmd->add_option("--out", c.out, "Output directory")->capture_default_str();
  cmd->add_option("--seed", c.opts.seed, "Master seed (overrides the file)");
  cmd->add_option("--trials", c.opts.trials, "Trial count (overrides the file)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--threads", c.opts.threads, "Worker threads (0: all cores)");
  cmd->add_option("--units", c.units, "Money shown on stdout in K$ (k) or M$ (m)")
      ->check(CLI::IsMember({"k", "m"}))
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo valuation of monolithic vs. fractionated architectures"};
  app.set_version_flag("--version", std::string(fracval::kToolVersion));
  app.require_subcommand(1);

  Common common;
  std::vector<std::string> arch_labels;
  std::string sweep_name;

  auto* enumerate = app.add_subcommand("enumerate", "List every allocation of subsystems into fractions");
  add_common(enumerate, common);

  auto* simulate = app.add_subcommand("simulate", "Simulate lifecycle cost of architectures");
  add_common(simulate, common);
  simulate->add_option("--arch", arch_labels, "Architecture label (repeatable; default: all)");
  simulate->add_flag("--events", common.opts.events, "Write events_<arch>.ndjson");

  auto* compare = app.add_subcommand("compare", "Value of alternatives over a baseline architecture");
  add_common(compare, common);
  compare->add_option("--arch", arch_labels, "Baseline label first, then alternatives")
      ->required()
      ->expected(2, -1);
  compare->add_flag("--raw", common.opts.raw, "Write per-trial value matrices");

  auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep declared in the scenario");
  add_common(sweep, common);
  sweep->add_option("--sweep", sweep_name, "Sweep name")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }
  common.opts.display_scale = common.units == "m" ? 1000.0 : 1.0;

  try {
    auto sf = fracval::load_scenario(common.scenario);
    fracval::apply_overrides(sf, common.opts);
    fracval::OutputSet outputs;
    if (*enumerate) {
      fracval::cmd_enumerate(sf, outputs, std::cout, common.opts);
    } else if (*simulate) {
      fracval::cmd_simulate(sf, arch_labels, outputs, std::cout, common.opts);
    } else if (*compare) {
      fracval::cmd_compare(sf, arch_labels, outputs, std::cout, common.opts);
    } else if (*sweep) {
      fracval::cmd_sweep(sf, sweep_name, outputs, std::cout, common.opts);
    }
    outputs.commit(common.out);
  } catch (const fracval::ConfigError& e) {
    std::cerr << "fracval: configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const fracval::UsageError& e) {
    std::cerr << "fracval: configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "fracval: error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
