#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include "fracval/commands.hpp"
#include "test_support.hpp"

namespace fracval {
namespace {

namespace fs = std::filesystem;
using testing::f6_case;

ScenarioFile small_f6(std::size_t trials = 400) {
  ScenarioFile sf = f6_case();
  sf.config.trials = trials;
  return sf;
}

RunOptions raw_options() {
  RunOptions o;
  o.raw = true;
  return o;
}

RunOptions event_options() {
  RunOptions o;
  o.events = true;
  return o;
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("fracval_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  [[nodiscard]] const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::vector<std::string> listing(const fs::path& dir) {
  std::vector<std::string> names;
  if (!fs::exists(dir)) return names;
  for (const auto& e : fs::directory_iterator(dir)) names.push_back(e.path().filename().string());
  std::sort(names.begin(), names.end());
  return names;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(FRACVAL_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Enumerate, F6CaseListsFifteenAllocations) {
  OutputSet out;
  std::ostringstream os;
  const auto rows = cmd_enumerate(f6_case(), out, os);
  ASSERT_EQ(rows.size(), 15u);
  EXPECT_EQ(std::count_if(rows.begin(), rows.end(), [](const auto& r) { return r.level == "M2"; }), 1);
  EXPECT_EQ(rows[0].label, "PL+CM+DL+PR");
  EXPECT_EQ(rows[0].deploy_cost, 178300.0);
  for (const auto& r : rows) EXPECT_TRUE(r.error.empty()) << r.label << ": " << r.error;
  const std::string csv = out.files().at("enumerate.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 16);
}

TEST(Enumerate, FixtureCatalogs) {
  OutputSet out;
  std::ostringstream os;
  EXPECT_EQ(cmd_enumerate(load_scenario(testing::data_path("single.scenario")), out, os).size(), 1u);
  EXPECT_EQ(cmd_enumerate(load_scenario(testing::data_path("five.scenario")), out, os).size(), 52u);
}

TEST(Enumerate, BusCapacityGapsAreReportedPerRow) {
  ScenarioFile sf = f6_case();
  sf.catalog.bus_overrides.clear();
  sf.catalog.buses.pop_back();  // drop the 150 kg class
  OutputSet out;
  std::ostringstream os;
  const auto rows = cmd_enumerate(sf, out, os);
  ASSERT_EQ(rows.size(), 15u);
  EXPECT_FALSE(rows[0].error.empty());
  EXPECT_TRUE(rows[14].error.empty());
}

TEST(Compare, SelfComparisonTableIsAllZero) {
  OutputSet out;
  std::ostringstream os;
  const auto summaries = cmd_compare(small_f6(), {"arch_a", "arch_a"}, out, os);
  ASSERT_EQ(summaries.size(), 1u);
  for (const auto& s : summaries[0]) {
    EXPECT_EQ(s.expected_value, 0.0);
    for (const auto& [p, v] : s.var_at) EXPECT_EQ(v, 0.0);
  }
  std::istringstream csv(out.files().at("value_arch_a_vs_arch_a.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "year,ev,var_0.25,var_0.55");
  while (std::getline(csv, line)) {
    EXPECT_EQ(line.substr(line.find(',')), ",0.000000,0.000000,0.000000") << line;
  }
}

TEST(Compare, WritesEveryTable) {
  OutputSet out;
  std::ostringstream os;
  cmd_compare(small_f6(), {"monolith", "four_fraction", "arch_b"}, out, os, raw_options());
  const auto& files = out.files();
  for (const char* name : {"costs_monolith.csv", "costs_four_fraction.csv", "costs_arch_b.csv",
                           "value_monolith_vs_four_fraction.csv", "value_monolith_vs_arch_b.csv",
                           "hist_monolith_vs_four_fraction_15.csv", "raw_monolith_vs_arch_b.csv",
                           "bundle.json"}) {
    EXPECT_TRUE(files.count(name)) << name;
  }
  EXPECT_EQ(files.at("costs_monolith.csv").substr(0, 22), "year,ev,q1,median,q3\n3");
  EXPECT_EQ(files.at("hist_monolith_vs_four_fraction_15.csv").substr(0, 20), "bin_lo,bin_hi,count\n");
  const auto bundle = Json::parse(files.at("bundle.json"));
  EXPECT_EQ(bundle["seed"], 2016);
  EXPECT_EQ(bundle["trials"], 400);
  EXPECT_EQ(bundle["config_digest"].get<std::string>().substr(0, 7), "sha256:");
  EXPECT_EQ(bundle["comparisons"].size(), 2u);
}

TEST(Compare, OutputsAreByteStable) {
  OutputSet a, b, c;
  std::ostringstream os;
  auto sf = small_f6();
  cmd_compare(sf, {"monolith", "four_fraction"}, a, os);
  cmd_compare(sf, {"monolith", "four_fraction"}, b, os);
  sf.config.threads = 3;
  cmd_compare(sf, {"monolith", "four_fraction"}, c, os);
  for (const auto& [name, content] : a.files()) {
    if (name == "bundle.json") continue;  // embeds the thread count
    EXPECT_EQ(content, b.files().at(name)) << name;
    EXPECT_EQ(content, c.files().at(name)) << name;
  }
  EXPECT_EQ(a.files().at("bundle.json"), b.files().at("bundle.json"));
}

TEST(Compare, BundleReproducesTheRun) {
  OutputSet first;
  std::ostringstream os;
  cmd_compare(small_f6(), {"monolith", "arch_c"}, first, os);
  const auto bundle = Json::parse(first.files().at("bundle.json"));
  const auto replay = scenario_from_json(bundle["scenario"]);
  EXPECT_EQ(config_digest(replay), bundle["config_digest"].get<std::string>());
  OutputSet second;
  cmd_compare(replay, {"monolith", "arch_c"}, second, os);
  EXPECT_EQ(first.files(), second.files());
}

TEST(Compare, UnknownLabelOrMissingAlternative) {
  OutputSet out;
  std::ostringstream os;
  EXPECT_THROW(cmd_compare(small_f6(), {"monolith", "nope"}, out, os), ConfigError);
  EXPECT_THROW(cmd_compare(small_f6(), {"monolith"}, out, os), ConfigError);
  EXPECT_TRUE(out.files().empty());
}

TEST(Simulate, EventLogMatchesCosts) {
  OutputSet out;
  std::ostringstream os;
  auto sf = small_f6(50);
  cmd_simulate(sf, {"four_fraction"}, out, os, event_options());
  const std::string log = out.files().at("events_four_fraction.ndjson");
  std::istringstream in(log);
  std::string line;
  std::vector<double> per_trial(50, 0.0);
  while (std::getline(in, line)) {
    const auto j = Json::parse(line);
    per_trial[j["trial"].get<std::size_t>()] += j["discounted_cost"].get<double>();
    EXPECT_LT(j["time"].get<double>(), 30.0);
  }
  const auto arch = sf.build("four_fraction");
  for (std::size_t t = 0; t < 50; ++t) {
    EXPECT_NEAR(simulate_trial(arch, sf.config, t).total, arch.deploy_cost(30) + per_trial[t], 1e-6);
  }
}

TEST(Sweep, UnknownSweepIsConfigError) {
  OutputSet out;
  std::ostringstream os;
  EXPECT_THROW(cmd_sweep(small_f6(), "nope", out, os), ConfigError);
}

TEST(Sweep, TableHasOneRowPerGridPoint) {
  OutputSet out;
  std::ostringstream os;
  cmd_sweep(small_f6(100), "f6tp_alpha", out, os);
  const std::string csv = out.files().at("sweep_f6tp_alpha.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "point,label,techpackage.failure.scale,ev_15,q1_15,median_15,q3_15,var_0.25_15,var_0.55_15");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 6);
}

TEST(OutputSet, CommitWritesEverythingOrNothing) {
  TempDir dir;
  OutputSet out;
  out.add("a.csv", "1\n");
  out.add("z.csv", "2\n");
  fs::create_directory(dir.path() / "z.csv");
  EXPECT_THROW(out.commit(dir.path()), RuntimeError);
  EXPECT_EQ(listing(dir.path()), std::vector<std::string>{"z.csv"});
  fs::remove(dir.path() / "z.csv");
  out.commit(dir.path());
  EXPECT_EQ(listing(dir.path()), (std::vector<std::string>{"a.csv", "z.csv"}));
  EXPECT_EQ(slurp(dir.path() / "z.csv"), "2\n");
}

TEST(Cli, SuccessfulRunsExitZero) {
  TempDir dir;
  const std::string scen = testing::scenario_path("f6_case.scenario");
  EXPECT_EQ(run_cli("enumerate --scenario " + scen + " --out " + dir.path().string()), 0);
  EXPECT_TRUE(fs::exists(dir.path() / "enumerate.csv"));
  EXPECT_EQ(run_cli("compare --scenario " + scen + " --trials 200 --units m --out " + dir.path().string() +
                    " --arch monolith --arch four_fraction"),
            0);
  EXPECT_TRUE(fs::exists(dir.path() / "value_monolith_vs_four_fraction.csv"));
  EXPECT_EQ(run_cli("--version"), 0);
}

TEST(Cli, CliMatchesLibraryOutput) {
  TempDir dir;
  const std::string scen = testing::scenario_path("f6_case.scenario");
  ASSERT_EQ(run_cli("compare --scenario " + scen + " --trials 300 --seed 9 --out " + dir.path().string() +
                    " --arch monolith --arch arch_a"),
            0);
  auto sf = f6_case();
  sf.config.trials = 300;
  sf.config.master_seed = 9;
  OutputSet out;
  std::ostringstream os;
  cmd_compare(sf, {"monolith", "arch_a"}, out, os);
  for (const auto& [name, content] : out.files()) {
    if (name == "bundle.json") continue;
    EXPECT_EQ(slurp(dir.path() / name), content) << name;
  }
}

TEST(Cli, ConfigurationErrorsExitTwo) {
  TempDir dir;
  const std::string scen = testing::scenario_path("f6_case.scenario");
  const std::string out = " --out " + (dir.path() / "o").string();
  EXPECT_EQ(run_cli("compare --scenario " + scen + out + " --arch monolith --arch nope"), 2);
  EXPECT_EQ(run_cli("sweep --scenario " + scen + out + " --sweep nope"), 2);
  EXPECT_EQ(run_cli("enumerate --scenario /nonexistent.scenario" + out), 2);
  EXPECT_EQ(run_cli("enumerate" + out), 2);
  EXPECT_EQ(run_cli("frobnicate"), 2);
  EXPECT_EQ(run_cli("compare --scenario " + scen + out + " --trials 0 --arch a --arch b"), 2);
  std::ofstream(dir.path() / "broken.scenario") << "{ \"catalog\": ";
  EXPECT_EQ(run_cli("enumerate --scenario " + (dir.path() / "broken.scenario").string() + out), 2);
  EXPECT_FALSE(fs::exists(dir.path() / "o"));
}

TEST(Cli, UnwritableOutputExitsThreeWithoutPartialFiles) {
  TempDir dir;
  const std::string scen = testing::scenario_path("f6_case.scenario");
  std::ofstream(dir.path() / "file") << "x";
  EXPECT_EQ(run_cli("enumerate --scenario " + scen + " --out " + (dir.path() / "file" / "sub").string()), 3);

  const fs::path out = dir.path() / "out";
  fs::create_directories(out / "value_monolith_vs_four_fraction.csv");
  EXPECT_EQ(run_cli("compare --scenario " + scen + " --trials 50 --out " + out.string() +
                    " --arch monolith --arch four_fraction"),
            3);
  EXPECT_EQ(listing(out), std::vector<std::string>{"value_monolith_vs_four_fraction.csv"});
}

}  // namespace
}  // namespace fracval
