#pragma once

// Result persistence: CSV tables, NDJSON event logs and the run bundle.
// Outputs are staged in memory and committed with write-then-rename.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "fracval/analytics.hpp"
#include "fracval/error.hpp"
#include "fracval/scenario.hpp"
#include "fracval/simengine.hpp"

namespace fracval {

inline constexpr std::string_view kToolVersion = "1.0.0";
inline constexpr std::string_view kCsvSchema = "1";

/// "sha256:<hex>" of the canonical scenario serialization.
inline std::string config_digest(const ScenarioFile& sf) {
  const std::string canonical = scenario_to_json(sf).dump();
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(canonical.data(), canonical.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw RuntimeError("sha256 digest failed");
  }
  std::string hex = "sha256:";
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
  return hex;
}

/// Restricts a label to [A-Za-z0-9_-] for use in file names.
inline std::string file_stem(std::string_view label) {
  std::string out;
  for (char c : label) {
    const bool keep = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                      c == '_' || c == '-';
    out += keep ? c : (c == '|' ? '-' : '_');
  }
  return out;
}

inline std::string pair_stem(std::string_view baseline, std::string_view alternative) {
  return file_stem(baseline) + "_vs_" + file_stem(alternative);
}

inline std::string fmt_money(double v) { return fmt::format("{:.6f}", v); }
inline std::string fmt_year(double y) { return fmt::format("{}", y); }

/// year,ev,q1,median,q3
inline std::string costs_csv(const std::vector<TrialCostSeries>& series,
                             const ScenarioConfig& cfg) {
  std::string out = "year,ev,q1,median,q3\n";
  std::vector<double> column(series.size());
  for (std::size_t c = 0; c < cfg.checkpoints.size(); ++c) {
    for (std::size_t t = 0; t < series.size(); ++t) column[t] = series[t].cost_at_checkpoint[c];
    const auto s = summarize(column, {}, 1);
    out += fmt::format("{},{},{},{},{}\n", fmt_year(cfg.checkpoints[c]), fmt_money(s.expected_value),
                       fmt_money(s.q1), fmt_money(s.median), fmt_money(s.q3));
  }
  return out;
}

/// year,ev,var_<p>...
inline std::string value_csv(const ValueDistribution& dist, const std::vector<Summary>& summaries,
                             const ScenarioConfig& cfg) {
  std::string out = "year,ev";
  for (auto p : cfg.var_probabilities) out += fmt::format(",var_{}", p);
  out += '\n';
  for (std::size_t c = 0; c < dist.checkpoints.size(); ++c) {
    out += fmt_year(dist.checkpoints[c]) + "," + fmt_money(summaries[c].expected_value);
    for (const auto& [p, v] : summaries[c].var_at) out += "," + fmt_money(v);
    out += '\n';
  }
  return out;
}

/// bin_lo,bin_hi,count
inline std::string histogram_csv(const Histogram& h) {
  std::string out = "bin_lo,bin_hi,count\n";
  for (std::size_t b = 0; b < h.counts.size(); ++b) {
    out += fmt::format("{},{},{}\n", fmt_money(h.edges[b]), fmt_money(h.edges[b + 1]), h.counts[b]);
  }
  return out;
}

/// trial,<one column per checkpoint>
inline std::string raw_values_csv(const ValueDistribution& dist) {
  std::string out = "trial";
  for (auto y : dist.checkpoints) out += ",y" + fmt_year(y);
  out += '\n';
  const std::size_t n = dist.values.empty() ? 0 : dist.values.front().size();
  for (std::size_t t = 0; t < n; ++t) {
    out += std::to_string(t);
    for (const auto& col : dist.values) out += "," + fmt_money(col[t]);
    out += '\n';
  }
  return out;
}

inline std::string event_ndjson(std::size_t trial, const ReplacementEvent& e) {
  Json j = {{"trial", trial},
            {"time", e.time},
            {"fraction", e.fraction_index},
            {"subsystem", e.triggering_subsystem_id},
            {"cause", std::string(to_string(e.cause))},
            {"discounted_cost", e.discounted_cost}};
  return j.dump() + "\n";
}

/// Files to be written together; nothing touches the output directory until
/// commit(), which writes each file to a temporary name and renames it.
class OutputSet {
 public:
  void add(std::string name, std::string content) { files_[std::move(name)] = std::move(content); }

  [[nodiscard]] const std::map<std::string, std::string>& files() const { return files_; }

  void commit(const std::filesystem::path& dir) const {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
      throw RuntimeError("cannot create output directory \"" + dir.string() + "\"");
    }
    for (const auto& [name, _] : files_) {
      const fs::path final_path = dir / name;
      if (fs::exists(final_path, ec) && !fs::is_regular_file(final_path, ec)) {
        throw RuntimeError("\"" + final_path.string() + "\" exists and is not a regular file");
      }
    }
    std::vector<std::pair<fs::path, fs::path>> staged;
    auto cleanup = [&] {
      for (const auto& [tmp, _] : staged) fs::remove(tmp, ec);
    };
    for (const auto& [name, content] : files_) {
      const fs::path final_path = dir / name;
      const fs::path tmp = dir / ("." + name + ".tmp");
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (out) out.write(content.data(), static_cast<std::streamsize>(content.size()));
      out.close();
      if (!out) {
        fs::remove(tmp, ec);
        cleanup();
        throw RuntimeError("cannot write \"" + final_path.string() + "\"");
      }
      staged.emplace_back(tmp, final_path);
    }
    for (const auto& [tmp, final_path] : staged) {
      fs::rename(tmp, final_path, ec);
      if (ec) {
        cleanup();
        throw RuntimeError("cannot rename into \"" + final_path.string() + "\"");
      }
    }
  }

 private:
  std::map<std::string, std::string> files_;
};

}  // namespace fracval
