#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "oralab/harness.hpp"

namespace oralab {

// One run directory's logs, reloaded from disk (episodes_/eval_ CSVs plus
// summary.json when present). Metrics are recomputed from the CSV rows, so
// hand-written logs compare exactly like generated ones.
struct LoadedRun {
  std::string dir;           // as passed in
  std::string name;          // directory basename (used as the run id)
  std::string agent;         // label from summary.json or the CSV file names
  std::string env;           // from summary.json, else "unknown"
  std::vector<std::string> columns;  // episodes CSV header
  std::map<std::uint64_t, std::vector<EpisodeLog>> train;  // by seed
  std::map<std::uint64_t, std::vector<EpisodeLog>> eval;   // by seed

  std::vector<std::uint64_t> seeds() const;
  // Mean reward over the last 10% of logged training rows for one seed.
  double final_window(std::uint64_t seed) const;
};

LoadedRun load_run_dir(const std::string& dir);

// Seed-wise percentile with linear interpolation between order statistics.
// p in [0, 1]; values need not be sorted.
double percentile(std::vector<double> values, double p);

struct CompareResult {
  std::string report_text;
  std::vector<std::string> written;  // report.txt, curves_long.csv
};

// Compares >= 2 run directories: tabulates mean +/- std of final-window
// reward, eval reward, success rate, and collision rate per run; orders runs
// by final-window reward with seed-paired deltas (wins/ties/losses over
// shared seeds); writes report.txt and a plot-ready long-format
// curves_long.csv (seed-wise 5th/95th percentile bands) into out_dir.
// Fewer than two directories or mismatched CSV schemas raise ConfigError;
// the schema error lists the differing columns.
CompareResult compare_report(const std::vector<std::string>& dirs,
                             const std::string& out_dir);

}  // namespace oralab
