#include "oralab/compare.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "nlohmann/json.hpp"

namespace oralab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

// episodes_<label>_<seed>.csv -> (label, seed); label may contain underscores.
bool parse_log_name(const std::string& stem, const std::string& prefix,
                    std::string* label, std::uint64_t* seed) {
  if (stem.rfind(prefix, 0) != 0) return false;
  const std::string rest = stem.substr(prefix.size());
  const auto pos = rest.rfind('_');
  if (pos == std::string::npos || pos == 0 || pos + 1 >= rest.size()) {
    return false;
  }
  try {
    *seed = std::stoull(rest.substr(pos + 1));
  } catch (const std::exception&) {
    return false;
  }
  *label = rest.substr(0, pos);
  return true;
}

std::vector<EpisodeLog> read_log_csv(const std::string& path,
                                     std::vector<std::string>* columns) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open log file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty log file: " + path);
  *columns = split(line, ',');
  std::vector<EpisodeLog> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != columns->size()) {
      throw ConfigError("malformed row in " + path + ": '" + line + "'");
    }
    EpisodeLog l;
    try {
      l.episode = std::stoi(cells[0]);
      l.reward = std::stod(cells[1]);
      l.alpha_mean = std::stod(cells[2]);
      l.ltv = std::stod(cells[3]);
      l.success = std::stoi(cells[4]) != 0;
      l.collisions = std::stoi(cells[5]);
      l.ms = std::stod(cells[6]);
    } catch (const std::exception&) {
      throw ConfigError("malformed row in " + path + ": '" + line + "'");
    }
    rows.push_back(l);
  }
  return rows;
}

double mean_of(const std::vector<double>& xs) {
  double acc = 0.0;
  for (double x : xs) acc += x;
  return xs.empty() ? 0.0 : acc / xs.size();
}

double stdev_of(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean_of(xs);
  double acc = 0.0;
  for (double x : xs) acc += (x - m) * (x - m);
  return std::sqrt(acc / (xs.size() - 1));
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string mean_std(const std::vector<double>& xs) {
  return num(mean_of(xs)) + " +/- " + num(stdev_of(xs));
}

}  // namespace

std::vector<std::uint64_t> LoadedRun::seeds() const {
  std::vector<std::uint64_t> out;
  for (const auto& [seed, _] : train) out.push_back(seed);
  return out;
}

double LoadedRun::final_window(std::uint64_t seed) const {
  const auto it = train.find(seed);
  if (it == train.end() || it->second.empty()) return 0.0;
  const int n = static_cast<int>(it->second.size());
  const int window = std::max(1, n / 10);
  double acc = 0.0;
  for (int i = n - window; i < n; ++i) acc += it->second[i].reward;
  return acc / window;
}

LoadedRun load_run_dir(const std::string& dir) {
  LoadedRun run;
  run.dir = dir;
  run.name = fs::path(dir).filename().string();
  if (run.name.empty()) run.name = fs::path(dir).parent_path().filename().string();
  if (!fs::is_directory(dir)) {
    throw ConfigError("not a run directory: " + dir);
  }

  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file()) files.push_back(entry.path().filename().string());
  }
  std::sort(files.begin(), files.end());

  for (const std::string& f : files) {
    if (f.size() < 4 || f.substr(f.size() - 4) != ".csv") continue;
    const std::string stem = f.substr(0, f.size() - 4);
    std::string label;
    std::uint64_t seed = 0;
    if (parse_log_name(stem, "episodes_", &label, &seed)) {
      std::vector<std::string> cols;
      run.train[seed] = read_log_csv((fs::path(dir) / f).string(), &cols);
      if (run.columns.empty()) run.columns = cols;
      if (cols != run.columns) {
        throw ConfigError("inconsistent CSV columns inside " + dir);
      }
      if (run.agent.empty()) run.agent = label;
    } else if (parse_log_name(stem, "eval_", &label, &seed)) {
      std::vector<std::string> cols;
      run.eval[seed] = read_log_csv((fs::path(dir) / f).string(), &cols);
      if (run.columns.empty()) run.columns = cols;
      if (cols != run.columns) {
        throw ConfigError("inconsistent CSV columns inside " + dir);
      }
    }
  }
  if (run.train.empty()) {
    throw ConfigError("no episodes_<label>_<seed>.csv logs found in " + dir);
  }

  const fs::path summary = fs::path(dir) / "summary.json";
  if (fs::exists(summary)) {
    std::ifstream in(summary);
    try {
      json j = json::parse(in);
      if (j.contains("agent") && j["agent"].is_string()) {
        run.agent = j["agent"].get<std::string>();
      }
      if (j.contains("env") && j["env"].is_string()) {
        run.env = j["env"].get<std::string>();
      }
    } catch (const json::exception& e) {
      throw ConfigError("malformed summary.json in " + dir + ": " + e.what());
    }
  }
  if (run.env.empty()) run.env = "unknown";
  return run;
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) return 0.0;
  p = std::clamp(p, 0.0, 1.0);
  std::sort(values.begin(), values.end());
  const double rank = p * (values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(rank));
  const std::size_t hi = static_cast<std::size_t>(std::ceil(rank));
  if (lo == hi) return values[lo];
  const double frac = rank - lo;
  return values[lo] * (1.0 - frac) + values[hi] * frac;
}

CompareResult compare_report(const std::vector<std::string>& dirs,
                             const std::string& out_dir) {
  if (dirs.size() < 2) {
    throw ConfigError("compare needs at least 2 run directories, got " +
                      std::to_string(dirs.size()));
  }
  std::vector<LoadedRun> runs;
  runs.reserve(dirs.size());
  for (const std::string& d : dirs) runs.push_back(load_run_dir(d));

  // All runs must share the same CSV schema; report the differing columns.
  for (std::size_t i = 1; i < runs.size(); ++i) {
    if (runs[i].columns == runs[0].columns) continue;
    std::set<std::string> a(runs[0].columns.begin(), runs[0].columns.end());
    std::set<std::string> b(runs[i].columns.begin(), runs[i].columns.end());
    std::vector<std::string> diff;
    std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(),
                                  std::back_inserter(diff));
    std::string cols;
    for (const std::string& c : diff) cols += (cols.empty() ? "" : ", ") + c;
    if (cols.empty()) cols = "(same names, different order)";
    throw ConfigError("schema mismatch between " + runs[0].dir + " and " +
                      runs[i].dir + "; differing columns: " + cols);
  }

  // Per-run aggregate metrics.
  struct Row {
    const LoadedRun* run;
    std::vector<double> finals, eval_r, eval_s, eval_c;
    double final_mean = 0.0;
  };
  std::vector<Row> rows;
  for (const LoadedRun& r : runs) {
    Row row;
    row.run = &r;
    for (const auto seed : r.seeds()) row.finals.push_back(r.final_window(seed));
    for (const auto& [seed, logs] : r.eval) {
      std::vector<double> er, es, ec;
      for (const EpisodeLog& l : logs) {
        er.push_back(l.reward);
        es.push_back(l.success ? 1.0 : 0.0);
        ec.push_back(l.collisions);
      }
      row.eval_r.push_back(mean_of(er));
      row.eval_s.push_back(mean_of(es));
      row.eval_c.push_back(mean_of(ec));
    }
    row.final_mean = mean_of(row.finals);
    rows.push_back(std::move(row));
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.final_mean != b.final_mean) return a.final_mean > b.final_mean;
    if (a.run->agent != b.run->agent) return a.run->agent < b.run->agent;
    return a.run->dir < b.run->dir;
  });

  std::ostringstream rep;
  rep << "run comparison over " << runs.size() << " directories\n";
  rep << "final window: mean reward over the last 10% of logged training rows\n";
  rep << "\n";
  rep << "run | agent | env | seeds | final_window_reward | eval_reward | "
         "eval_success_rate | eval_collisions\n";
  for (const Row& row : rows) {
    rep << row.run->name << " | " << row.run->agent << " | " << row.run->env
        << " | " << row.run->seeds().size() << " | " << mean_std(row.finals)
        << " | " << mean_std(row.eval_r) << " | " << mean_std(row.eval_s)
        << " | " << mean_std(row.eval_c) << "\n";
  }

  rep << "\nordering (by mean final-window reward):\n  ";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i) rep << " >= ";
    rep << rows[i].run->name;
  }
  rep << "\n";

  rep << "\nseed-paired deltas (final-window reward, first minus second, "
         "shared seeds only):\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t k = i + 1; k < rows.size(); ++k) {
      const LoadedRun& a = *rows[i].run;
      const LoadedRun& b = *rows[k].run;
      std::vector<double> deltas;
      int wins = 0, ties = 0, losses = 0;
      for (const auto& [seed, _] : a.train) {
        if (b.train.find(seed) == b.train.end()) continue;
        const double d = a.final_window(seed) - b.final_window(seed);
        deltas.push_back(d);
        if (d > 0.0) {
          ++wins;
        } else if (d < 0.0) {
          ++losses;
        } else {
          ++ties;
        }
      }
      rep << "  " << a.name << " vs " << b.name << ": mean delta "
          << num(mean_of(deltas)) << ", wins " << wins << ", ties " << ties
          << ", losses " << losses << " (n=" << deltas.size() << ")\n";
    }
  }
  rep << "\ncurve bands: seed-wise 5th/95th percentiles (see curves_long.csv)\n";

  fs::create_directories(out_dir);
  const std::string report_path = (fs::path(out_dir) / "report.txt").string();
  {
    std::ofstream out(report_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + report_path);
    out << rep.str();
  }

  // Long-format curve table: one row per (run, logged episode).
  const std::string curves_path = (fs::path(out_dir) / "curves_long.csv").string();
  {
    std::ofstream out(curves_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + curves_path);
    out << "run,agent,episode,reward_mean,reward_p05,reward_p95\n";
    for (const Row& row : rows) {
      const LoadedRun& r = *row.run;
      // Row index -> reward across seeds; all seeds of a run share a cadence.
      std::size_t n_rows = 0;
      for (const auto& [seed, logs] : r.train) {
        n_rows = std::max(n_rows, logs.size());
      }
      for (std::size_t idx = 0; idx < n_rows; ++idx) {
        std::vector<double> rewards;
        int episode = -1;
        for (const auto& [seed, logs] : r.train) {
          if (idx >= logs.size()) continue;
          rewards.push_back(logs[idx].reward);
          episode = logs[idx].episode;
        }
        if (rewards.empty()) continue;
        out << r.name << ',' << r.agent << ',' << episode << ','
            << format_double(mean_of(rewards)) << ','
            << format_double(percentile(rewards, 0.05)) << ','
            << format_double(percentile(rewards, 0.95)) << "\n";
      }
    }
  }

  CompareResult res;
  res.report_text = rep.str();
  res.written = {report_path, curves_path};
  return res;
}

}  // namespace oralab
