// oralab CLI: experiment runner, run comparison, and oracle values.
//
//   oralab run --config <file> [--seeds a,b,c] [--out dir] [--jobs N] [--timing]
//   oralab compare <dir> <dir> [more dirs...] [--out dir]
//   oralab oracle cvar --atoms 1,2,3,4 --alpha 0.5
//   oralab oracle knapsack-dp --items 1:1,2:3 --cap 2
//   oralab oracle satisficing --atoms 2,3 --tau 1 [--alpha-min 0.1]
//
// Exit codes: 0 success, 1 validation error, 2 runtime failure.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "oralab/compare.hpp"
#include "oralab/harness.hpp"

namespace {

using oralab::ConfigError;

std::vector<std::string> split_csv(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::vector<double> parse_doubles(const std::string& text,
                                  const std::string& what) {
  std::vector<double> out;
  for (const std::string& tok : split_csv(text)) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(tok, &pos));
      if (pos != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ConfigError(what + ": '" + tok + "' is not a number");
    }
  }
  return out;
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> out;
  for (const std::string& tok : split_csv(text)) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stoull(tok, &pos));
      if (pos != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ConfigError("--seeds: '" + tok + "' is not a nonnegative integer");
    }
  }
  return out;
}

// "--items w:v,w:v,..." -> knapsack weights/values.
void parse_items(const std::string& text, std::vector<int>* weights,
                 std::vector<double>* values) {
  for (const std::string& tok : split_csv(text)) {
    const auto pos = tok.find(':');
    if (pos == std::string::npos) {
      throw ConfigError("--items: '" + tok + "' is not a weight:value pair");
    }
    try {
      std::size_t used = 0;
      weights->push_back(std::stoi(tok.substr(0, pos), &used));
      if (used != pos) throw std::invalid_argument(tok);
      const std::string v = tok.substr(pos + 1);
      values->push_back(std::stod(v, &used));
      if (used != v.size()) throw std::invalid_argument(tok);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception&) {
      throw ConfigError("--items: '" + tok + "' is not a weight:value pair");
    }
  }
}

// Round-trip-exact number with a decimal point forced onto integral values
// so oracle outputs are unambiguous ("1.0", "3.5").
std::string oracle_number(double v) {
  std::string s = oralab::format_double(v);
  if (s.find_first_of(".einf") == std::string::npos) s += ".0";
  return s;
}

// Integral oracle values print as plain integers ("3").
std::string dp_number(double v) {
  if (v == static_cast<long long>(v)) {
    return std::to_string(static_cast<long long>(v));
  }
  return oralab::format_double(v);
}

std::string default_out_dir(const oralab::RunConfig& cfg) {
  const char* root = std::getenv("ORALAB_OUT");
  const std::string base = (root && *root) ? root : "runs";
  const std::string label = cfg.agent.normalized().label;
  return (std::filesystem::path(base) / (cfg.env.type + "_" + label)).string();
}

int run_command(const std::string& config_path, const std::string& seeds_csv,
                const std::string& out_flag, int jobs_flag, bool timing_flag) {
  oralab::RunConfig cfg = oralab::load_config(config_path);
  if (!seeds_csv.empty()) cfg.seeds = parse_seeds(seeds_csv);
  if (jobs_flag >= 0) cfg.jobs = jobs_flag;
  if (timing_flag) cfg.timing = true;
  cfg.validate();

  std::string out_dir = !out_flag.empty() ? out_flag : cfg.out_dir;
  if (out_dir.empty()) out_dir = default_out_dir(cfg);

  const std::vector<oralab::SeedRun> results = oralab::run_experiment(cfg);
  int failed = 0;
  for (const oralab::SeedRun& r : results) {
    if (r.failed) {
      ++failed;
      std::cerr << "seed " << r.seed << " failed: " << r.error << "\n";
    }
  }
  const auto written = oralab::write_logs(cfg, results, out_dir);
  for (const std::string& path : written) std::cout << "wrote " << path << "\n";
  if (failed == static_cast<int>(results.size())) {
    std::cerr << "all seeds failed\n";
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"distributional RL lab: online risk adaptation experiments"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "train/evaluate agents from a config");
  std::string config_path;
  run->add_option("--config", config_path, "JSON run configuration")->required();
  std::string seeds_csv;
  run->add_option("--seeds", seeds_csv, "comma-separated seeds (overrides config)");
  std::string run_out;
  run->add_option("--out", run_out,
                  "output directory (default: config out_dir, else "
                  "$ORALAB_OUT/<env>_<label>, else runs/<env>_<label>)");
  int jobs_flag = -1;
  run->add_option("--jobs", jobs_flag, "parallel seed workers; 0 = one per seed");
  bool timing_flag = false;
  run->add_flag("--timing", timing_flag,
                "record wall-clock ms per episode (breaks byte reproducibility)");

  // compare
  auto* cmp = app.add_subcommand("compare", "compare finished run directories");
  std::vector<std::string> dirs;
  cmp->add_option("dirs", dirs, "run directories (need at least 2)")
      ->expected(-1)
      ->required();
  std::string cmp_out = ".";
  cmp->add_option("--out", cmp_out, "where to write report.txt / curves_long.csv");

  // oracle
  auto* oracle = app.add_subcommand("oracle", "closed-form reference values");
  oracle->require_subcommand(1);

  auto* cvar = oracle->add_subcommand(
      "cvar", "right-tail CVaR of an empirical distribution");
  std::string cvar_atoms;
  cvar->add_option("--atoms", cvar_atoms, "comma-separated atom values")->required();
  double cvar_alpha = 1.0;
  cvar->add_option("--alpha", cvar_alpha, "tail level in (0,1]")->required();

  auto* dp = oracle->add_subcommand("knapsack-dp", "0/1 knapsack optimum");
  std::string dp_items;
  dp->add_option("--items", dp_items, "weight:value pairs, comma-separated")
      ->required();
  int dp_cap = 0;
  dp->add_option("--cap", dp_cap, "knapsack capacity")->required();

  auto* sat = oracle->add_subcommand(
      "satisficing", "risk level from the satisficing-measure search");
  std::string sat_atoms;
  sat->add_option("--atoms", sat_atoms, "comma-separated atom values")->required();
  double sat_tau = 0.0;
  sat->add_option("--tau", sat_tau, "target level")->required();
  double sat_alpha_min = 0.1;
  sat->add_option("--alpha-min", sat_alpha_min, "lower clamp (default 0.1)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (run->parsed()) {
      return run_command(config_path, seeds_csv, run_out, jobs_flag, timing_flag);
    }
    if (cmp->parsed()) {
      const auto result = oralab::compare_report(dirs, cmp_out);
      std::cout << result.report_text;
      for (const std::string& path : result.written) {
        std::cout << "wrote " << path << "\n";
      }
      return 0;
    }
    if (cvar->parsed()) {
      const auto atoms = parse_doubles(cvar_atoms, "--atoms");
      const auto dist = oralab::make_empirical(atoms);
      std::cout << oracle_number(oralab::cvar_right(dist, cvar_alpha)) << "\n";
      return 0;
    }
    if (dp->parsed()) {
      oralab::KnapsackInstance inst;
      parse_items(dp_items, &inst.weights, &inst.values);
      inst.capacity = dp_cap;
      inst.validate();
      std::cout << dp_number(oralab::dp_knapsack(inst)) << "\n";
      return 0;
    }
    if (sat->parsed()) {
      const auto atoms = parse_doubles(sat_atoms, "--atoms");
      if (atoms.empty()) throw ConfigError("--atoms: needs at least one value");
      std::cout << oracle_number(
                       oralab::satisficing_search(atoms, sat_tau, sat_alpha_min))
                << "\n";
      return 0;
    }
    std::cerr << "no subcommand selected\n";
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 2;
  }
}
