#include "packcool/cli_commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "packcool/checkpoint.hpp"
#include "packcool/config_file.hpp"
#include "packcool/csv.hpp"
#include "packcool/env.hpp"
#include "packcool/svg.hpp"
#include "packcool/trainer.hpp"

namespace fs = std::filesystem;

namespace packcool {
namespace {

const char kUsage[] =
    "usage: packcool <command> [options]\n"
    "\n"
    "commands:\n"
    "  train --algo ppo|hjbvi|hjbppo [--seed S ...] [--steps N] [--config FILE] [--out DIR]\n"
    "  eval  --ckpt FILE [--mode policy|hjb] [--seed S] [--config FILE] [--out DIR]\n"
    "  plot  --runs DIR [--runs DIR ...] [--out DIR]\n";

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Pulls the value of a flag like "--seed 3"; throws when the value is
// missing. `i` is advanced past the value.
std::string_view flag_value(std::span<const std::string> args, std::size_t& i) {
  if (i + 1 >= args.size()) throw UsageError("missing value for " + args[i]);
  return args[++i];
}

long parse_long_arg(std::string_view v, const std::string& flag) {
  long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw UsageError("expected an integer for " + flag + ", got '" + std::string(v) + "'");
  }
  return out;
}

struct SeedRun {
  long seed;
  fs::path dir;
};

// Sorted seed*/metrics.csv entries under a run directory, or the directory's
// own metrics.csv as a single pseudo-seed.
std::vector<fs::path> find_metrics(const fs::path& run_dir) {
  std::vector<std::pair<long, fs::path>> found;
  if (fs::is_directory(run_dir)) {
    for (const auto& entry : fs::directory_iterator(run_dir)) {
      if (!entry.is_directory()) continue;
      const std::string name = entry.path().filename().string();
      if (name.rfind("seed", 0) != 0) continue;
      const fs::path metrics = entry.path() / "metrics.csv";
      if (!fs::exists(metrics)) continue;
      long id = 0;
      const std::string_view digits = std::string_view(name).substr(4);
      std::from_chars(digits.data(), digits.data() + digits.size(), id);
      found.emplace_back(id, metrics);
    }
  }
  std::sort(found.begin(), found.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first < b.first : a.second < b.second;
  });
  std::vector<fs::path> out;
  out.reserve(found.size());
  for (auto& [id, p] : found) out.push_back(std::move(p));
  if (out.empty() && fs::exists(run_dir / "metrics.csv")) out.push_back(run_dir / "metrics.csv");
  return out;
}

std::vector<double> reward_column(const CsvTable& table, const fs::path& path) {
  std::size_t col = 1;
  const auto it = std::find(table.header.begin(), table.header.end(), "reward");
  if (it != table.header.end()) {
    col = static_cast<std::size_t>(it - table.header.begin());
  } else if (table.cols() < 2) {
    throw std::runtime_error(path.string() + ": no reward column");
  }
  std::vector<double> rewards;
  rewards.reserve(table.rows.size());
  for (const auto& row : table.rows) rewards.push_back(row[col]);
  return rewards;
}

fs::path normalized_name(fs::path p) {
  if (p.filename().empty()) p = p.parent_path();
  return p.filename();
}

}  // namespace

CurveSummary summarize_runs(const std::vector<std::vector<double>>& per_seed_rewards,
                            int window) {
  CurveSummary out;
  if (per_seed_rewards.empty()) return out;
  std::size_t len = per_seed_rewards.front().size();
  for (const auto& r : per_seed_rewards) len = std::min(len, r.size());

  std::vector<std::vector<double>> smoothed;
  smoothed.reserve(per_seed_rewards.size());
  for (const auto& r : per_seed_rewards) {
    const auto stats = rolling_stats(std::span(r.data(), len), window);
    std::vector<double> means;
    means.reserve(len);
    for (const auto& row : stats) means.push_back(row[0]);
    smoothed.push_back(std::move(means));
  }

  const double n = static_cast<double>(smoothed.size());
  out.mean.resize(len);
  out.std.resize(len);
  for (std::size_t e = 0; e < len; ++e) {
    double mean = 0.0;
    for (const auto& s : smoothed) mean += s[e];
    mean /= n;
    double var = 0.0;
    for (const auto& s : smoothed) var += (s[e] - mean) * (s[e] - mean);
    out.mean[e] = mean;
    out.std[e] = std::sqrt(var / n);
  }
  return out;
}

int cmd_train(std::span<const std::string> args) {
  std::string algo;
  std::vector<long> cli_seeds;
  std::optional<long> steps;
  std::optional<fs::path> config_path;
  std::optional<fs::path> out_dir;

  try {
    for (std::size_t i = 0; i < args.size(); ++i) {
      const std::string& a = args[i];
      if (a == "--algo") {
        algo = flag_value(args, i);
      } else if (a == "--seed") {
        cli_seeds.push_back(parse_long_arg(flag_value(args, i), a));
      } else if (a == "--steps") {
        steps = parse_long_arg(flag_value(args, i), a);
      } else if (a == "--config") {
        config_path = fs::path(std::string(flag_value(args, i)));
      } else if (a == "--out") {
        out_dir = fs::path(std::string(flag_value(args, i)));
      } else {
        throw UsageError("unknown option '" + a + "'");
      }
    }
    if (algo.empty()) throw UsageError("--algo is required");
    if (algo != "ppo" && algo != "hjbvi" && algo != "hjbppo") {
      throw UsageError("--algo must be ppo, hjbvi, or hjbppo");
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n" << kUsage;
    return 2;
  }

  EnvConfig env;
  TrainConfig tc;
  try {
    if (config_path) apply_config_file(*config_path, env, tc);
    if (steps) tc.total_steps = *steps;
    if (!cli_seeds.empty()) tc.seeds = cli_seeds;
    env.validate();
    tc.validate();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  const fs::path base = out_dir ? *out_dir : fs::path("runs") / algo;
  try {
    for (long seed : tc.seeds) {
      const fs::path dir = base / ("seed" + std::to_string(seed));
      if (algo == "ppo") {
        train_ppo(env, tc, seed, dir);
      } else if (algo == "hjbvi") {
        train_hjb_value_iteration(env, tc, seed, dir);
      } else {
        train_hjbppo(env, tc, seed, dir);
      }
    }
  } catch (const NumericalBlowup& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

int cmd_eval(std::span<const std::string> args) {
  std::optional<fs::path> ckpt;
  std::string mode = "policy";
  long seed = 0;
  std::optional<fs::path> config_path;
  fs::path out_dir = "eval";

  try {
    for (std::size_t i = 0; i < args.size(); ++i) {
      const std::string& a = args[i];
      if (a == "--ckpt") {
        ckpt = fs::path(std::string(flag_value(args, i)));
      } else if (a == "--mode") {
        mode = flag_value(args, i);
      } else if (a == "--seed") {
        seed = parse_long_arg(flag_value(args, i), a);
      } else if (a == "--config") {
        config_path = fs::path(std::string(flag_value(args, i)));
      } else if (a == "--out") {
        out_dir = fs::path(std::string(flag_value(args, i)));
      } else {
        throw UsageError("unknown option '" + a + "'");
      }
    }
    if (!ckpt) throw UsageError("--ckpt is required");
    if (mode != "policy" && mode != "hjb") throw UsageError("--mode must be policy or hjb");
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n" << kUsage;
    return 2;
  }

  EnvConfig env;
  TrainConfig tc;
  try {
    if (config_path) apply_config_file(*config_path, env, tc);
    env.validate();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    const auto [value, policy] = load_checkpoint(*ckpt);
    const EvalMode em = mode == "hjb" ? EvalMode::kHjbController : EvalMode::kGreedyPolicy;
    const EvalResult res = evaluate(value, policy, env, em, static_cast<std::uint64_t>(seed));
    dump_trajectory(res.trajectory, out_dir);
    std::cout << "cumulative_reward=" << format_double(res.cumulative_reward) << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

int cmd_plot(std::span<const std::string> args) {
  std::vector<fs::path> run_dirs;
  fs::path out_dir = "plots";

  try {
    for (std::size_t i = 0; i < args.size(); ++i) {
      const std::string& a = args[i];
      if (a == "--runs") {
        run_dirs.emplace_back(std::string(flag_value(args, i)));
      } else if (a == "--out") {
        out_dir = fs::path(std::string(flag_value(args, i)));
      } else {
        throw UsageError("unknown option '" + a + "'");
      }
    }
    if (run_dirs.empty()) throw UsageError("--runs is required");
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n" << kUsage;
    return 2;
  }

  const char* palette[] = {"#2166ac", "#b2182b", "#1b7837", "#762a83", "#e08214"};
  std::vector<SvgSeries> series;
  try {
    fs::create_directories(out_dir);
    int color_idx = 0;
    for (const fs::path& run_dir : run_dirs) {
      const std::vector<fs::path> metric_files = find_metrics(run_dir);
      if (metric_files.empty()) {
        std::cerr << "error: no metrics.csv under " << run_dir.string() << "\n";
        return 2;
      }
      std::vector<std::vector<double>> per_seed;
      per_seed.reserve(metric_files.size());
      for (const fs::path& f : metric_files) per_seed.push_back(reward_column(read_csv(f), f));
      const CurveSummary curve = summarize_runs(per_seed, 20);

      const std::string name = normalized_name(run_dir).string();
      std::vector<std::vector<double>> rows;
      rows.reserve(curve.mean.size());
      SvgSeries s;
      s.label = name;
      s.color = palette[color_idx++ % 5];
      for (std::size_t e = 0; e < curve.mean.size(); ++e) {
        rows.push_back({static_cast<double>(e + 1), curve.mean[e], curve.std[e]});
        s.x.push_back(static_cast<double>(e + 1));
        s.y.push_back(curve.mean[e]);
        s.band_low.push_back(curve.mean[e] - 0.2 * curve.std[e]);
        s.band_high.push_back(curve.mean[e] + 0.2 * curve.std[e]);
      }
      write_csv(out_dir / ("curve_" + name + ".csv"), {"episode", "mean", "std"}, rows);
      series.push_back(std::move(s));
    }
    write_line_svg(out_dir / "learning_curves.svg", series,
                   {"training reward", "episode", "mean reward (20-episode window)"});
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

int run_cli(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << kUsage;
    return 2;
  }
  const std::string command = argv[1];
  std::vector<std::string> args(argv + 2, argv + argc);
  if (command == "train") return cmd_train(args);
  if (command == "eval") return cmd_eval(args);
  if (command == "plot") return cmd_plot(args);
  std::cerr << "error: unknown command '" << command << "'\n" << kUsage;
  return 2;
}

}  // namespace packcool
