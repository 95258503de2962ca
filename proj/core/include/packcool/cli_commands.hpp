#pragma once

#include <span>
#include <string>
#include <vector>

namespace packcool {

/// Entry point for the command-line tool: dispatches train / eval / plot.
/// Returns the process exit code: 0 on success, 1 on runtime failures
/// (solver blowup, unreadable checkpoint, I/O), 2 on usage or config errors.
int run_cli(int argc, char** argv);

int cmd_train(std::span<const std::string> args);
int cmd_eval(std::span<const std::string> args);
int cmd_plot(std::span<const std::string> args);

/// Cross-seed learning-curve summary: feeds each seed's episode rewards
/// through a trailing-window mean (after truncating every seed to the
/// shortest series), then takes the per-episode mean and population standard
/// deviation across seeds.
struct CurveSummary {
  std::vector<double> mean;
  std::vector<double> std;
};
CurveSummary summarize_runs(const std::vector<std::vector<double>>& per_seed_rewards,
                            int window);

}  // namespace packcool
