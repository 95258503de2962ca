#pragma once

#include <filesystem>
#include <vector>

#include "packcool/env.hpp"
#include "packcool/ppo.hpp"

namespace packcool {

enum class ActionMode { kPolicyOnly, kHjbOnly, kMixed };

// What a training run does each step and each update. The three public
// algorithms are fixed combinations; tests exercise other corners (forcing
// one action branch, swapping the critic loss) through run_training.
struct LoopSpec {
  ActionMode actions = ActionMode::kMixed;
  CriticLossMode critic = CriticLossMode::kHjb;
  bool train_actor = true;
};

struct ActionChoice {
  double action = 0.0;
  TransitionSource source = TransitionSource::kPolicy;
  double log_prob = 0.0;
  double scale = 0.3;
};

/// Switching-rule action from the value net's input gradients: +1 when
/// moving fluid lowers the value-weighted transport term, else -1.
double hjb_controller_action(NetGraph& value, const GridState& state, const EnvConfig& env);

/// Mixed action selection: a fair draw picks either the switching rule
/// (source kHjbController) or a policy sample (source kPolicy). The log
/// probability is always evaluated under the current policy distribution so
/// either kind of transition can train the actor.
ActionChoice select_action_hjbppo(const GridState& state, NetGraph& policy, NetGraph& value,
                                  long episode, const EnvConfig& env, Rng& rng);

struct RunResult {
  std::vector<double> episode_rewards;
  long total_steps = 0;
  long updates = 0;
  long episodes = 0;
};

/// One seed's full training run: collect horizon-sized rollouts, update via
/// update_epochs, log per-episode rewards. Writes metrics.csv ("episode,
/// reward"), rolling.csv ("episode,mean_reward_20,std_reward_20"), periodic
/// checkpoints, and checkpoint_final.txt into out_dir.
RunResult run_training(const EnvConfig& env, const TrainConfig& tc, long seed,
                       const std::filesystem::path& out_dir, const LoopSpec& spec);

/// Policy-only actions, critic on returns.
RunResult train_ppo(const EnvConfig& env, const TrainConfig& tc, long seed,
                    const std::filesystem::path& out_dir);

/// Switching-rule actions only, no actor updates, critic on the physics
/// residual losses.
RunResult train_hjb_value_iteration(const EnvConfig& env, const TrainConfig& tc, long seed,
                                    const std::filesystem::path& out_dir);

/// Mixed actions, actor on the clipped surrogate over all transitions,
/// critic on the physics residual losses.
RunResult train_hjbppo(const EnvConfig& env, const TrainConfig& tc, long seed,
                       const std::filesystem::path& out_dir);

enum class EvalMode { kGreedyPolicy, kHjbController };

struct EvalResult {
  double cumulative_reward = 0.0;
  TrajectoryBuffer trajectory;
};

/// One deterministic episode: the policy mean without noise, or the
/// switching rule. Returns the reward sum and the trajectory for dumping.
EvalResult evaluate(const MlpParams& value, const MlpParams& policy, const EnvConfig& env,
                    EvalMode mode, std::uint64_t episode_seed);

/// Trailing-window statistics used for the per-seed rolling log: row i holds
/// the mean and population standard deviation of the last min(i+1, 20)
/// rewards.
std::vector<std::vector<double>> rolling_stats(std::span<const double> rewards, int window);

}  // namespace packcool
