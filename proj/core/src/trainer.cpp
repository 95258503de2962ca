#include "packcool/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "packcool/checkpoint.hpp"
#include "packcool/csv.hpp"
#include "packcool/grid.hpp"
#include "packcool/hjb.hpp"

namespace packcool {
namespace {

// Independent draw streams per run, so adding or reordering draws in one
// part of the loop cannot shift any other part.
std::uint64_t stream_seed(long seed, std::uint64_t tag) {
  return Rng::derive(static_cast<std::uint64_t>(seed), tag);
}

std::uint64_t episode_seed(long seed, long episode) {
  return Rng::derive(stream_seed(seed, 5), static_cast<std::uint64_t>(episode));
}

std::vector<double> pack_observation(const GridState& state) {
  std::vector<double> obs(state.u.size() + state.w.size());
  std::copy(state.u.begin(), state.u.end(), obs.begin());
  std::copy(state.w.begin(), state.w.end(), obs.begin() + state.u.size());
  return obs;
}

}  // namespace

double hjb_controller_action(NetGraph& value, const GridState& state, const EnvConfig& env) {
  const std::size_t n = state.u.size();
  value.forward(pack_observation(state));
  std::vector<double> g(2 * n);
  value.input_grads(g);
  std::vector<double> bw(n);
  gradient_w(state.w, env.inflow_temp, env.dx, bw);
  double q = 0.0;
  for (std::size_t k = 0; k < n; ++k) q += g[n + k] * bw[k];
  return q < 0.0 ? 1.0 : -1.0;
}

ActionChoice select_action_hjbppo(const GridState& state, NetGraph& policy, NetGraph& value,
                                  long episode, const EnvConfig& env, Rng& rng) {
  PolicyDistribution dist{policy.forward(pack_observation(state)), std_schedule(episode)};
  ActionChoice c;
  c.scale = dist.scale;
  if (rng.below(2) == 0) {
    c.action = hjb_controller_action(value, state, env);
    c.source = TransitionSource::kHjbController;
  } else {
    c.action = sample_action(dist, rng);
    c.source = TransitionSource::kPolicy;
  }
  c.log_prob = log_prob(dist, c.action);
  return c;
}

std::vector<std::vector<double>> rolling_stats(std::span<const double> rewards, int window) {
  std::vector<std::vector<double>> out;
  out.reserve(rewards.size());
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    const std::size_t lo = (i + 1 > static_cast<std::size_t>(window)) ? i + 1 - window : 0;
    const std::size_t m = i + 1 - lo;
    double mean = 0.0;
    for (std::size_t j = lo; j <= i; ++j) mean += rewards[j];
    mean /= static_cast<double>(m);
    double var = 0.0;
    for (std::size_t j = lo; j <= i; ++j) var += (rewards[j] - mean) * (rewards[j] - mean);
    var /= static_cast<double>(m);
    out.push_back({mean, std::sqrt(var)});
  }
  return out;
}

RunResult run_training(const EnvConfig& env, const TrainConfig& tc, long seed,
                       const std::filesystem::path& out_dir, const LoopSpec& spec) {
  env.validate();
  tc.validate();
  std::filesystem::create_directories(out_dir);

  const std::vector<int> sizes = {2 * env.n_x, tc.hidden, tc.hidden, 1};
  Rng value_rng(stream_seed(seed, 1));
  Rng policy_rng(stream_seed(seed, 2));
  Rng act_rng(stream_seed(seed, 3));
  Rng shuffle_rng(stream_seed(seed, 4));

  MlpParams value = init_params(sizes, OutputActivation::kIdentity, value_rng);
  MlpParams policy = init_params(sizes, OutputActivation::kTanh, policy_rng);
  NetGraph value_net(value);
  NetGraph policy_net(policy);
  AdamState actor_opt, critic_opt;

  PackCoolingEnv world(env);
  RunResult result;
  long episodes_done = 0;
  double episode_return = 0.0;
  std::vector<double> obs = world.reset(episode_seed(seed, 0));

  const long n_updates = (tc.total_steps + tc.horizon - 1) / tc.horizon;
  std::vector<Transition> buffer;
  buffer.reserve(static_cast<std::size_t>(tc.horizon));

  for (long update = 1; update <= n_updates; ++update) {
    buffer.clear();
    for (int t = 0; t < tc.horizon; ++t) {
      Transition tr;
      tr.obs = obs;
      tr.value_old = value_net.forward(obs);

      ActionChoice choice;
      switch (spec.actions) {
        case ActionMode::kPolicyOnly: {
          PolicyDistribution dist{policy_net.forward(obs), std_schedule(episodes_done)};
          choice.action = sample_action(dist, act_rng);
          choice.source = TransitionSource::kPolicy;
          choice.log_prob = log_prob(dist, choice.action);
          choice.scale = dist.scale;
          break;
        }
        case ActionMode::kHjbOnly:
          choice.action = hjb_controller_action(value_net, world.state(), env);
          choice.source = TransitionSource::kHjbController;
          choice.scale = std_schedule(episodes_done);
          break;
        case ActionMode::kMixed:
          choice =
              select_action_hjbppo(world.state(), policy_net, value_net, episodes_done, env,
                                   act_rng);
          break;
      }
      tr.action = choice.action;
      tr.source = choice.source;
      tr.log_prob_old = choice.log_prob;
      tr.scale = choice.scale;

      if (spec.critic == CriticLossMode::kHjb) {
        tr.u_dot = u_dot_model(world.state(), env);
        tr.bw = gradient_w(world.state().w, env.inflow_temp, env.dx);
      }

      StepResult sr = world.step(choice.action);
      tr.reward = sr.reward;
      tr.done = sr.done;
      if (spec.critic == CriticLossMode::kHjb) {
        tr.u_next.assign(sr.observation.begin(), sr.observation.begin() + env.n_x);
      }
      episode_return += sr.reward;
      obs = std::move(sr.observation);

      if (tr.done) {
        result.episode_rewards.push_back(episode_return);
        episode_return = 0.0;
        ++episodes_done;
        obs = world.reset(episode_seed(seed, episodes_done));
      }
      buffer.push_back(std::move(tr));
    }
    result.total_steps += tc.horizon;

    const double bootstrap = value_net.forward(obs);
    update_epochs(buffer, bootstrap, policy, value, tc, env, spec.critic, spec.train_actor,
                  actor_opt, critic_opt, shuffle_rng);
    value_net.set_params(flatten(value));
    policy_net.set_params(flatten(policy));
    ++result.updates;

    if (tc.checkpoint_every > 0 && update % tc.checkpoint_every == 0) {
      save_checkpoint(value, policy,
                      out_dir / ("checkpoint_iter" + std::to_string(update) + ".txt"));
    }

    if (result.episode_rewards.empty()) {
      std::printf("seed %ld update %ld/%ld steps %ld episodes 0\n", seed, update, n_updates,
                  result.total_steps);
    } else {
      const std::size_t k = result.episode_rewards.size();
      const std::size_t lo = k > 20 ? k - 20 : 0;
      double mean = 0.0;
      for (std::size_t j = lo; j < k; ++j) mean += result.episode_rewards[j];
      mean /= static_cast<double>(k - lo);
      std::printf("seed %ld update %ld/%ld steps %ld episodes %zu mean_reward_20 %.6g\n", seed,
                  update, n_updates, result.total_steps, k, mean);
    }
    std::fflush(stdout);
  }

  save_checkpoint(value, policy, out_dir / "checkpoint_final.txt");

  std::vector<std::vector<double>> metric_rows;
  metric_rows.reserve(result.episode_rewards.size());
  for (std::size_t i = 0; i < result.episode_rewards.size(); ++i) {
    metric_rows.push_back({static_cast<double>(i + 1), result.episode_rewards[i]});
  }
  write_csv(out_dir / "metrics.csv", {"episode", "reward"}, metric_rows);

  const auto stats = rolling_stats(result.episode_rewards, 20);
  std::vector<std::vector<double>> rolling_rows;
  rolling_rows.reserve(stats.size());
  for (std::size_t i = 0; i < stats.size(); ++i) {
    rolling_rows.push_back({static_cast<double>(i + 1), stats[i][0], stats[i][1]});
  }
  write_csv(out_dir / "rolling.csv", {"episode", "mean_reward_20", "std_reward_20"},
            rolling_rows);

  result.episodes = static_cast<long>(result.episode_rewards.size());
  return result;
}

RunResult train_ppo(const EnvConfig& env, const TrainConfig& tc, long seed,
                    const std::filesystem::path& out_dir) {
  return run_training(env, tc, seed, out_dir,
                      {ActionMode::kPolicyOnly, CriticLossMode::kMse, true});
}

RunResult train_hjb_value_iteration(const EnvConfig& env, const TrainConfig& tc, long seed,
                                    const std::filesystem::path& out_dir) {
  return run_training(env, tc, seed, out_dir,
                      {ActionMode::kHjbOnly, CriticLossMode::kHjb, false});
}

RunResult train_hjbppo(const EnvConfig& env, const TrainConfig& tc, long seed,
                       const std::filesystem::path& out_dir) {
  return run_training(env, tc, seed, out_dir, {ActionMode::kMixed, CriticLossMode::kHjb, true});
}

EvalResult evaluate(const MlpParams& value, const MlpParams& policy, const EnvConfig& env,
                    EvalMode mode, std::uint64_t episode_seed) {
  PackCoolingEnv world(env);
  NetGraph value_net(value);
  std::vector<double> obs = world.reset(episode_seed);
  EvalResult res;
  while (!world.done()) {
    double a = 0.0;
    if (mode == EvalMode::kGreedyPolicy) {
      a = policy_mean(policy, obs);
    } else {
      a = hjb_controller_action(value_net, world.state(), env);
    }
    StepResult sr = world.step(a);
    res.cumulative_reward += sr.reward;
    obs = std::move(sr.observation);
  }
  res.trajectory = world.trajectory();
  return res;
}

}  // namespace packcool
