#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "packcool/hjb.hpp"
#include "packcool/mlp.hpp"
#include "packcool/rng.hpp"

namespace packcool {

enum class TransitionSource { kPolicy, kHjbController };

struct Transition {
  std::vector<double> obs;  // u then w at decision time
  double action = 0.0;
  double reward = 0.0;
  double log_prob_old = 0.0;
  double value_old = 0.0;
  bool done = false;
  TransitionSource source = TransitionSource::kPolicy;
  double scale = 0.3;  // exploration scale the action was drawn with

  // Model-side data captured at collection time so the critic update does
  // not have to re-derive it.
  std::vector<double> u_next;
  std::vector<double> u_dot;
  std::vector<double> bw;
};

struct TrainConfig {
  int horizon = 1024;
  double actor_lr = 3e-4;
  double critic_lr = 1e-3;
  int epochs = 10;
  int minibatch = 64;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip_eps = 0.2;
  double entropy_coef = 0.0;
  long total_steps = 1000000;
  std::vector<long> seeds = {0, 1, 2, 3, 4};
  int hidden = 64;          // width of both hidden layers
  int checkpoint_every = 50;  // updates between periodic checkpoints

  void validate() const;
};

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};

/// Backward recursion
///   delta_t = r_t + gamma * V(s_{t+1}) * (1 - done_t) - V(s_t)
///   A_t     = delta_t + gamma * lambda * (1 - done_t) * A_{t+1}
/// with V(s_T) = bootstrap_value; returns_t = A_t + V(s_t).
GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values,
                      std::span<const std::uint8_t> dones, double bootstrap_value, double gamma,
                      double lambda);

/// Appends -mean_t( min(r_t A_t, clip(r_t, 1-eps, 1+eps) A_t) ) with
/// r_t = exp(lp_new - lp_old). The min is written so a tie follows the
/// clipped branch, which kills the gradient when eps = 0 and r = 1.
NodeRef append_clipped_surrogate(Graph& g, std::span<const NodeRef> lp_new,
                                 std::span<const double> lp_old, std::span<const double> adv,
                                 double clip_eps);

// Self-contained losses over input nodes, used to cross-check the training
// path's hand-seeded gradients.
struct PolicyLossEval {
  Graph graph;
  std::vector<NodeRef> lp_new;
  NodeRef out;

  double value() const { return graph.value(out); }
};
PolicyLossEval ppo_policy_loss(std::span<const double> lp_new, std::span<const double> lp_old,
                               std::span<const double> adv, double clip_eps);

struct ValueLossEval {
  Graph graph;
  std::vector<NodeRef> pred;
  NodeRef out;

  double value() const { return graph.value(out); }
};
/// Mean squared error between predictions and returns.
ValueLossEval ppo_value_loss(std::span<const double> pred, std::span<const double> returns);

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long t = 0;
  std::vector<double> m, v;

  void reset(std::size_t n);
};

/// Bias-corrected adaptive-moment descent step, in place. Initializes the
/// state lazily on first use.
void adam_update(std::span<double> params, std::span<const double> grads, double lr,
                 AdamState& state);

enum class CriticLossMode { kMse, kHjb };

struct UpdateMetrics {
  double policy_loss = 0.0;  // mean clipped-surrogate loss over all visits
  double value_loss = 0.0;   // mean critic loss over all optimizer steps
  long optimizer_steps = 0;
};

/// One full optimization phase over a rollout: epochs x shuffled minibatches,
/// actor on the clipped surrogate (skipped when train_actor is false), critic
/// on either the mean-squared-error-to-returns loss or the physics residual
/// loss (mse_f + boundary terms). Advantages are normalized to zero mean and
/// unit variance across the whole buffer. Parameters are updated in place;
/// optimizer states persist across calls.
UpdateMetrics update_epochs(std::span<const Transition> buffer, double bootstrap_value,
                            MlpParams& policy, MlpParams& value, const TrainConfig& tc,
                            const EnvConfig& env, CriticLossMode mode, bool train_actor,
                            AdamState& actor_opt, AdamState& critic_opt, Rng& shuffle_rng);

}  // namespace packcool
