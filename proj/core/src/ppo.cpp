#include "packcool/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>

namespace packcool {

void TrainConfig::validate() const {
  if (horizon < 1) throw std::invalid_argument("TrainConfig: horizon must be >= 1");
  if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
  if (minibatch < 1) throw std::invalid_argument("TrainConfig: minibatch must be >= 1");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("TrainConfig: gamma in (0,1]");
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0))
    throw std::invalid_argument("TrainConfig: gae_lambda in [0,1]");
  if (!(clip_eps > 0.0)) throw std::invalid_argument("TrainConfig: clip_eps must be > 0");
  if (total_steps < 1) throw std::invalid_argument("TrainConfig: total_steps must be >= 1");
  if (hidden < 1) throw std::invalid_argument("TrainConfig: hidden must be >= 1");
  if (checkpoint_every < 1)
    throw std::invalid_argument("TrainConfig: checkpoint_every must be >= 1");
}

GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values,
                      std::span<const std::uint8_t> dones, double bootstrap_value, double gamma,
                      double lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n || dones.size() != n)
    throw std::invalid_argument("compute_gae: length mismatch");
  GaeResult out;
  out.advantages.resize(n);
  out.returns.resize(n);
  double next_adv = 0.0;
  double next_value = bootstrap_value;
  for (std::size_t i = n; i-- > 0;) {
    const double live = dones[i] ? 0.0 : 1.0;
    const double delta = rewards[i] + gamma * next_value * live - values[i];
    next_adv = delta + gamma * lambda * live * next_adv;
    out.advantages[i] = next_adv;
    out.returns[i] = next_adv + values[i];
    next_value = values[i];
  }
  return out;
}

NodeRef append_clipped_surrogate(Graph& g, std::span<const NodeRef> lp_new,
                                 std::span<const double> lp_old, std::span<const double> adv,
                                 double clip_eps) {
  const std::size_t n = lp_new.size();
  if (lp_old.size() != n || adv.size() != n)
    throw std::invalid_argument("append_clipped_surrogate: length mismatch");
  if (n == 0) throw std::invalid_argument("append_clipped_surrogate: empty batch");
  const double lo = 1.0 - clip_eps;
  const double hi = 1.0 + clip_eps;
  NodeRef acc{};
  for (std::size_t t = 0; t < n; ++t) {
    const NodeRef r = g.apply(Op::kExp, g.apply(Op::kSub, lp_new[t], g.lift(lp_old[t])));
    // clip(r) = lo + relu(r - lo) - relu(r - hi)
    NodeRef clip = g.apply(Op::kAdd, g.lift(lo),
                           g.apply(Op::kReluMax0, g.apply(Op::kSub, r, g.lift(lo))));
    clip = g.apply(Op::kSub, clip, g.apply(Op::kReluMax0, g.apply(Op::kSub, r, g.lift(hi))));
    const NodeRef a = g.lift(adv[t]);
    const NodeRef s_u = g.apply(Op::kMul, r, a);
    const NodeRef s_c = g.apply(Op::kMul, clip, a);
    // min(s_u, s_c) with the tie on the clipped branch
    const NodeRef surr =
        g.apply(Op::kSub, s_c, g.apply(Op::kReluMax0, g.apply(Op::kSub, s_c, s_u)));
    acc = acc.valid() ? g.apply(Op::kAdd, acc, surr) : surr;
  }
  return g.apply(Op::kMul, acc, g.lift(-1.0 / static_cast<double>(n)));
}

PolicyLossEval ppo_policy_loss(std::span<const double> lp_new, std::span<const double> lp_old,
                               std::span<const double> adv, double clip_eps) {
  PolicyLossEval ev;
  ev.lp_new.reserve(lp_new.size());
  for (double v : lp_new) ev.lp_new.push_back(ev.graph.input(v));
  ev.out = append_clipped_surrogate(ev.graph, ev.lp_new, lp_old, adv, clip_eps);
  return ev;
}

ValueLossEval ppo_value_loss(std::span<const double> pred, std::span<const double> returns) {
  if (pred.size() != returns.size())
    throw std::invalid_argument("ppo_value_loss: length mismatch");
  if (pred.empty()) throw std::invalid_argument("ppo_value_loss: empty batch");
  ValueLossEval ev;
  ev.pred.reserve(pred.size());
  for (double v : pred) ev.pred.push_back(ev.graph.input(v));
  NodeRef acc{};
  for (std::size_t t = 0; t < pred.size(); ++t) {
    const NodeRef d = ev.graph.apply(Op::kSub, ev.pred[t], ev.graph.lift(returns[t]));
    const NodeRef sq = ev.graph.apply(Op::kSquare, d);
    acc = acc.valid() ? ev.graph.apply(Op::kAdd, acc, sq) : sq;
  }
  ev.out = ev.graph.apply(Op::kMul, acc, ev.graph.lift(1.0 / static_cast<double>(pred.size())));
  return ev;
}

void AdamState::reset(std::size_t n) {
  m.assign(n, 0.0);
  v.assign(n, 0.0);
  t = 0;
}

void adam_update(std::span<double> params, std::span<const double> grads, double lr,
                 AdamState& state) {
  const std::size_t n = params.size();
  if (grads.size() != n) throw std::invalid_argument("adam_update: size mismatch");
  if (state.m.empty()) state.reset(n);
  if (state.m.size() != n) throw std::invalid_argument("adam_update: state size mismatch");
  ++state.t;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < n; ++i) {
    const double gi = grads[i];
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * gi;
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * gi * gi;
    const double mhat = state.m[i] / c1;
    const double vhat = state.v[i] / c2;
    params[i] -= lr * mhat / (std::sqrt(vhat) + state.eps);
  }
}

UpdateMetrics update_epochs(std::span<const Transition> buffer, double bootstrap_value,
                            MlpParams& policy, MlpParams& value, const TrainConfig& tc,
                            const EnvConfig& env, CriticLossMode mode, bool train_actor,
                            AdamState& actor_opt, AdamState& critic_opt, Rng& shuffle_rng) {
  const std::size_t n = buffer.size();
  if (n < static_cast<std::size_t>(tc.minibatch))
    throw std::invalid_argument("update_epochs: buffer shorter than one minibatch");

  // Advantages and returns from the stored per-step values.
  std::vector<double> rewards(n), values(n);
  std::vector<std::uint8_t> dones(n);
  for (std::size_t i = 0; i < n; ++i) {
    rewards[i] = buffer[i].reward;
    values[i] = buffer[i].value_old;
    dones[i] = buffer[i].done ? 1 : 0;
  }
  const GaeResult gae =
      compute_gae(rewards, values, dones, bootstrap_value, tc.gamma, tc.gae_lambda);

  std::vector<double> adv = gae.advantages;
  if (train_actor) {
    double mean = 0.0;
    for (double a : adv) mean += a;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double a : adv) var += (a - mean) * (a - mean);
    var /= static_cast<double>(n);
    const double denom = std::sqrt(var) + 1e-8;
    for (double& a : adv) a = (a - mean) / denom;
  }

  std::vector<double> policy_flat = flatten(policy);
  std::vector<double> value_flat = flatten(value);

  NetGraph policy_net(policy);
  NetGraph value_net(value);
  std::optional<ResidualGraph> residual;
  std::optional<BoundaryLossGraph> boundary;
  if (mode == CriticLossMode::kHjb) {
    residual.emplace(value, tc.gamma, env.dt, env.resistance);
    boundary.emplace(value, env.resistance);
  }

  std::vector<double> grad_a(policy_flat.size());
  std::vector<double> grad_c(value_flat.size());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  UpdateMetrics metrics;
  const double lo = 1.0 - tc.clip_eps;
  const double hi = 1.0 + tc.clip_eps;
  long actor_visits = 0;
  long critic_steps = 0;
  double policy_loss_sum = 0.0;
  double value_loss_sum = 0.0;

  for (int epoch = 0; epoch < tc.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(tc.minibatch)) {
      const std::size_t end = std::min(n, start + static_cast<std::size_t>(tc.minibatch));
      const double m = static_cast<double>(end - start);

      if (train_actor) {
        std::fill(grad_a.begin(), grad_a.end(), 0.0);
        double batch_loss = 0.0;
        for (std::size_t j = start; j < end; ++j) {
          const Transition& tr = buffer[order[j]];
          const double a_hat = adv[order[j]];
          const double mu = policy_net.forward(tr.obs);
          const double lp_new = log_prob({mu, tr.scale}, tr.action);
          const double ratio = std::exp(lp_new - tr.log_prob_old);
          const double clipped = std::clamp(ratio, lo, hi);
          const double s_u = ratio * a_hat;
          const double s_c = clipped * a_hat;
          // min with the tie on the clipped branch; in band the clip is the
          // identity so both branches carry the same gradient
          double dsurr_dlp;
          if (s_c - s_u > 0.0) {
            dsurr_dlp = a_hat * ratio;
          } else {
            const double dclip = (ratio > lo ? 1.0 : 0.0) - (ratio > hi ? 1.0 : 0.0);
            dsurr_dlp = a_hat * dclip * ratio;
          }
          const double dlp_dmu = (tr.action - mu) / (tr.scale * tr.scale);
          policy_net.add_param_grad(-dsurr_dlp * dlp_dmu / m, grad_a);
          batch_loss -= std::min(s_u, s_c);
        }
        adam_update(policy_flat, grad_a, tc.actor_lr, actor_opt);
        policy_net.set_params(policy_flat);
        policy_loss_sum += batch_loss;
        actor_visits += static_cast<long>(end - start);
      }

      std::fill(grad_c.begin(), grad_c.end(), 0.0);
      double batch_vloss = 0.0;
      if (mode == CriticLossMode::kMse) {
        for (std::size_t j = start; j < end; ++j) {
          const Transition& tr = buffer[order[j]];
          const double ret = gae.returns[order[j]];
          const double v = value_net.forward(tr.obs);
          value_net.add_param_grad(2.0 * (v - ret) / m, grad_c);
          batch_vloss += (v - ret) * (v - ret) / m;
        }
      } else {
        const std::size_t half = buffer[0].obs.size() / 2;
        for (std::size_t j = start; j < end; ++j) {
          const Transition& tr = buffer[order[j]];
          const std::span<const double> obs(tr.obs);
          const double r2dx = [&] {
            double s = 0.0;
            for (double x : tr.u_next) s += x * x;
            return s * env.dx;
          }();
          const double r = residual->eval(obs.subspan(0, half), obs.subspan(half), tr.u_dot,
                                          tr.bw, r2dx);
          residual->add_param_grad(2.0 * r * env.dt / m, grad_c);
          batch_vloss += r * r * env.dt / m;
        }
        batch_vloss += boundary->eval();
        boundary->add_param_grad(1.0, grad_c);
      }
      adam_update(value_flat, grad_c, tc.critic_lr, critic_opt);
      value_net.set_params(value_flat);
      if (residual) residual->set_params(value_flat);
      if (boundary) boundary->set_params(value_flat);
      value_loss_sum += batch_vloss;
      ++critic_steps;
    }
  }

  unflatten(policy_flat, policy);
  unflatten(value_flat, value);

  metrics.optimizer_steps = critic_steps;
  metrics.value_loss = critic_steps > 0 ? value_loss_sum / static_cast<double>(critic_steps) : 0.0;
  metrics.policy_loss =
      actor_visits > 0 ? policy_loss_sum / static_cast<double>(actor_visits) : 0.0;
  return metrics;
}

}  // namespace packcool
