#pragma once

#include <span>
#include <vector>

#include "packcool/env.hpp"
#include "packcool/mlp.hpp"

namespace packcool {

struct HjbTransition {
  std::vector<double> u;
  std::vector<double> w;
  std::vector<double> u_next;
};

struct HjbBatch {
  std::vector<HjbTransition> transitions;
  double gamma = 0.99;
  double dt = 0.01;
  double dx = 0.01;
  double resistance = 2.0;
};

/// Model drift of the pack field at the given state:
///   +-D * laplacian(u) + e^{0.1 u} + (w - u) / R
/// with the diffusion sign and physics switches taken from the config, so it
/// agrees with what the environment integrates.
std::vector<double> u_dot_model(const GridState& state, const EnvConfig& config);

// A value-net loss held together with the graph it lives on. The parameter
// slots are inputs, so the loss can be differentiated (and re-evaluated under
// nudged parameters) without rebuilding.
struct LossEval {
  Graph graph;
  std::vector<NodeRef> params;
  NodeRef out;

  double value() const { return graph.value(out); }
};

/// Appends one residual
///   r = (gamma-1) V(u,w) - |u_next|^2 dx
///     + (grad_u V . u_dot) dt + (grad_w V . (u - w)) dt / R
///     + max(0, -(grad_w V . Bw))
/// where u_dot is the model drift, Bw the transport difference of w, and the
/// state enters as constants; only V and its input gradients carry parameter
/// dependence. env supplies the drift coefficients and the inflow value used
/// by Bw; the scalar coefficients come from the batch.
NodeRef append_hjb_residual(Graph& g, const MlpParams& shape, std::span<const NodeRef> params,
                            const HjbTransition& tr, const HjbBatch& batch,
                            const EnvConfig& env);

/// Mean of r^2 over the batch, times dt.
LossEval mse_f(const MlpParams& value, const HjbBatch& batch, const EnvConfig& env);

/// V(0, -R)^2: the squared value at the rest point u = 0, w = -R, where the
/// model drift vanishes and the optimal value is zero.
LossEval mse_u(const MlpParams& value, const EnvConfig& env);

/// Squared gradient norm |grad_u V|^2 + |grad_w V|^2 at the same rest point.
LossEval mse_n(const MlpParams& value, const EnvConfig& env);

/// Switching rule of the closed-form controller: with q = grad_w V . Bw,
/// returns +1 (full transport) when q < 0 and -1 (no transport) otherwise,
/// so the tie lands on sigma = 0.
int optimal_action(const MlpParams& value, const GridState& state, const EnvConfig& env);

// Reusable residual tape for the critic update: the transition data (u, w,
// u_dot, Bw, |u_next|^2 dx) are input slots and the scalar coefficients are
// baked in, so one instance serves every minibatch element.
class ResidualGraph {
 public:
  ResidualGraph(const MlpParams& shape, double gamma, double dt, double resistance);

  void set_params(std::span<const double> flat);

  /// Loads one transition and evaluates; returns the residual value.
  double eval(std::span<const double> u, std::span<const double> w,
              std::span<const double> u_dot, std::span<const double> bw, double r2dx);

  /// Accumulates seed * (d residual / d params) of the latest eval().
  void add_param_grad(double seed, std::span<double> grad);

 private:
  Graph g_;
  std::vector<NodeRef> in_u_, in_w_, in_udot_, in_bw_;
  NodeRef in_r2dx_;
  std::vector<NodeRef> params_;
  NodeRef out_;
};

// Combined boundary losses at the rest point, mse_u + mse_n, on a reusable
// tape. The rest point is constant; only the parameter slots change.
class BoundaryLossGraph {
 public:
  BoundaryLossGraph(const MlpParams& shape, double resistance);

  void set_params(std::span<const double> flat);
  double eval();
  void add_param_grad(double seed, std::span<double> grad);

 private:
  Graph g_;
  std::vector<NodeRef> params_;
  NodeRef out_;
};

}  // namespace packcool
