#pragma once

#include <span>
#include <vector>

#include "packcool/rng.hpp"
#include "packcool/tape.hpp"

namespace packcool {

struct Mat {
  int rows = 0, cols = 0;
  std::vector<double> a;  // row-major

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}
  double& at(int r, int c) { return a[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return a[static_cast<std::size_t>(r) * cols + c]; }
};

enum class OutputActivation { kIdentity, kTanh };

// Fully connected network with tanh hidden layers. The value net ends in an
// identity output; the policy net ends in tanh so its mean stays in [-1, 1].
struct MlpParams {
  std::vector<Mat> W;
  std::vector<std::vector<double>> b;
  OutputActivation out_act = OutputActivation::kIdentity;

  int input_width() const { return W.empty() ? 0 : W.front().cols; }
  int output_width() const { return W.empty() ? 0 : W.back().rows; }
  std::size_t param_count() const;
};

/// Weights ~ Uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) from the seeded
/// stream, biases zero. layer_sizes = {in, hidden..., out}.
MlpParams init_params(std::span<const int> layer_sizes, OutputActivation act, Rng& rng);

/// Forward pass in plain arithmetic (no graph); for scalar-output nets.
double plain_forward(const MlpParams& p, std::span<const double> obs);

/// Parameter vector in a fixed order: per layer, W row-major then b. The
/// same order is used by the graph param inputs and the Adam state.
std::vector<double> flatten(const MlpParams& p);
void unflatten(std::span<const double> flat, MlpParams& p);

/// Input nodes carrying the current parameter values, in flatten() order.
std::vector<NodeRef> append_param_inputs(Graph& g, const MlpParams& p);

/// Appends the network body to `g`. param_refs must follow flatten() order;
/// in_refs are the observation nodes. Returns the scalar output node.
NodeRef append_mlp(Graph& g, const MlpParams& shape, std::span<const NodeRef> param_refs,
                   std::span<const NodeRef> in_refs);

// Self-contained graph evaluations of V(u, w), kept around so that gradient
// nodes can be extracted from the same graph afterwards.
struct ValueEval {
  Graph graph;
  std::vector<NodeRef> in_u, in_w;
  std::vector<NodeRef> params;
  NodeRef out;
};
ValueEval value_forward(const MlpParams& p, std::span<const double> u, std::span<const double> w);

struct ValueGrads {
  ValueEval eval;
  std::vector<NodeRef> g_u, g_w;  // d V / d u_k, d V / d w_k as graph nodes
};
ValueGrads value_input_grads(const MlpParams& p, std::span<const double> u,
                             std::span<const double> w);

// Reusable scalar-net graph: observation and parameters are input slots, so
// the same node tape serves every minibatch element. One instance replaces
// thousands of per-sample graph constructions in the training loop.
class NetGraph {
 public:
  explicit NetGraph(const MlpParams& p);

  /// Overwrites the parameter slots (flatten() order). Does not re-evaluate;
  /// the next forward() picks the values up.
  void set_params(std::span<const double> flat);

  /// Loads an observation and evaluates the whole tape. Returns the output.
  double forward(std::span<const double> obs);

  double value() const { return g_.value(out_); }

  /// d out / d obs of the latest forward(), overwriting `g`.
  void input_grads(std::span<double> g);

  /// Accumulates seed * (d out / d params) of the latest forward() into
  /// `grad` (flatten() order).
  void add_param_grad(double seed, std::span<double> grad);

  std::size_t input_width() const { return in_.size(); }
  std::size_t param_width() const { return params_.size(); }

 private:
  Graph g_;
  std::vector<NodeRef> in_;
  std::vector<NodeRef> params_;
  NodeRef out_;
};

// Gaussian policy head ------------------------------------------------------

struct PolicyDistribution {
  double mean = 0.0;
  double scale = 0.3;
};

/// tanh-squashed scalar mean.
double policy_mean(const MlpParams& p, std::span<const double> obs);

/// Exploration scale: starts at 0.3 and drops by 0.01 every 1000 completed
/// episodes, floored at 0.1.
double std_schedule(long episode);

/// Draw from Normal(mean, scale), then clamp to [-1, 1].
double sample_action(const PolicyDistribution& dist, Rng& rng);

/// Log density of the unclipped Normal at `a` (the clamp in sample_action is
/// intentionally ignored).
double log_prob(const PolicyDistribution& dist, double a);

/// Same density as a graph node, differentiable through the mean node.
NodeRef append_log_prob(Graph& g, NodeRef mean, double scale, double action);

}  // namespace packcool
