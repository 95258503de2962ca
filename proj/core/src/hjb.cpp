#include "packcool/hjb.hpp"

#include <cmath>
#include <stdexcept>

namespace packcool {

std::vector<double> u_dot_model(const GridState& state, const EnvConfig& config) {
  const std::size_t n = state.u.size();
  if (n != state.w.size()) throw std::invalid_argument("u_dot_model: field size mismatch");
  const double sgn = config.diffusion_mode == DiffusionMode::kStabilizing ? 1.0 : -1.0;
  std::vector<double> out = laplacian_u(state.u, config.dx);
  for (std::size_t k = 0; k < n; ++k) {
    double v = sgn * config.diffusivity * out[k];
    if (config.enable_source) v += std::exp(0.1 * state.u[k]);
    if (config.enable_coupling) v += (state.w[k] - state.u[k]) / config.resistance;
    out[k] = v;
  }
  return out;
}

namespace {

struct GradNodes {
  NodeRef out;
  std::vector<NodeRef> g_u, g_w;
};

GradNodes append_value_with_grads(Graph& g, const MlpParams& shape,
                                  std::span<const NodeRef> params, std::span<const NodeRef> in_u,
                                  std::span<const NodeRef> in_w) {
  std::vector<NodeRef> obs(in_u.begin(), in_u.end());
  obs.insert(obs.end(), in_w.begin(), in_w.end());
  GradNodes r;
  r.out = append_mlp(g, shape, params, obs);
  const std::vector<NodeRef> grads = g.backward(r.out, obs);
  r.g_u.assign(grads.begin(), grads.begin() + static_cast<std::ptrdiff_t>(in_u.size()));
  r.g_w.assign(grads.begin() + static_cast<std::ptrdiff_t>(in_u.size()), grads.end());
  return r;
}

/// sum_k a_k * c_k with one fused node per term.
NodeRef append_dot(Graph& g, std::span<const NodeRef> a, std::span<const NodeRef> c) {
  NodeRef acc = g.apply(Op::kMul, a[0], c[0]);
  for (std::size_t k = 1; k < a.size(); ++k) acc = g.muladd(a[k], c[k], acc);
  return acc;
}

std::vector<NodeRef> lift_all(Graph& g, std::span<const double> v) {
  std::vector<NodeRef> out;
  out.reserve(v.size());
  for (double x : v) out.push_back(g.lift(x));
  return out;
}

NodeRef append_residual_terms(Graph& g, const GradNodes& vg, std::span<const NodeRef> u_minus_w,
                              std::span<const NodeRef> udot, std::span<const NodeRef> bw,
                              NodeRef r2dx, double gamma, double dt, double resistance) {
  NodeRef acc = g.apply(Op::kMul, g.lift(gamma - 1.0), vg.out);
  acc = g.apply(Op::kSub, acc, r2dx);
  acc = g.muladd(append_dot(g, vg.g_u, udot), g.lift(dt), acc);
  acc = g.muladd(append_dot(g, vg.g_w, u_minus_w), g.lift(dt / resistance), acc);
  const NodeRef adv = append_dot(g, vg.g_w, bw);
  return g.apply(Op::kAdd, acc, g.apply(Op::kReluMax0, g.apply(Op::kNeg, adv)));
}

double squared_norm_dx(std::span<const double> v, double dx) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s * dx;
}

}  // namespace

NodeRef append_hjb_residual(Graph& g, const MlpParams& shape, std::span<const NodeRef> params,
                            const HjbTransition& tr, const HjbBatch& batch,
                            const EnvConfig& env) {
  const std::size_t n = tr.u.size();
  if (tr.w.size() != n || tr.u_next.size() != n)
    throw std::invalid_argument("append_hjb_residual: field size mismatch");

  const std::vector<NodeRef> nu = lift_all(g, tr.u);
  const std::vector<NodeRef> nw = lift_all(g, tr.w);
  const GradNodes vg = append_value_with_grads(g, shape, params, nu, nw);

  const GridState st{tr.u, tr.w, 0.0};
  const std::vector<double> udot = u_dot_model(st, env);
  const std::vector<double> bw = gradient_w(tr.w, env.inflow_temp, batch.dx);
  std::vector<double> umw(n);
  for (std::size_t k = 0; k < n; ++k) umw[k] = tr.u[k] - tr.w[k];

  return append_residual_terms(g, vg, lift_all(g, umw), lift_all(g, udot), lift_all(g, bw),
                               g.lift(squared_norm_dx(tr.u_next, batch.dx)), batch.gamma,
                               batch.dt, batch.resistance);
}

LossEval mse_f(const MlpParams& value, const HjbBatch& batch, const EnvConfig& env) {
  if (batch.transitions.empty()) throw std::invalid_argument("mse_f: empty batch");
  LossEval ev;
  ev.params = append_param_inputs(ev.graph, value);
  NodeRef acc = NodeRef{};
  for (const HjbTransition& tr : batch.transitions) {
    const NodeRef r = append_hjb_residual(ev.graph, value, ev.params, tr, batch, env);
    const NodeRef sq = ev.graph.apply(Op::kSquare, r);
    acc = acc.valid() ? ev.graph.apply(Op::kAdd, acc, sq) : sq;
  }
  ev.out = ev.graph.apply(
      Op::kMul, acc,
      ev.graph.lift(batch.dt / static_cast<double>(batch.transitions.size())));
  return ev;
}

namespace {

// The rest point (u = 0, w = -R) as constant nodes.
struct RestPoint {
  std::vector<NodeRef> nu, nw;
};

RestPoint rest_point(Graph& g, int n_x, double resistance) {
  RestPoint p;
  p.nu.reserve(static_cast<std::size_t>(n_x));
  p.nw.reserve(static_cast<std::size_t>(n_x));
  for (int k = 0; k < n_x; ++k) {
    p.nu.push_back(g.lift(0.0));
    p.nw.push_back(g.lift(-resistance));
  }
  return p;
}

}  // namespace

LossEval mse_u(const MlpParams& value, const EnvConfig& env) {
  LossEval ev;
  ev.params = append_param_inputs(ev.graph, value);
  const RestPoint p = rest_point(ev.graph, value.input_width() / 2, env.resistance);
  std::vector<NodeRef> obs = p.nu;
  obs.insert(obs.end(), p.nw.begin(), p.nw.end());
  ev.out = ev.graph.apply(Op::kSquare, append_mlp(ev.graph, value, ev.params, obs));
  return ev;
}

LossEval mse_n(const MlpParams& value, const EnvConfig& env) {
  LossEval ev;
  ev.params = append_param_inputs(ev.graph, value);
  const RestPoint p = rest_point(ev.graph, value.input_width() / 2, env.resistance);
  const GradNodes vg = append_value_with_grads(ev.graph, value, ev.params, p.nu, p.nw);
  NodeRef acc = ev.graph.apply(Op::kSquare, vg.g_u[0]);
  for (std::size_t k = 1; k < vg.g_u.size(); ++k)
    acc = ev.graph.muladd(vg.g_u[k], vg.g_u[k], acc);
  for (std::size_t k = 0; k < vg.g_w.size(); ++k)
    acc = ev.graph.muladd(vg.g_w[k], vg.g_w[k], acc);
  ev.out = acc;
  return ev;
}

int optimal_action(const MlpParams& value, const GridState& state, const EnvConfig& env) {
  const ValueGrads vg = value_input_grads(value, state.u, state.w);
  const std::vector<double> bw = gradient_w(state.w, env.inflow_temp, env.dx);
  double q = 0.0;
  for (std::size_t k = 0; k < bw.size(); ++k) q += vg.eval.graph.value(vg.g_w[k]) * bw[k];
  return q < 0.0 ? 1 : -1;
}

ResidualGraph::ResidualGraph(const MlpParams& shape, double gamma, double dt, double resistance) {
  const std::size_t n = static_cast<std::size_t>(shape.input_width()) / 2;
  auto make_inputs = [this](std::size_t count) {
    std::vector<NodeRef> v;
    v.reserve(count);
    for (std::size_t k = 0; k < count; ++k) v.push_back(g_.input(0.0));
    return v;
  };
  in_u_ = make_inputs(n);
  in_w_ = make_inputs(n);
  params_ = append_param_inputs(g_, shape);
  const GradNodes vg = append_value_with_grads(g_, shape, params_, in_u_, in_w_);
  in_udot_ = make_inputs(n);
  in_bw_ = make_inputs(n);
  in_r2dx_ = g_.input(0.0);
  std::vector<NodeRef> umw(n);
  for (std::size_t k = 0; k < n; ++k) umw[k] = g_.apply(Op::kSub, in_u_[k], in_w_[k]);
  out_ = append_residual_terms(g_, vg, umw, in_udot_, in_bw_, in_r2dx_, gamma, dt, resistance);
}

void ResidualGraph::set_params(std::span<const double> flat) {
  if (flat.size() != params_.size())
    throw std::invalid_argument("ResidualGraph: param size mismatch");
  for (std::size_t j = 0; j < flat.size(); ++j) g_.set_input(params_[j], flat[j]);
}

double ResidualGraph::eval(std::span<const double> u, std::span<const double> w,
                           std::span<const double> u_dot, std::span<const double> bw,
                           double r2dx) {
  if (u.size() != in_u_.size() || w.size() != in_w_.size() || u_dot.size() != in_udot_.size() ||
      bw.size() != in_bw_.size())
    throw std::invalid_argument("ResidualGraph: field size mismatch");
  for (std::size_t k = 0; k < u.size(); ++k) g_.set_input(in_u_[k], u[k]);
  for (std::size_t k = 0; k < w.size(); ++k) g_.set_input(in_w_[k], w[k]);
  for (std::size_t k = 0; k < u_dot.size(); ++k) g_.set_input(in_udot_[k], u_dot[k]);
  for (std::size_t k = 0; k < bw.size(); ++k) g_.set_input(in_bw_[k], bw[k]);
  g_.set_input(in_r2dx_, r2dx);
  g_.forward();
  return g_.value(out_);
}

void ResidualGraph::add_param_grad(double seed, std::span<double> grad) {
  if (grad.size() != params_.size())
    throw std::invalid_argument("ResidualGraph: gradient size mismatch");
  g_.accumulate_adjoints(out_, seed, params_, grad);
}

BoundaryLossGraph::BoundaryLossGraph(const MlpParams& shape, double resistance) {
  params_ = append_param_inputs(g_, shape);
  const RestPoint p = rest_point(g_, shape.input_width() / 2, resistance);
  const GradNodes vg = append_value_with_grads(g_, shape, params_, p.nu, p.nw);
  NodeRef acc = g_.apply(Op::kSquare, vg.out);
  for (std::size_t k = 0; k < vg.g_u.size(); ++k) acc = g_.muladd(vg.g_u[k], vg.g_u[k], acc);
  for (std::size_t k = 0; k < vg.g_w.size(); ++k) acc = g_.muladd(vg.g_w[k], vg.g_w[k], acc);
  out_ = acc;
}

void BoundaryLossGraph::set_params(std::span<const double> flat) {
  if (flat.size() != params_.size())
    throw std::invalid_argument("BoundaryLossGraph: param size mismatch");
  for (std::size_t j = 0; j < flat.size(); ++j) g_.set_input(params_[j], flat[j]);
}

double BoundaryLossGraph::eval() {
  g_.forward();
  return g_.value(out_);
}

void BoundaryLossGraph::add_param_grad(double seed, std::span<double> grad) {
  if (grad.size() != params_.size())
    throw std::invalid_argument("BoundaryLossGraph: gradient size mismatch");
  g_.accumulate_adjoints(out_, seed, params_, grad);
}

}  // namespace packcool
