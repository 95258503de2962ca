#include "packcool/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace packcool {

std::size_t MlpParams::param_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < W.size(); ++l) n += W[l].a.size() + b[l].size();
  return n;
}

MlpParams init_params(std::span<const int> layer_sizes, OutputActivation act, Rng& rng) {
  if (layer_sizes.size() < 2) throw std::invalid_argument("init_params: need at least 2 layers");
  MlpParams p;
  p.out_act = act;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    const int fan_in = layer_sizes[l];
    const int fan_out = layer_sizes[l + 1];
    if (fan_in < 1 || fan_out < 1) throw std::invalid_argument("init_params: bad layer size");
    Mat w(fan_out, fan_in);
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (double& v : w.a) v = rng.uniform(-bound, bound);
    p.W.push_back(std::move(w));
    p.b.emplace_back(static_cast<std::size_t>(fan_out), 0.0);
  }
  return p;
}

double plain_forward(const MlpParams& p, std::span<const double> obs) {
  if (static_cast<int>(obs.size()) != p.input_width())
    throw std::invalid_argument("plain_forward: observation width mismatch");
  if (p.output_width() != 1) throw std::invalid_argument("plain_forward: scalar output expected");
  std::vector<double> cur(obs.begin(), obs.end());
  std::vector<double> next;
  for (std::size_t l = 0; l < p.W.size(); ++l) {
    const Mat& w = p.W[l];
    next.assign(static_cast<std::size_t>(w.rows), 0.0);
    for (int r = 0; r < w.rows; ++r) {
      double acc = p.b[l][static_cast<std::size_t>(r)];
      const double* row = &w.a[static_cast<std::size_t>(r) * w.cols];
      for (int c = 0; c < w.cols; ++c) acc += row[c] * cur[static_cast<std::size_t>(c)];
      next[static_cast<std::size_t>(r)] = acc;
    }
    const bool last = (l + 1 == p.W.size());
    if (!last || p.out_act == OutputActivation::kTanh) {
      for (double& v : next) v = std::tanh(v);
    }
    cur.swap(next);
  }
  return cur[0];
}

std::vector<double> flatten(const MlpParams& p) {
  std::vector<double> out;
  out.reserve(p.param_count());
  for (std::size_t l = 0; l < p.W.size(); ++l) {
    out.insert(out.end(), p.W[l].a.begin(), p.W[l].a.end());
    out.insert(out.end(), p.b[l].begin(), p.b[l].end());
  }
  return out;
}

void unflatten(std::span<const double> flat, MlpParams& p) {
  if (flat.size() != p.param_count()) throw std::invalid_argument("unflatten: size mismatch");
  std::size_t pos = 0;
  for (std::size_t l = 0; l < p.W.size(); ++l) {
    std::copy(flat.begin() + pos, flat.begin() + pos + p.W[l].a.size(), p.W[l].a.begin());
    pos += p.W[l].a.size();
    std::copy(flat.begin() + pos, flat.begin() + pos + p.b[l].size(), p.b[l].begin());
    pos += p.b[l].size();
  }
}

std::vector<NodeRef> append_param_inputs(Graph& g, const MlpParams& p) {
  std::vector<NodeRef> refs;
  refs.reserve(p.param_count());
  for (std::size_t l = 0; l < p.W.size(); ++l) {
    for (double v : p.W[l].a) refs.push_back(g.input(v));
    for (double v : p.b[l]) refs.push_back(g.input(v));
  }
  return refs;
}

NodeRef append_mlp(Graph& g, const MlpParams& shape, std::span<const NodeRef> param_refs,
                   std::span<const NodeRef> in_refs) {
  if (static_cast<int>(in_refs.size()) != shape.input_width())
    throw std::invalid_argument("append_mlp: input width mismatch");
  if (param_refs.size() != shape.param_count())
    throw std::invalid_argument("append_mlp: param count mismatch");
  if (shape.output_width() != 1) throw std::invalid_argument("append_mlp: scalar output expected");

  std::size_t pos = 0;
  std::vector<NodeRef> cur(in_refs.begin(), in_refs.end());
  std::vector<NodeRef> next;
  for (std::size_t l = 0; l < shape.W.size(); ++l) {
    const Mat& w = shape.W[l];
    const std::size_t w_base = pos;
    const std::size_t b_base = pos + w.a.size();
    next.clear();
    for (int r = 0; r < w.rows; ++r) {
      // bias + sum_c W[r,c] * x[c], one fused node per term
      NodeRef acc = param_refs[b_base + static_cast<std::size_t>(r)];
      const std::size_t row = w_base + static_cast<std::size_t>(r) * w.cols;
      for (int c = 0; c < w.cols; ++c) {
        acc = g.muladd(param_refs[row + static_cast<std::size_t>(c)],
                       cur[static_cast<std::size_t>(c)], acc);
      }
      next.push_back(acc);
    }
    const bool last = (l + 1 == shape.W.size());
    if (!last) {
      for (NodeRef& n : next) n = g.apply(Op::kTanh, n);
    } else if (shape.out_act == OutputActivation::kTanh) {
      for (NodeRef& n : next) n = g.apply(Op::kTanh, n);
    }
    cur.swap(next);
    pos = b_base + shape.b[l].size();
  }
  return cur[0];
}

ValueEval value_forward(const MlpParams& p, std::span<const double> u, std::span<const double> w) {
  if (static_cast<int>(u.size() + w.size()) != p.input_width())
    throw std::invalid_argument("value_forward: input width mismatch");
  ValueEval ev;
  ev.in_u.reserve(u.size());
  ev.in_w.reserve(w.size());
  for (double v : u) ev.in_u.push_back(ev.graph.input(v));
  for (double v : w) ev.in_w.push_back(ev.graph.input(v));
  ev.params = append_param_inputs(ev.graph, p);
  std::vector<NodeRef> obs = ev.in_u;
  obs.insert(obs.end(), ev.in_w.begin(), ev.in_w.end());
  ev.out = append_mlp(ev.graph, p, ev.params, obs);
  return ev;
}

ValueGrads value_input_grads(const MlpParams& p, std::span<const double> u,
                             std::span<const double> w) {
  ValueGrads vg;
  vg.eval = value_forward(p, u, w);
  std::vector<NodeRef> wrt = vg.eval.in_u;
  wrt.insert(wrt.end(), vg.eval.in_w.begin(), vg.eval.in_w.end());
  std::vector<NodeRef> grads = vg.eval.graph.backward(vg.eval.out, wrt);
  vg.g_u.assign(grads.begin(), grads.begin() + static_cast<std::ptrdiff_t>(u.size()));
  vg.g_w.assign(grads.begin() + static_cast<std::ptrdiff_t>(u.size()), grads.end());
  return vg;
}

NetGraph::NetGraph(const MlpParams& p) {
  in_.reserve(static_cast<std::size_t>(p.input_width()));
  for (int i = 0; i < p.input_width(); ++i) in_.push_back(g_.input(0.0));
  params_ = append_param_inputs(g_, p);
  out_ = append_mlp(g_, p, params_, in_);
}

void NetGraph::set_params(std::span<const double> flat) {
  if (flat.size() != params_.size()) throw std::invalid_argument("NetGraph: param size mismatch");
  for (std::size_t j = 0; j < flat.size(); ++j) g_.set_input(params_[j], flat[j]);
}

double NetGraph::forward(std::span<const double> obs) {
  if (obs.size() != in_.size()) throw std::invalid_argument("NetGraph: observation size mismatch");
  for (std::size_t j = 0; j < obs.size(); ++j) g_.set_input(in_[j], obs[j]);
  g_.forward();
  return g_.value(out_);
}

void NetGraph::input_grads(std::span<double> g) {
  if (g.size() != in_.size()) throw std::invalid_argument("NetGraph: gradient size mismatch");
  std::fill(g.begin(), g.end(), 0.0);
  g_.accumulate_adjoints(out_, 1.0, in_, g);
}

void NetGraph::add_param_grad(double seed, std::span<double> grad) {
  if (grad.size() != params_.size())
    throw std::invalid_argument("NetGraph: gradient size mismatch");
  g_.accumulate_adjoints(out_, seed, params_, grad);
}

double policy_mean(const MlpParams& p, std::span<const double> obs) {
  if (p.out_act != OutputActivation::kTanh)
    throw std::invalid_argument("policy_mean: policy net must end in tanh");
  return plain_forward(p, obs);
}

double std_schedule(long episode) {
  const double s = 0.3 - 0.01 * static_cast<double>(episode / 1000);
  return s < 0.1 ? 0.1 : s;
}

double sample_action(const PolicyDistribution& dist, Rng& rng) {
  const double a = rng.normal(dist.mean, dist.scale);
  return a < -1.0 ? -1.0 : (a > 1.0 ? 1.0 : a);
}

double log_prob(const PolicyDistribution& dist, double a) {
  const double z = (a - dist.mean) / dist.scale;
  return -0.5 * z * z - std::log(dist.scale) - 0.5 * std::log(2.0 * std::numbers::pi);
}

NodeRef append_log_prob(Graph& g, NodeRef mean, double scale, double action) {
  const double c = -std::log(scale) - 0.5 * std::log(2.0 * std::numbers::pi);
  NodeRef d = g.apply(Op::kSub, g.lift(action), mean);
  NodeRef z = g.apply(Op::kMul, d, g.lift(1.0 / scale));
  return g.apply(Op::kSub, g.lift(c), g.apply(Op::kMul, g.lift(0.5), g.apply(Op::kSquare, z)));
}

}  // namespace packcool
