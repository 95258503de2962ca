#include "packcool/tape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace packcool {

namespace {

bool is_unary(Op k) {
  switch (k) {
    case Op::kExp:
    case Op::kTanh:
    case Op::kSquare:
    case Op::kReluMax0:
    case Op::kNeg:
    case Op::kStep0:
      return true;
    default:
      return false;
  }
}

bool is_binary(Op k) {
  switch (k) {
    case Op::kAdd:
    case Op::kSub:
    case Op::kMul:
    case Op::kDiv:
      return true;
    default:
      return false;
  }
}

}  // namespace

NodeRef Graph::push(Op kind, std::uint32_t a, std::uint32_t b, std::uint32_t c, double value) {
  const auto id = static_cast<std::uint32_t>(kind_.size());
  kind_.push_back(static_cast<std::uint8_t>(kind));
  a_.push_back(a);
  b_.push_back(b);
  c_.push_back(c);
  val_.push_back(value);
  return NodeRef{id};
}

NodeRef Graph::lift(double value) { return push(Op::kConst, 0, 0, 0, value); }

NodeRef Graph::input(double value) { return push(Op::kInput, 0, 0, 0, value); }

double Graph::value(NodeRef n) const {
  if (!n.valid() || n.id >= val_.size()) throw std::invalid_argument("Graph::value: bad node");
  return val_[n.id];
}

void Graph::set_input(NodeRef n, double value) {
  if (!n.valid() || n.id >= val_.size()) throw std::invalid_argument("Graph::set_input: bad node");
  if (static_cast<Op>(kind_[n.id]) != Op::kInput)
    throw std::invalid_argument("Graph::set_input: node is not an input leaf");
  val_[n.id] = value;
}

double Graph::eval(std::size_t i) const {
  const Op k = static_cast<Op>(kind_[i]);
  const double av = val_[a_[i]];
  switch (k) {
    case Op::kAdd: return av + val_[b_[i]];
    case Op::kSub: return av - val_[b_[i]];
    case Op::kMul: return av * val_[b_[i]];
    case Op::kDiv: return av / val_[b_[i]];
    case Op::kExp: return std::exp(av);
    case Op::kTanh: return std::tanh(av);
    case Op::kSquare: return av * av;
    case Op::kReluMax0: return av > 0.0 ? av : 0.0;
    case Op::kNeg: return -av;
    case Op::kMulAdd: return av * val_[b_[i]] + val_[c_[i]];
    case Op::kStep0: return av > 0.0 ? 1.0 : 0.0;
    case Op::kConst:
    case Op::kInput: return val_[i];
  }
  return val_[i];
}

NodeRef Graph::apply(Op kind, NodeRef a) {
  if (!is_unary(kind)) throw std::invalid_argument("Graph::apply: kind is not unary");
  if (!a.valid() || a.id >= size()) throw std::invalid_argument("Graph::apply: bad operand");
  NodeRef n = push(kind, a.id, 0, 0, 0.0);
  val_[n.id] = eval(n.id);
  return n;
}

NodeRef Graph::apply(Op kind, NodeRef a, NodeRef b) {
  if (!is_binary(kind)) throw std::invalid_argument("Graph::apply: kind is not binary");
  if (!a.valid() || a.id >= size() || !b.valid() || b.id >= size())
    throw std::invalid_argument("Graph::apply: bad operand");
  if (kind == Op::kDiv && val_[b.id] == 0.0)
    throw std::invalid_argument("Graph::apply: division by zero-valued node");
  NodeRef n = push(kind, a.id, b.id, 0, 0.0);
  val_[n.id] = eval(n.id);
  return n;
}

NodeRef Graph::muladd(NodeRef a, NodeRef b, NodeRef c) {
  if (!a.valid() || a.id >= size() || !b.valid() || b.id >= size() || !c.valid() || c.id >= size())
    throw std::invalid_argument("Graph::muladd: bad operand");
  NodeRef n = push(Op::kMulAdd, a.id, b.id, c.id, 0.0);
  val_[n.id] = eval(n.id);
  return n;
}

void Graph::forward() {
  const std::size_t n = size();
  for (std::size_t i = 0; i < n; ++i) {
    const Op k = static_cast<Op>(kind_[i]);
    if (k == Op::kConst || k == Op::kInput) continue;
    val_[i] = eval(i);
  }
}

std::vector<NodeRef> Graph::backward(NodeRef output, std::span<const NodeRef> wrt) {
  if (!output.valid() || output.id >= size()) throw std::invalid_argument("Graph::backward: bad output");
  for (NodeRef n : wrt) {
    if (!n.valid() || n.id >= size()) throw std::invalid_argument("Graph::backward: wrt node not in graph");
  }
  const std::uint32_t root = output.id;

  // Adjoint node per id, accumulated as the sweep visits consumers. All
  // emitted nodes reference only existing ids, so topological order is kept.
  std::vector<std::uint32_t> adj(root + 1, NodeRef::kInvalid);
  adj[root] = lift(1.0).id;

  auto add_to = [&](std::uint32_t t, NodeRef g) {
    if (t > root) return;  // can't happen for operands, defensive
    adj[t] = adj[t] == NodeRef::kInvalid ? g.id : apply(Op::kAdd, NodeRef{adj[t]}, g).id;
  };
  auto sub_from = [&](std::uint32_t t, NodeRef g) {
    adj[t] = adj[t] == NodeRef::kInvalid ? apply(Op::kNeg, g).id
                                         : apply(Op::kSub, NodeRef{adj[t]}, g).id;
  };
  // target += g * f, fused when an accumulator already exists.
  auto mul_to = [&](std::uint32_t t, NodeRef g, NodeRef f) {
    adj[t] = adj[t] == NodeRef::kInvalid ? apply(Op::kMul, g, f).id
                                         : muladd(g, f, NodeRef{adj[t]}).id;
  };

  for (std::uint32_t i = root;; --i) {
    if (adj[i] != NodeRef::kInvalid) {
      const NodeRef g{adj[i]};
      const NodeRef an{a_[i]}, bn{b_[i]}, cn{c_[i]}, yn{i};
      switch (static_cast<Op>(kind_[i])) {
        case Op::kAdd:
          add_to(an.id, g);
          add_to(bn.id, g);
          break;
        case Op::kSub:
          add_to(an.id, g);
          sub_from(bn.id, g);
          break;
        case Op::kMul:
          mul_to(an.id, g, bn);
          mul_to(bn.id, g, an);
          break;
        case Op::kDiv:
          // y = a/b: da = g/b, db = -g*y/b
          add_to(an.id, apply(Op::kDiv, g, bn));
          sub_from(bn.id, apply(Op::kDiv, apply(Op::kMul, g, yn), bn));
          break;
        case Op::kExp:
          mul_to(an.id, g, yn);
          break;
        case Op::kTanh:
          mul_to(an.id, g, apply(Op::kSub, lift(1.0), apply(Op::kSquare, yn)));
          break;
        case Op::kSquare:
          mul_to(an.id, g, apply(Op::kMul, lift(2.0), an));
          break;
        case Op::kReluMax0:
          mul_to(an.id, g, apply(Op::kStep0, an));
          break;
        case Op::kNeg:
          sub_from(an.id, g);
          break;
        case Op::kMulAdd:
          mul_to(an.id, g, bn);
          mul_to(bn.id, g, an);
          add_to(cn.id, g);
          break;
        case Op::kStep0:   // derivative 0 away from the (excluded) kink
        case Op::kConst:
        case Op::kInput:
          break;
      }
    }
    if (i == 0) break;
  }

  std::vector<NodeRef> out;
  out.reserve(wrt.size());
  for (NodeRef n : wrt) {
    if (n.id <= root && adj[n.id] != NodeRef::kInvalid) {
      out.push_back(NodeRef{adj[n.id]});
    } else {
      out.push_back(lift(0.0));
    }
  }
  return out;
}

void Graph::accumulate_adjoints(NodeRef output, double seed, std::span<const NodeRef> wrt,
                                std::span<double> grad) {
  if (!output.valid() || output.id >= size())
    throw std::invalid_argument("Graph::accumulate_adjoints: bad output");
  if (grad.size() != wrt.size())
    throw std::invalid_argument("Graph::accumulate_adjoints: grad size mismatch");
  const std::uint32_t root = output.id;
  adj_.assign(root + 1, 0.0);
  adj_[root] = seed;
  for (std::uint32_t i = root;; --i) {
    const double g = adj_[i];
    if (g != 0.0) {
      const std::uint32_t a = a_[i], b = b_[i], c = c_[i];
      switch (static_cast<Op>(kind_[i])) {
        case Op::kAdd:
          adj_[a] += g;
          adj_[b] += g;
          break;
        case Op::kSub:
          adj_[a] += g;
          adj_[b] -= g;
          break;
        case Op::kMul:
          adj_[a] += g * val_[b];
          adj_[b] += g * val_[a];
          break;
        case Op::kDiv:
          adj_[a] += g / val_[b];
          adj_[b] -= g * val_[i] / val_[b];
          break;
        case Op::kExp:
          adj_[a] += g * val_[i];
          break;
        case Op::kTanh:
          adj_[a] += g * (1.0 - val_[i] * val_[i]);
          break;
        case Op::kSquare:
          adj_[a] += 2.0 * g * val_[a];
          break;
        case Op::kReluMax0:
          if (val_[a] > 0.0) adj_[a] += g;
          break;
        case Op::kNeg:
          adj_[a] -= g;
          break;
        case Op::kMulAdd:
          adj_[a] += g * val_[b];
          adj_[b] += g * val_[a];
          adj_[c] += g;
          break;
        case Op::kStep0:
        case Op::kConst:
        case Op::kInput:
          break;
      }
    }
    if (i == 0) break;
  }
  for (std::size_t j = 0; j < wrt.size(); ++j) {
    if (wrt[j].id <= root) grad[j] += adj_[wrt[j].id];
  }
}

double finite_diff_check(const GraphBuilder& build, std::span<const double> x, double h) {
  Graph g;
  std::vector<NodeRef> in;
  in.reserve(x.size());
  for (double v : x) in.push_back(g.input(v));
  const NodeRef out = build(g, in);

  const std::vector<NodeRef> grads = g.backward(out, in);
  std::vector<double> analytic(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) analytic[i] = g.value(grads[i]);

  double max_rel = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    g.set_input(in[i], x[i] + h);
    g.forward();
    const double fp = g.value(out);
    g.set_input(in[i], x[i] - h);
    g.forward();
    const double fm = g.value(out);
    g.set_input(in[i], x[i]);
    const double fd = (fp - fm) / (2.0 * h);
    const double denom = std::max({std::abs(fd), std::abs(analytic[i]), 1e-8});
    max_rel = std::max(max_rel, std::abs(analytic[i] - fd) / denom);
  }
  g.forward();  // leave cached values consistent with x
  return max_rel;
}

}  // namespace packcool
