#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace packcool {

// Node kinds of the expression graph. The first block is the public
// construction surface; the last two are internal kinds emitted by the MLP
// builder and by backward():
//   kMulAdd  fused a*b + c, keeping dot-product chains at one node per term;
//   kStep0   d/dx max(0,x) with the value at x = 0 defined as 0. The switch
//            must be a node (not a frozen constant) so a graph re-evaluated
//            at new inputs recomputes which side of the kink it is on.
enum class Op : std::uint8_t {
  kConst,
  kInput,
  kAdd,
  kSub,
  kMul,
  kDiv,
  kExp,
  kTanh,
  kSquare,
  kReluMax0,
  kNeg,
  kMulAdd,
  kStep0,
};

struct NodeRef {
  static constexpr std::uint32_t kInvalid = 0xffffffffu;
  std::uint32_t id = kInvalid;
  bool valid() const { return id != kInvalid; }
};

// Append-only scalar expression graph with reverse-mode differentiation.
//
// Operand ids always precede a node's own id, so the node list is a
// topological order and a single in-order sweep re-evaluates the graph.
// backward() emits the gradient as NEW NODES of the same graph, which makes
// gradients differentiable again (the second-order pass needed when a loss
// contains input-gradients of a network). accumulate_adjoints() is the
// numeric counterpart used in training loops where only first-order values
// of an already-built graph are needed.
//
// Node structure is immutable once appended. The only mutation is
// set_input() on kInput leaves followed by forward(), which re-establishes
// every cached value; this pair is what lets one prebuilt graph serve a whole
// minibatch. A Graph is confined to one thread.
class Graph {
 public:
  /// Constant leaf: zero derivative.
  NodeRef lift(double value);
  /// Differentiable leaf whose value can be replaced via set_input().
  NodeRef input(double value);

  NodeRef apply(Op kind, NodeRef a);
  NodeRef apply(Op kind, NodeRef a, NodeRef b);
  /// Fused a*b + c.
  NodeRef muladd(NodeRef a, NodeRef b, NodeRef c);

  double value(NodeRef n) const;
  std::size_t size() const { return kind_.size(); }

  /// Replaces the value of a kInput leaf. Cached values downstream are stale
  /// until the next forward().
  void set_input(NodeRef n, double value);
  /// Recomputes every non-leaf value in id order.
  void forward();

  /// Reverse sweep from `output` emitting gradient nodes for each entry of
  /// `wrt` (a lift(0) node when the output does not depend on it). The
  /// returned nodes are ordinary graph nodes: calling backward() on them
  /// yields second-order derivatives.
  std::vector<NodeRef> backward(NodeRef output, std::span<const NodeRef> wrt);

  /// Numeric reverse sweep: adds seed * d(output)/d(wrt[j]) into grad[j].
  /// No nodes are emitted; values must be current (run forward() first when
  /// inputs changed).
  void accumulate_adjoints(NodeRef output, double seed, std::span<const NodeRef> wrt,
                           std::span<double> grad);

 private:
  NodeRef push(Op kind, std::uint32_t a, std::uint32_t b, std::uint32_t c, double value);
  double eval(std::size_t i) const;

  std::vector<std::uint8_t> kind_;
  std::vector<std::uint32_t> a_, b_, c_;
  std::vector<double> val_;
  std::vector<double> adj_;  // scratch for accumulate_adjoints
};

/// Builds a scalar function of `x` into a graph and returns its output node.
/// Used by finite_diff_check and the gradient tests.
using GraphBuilder = std::function<NodeRef(Graph&, std::span<const NodeRef>)>;

/// Differentiates the built graph at x with backward() and compares each
/// gradient component against the central difference (f(x+h e_i) -
/// f(x-h e_i)) / 2h obtained by re-evaluating the same graph. Returns the
/// largest relative error, with tiny denominators floored at 1e-8.
double finite_diff_check(const GraphBuilder& build, std::span<const double> x, double h);

}  // namespace packcool
