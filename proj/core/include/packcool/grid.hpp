#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace packcool {

// Uniform 1D grid of n_x cells covering [0, 1]. Node k (1-based) sits at the
// cell center x_k = (k - 1/2)*dx; the inflow boundary x = 0 is not a node, so
// operators that need the boundary value take it as an argument. Cell centers
// make the mirror-ghost Neumann rows of laplacian_u second-order accurate:
// the reflection u_0 := u_1 is exact about the cell face at x = 0, and
// sampled cosine modes are exact eigenvectors of the discrete operator.
// State dimension is exactly n_x per field.
struct SpatialGrid {
  int n_x = 0;
  double dx = 0.0;

  static SpatialGrid of_size(int n_x) {
    if (n_x < 2) throw std::invalid_argument("SpatialGrid: n_x must be >= 2");
    return SpatialGrid{n_x, 1.0 / n_x};
  }

  /// Position of node k, k = 1..n_x.
  double node(int k) const { return (k - 0.5) * dx; }
};

/// Pack temperature u, fluid temperature w, and simulation time.
struct GridState {
  std::vector<double> u;
  std::vector<double> w;
  double t = 0.0;
};

/// Second difference with zero-slope ends via mirror ghosts u[0] := u[1] and
/// u[n+1] := u[n]:
///   row k: (u[k+1] - 2 u[k] + u[k-1]) / dx^2
inline void laplacian_u(std::span<const double> u, double dx, std::span<double> out) {
  const std::size_t n = u.size();
  if (n < 2) throw std::invalid_argument("laplacian_u: need at least 2 nodes");
  if (out.size() != n) throw std::invalid_argument("laplacian_u: output size mismatch");
  const double s = 1.0 / (dx * dx);
  out[0] = (u[1] - u[0]) * s;
  for (std::size_t k = 1; k + 1 < n; ++k) out[k] = (u[k + 1] - 2.0 * u[k] + u[k - 1]) * s;
  out[n - 1] = (u[n - 2] - u[n - 1]) * s;
}

inline std::vector<double> laplacian_u(std::span<const double> u, double dx) {
  std::vector<double> out(u.size());
  laplacian_u(u, dx, out);
  return out;
}

/// Centered first difference. The first row closes with the physical inflow
/// value w(x=0) = w_inflow; the last row has no downstream neighbour and falls
/// back to the one-sided backward difference:
///   row 1: (w[2] - w_inflow) / (2 dx)
///   row k: (w[k+1] - w[k-1]) / (2 dx)
///   row n: (w[n] - w[n-1]) / dx
inline void gradient_w(std::span<const double> w, double w_inflow, double dx,
                       std::span<double> out) {
  const std::size_t n = w.size();
  if (n < 2) throw std::invalid_argument("gradient_w: need at least 2 nodes");
  if (out.size() != n) throw std::invalid_argument("gradient_w: output size mismatch");
  const double s = 1.0 / (2.0 * dx);
  out[0] = (w[1] - w_inflow) * s;
  for (std::size_t k = 1; k + 1 < n; ++k) out[k] = (w[k + 1] - w[k - 1]) * s;
  out[n - 1] = (w[n - 1] - w[n - 2]) / dx;
}

inline std::vector<double> gradient_w(std::span<const double> w, double w_inflow, double dx) {
  std::vector<double> out(w.size());
  gradient_w(w, w_inflow, dx, out);
  return out;
}

/// Cosine-series profile u0[k] = sum_n coeffs[n] * cos(pi * n * x_k). Mode 0
/// is the constant term. Slopes vanish at both domain ends, consistent with
/// the zero-flux closure of laplacian_u.
inline std::vector<double> fourier_initial_u(std::span<const double> coeffs,
                                             const SpatialGrid& grid) {
  std::vector<double> out(static_cast<std::size_t>(grid.n_x), 0.0);
  for (int k = 1; k <= grid.n_x; ++k) {
    const double x = grid.node(k);
    double acc = 0.0;
    for (std::size_t n = 0; n < coeffs.size(); ++n) {
      acc += coeffs[n] * std::cos(std::numbers::pi * static_cast<double>(n) * x);
    }
    out[static_cast<std::size_t>(k - 1)] = acc;
  }
  return out;
}

}  // namespace packcool
