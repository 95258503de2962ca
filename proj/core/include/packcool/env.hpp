#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include "packcool/banded.hpp"
#include "packcool/grid.hpp"

namespace packcool {

// Sign of the diffusion term in the pack equation. kStabilizing integrates
// u_t - D u_xx = ..., the well-posed orientation; kAntidiffusive flips the
// sign, which amplifies high wavenumbers and is kept only as a switch for
// side-by-side comparison.
enum class DiffusionMode { kStabilizing, kAntidiffusive };

struct EnvConfig {
  int n_x = 100;
  double dx = 0.01;
  double dt = 0.01;
  double diffusivity = 0.01;
  double resistance = 2.0;
  double inflow_temp = -5.0;
  int n_fourier = 9;
  double coeff_low = -2.0;
  double coeff_high = 2.0;
  double horizon_time = 10.0;
  int newton_iters = 10;
  DiffusionMode diffusion_mode = DiffusionMode::kStabilizing;
  std::uint64_t seed = 0;
  // Physics switches for controlled experiments: drop the e^{0.1u} heating
  // term or the (w-u)/R exchange term entirely.
  bool enable_source = true;
  bool enable_coupling = true;

  long episode_steps() const;
  void validate() const;
};

struct StepResult {
  std::vector<double> observation;
  double reward = 0.0;
  bool done = false;
  double sigma = 0.0;
};

struct TrajectoryBuffer {
  std::vector<double> times;
  std::vector<double> sigmas;
  std::vector<std::vector<double>> u_history;
  std::vector<std::vector<double>> w_history;

  std::size_t size() const { return times.size(); }
  void clear();
};

/// Thrown when a solver step produces non-finite values. Carries the index of
/// the step that failed (0-based from episode start).
class NumericalBlowup : public std::runtime_error {
 public:
  explicit NumericalBlowup(long step_index);
  long step_index() const { return step_index_; }

 private:
  long step_index_;
};

/// Control mapping: clamp a to [-1, 1], then sigma = (a+1)/2 in [0, 1].
double map_action(double a);

/// Reward after a step: -dx * sum_k u_next[k]^2. Reads only the pack field.
double reward(std::span<const double> u_next, double dx);

/// One implicit step of the coupled system. The pack rows use trapezoidal
/// averaging of diffusion, exchange, and the e^{0.1u} source; the fluid rows
/// trace the transport characteristic back to x_k - sigma*dt, interpolate the
/// foot value linearly (the inflow temperature supplies x = 0), and average
/// the exchange term between foot and arrival. The resulting nonlinear system
///   A+ z(t+dt) - 1/2 h(z(t+dt)) = A z(t) + 1/2 h(z(t))
/// is solved with a fixed number of Newton-Raphson iterations (no early
/// exit), each factoring the banded Jacobian A+ - 1/2 diag(h'(z)).
GridState solver_step(const GridState& state, double sigma, const EnvConfig& config);

/// Workspace-owning form of solver_step for tight loops: the banded matrix,
/// right-hand side, and scratch vectors are allocated once.
class ImplicitStepper {
 public:
  explicit ImplicitStepper(const EnvConfig& config);

  /// Advances state by one dt in place.
  void advance(GridState& state, double sigma);

 private:
  EnvConfig cfg_;
  BandedMatrix jac_;
  std::vector<double> z_;     // interleaved (u_1, w_1, u_2, w_2, ...)
  std::vector<double> rhs_;
  std::vector<double> f_;
  std::vector<double> zu_;    // de-interleaved pack field for the laplacian
  std::vector<double> lap_;
};

class PackCoolingEnv {
 public:
  explicit PackCoolingEnv(const EnvConfig& config);

  /// Draws a fresh cosine-series pack profile from the seed, sets the fluid
  /// to the inflow temperature, and clears the trajectory buffer.
  std::vector<double> reset(std::uint64_t seed);

  /// Applies one action. Throws std::logic_error before the first reset or
  /// after the episode has ended, NumericalBlowup if the solve diverges.
  StepResult step(double a);

  bool done() const { return live_ && step_count_ >= episode_steps_; }
  long step_count() const { return step_count_; }
  long episode_steps() const { return episode_steps_; }
  const EnvConfig& config() const { return cfg_; }
  const GridState& state() const { return state_; }
  const TrajectoryBuffer& trajectory() const { return traj_; }
  std::vector<double> observation() const;

  /// Replaces the grid state without touching the episode clock. Intended
  /// for probing the stepper from constructed states.
  void set_state(const GridState& s);

 private:
  EnvConfig cfg_;
  ImplicitStepper stepper_;
  GridState state_;
  TrajectoryBuffer traj_;
  long episode_steps_ = 0;
  long step_count_ = 0;
  bool live_ = false;
};

/// Writes sigma.csv, u.csv, w.csv and matching SVG renders (sigma line plot,
/// u and w heatmaps) into out_dir, creating it if needed.
void dump_trajectory(const TrajectoryBuffer& buffer, const std::filesystem::path& out_dir);

}  // namespace packcool
