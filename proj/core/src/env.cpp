#include "packcool/env.hpp"

#include <cmath>
#include <string>

#include "packcool/csv.hpp"
#include "packcool/rng.hpp"
#include "packcool/svg.hpp"

namespace packcool {

long EnvConfig::episode_steps() const { return std::lround(horizon_time / dt); }

void EnvConfig::validate() const {
  if (n_x < 2) throw std::invalid_argument("EnvConfig: n_x must be >= 2");
  if (!(dx > 0.0)) throw std::invalid_argument("EnvConfig: dx must be positive");
  if (!(dt > 0.0)) throw std::invalid_argument("EnvConfig: dt must be positive");
  if (!(resistance > 0.0)) throw std::invalid_argument("EnvConfig: resistance must be positive");
  if (dx < dt)
    throw std::invalid_argument(
        "EnvConfig: dx must be >= dt so that sigma*dt <= dx for every sigma in [0,1]");
  if (!(horizon_time > 0.0))
    throw std::invalid_argument("EnvConfig: horizon_time must be positive");
  const double steps = horizon_time / dt;
  if (std::abs(steps - std::round(steps)) > 1e-6 * std::max(1.0, steps) || std::round(steps) < 1.0)
    throw std::invalid_argument("EnvConfig: horizon_time must be a positive multiple of dt");
  if (newton_iters < 1) throw std::invalid_argument("EnvConfig: newton_iters must be >= 1");
  if (n_fourier < 0) throw std::invalid_argument("EnvConfig: n_fourier must be >= 0");
  if (coeff_high < coeff_low)
    throw std::invalid_argument("EnvConfig: coeff_high must be >= coeff_low");
}

void TrajectoryBuffer::clear() {
  times.clear();
  sigmas.clear();
  u_history.clear();
  w_history.clear();
}

NumericalBlowup::NumericalBlowup(long step_index)
    : std::runtime_error("solver produced non-finite values at step " +
                         std::to_string(step_index)),
      step_index_(step_index) {}

double map_action(double a) {
  if (a < -1.0) a = -1.0;
  if (a > 1.0) a = 1.0;
  return (a + 1.0) / 2.0;
}

double reward(std::span<const double> u_next, double dx) {
  double s = 0.0;
  for (double v : u_next) s += v * v;
  return -dx * s;
}

ImplicitStepper::ImplicitStepper(const EnvConfig& config)
    : cfg_(config),
      jac_(2 * config.n_x, 2, 2),
      z_(2 * static_cast<std::size_t>(config.n_x)),
      rhs_(z_.size()),
      f_(z_.size()),
      zu_(static_cast<std::size_t>(config.n_x)),
      lap_(zu_.size()) {
  cfg_.validate();
}

void ImplicitStepper::advance(GridState& state, double sigma) {
  const std::size_t n = static_cast<std::size_t>(cfg_.n_x);
  if (state.u.size() != n || state.w.size() != n)
    throw std::invalid_argument("ImplicitStepper: state size does not match config");
  if (!(sigma >= 0.0 && sigma <= 1.0))
    throw std::invalid_argument("ImplicitStepper: sigma outside [0,1]");

  const double dt = cfg_.dt;
  const double idt = 1.0 / dt;
  const double cpl = cfg_.enable_coupling ? 1.0 / (2.0 * cfg_.resistance) : 0.0;
  const double sgn = cfg_.diffusion_mode == DiffusionMode::kStabilizing ? 1.0 : -1.0;
  const double hd = 0.5 * sgn * cfg_.diffusivity;
  const double theta = sigma * dt / cfg_.dx;
  const double s2 = 1.0 / (cfg_.dx * cfg_.dx);

  // Right-hand side A z(t) + 1/2 h(z(t)). Fluid rows are written at the
  // characteristic foot, so the transport itself contributes no unknowns.
  laplacian_u(state.u, cfg_.dx, lap_);
  for (std::size_t i = 0; i < n; ++i) {
    const double u0 = state.u[i];
    const double w0 = state.w[i];
    const double src = cfg_.enable_source ? std::exp(0.1 * u0) : 0.0;
    rhs_[2 * i] = (idt - cpl) * u0 + hd * lap_[i] + cpl * w0 + 0.5 * src;
    const double u_up = i > 0 ? state.u[i - 1] : state.u[0];
    const double w_up = i > 0 ? state.w[i - 1] : cfg_.inflow_temp;
    const double u_foot = (1.0 - theta) * u0 + theta * u_up;
    const double w_foot = (1.0 - theta) * w0 + theta * w_up;
    rhs_[2 * i + 1] = (idt - cpl) * w_foot + cpl * u_foot;
  }

  for (std::size_t i = 0; i < n; ++i) {
    z_[2 * i] = state.u[i];
    z_[2 * i + 1] = state.w[i];
  }

  // Fixed iteration count, no early exit: the step must cost the same work
  // on every call so that runs are exactly reproducible timing aside.
  for (int iter = 0; iter < cfg_.newton_iters; ++iter) {
    for (std::size_t i = 0; i < n; ++i) zu_[i] = z_[2 * i];
    laplacian_u(zu_, cfg_.dx, lap_);
    for (std::size_t i = 0; i < n; ++i) {
      const double u1 = z_[2 * i];
      const double w1 = z_[2 * i + 1];
      const double src = cfg_.enable_source ? std::exp(0.1 * u1) : 0.0;
      f_[2 * i] = (idt + cpl) * u1 - hd * lap_[i] - cpl * w1 - 0.5 * src - rhs_[2 * i];
      f_[2 * i + 1] = (idt + cpl) * w1 - cpl * u1 - rhs_[2 * i + 1];
    }

    // factor() works in place, so the Jacobian bands are rebuilt every pass
    jac_.zero();
    for (std::size_t i = 0; i < n; ++i) {
      const int ru = static_cast<int>(2 * i);
      const int rw = ru + 1;
      const double lc = (i == 0 || i == n - 1) ? -s2 : -2.0 * s2;
      const double dsrc = cfg_.enable_source ? 0.1 * std::exp(0.1 * z_[2 * i]) : 0.0;
      jac_.at(ru, ru) = (idt + cpl) - hd * lc - 0.5 * dsrc;
      if (i > 0) jac_.at(ru, ru - 2) = -hd * s2;
      if (i + 1 < n) jac_.at(ru, ru + 2) = -hd * s2;
      jac_.at(ru, rw) = -cpl;
      jac_.at(rw, rw) = idt + cpl;
      jac_.at(rw, ru) = -cpl;
    }
    jac_.factor();
    jac_.solve(f_);
    for (std::size_t i = 0; i < z_.size(); ++i) z_[i] -= f_[i];
  }

  for (double v : z_) {
    if (!std::isfinite(v)) throw NumericalBlowup(std::lround(state.t / dt));
  }
  for (std::size_t i = 0; i < n; ++i) {
    state.u[i] = z_[2 * i];
    state.w[i] = z_[2 * i + 1];
  }
  state.t += dt;
}

GridState solver_step(const GridState& state, double sigma, const EnvConfig& config) {
  ImplicitStepper stepper(config);
  GridState out = state;
  stepper.advance(out, sigma);
  return out;
}

PackCoolingEnv::PackCoolingEnv(const EnvConfig& config) : cfg_(config), stepper_(config) {
  cfg_.validate();
  episode_steps_ = cfg_.episode_steps();
}

std::vector<double> PackCoolingEnv::reset(std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> coeffs(static_cast<std::size_t>(cfg_.n_fourier) + 1);
  for (double& c : coeffs) c = rng.uniform(cfg_.coeff_low, cfg_.coeff_high);
  const SpatialGrid grid{cfg_.n_x, cfg_.dx};
  state_.u = fourier_initial_u(coeffs, grid);
  state_.w.assign(static_cast<std::size_t>(cfg_.n_x), cfg_.inflow_temp);
  state_.t = 0.0;
  step_count_ = 0;
  live_ = true;
  traj_.clear();
  return observation();
}

StepResult PackCoolingEnv::step(double a) {
  if (!live_) throw std::logic_error("PackCoolingEnv: step before reset");
  if (step_count_ >= episode_steps_) throw std::logic_error("PackCoolingEnv: episode is over");

  const double sigma = map_action(a);
  const double t_action = state_.t;
  stepper_.advance(state_, sigma);
  ++step_count_;

  StepResult res;
  res.sigma = sigma;
  res.reward = reward(state_.u, cfg_.dx);
  res.done = step_count_ >= episode_steps_;
  res.observation = observation();

  traj_.times.push_back(t_action);
  traj_.sigmas.push_back(sigma);
  traj_.u_history.push_back(state_.u);
  traj_.w_history.push_back(state_.w);
  return res;
}

std::vector<double> PackCoolingEnv::observation() const {
  std::vector<double> obs;
  obs.reserve(state_.u.size() + state_.w.size());
  obs.insert(obs.end(), state_.u.begin(), state_.u.end());
  obs.insert(obs.end(), state_.w.begin(), state_.w.end());
  return obs;
}

void PackCoolingEnv::set_state(const GridState& s) {
  if (s.u.size() != static_cast<std::size_t>(cfg_.n_x) || s.w.size() != s.u.size())
    throw std::invalid_argument("PackCoolingEnv: state size does not match config");
  state_ = s;
  live_ = true;
}

void dump_trajectory(const TrajectoryBuffer& buffer, const std::filesystem::path& out_dir) {
  if (buffer.size() == 0) throw std::invalid_argument("dump_trajectory: empty buffer");
  std::filesystem::create_directories(out_dir);

  std::vector<std::vector<double>> sigma_rows(buffer.size());
  for (std::size_t i = 0; i < buffer.size(); ++i) {
    sigma_rows[i] = {buffer.times[i], buffer.sigmas[i]};
  }
  write_csv(out_dir / "sigma.csv", {"t", "sigma"}, sigma_rows);

  const std::size_t n = buffer.u_history.front().size();
  std::vector<std::string> u_header(n), w_header(n);
  for (std::size_t k = 0; k < n; ++k) {
    u_header[k] = "u_" + std::to_string(k + 1);
    w_header[k] = "w_" + std::to_string(k + 1);
  }
  write_csv(out_dir / "u.csv", u_header, buffer.u_history);
  write_csv(out_dir / "w.csv", w_header, buffer.w_history);

  SvgSeries s;
  s.label = "sigma";
  s.x = buffer.times;
  s.y = buffer.sigmas;
  write_line_svg(out_dir / "sigma.svg", {s}, {"transport speed", "t", "sigma"});
  write_heatmap_svg(out_dir / "u.svg", buffer.u_history, {"pack temperature", "node", "step"});
  write_heatmap_svg(out_dir / "w.svg", buffer.w_history, {"fluid temperature", "node", "step"});
}

}  // namespace packcool
