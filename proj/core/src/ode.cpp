#include "odec/ode.hpp"

#include <cmath>

namespace odec {

Vector OdeBlock::rhs(const Vector& x, const Vector* u) const {
  if (x.size() != weights.cols())
    fail("OdeBlock::rhs: state size ", x.size(), " does not match weights ",
         weights.rows(), "x", weights.cols());
  Vector out = apply_activation(activation, weights * x + bias);
  if (u != nullptr) {
    if (!input_matrix)
      fail("OdeBlock::rhs: input supplied but block has no input matrix");
    if (u->size() != input_matrix->cols())
      fail("OdeBlock::rhs: input size ", u->size(), " does not match Z columns ",
           input_matrix->cols());
    out += *input_matrix * *u;
  }
  return out;
}

Vector OdeBlock::activation_values(const Vector& x) const {
  return apply_activation(activation, weights * x + bias, /*count=*/false);
}

void OdeBlock::validate() const {
  if (weights.rows() != weights.cols())
    fail("OdeBlock: weights must be square, got ", weights.rows(), "x", weights.cols());
  if (bias.size() != weights.rows())
    fail("OdeBlock: bias length ", bias.size(), " does not match dimension ", weights.rows());
  if (input_matrix && input_matrix->rows() != weights.rows())
    fail("OdeBlock: input matrix rows ", input_matrix->rows(),
         " do not match dimension ", weights.rows());
}

std::string to_string(SolverMethod m) {
  return m == SolverMethod::Euler ? "euler" : "rk4";
}

SolverMethod solver_method_from_string(const std::string& s) {
  if (s == "euler") return SolverMethod::Euler;
  if (s == "rk4") return SolverMethod::Rk4;
  fail("unknown solver method: ", s);
}

long SolverConfig::steps() const {
  if (!(dt > 0.0)) fail("SolverConfig: dt must be positive, got ", dt);
  if (t_end < t0) fail("SolverConfig: t_end ", t_end, " before t0 ", t0);
  const double ratio = (t_end - t0) / dt;
  const long n = std::lround(ratio);
  if (std::abs(ratio - static_cast<double>(n)) > 1e-9)
    fail("SolverConfig: (t_end - t0)/dt = ", ratio, " is not a whole number of steps");
  return n;
}

Vector InputSignal::at(double t_rel) const {
  if (samples.cols() == 0) fail("InputSignal: empty signal");
  if (!(hold > 0.0)) fail("InputSignal: hold must be positive");
  auto idx = static_cast<Index>(std::floor(t_rel / hold + 1e-12));
  if (idx < 0) idx = 0;
  if (idx >= samples.cols()) idx = samples.cols() - 1;
  return samples.col(idx);
}

Vector step_euler(const OdeSystem& sys, const Vector& x, const Vector* u, double dt) {
  return x + dt * sys.rhs(x, u);
}

Vector step_rk4(const OdeSystem& sys, const Vector& x, const Vector* u, double dt) {
  const Vector k1 = sys.rhs(x, u);
  const Vector k2 = sys.rhs(x + 0.5 * dt * k1, u);
  const Vector k3 = sys.rhs(x + 0.5 * dt * k2, u);
  const Vector k4 = sys.rhs(x + dt * k3, u);
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

namespace {

constexpr double kDivergenceBound = 1e12;

void check_state(const Vector& x, long step) {
  for (Index i = 0; i < x.size(); ++i) {
    const double v = x(i);
    if (!std::isfinite(v) || std::abs(v) > kDivergenceBound)
      throw DivergenceError(
          concat("integration diverged at step ", step, " (state entry ", i,
                 " = ", v, ")"),
          step);
  }
}

}  // namespace

Trajectory integrate(const OdeSystem& sys, const Vector& x0, const InputSignal* signal,
                     const SolverConfig& cfg, std::optional<long> record_stride) {
  if (x0.size() != sys.dim())
    fail("integrate: initial state size ", x0.size(), " does not match system dimension ",
         sys.dim());
  const long steps = cfg.steps();
  if (record_stride && *record_stride < 1)
    fail("integrate: record stride must be >= 1, got ", *record_stride);
  if (signal != nullptr && signal->span() < (cfg.t_end - cfg.t0) - 1e-9)
    fail("integrate: input signal covers ", signal->span(), " but the span is ",
         cfg.t_end - cfg.t0);

  Trajectory traj;
  long recorded = 0;
  if (record_stride) {
    recorded = steps / *record_stride + 1;
    traj.states.resize(sys.dim(), recorded);
    traj.activations.resize(sys.activation_count(), recorded);
    traj.times.reserve(static_cast<std::size_t>(recorded));
  }

  Vector x = x0;
  check_state(x, 0);
  long written = 0;
  auto record = [&](long step, const Vector& state) {
    if (!record_stride || step % *record_stride != 0) return;
    traj.states.col(written) = state;
    traj.activations.col(written) = sys.activation_values(state);
    traj.times.push_back(cfg.t0 + static_cast<double>(step) * cfg.dt);
    ++written;
  };
  record(0, x);

  Vector u_hold;
  for (long step = 0; step < steps; ++step) {
    const double t = cfg.t0 + static_cast<double>(step) * cfg.dt;
    const Vector* u = nullptr;
    if (signal != nullptr) {
      u_hold = signal->at(t - cfg.t0);
      u = &u_hold;
    }
    x = cfg.method == SolverMethod::Euler ? step_euler(sys, x, u, cfg.dt)
                                          : step_rk4(sys, x, u, cfg.dt);
    check_state(x, step + 1);
    record(step + 1, x);
  }

  traj.final_state = x;
  return traj;
}

}  // namespace odec
