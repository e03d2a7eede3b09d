#ifndef ODEC_ODE_HPP
#define ODEC_ODE_HPP

#include <optional>
#include <vector>

#include "odec/activation.hpp"
#include "odec/matrix.hpp"

namespace odec {

// Anything the fixed-step solvers can integrate. Implementations: the dense
// block of Eq-style x' = f(Ax+b) + Zu, its SVD-factored variant, and the
// POD-DEIM reduced block.
class OdeSystem {
 public:
  virtual ~OdeSystem() = default;

  virtual Index dim() const = 0;

  // Time derivative at state x with held input u (nullptr for autonomous).
  virtual Vector rhs(const Vector& x, const Vector* u) const = 0;

  // Nonlinearity outputs at state x (the f(Ax+b) values recorded as DEIM
  // snapshots). Does not bump the activation counter.
  virtual Vector activation_values(const Vector& x) const = 0;

  // Number of scalar activation evaluations one rhs call performs.
  virtual Index activation_count() const = 0;
};

// x'(t) = f(A x(t) + b) + Z u(t). Z absent means autonomous.
class OdeBlock final : public OdeSystem {
 public:
  Matrix weights;                      // A, n x n
  Vector bias;                         // b
  std::optional<Matrix> input_matrix;  // Z, n x i
  Activation activation = Activation::Tanh;

  Index dim() const override { return weights.rows(); }
  Vector rhs(const Vector& x, const Vector* u) const override;
  Vector activation_values(const Vector& x) const override;
  Index activation_count() const override { return weights.rows(); }

  void validate() const;
};

enum class SolverMethod { Euler, Rk4 };

std::string to_string(SolverMethod m);
SolverMethod solver_method_from_string(const std::string& s);

struct SolverConfig {
  SolverMethod method = SolverMethod::Rk4;
  double t0 = 0.0;
  double t_end = 1.0;
  double dt = 0.1;

  // Whole number of steps; rejects spans that are not an integer multiple
  // of dt (to 1e-9).
  long steps() const;
};

// Piecewise-constant input: column j of samples holds on
// [j*hold, (j+1)*hold). Queries clamp to the last sample.
struct InputSignal {
  Matrix samples;  // i x count
  double hold = 0.0;

  Vector at(double t_rel) const;
  double span() const { return hold * static_cast<double>(samples.cols()); }
};

struct Trajectory {
  std::vector<double> times;
  Matrix states;       // dim x recorded columns
  Matrix activations;  // activation_count x recorded columns
  Vector final_state;  // x(t_end), regardless of the recording stride
};

Vector step_euler(const OdeSystem& sys, const Vector& x, const Vector* u, double dt);
Vector step_rk4(const OdeSystem& sys, const Vector& x, const Vector* u, double dt);

// Fixed-step integration from x0. Inputs are sample-and-hold: every stage of
// a step sees the value at the step's start time. With record_stride = s,
// step indices 0, s, 2s, ... are stored. Throws DivergenceError (with the
// step index) when a state entry leaves [-1e12, 1e12] or goes non-finite.
Trajectory integrate(const OdeSystem& sys, const Vector& x0, const InputSignal* signal,
                     const SolverConfig& cfg, std::optional<long> record_stride = std::nullopt);

}  // namespace odec

#endif
