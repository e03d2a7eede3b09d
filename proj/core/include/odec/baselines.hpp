#ifndef ODEC_BASELINES_HPP
#define ODEC_BASELINES_HPP

#include "odec/dataset.hpp"
#include "odec/layers.hpp"

namespace odec {

// Weight matrix factored into two consecutive linear maps; activation and
// bias apply only after the composed product. Evaluates all n activations.
class SvdTruncatedBlock final : public OdeSystem {
 public:
  Matrix first;   // Sigma_k Psi_k^T, k x n
  Matrix second;  // Phi_k, n x k
  Vector bias;
  std::optional<Matrix> input_matrix;
  Activation activation = Activation::Tanh;

  Index dim() const override { return second.rows(); }
  Vector rhs(const Vector& x, const Vector* u) const override;
  Vector activation_values(const Vector& x) const override;
  Index activation_count() const override { return second.rows(); }
};

SvdTruncatedBlock svd_truncate_block(const OdeBlock& block, Index k);

// Model with the ODE block's weight matrix replaced by its rank-k
// factorization.
ModelSpec svd_truncate_model(const ModelSpec& model, Index k);

enum class ApozMode {
  ZeroFraction,  // average percent of zeros; high score = prune first
  AbsMagnitude   // mean |activation|; high score = keep (tanh adaptation)
};

std::string to_string(ApozMode m);
ApozMode apoz_mode_from_string(const std::string& s);

struct ApozScores {
  Vector scores;  // per neuron, semantics per mode
  ApozMode mode = ApozMode::AbsMagnitude;

  // Uniform keep-priority scale: higher = more important.
  Vector importance() const;
};

// Zero fraction per neuron over an observations matrix
// (neurons x (examples * feature-map positions)).
Vector apoz_from_activations(const Matrix& observations);

// Scores computed from the ODE block's final-timestep activation values over
// the first sample_limit items (training split).
ApozScores apoz_scores(const ModelSpec& model, const Dataset& data, long sample_limit,
                       ApozMode mode = ApozMode::AbsMagnitude);

// Keeps the top-keep neurons (ties to the lower index): removes rows AND the
// matching columns of A, rows of b and Z, and adjusts the neighbors — linear
// neighbors shrink, nonlinear followers get a scatter adapter back to the
// original indices.
ModelSpec apoz_prune(const ModelSpec& model, const ApozScores& scores, Index keep);

}  // namespace odec

#endif
