#ifndef ODEC_MOR_HPP
#define ODEC_MOR_HPP

#include "odec/layers.hpp"
#include "odec/snapshots.hpp"

namespace odec {

// Greedy interpolation point set for a nonlinearity basis. points holds
// m + o distinct 0-based indices in selection order; basis is U_m.
struct DeimSelection {
  std::vector<Index> points;
  Matrix basis;  // U_m, n x m
  Index oversamples = 0;

  Index m() const { return basis.cols(); }
  Matrix selection_matrix() const;                 // P, n x (m+o)
  Matrix sampled_basis() const;                    // P^T U_m, (m+o) x m
  void validate() const;
};

// Greedy residual-argmax point selection; requires linearly independent
// columns. Ties break to the lowest index.
DeimSelection deim_select(const Matrix& basis);

// Oversampled selection: the first m points follow the plain greedy; each of
// the o extra points maximizes the least-squares residual of its candidate
// row of U against the span of the already-selected rows. o = 0 is exactly
// deim_select.
DeimSelection odeim_select(const Matrix& basis, Index oversamples);

// x~'(t) = N f(A_m x~ + b_m) + Z~ u(t): the projected block evaluates only
// m + o nonlinearities per step.
class ReducedOdeBlock final : public OdeSystem {
 public:
  Matrix sampled_weights;              // A_m = rows p of A V_k, (m+o) x k
  Vector sampled_bias;                 // b_m = b[p]
  std::optional<Matrix> input_matrix;  // Z~ = V_k^T Z, k x i
  Matrix interpolation;                // N, k x (m+o)
  Activation activation = Activation::Tanh;

  Index dim() const override { return interpolation.rows(); }
  Vector rhs(const Vector& x, const Vector* u) const override;
  Vector activation_values(const Vector& x) const override;
  Index activation_count() const override { return sampled_weights.rows(); }
};

struct MorArtifacts {
  Matrix pod_basis;  // V_k
  DeimSelection selection;
  Matrix interpolation;  // N = V_k^T U_m (P^T U_m)^{-1 or +}
};

// N via the exact inverse for o = 0, the Moore-Penrose pseudoinverse
// otherwise. Rejects sampled bases with condition estimate above 1e12.
Matrix interpolation_matrix(const Matrix& pod_basis, const DeimSelection& selection);

ReducedOdeBlock assemble_rom(const OdeBlock& block, const Matrix& pod_basis,
                             const DeimSelection& selection);

// Replaces the model's ODE layer with {project-in, reduced block,
// project-out}. With fold = true, a projection is multiplied into the
// adjacent layer when that layer is linear; otherwise an explicit projection
// layer is inserted. Rank shortfalls of the snapshot matrices are rejected
// by name.
ModelSpec reduce_model(const ModelSpec& model, const SnapshotSet& snapshots, Index k, Index m,
                       Index o, bool fold);

// Euclidean DEIM bound ||(P^T U)^{-1}||_2 * ||(I - U U^T) f||_2 (plain DEIM
// only; rejects oversampled selections).
double deim_error_bound(const Matrix& basis, const DeimSelection& selection,
                        const Vector& f_sample);

// U (P^T U)^{-1 or +} P^T f — the interpolated approximation of f.
Vector deim_approximate(const DeimSelection& selection, const Vector& f);

}  // namespace odec

#endif
