#ifndef ODEC_MATRIX_HPP
#define ODEC_MATRIX_HPP

#include <Eigen/Dense>

#include "odec/util.hpp"

namespace odec {

// Dense double-precision matrix, row-major storage. Row-major is the declared
// layout of every tensor in the file formats, so data() can be serialized
// directly.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

bool all_finite(const Matrix& m);
bool all_finite(const Vector& v);

// Thin SVD triplet: m = left * diag(singular) * right^T.
struct SvdResult {
  Matrix left;      // orthonormal columns
  Vector singular;  // nonincreasing, nonnegative
  Matrix right;     // orthonormal columns
};

// Thin SVD with a deterministic sign convention: the largest-magnitude
// component of each left singular vector is made positive.
SvdResult svd(const Matrix& m);

// First k singular triplets of a previously computed decomposition.
SvdResult truncate_svd(const SvdResult& s, Index k);

// Moore-Penrose pseudoinverse via SVD with a relative rank cutoff.
Matrix pseudo_inverse(const Matrix& m);

// Solve a x = b for square a. Rejects systems whose condition estimate
// exceeds 1e12; such systems arise from degenerate DEIM point selections.
Matrix solve_linear(const Matrix& a, const Matrix& b);

// 2-norm condition estimate (ratio of extreme singular values).
double condition_estimate(const Matrix& a);

// Numerical rank: count of singular values above max(rows,cols)*eps*sigma_1.
Index numerical_rank(const Matrix& m);
Index numerical_rank(const SvdResult& s, Index rows, Index cols);

}  // namespace odec

#endif
