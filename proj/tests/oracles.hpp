#ifndef ODEC_TESTS_ORACLES_HPP
#define ODEC_TESTS_ORACLES_HPP

// Independent oracle implementations for derived expected values. These
// deliberately avoid the library's numerical paths (no odec::svd, no
// odec::solve_linear) so the checks stay two-route.

#include <utility>
#include <vector>

#include "odec/matrix.hpp"

namespace oracles {

using odec::Index;
using odec::Matrix;
using odec::Vector;

// Cyclic Jacobi eigendecomposition of a symmetric matrix; eigenpairs sorted
// by descending eigenvalue.
struct SymEigen {
  Vector values;
  Matrix vectors;  // columns
};
SymEigen jacobi_eigen_sym(const Matrix& s);

// SVD of m reconstructed from the eigendecomposition of the Gram matrix
// m^T m (singular values only trustworthy above ~sqrt(eps)*sigma_1).
struct GramSvd {
  Vector singular;
  Matrix left;
  Matrix right;
};
GramSvd gram_svd(const Matrix& m);

// Plain Gaussian elimination with partial pivoting.
Vector gauss_solve(Matrix a, Vector b);

// Matrix exponential by scaling-and-squaring on a Taylor series.
Matrix expm(const Matrix& a);

// Zero-padded same convolution evaluated directly over sliding windows.
// image is channel-major (c_in * h * w); kernels[co][ci] are odd squares.
Vector direct_convolution(const std::vector<std::vector<Matrix>>& kernels, const Vector& image,
                          Index c_in, Index h, Index w, const Vector& channel_bias);

// Straight-line transcription of the greedy interpolation-point loop, using
// gauss_solve. Returns 0-based indices.
std::vector<Index> deim_points_reference(const Matrix& basis);

}  // namespace oracles

#endif
