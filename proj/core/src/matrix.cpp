#include "odec/matrix.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <limits>

namespace odec {

bool all_finite(const Matrix& m) { return m.allFinite(); }
bool all_finite(const Vector& v) { return v.allFinite(); }

namespace {

// Flip signs so the largest-magnitude entry of each left vector is positive.
// Ties (same magnitude) resolve to the first such entry, so results are
// deterministic across runs.
void fix_signs(Matrix& left, Matrix& right) {
  for (Index j = 0; j < left.cols(); ++j) {
    Index imax = 0;
    double vmax = 0.0;
    for (Index i = 0; i < left.rows(); ++i) {
      double a = std::abs(left(i, j));
      if (a > vmax) {
        vmax = a;
        imax = i;
      }
    }
    if (left(imax, j) < 0.0) {
      left.col(j) = -left.col(j);
      if (j < right.cols()) right.col(j) = -right.col(j);
    }
  }
}

}  // namespace

SvdResult svd(const Matrix& m) {
  if (m.size() == 0) fail("svd: empty matrix");
  if (!all_finite(m)) fail("svd: input contains non-finite entries");

  SvdResult out;
  // Jacobi is more accurate on small problems; BDC scales to wide snapshot
  // matrices.
  if (std::min(m.rows(), m.cols()) <= 16) {
    Eigen::JacobiSVD<Matrix> dec(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    out.left = dec.matrixU();
    out.singular = dec.singularValues();
    out.right = dec.matrixV();
  } else {
    Eigen::BDCSVD<Matrix> dec(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    out.left = dec.matrixU();
    out.singular = dec.singularValues();
    out.right = dec.matrixV();
  }
  fix_signs(out.left, out.right);
  return out;
}

SvdResult truncate_svd(const SvdResult& s, Index k) {
  const Index r = s.singular.size();
  if (k < 1 || k > r)
    fail("truncate_svd: k=", k, " out of range [1, ", r, "]");
  SvdResult out;
  out.left = s.left.leftCols(k);
  out.singular = s.singular.head(k);
  out.right = s.right.leftCols(k);
  return out;
}

Matrix pseudo_inverse(const Matrix& m) {
  if (m.size() == 0) fail("pseudo_inverse: empty matrix");
  if (!all_finite(m)) fail("pseudo_inverse: input contains non-finite entries");
  SvdResult s = svd(m);
  const double tol = std::max(m.rows(), m.cols()) *
                     std::numeric_limits<double>::epsilon() * s.singular(0);
  Vector inv = Vector::Zero(s.singular.size());
  for (Index i = 0; i < s.singular.size(); ++i)
    if (s.singular(i) > tol) inv(i) = 1.0 / s.singular(i);
  return s.right * inv.asDiagonal() * s.left.transpose();
}

double condition_estimate(const Matrix& a) {
  Eigen::JacobiSVD<Matrix> dec(a);
  const Vector& sv = dec.singularValues();
  const double smin = sv(sv.size() - 1);
  if (smin == 0.0) return std::numeric_limits<double>::infinity();
  return sv(0) / smin;
}

Matrix solve_linear(const Matrix& a, const Matrix& b) {
  if (a.rows() != a.cols()) fail("solve_linear: matrix must be square, got ", a.rows(), "x", a.cols());
  if (a.rows() != b.rows())
    fail("solve_linear: dimension mismatch, a is ", a.rows(), "x", a.cols(), ", b has ", b.rows(), " rows");
  if (!all_finite(a) || !all_finite(b)) fail("solve_linear: non-finite entries");

  const double cond = condition_estimate(a);
  if (!(cond < 1e12))
    fail("solve_linear: singular or near-singular system (condition estimate ",
         cond, " > 1e12); DEIM point selection is degenerate");
  return Eigen::PartialPivLU<Eigen::MatrixXd>(a).solve(Eigen::MatrixXd(b));
}

Index numerical_rank(const SvdResult& s, Index rows, Index cols) {
  if (s.singular.size() == 0) return 0;
  const double tol = std::max(rows, cols) *
                     std::numeric_limits<double>::epsilon() * s.singular(0);
  Index r = 0;
  for (Index i = 0; i < s.singular.size(); ++i)
    if (s.singular(i) > tol) ++r;
  return r;
}

Index numerical_rank(const Matrix& m) {
  if (m.size() == 0) return 0;
  Eigen::BDCSVD<Matrix> dec(m);
  SvdResult s;
  s.singular = dec.singularValues();
  return numerical_rank(s, m.rows(), m.cols());
}

}  // namespace odec
