#ifndef ODEC_TESTS_TEST_UTIL_HPP
#define ODEC_TESTS_TEST_UTIL_HPP

#include "odec/matrix.hpp"
#include "odec/util.hpp"

namespace testutil {

using odec::Index;
using odec::Matrix;
using odec::Vector;

inline Matrix random_matrix(odec::Rng& rng, Index rows, Index cols, double scale = 1.0) {
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) m(r, c) = scale * rng.normal();
  return m;
}

inline Vector random_vector(odec::Rng& rng, Index n, double scale = 1.0) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = scale * rng.normal();
  return v;
}

// Random matrix with orthonormal columns (Gram-Schmidt).
inline Matrix random_orthonormal(odec::Rng& rng, Index rows, Index cols) {
  Matrix q = random_matrix(rng, rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < j; ++i) q.col(j) -= q.col(i).dot(q.col(j)) * q.col(i);
    q.col(j).normalize();
  }
  return q;
}

}  // namespace testutil

#endif
