#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace oracles {

SymEigen jacobi_eigen_sym(const Matrix& s) {
  const Index n = s.rows();
  Matrix a = s;
  Matrix v = Matrix::Identity(n, n);

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Index p = 0; p < n; ++p)
      for (Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-28) break;

    for (Index p = 0; p < n; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(1.0 + theta * theta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double sn = t * c;
        for (Index i = 0; i < n; ++i) {
          const double aip = a(i, p), aiq = a(i, q);
          a(i, p) = c * aip - sn * aiq;
          a(i, q) = sn * aip + c * aiq;
        }
        for (Index i = 0; i < n; ++i) {
          const double api = a(p, i), aqi = a(q, i);
          a(p, i) = c * api - sn * aqi;
          a(q, i) = sn * api + c * aqi;
        }
        for (Index i = 0; i < n; ++i) {
          const double vip = v(i, p), viq = v(i, q);
          v(i, p) = c * vip - sn * viq;
          v(i, q) = sn * vip + c * viq;
        }
      }
    }
  }

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index x, Index y) { return a(x, x) > a(y, y); });

  SymEigen out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Index j = 0; j < n; ++j) {
    out.values(j) = a(order[static_cast<std::size_t>(j)], order[static_cast<std::size_t>(j)]);
    out.vectors.col(j) = v.col(order[static_cast<std::size_t>(j)]);
  }
  return out;
}

GramSvd gram_svd(const Matrix& m) {
  const Matrix gram = m.transpose() * m;
  const SymEigen eig = jacobi_eigen_sym(gram);

  GramSvd out;
  out.singular.resize(eig.values.size());
  for (Index i = 0; i < eig.values.size(); ++i)
    out.singular(i) = std::sqrt(std::max(0.0, eig.values(i)));
  out.right = eig.vectors;
  out.left.resize(m.rows(), eig.values.size());
  for (Index i = 0; i < eig.values.size(); ++i) {
    if (out.singular(i) > 1e-12) {
      out.left.col(i) = m * out.right.col(i) / out.singular(i);
    } else {
      out.left.col(i).setZero();
    }
  }
  return out;
}

Vector gauss_solve(Matrix a, Vector b) {
  const Index n = a.rows();
  for (Index col = 0; col < n; ++col) {
    Index pivot = col;
    for (Index r = col + 1; r < n; ++r)
      if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
    if (pivot != col) {
      a.row(col).swap(a.row(pivot));
      std::swap(b(col), b(pivot));
    }
    for (Index r = col + 1; r < n; ++r) {
      const double f = a(r, col) / a(col, col);
      a.row(r) -= f * a.row(col);
      b(r) -= f * b(col);
    }
  }
  Vector x(n);
  for (Index r = n - 1; r >= 0; --r) {
    double acc = b(r);
    for (Index c = r + 1; c < n; ++c) acc -= a(r, c) * x(c);
    x(r) = acc / a(r, r);
  }
  return x;
}

Matrix expm(const Matrix& a) {
  const Index n = a.rows();
  double norm = 0.0;
  for (Index r = 0; r < n; ++r) norm = std::max(norm, a.row(r).cwiseAbs().sum());
  int squarings = 0;
  while (norm > 0.5) {
    norm /= 2.0;
    ++squarings;
  }
  const Matrix scaled = a / std::pow(2.0, squarings);

  Matrix result = Matrix::Identity(n, n);
  Matrix term = Matrix::Identity(n, n);
  for (int k = 1; k <= 24; ++k) {
    term = Matrix(term * scaled) / static_cast<double>(k);
    result += term;
  }
  for (int s = 0; s < squarings; ++s) result = Matrix(result * result);
  return result;
}

Vector direct_convolution(const std::vector<std::vector<Matrix>>& kernels, const Vector& image,
                          Index c_in, Index h, Index w, const Vector& channel_bias) {
  const auto c_out = static_cast<Index>(kernels.size());
  const Index side = kernels[0][0].rows();
  const Index pad = (side - 1) / 2;
  Vector out(c_out * h * w);
  for (Index co = 0; co < c_out; ++co) {
    for (Index r = 0; r < h; ++r) {
      for (Index c = 0; c < w; ++c) {
        double acc = channel_bias(co);
        for (Index ci = 0; ci < c_in; ++ci) {
          for (Index dr = 0; dr < side; ++dr) {
            for (Index dc = 0; dc < side; ++dc) {
              const Index rr = r + dr - pad;
              const Index cc = c + dc - pad;
              if (rr < 0 || rr >= h || cc < 0 || cc >= w) continue;
              acc += kernels[static_cast<std::size_t>(co)][static_cast<std::size_t>(ci)](dr, dc) *
                     image(ci * h * w + rr * w + cc);
            }
          }
        }
        out(co * h * w + r * w + c) = acc;
      }
    }
  }
  return out;
}

std::vector<Index> deim_points_reference(const Matrix& basis) {
  const Index m = basis.cols();
  std::vector<Index> points;

  auto argmax_abs = [](const Vector& v) {
    Index best = 0;
    for (Index i = 1; i < v.size(); ++i)
      if (std::abs(v(i)) > std::abs(v(best))) best = i;
    return best;
  };

  points.push_back(argmax_abs(basis.col(0)));
  for (Index l = 1; l < m; ++l) {
    Matrix pu(l, l);
    Vector pul(l);
    for (Index j = 0; j < l; ++j) {
      for (Index c = 0; c < l; ++c) pu(j, c) = basis(points[static_cast<std::size_t>(j)], c);
      pul(j) = basis(points[static_cast<std::size_t>(j)], l);
    }
    const Vector coeffs = gauss_solve(pu, pul);
    const Vector residual = basis.col(l) - basis.leftCols(l) * coeffs;
    points.push_back(argmax_abs(residual));
  }
  return points;
}

}  // namespace oracles
