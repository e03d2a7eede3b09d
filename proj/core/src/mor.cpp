#include "odec/mor.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <set>

namespace odec {

void DeimSelection::validate() const {
  if (basis.cols() < 1) fail("deim selection: empty basis");
  if (static_cast<Index>(points.size()) != basis.cols() + oversamples)
    fail("deim selection: ", points.size(), " points but m+o = ",
         basis.cols() + oversamples);
  std::set<Index> seen;
  for (Index p : points) {
    if (p < 0 || p >= basis.rows()) fail("deim selection: point ", p, " out of range");
    if (!seen.insert(p).second) fail("deim selection: duplicate point ", p);
  }
}

Matrix DeimSelection::selection_matrix() const {
  Matrix p = Matrix::Zero(basis.rows(), static_cast<Index>(points.size()));
  for (std::size_t j = 0; j < points.size(); ++j) p(points[j], static_cast<Index>(j)) = 1.0;
  return p;
}

Matrix DeimSelection::sampled_basis() const {
  Matrix s(static_cast<Index>(points.size()), basis.cols());
  for (std::size_t j = 0; j < points.size(); ++j) s.row(static_cast<Index>(j)) = basis.row(points[j]);
  return s;
}

namespace {

// argmax of |v|, lowest index on ties
Index argmax_abs(const Vector& v) {
  Index best = 0;
  double vmax = std::abs(v(0));
  for (Index i = 1; i < v.size(); ++i) {
    const double a = std::abs(v(i));
    if (a > vmax) {
      vmax = a;
      best = i;
    }
  }
  return best;
}

Index argmax_abs_excluding(const Vector& v, const std::set<Index>& excluded) {
  Index best = -1;
  double vmax = -1.0;
  for (Index i = 0; i < v.size(); ++i) {
    if (excluded.count(i)) continue;
    const double a = std::abs(v(i));
    if (a > vmax) {
      vmax = a;
      best = i;
    }
  }
  if (best < 0) fail("odeim: no candidate indices left");
  return best;
}

}  // namespace

DeimSelection deim_select(const Matrix& basis) {
  if (basis.size() == 0) fail("deim_select: empty basis");
  if (!all_finite(basis)) fail("deim_select: non-finite basis entries");
  const Index n = basis.rows();
  const Index m = basis.cols();
  if (m > n) fail("deim_select: more basis vectors (", m, ") than dimensions (", n, ")");
  if (numerical_rank(basis) < m)
    fail("deim_select: basis columns are not linearly independent (rank ",
         numerical_rank(basis), " < ", m, ")");

  DeimSelection sel;
  sel.basis = basis;
  sel.points.push_back(argmax_abs(basis.col(0)));

  for (Index l = 1; l < m; ++l) {
    const Matrix u_sel = basis.leftCols(l);
    Matrix pu(l, l);
    Vector pul(l);
    for (Index j = 0; j < l; ++j) {
      pu.row(j) = u_sel.row(sel.points[static_cast<std::size_t>(j)]);
      pul(j) = basis(sel.points[static_cast<std::size_t>(j)], l);
    }
    Matrix c;
    try {
      c = solve_linear(pu, pul);
    } catch (const Error& e) {
      fail("deim_select: degenerate selection at iteration ", l + 1, ": ", e.what());
    }
    const Vector residual = basis.col(l) - u_sel * c.col(0);
    const Index p = argmax_abs(residual);
    if (std::find(sel.points.begin(), sel.points.end(), p) != sel.points.end())
      fail("deim_select: degenerate selection at iteration ", l + 1,
           ": repeated index ", p);
    sel.points.push_back(p);
  }
  sel.validate();
  return sel;
}

DeimSelection odeim_select(const Matrix& basis, Index oversamples) {
  if (oversamples < 0) fail("odeim_select: oversamples must be >= 0");
  if (basis.cols() + oversamples > basis.rows())
    fail("odeim_select: m + o = ", basis.cols() + oversamples, " exceeds dimension ",
         basis.rows());
  DeimSelection sel = deim_select(basis);
  if (oversamples == 0) return sel;

  // Each extra row maximizes the smallest singular value of the sampled
  // basis P^T U. That value is the reciprocal of the DEIM error constant
  // ||(P^T U)^+||_2, so the greedy directly attacks the quantity the
  // oversampling is meant to shrink. Ties go to the lowest index.
  std::set<Index> chosen(sel.points.begin(), sel.points.end());
  for (Index extra = 0; extra < oversamples; ++extra) {
    Matrix stacked(static_cast<Index>(sel.points.size()) + 1, basis.cols());
    for (std::size_t j = 0; j < sel.points.size(); ++j)
      stacked.row(static_cast<Index>(j)) = basis.row(sel.points[j]);

    Vector gain = Vector::Constant(basis.rows(), -1.0);
    for (Index i = 0; i < basis.rows(); ++i) {
      if (chosen.count(i)) continue;
      stacked.row(stacked.rows() - 1) = basis.row(i);
      Eigen::JacobiSVD<Matrix> dec(stacked);
      gain(i) = dec.singularValues()(dec.singularValues().size() - 1);
    }
    const Index p = argmax_abs_excluding(gain, chosen);
    sel.points.push_back(p);
    chosen.insert(p);
  }
  sel.oversamples = oversamples;
  sel.validate();
  return sel;
}

Vector ReducedOdeBlock::rhs(const Vector& x, const Vector* u) const {
  if (x.size() != sampled_weights.cols())
    fail("ReducedOdeBlock::rhs: state size ", x.size(), " does not match A_m columns ",
         sampled_weights.cols());
  Vector out = interpolation * apply_activation(activation, sampled_weights * x + sampled_bias);
  if (u != nullptr) {
    if (!input_matrix)
      fail("ReducedOdeBlock::rhs: input supplied but block has no input matrix");
    out += *input_matrix * *u;
  }
  return out;
}

Vector ReducedOdeBlock::activation_values(const Vector& x) const {
  return apply_activation(activation, sampled_weights * x + sampled_bias, /*count=*/false);
}

Matrix interpolation_matrix(const Matrix& pod_basis, const DeimSelection& selection) {
  selection.validate();
  const Matrix sampled = selection.sampled_basis();  // (m+o) x m
  const double cond = condition_estimate(sampled);
  if (!(cond < 1e12))
    fail("interpolation_matrix: P^T U condition estimate ", cond,
         " exceeds 1e12; selection is degenerate");

  Matrix n;
  if (selection.oversamples == 0) {
    // N = V^T U (P^T U)^{-1}, via solving (P^T U)^T X^T = (V^T U)^T
    n = solve_linear(sampled.transpose(), (pod_basis.transpose() * selection.basis).transpose())
            .transpose();
  } else {
    n = pod_basis.transpose() * selection.basis * pseudo_inverse(sampled);
  }

  // Build-time verification: N (P^T U) must reproduce V^T U.
  const Matrix check = n * sampled - pod_basis.transpose() * selection.basis;
  const double scale = std::max(1.0, (pod_basis.transpose() * selection.basis).norm());
  if (check.norm() > 1e-10 * scale)
    fail("interpolation_matrix: verification failed, ||N P^T U - V^T U|| = ", check.norm());
  return n;
}

ReducedOdeBlock assemble_rom(const OdeBlock& block, const Matrix& pod_basis,
                             const DeimSelection& selection) {
  block.validate();
  if (pod_basis.rows() != block.dim())
    fail("assemble_rom: POD basis has ", pod_basis.rows(), " rows, block dimension is ",
         block.dim());
  if (selection.basis.rows() != block.dim())
    fail("assemble_rom: DEIM basis has ", selection.basis.rows(), " rows, block dimension is ",
         block.dim());

  ReducedOdeBlock rb;
  rb.interpolation = interpolation_matrix(pod_basis, selection);
  const Matrix projected = block.weights * pod_basis;  // A V_k, n x k
  rb.sampled_weights.resize(static_cast<Index>(selection.points.size()), pod_basis.cols());
  rb.sampled_bias.resize(static_cast<Index>(selection.points.size()));
  for (std::size_t j = 0; j < selection.points.size(); ++j) {
    rb.sampled_weights.row(static_cast<Index>(j)) = projected.row(selection.points[j]);
    rb.sampled_bias(static_cast<Index>(j)) = block.bias(selection.points[j]);
  }
  if (block.input_matrix) rb.input_matrix = pod_basis.transpose() * *block.input_matrix;
  rb.activation = block.activation;
  return rb;
}

ModelSpec reduce_model(const ModelSpec& model, const SnapshotSet& snapshots, Index k, Index m,
                       Index o, bool fold) {
  model.validate();
  snapshots.validate();
  const Index ode_at = model.ode_layer_index();
  const auto& ode = std::get<OdeLayer>(model.layers[static_cast<std::size_t>(ode_at)]);
  const auto* block = dynamic_cast<const OdeBlock*>(ode.system.get());
  if (block == nullptr) fail("reduce_model: the ODE layer does not hold a dense block");
  const Index n = block->dim();
  if (snapshots.states.rows() != n)
    fail("reduce_model: snapshots have ", snapshots.states.rows(),
         " rows, block dimension is ", n);

  const SvdResult state_svd = svd(snapshots.states);
  const SvdResult nonlin_svd = svd(snapshots.nonlinear);
  const Index state_rank = numerical_rank(state_svd, snapshots.states.rows(),
                                          snapshots.states.cols());
  const Index nonlin_rank = numerical_rank(nonlin_svd, snapshots.nonlinear.rows(),
                                           snapshots.nonlinear.cols());
  if (k < 1 || k > state_rank)
    fail("reduce_model: k=", k, " exceeds the state snapshot rank ", state_rank);
  if (m < 1 || m > nonlin_rank)
    fail("reduce_model: m=", m, " exceeds the nonlinearity snapshot rank ", nonlin_rank);
  if (m + o > n) fail("reduce_model: m + o = ", m + o, " exceeds dimension ", n);

  const Matrix v = state_svd.left.leftCols(k);
  const DeimSelection selection = odeim_select(nonlin_svd.left.leftCols(m), o);
  auto reduced = std::make_shared<ReducedOdeBlock>(assemble_rom(*block, v, selection));

  ModelSpec out = model;
  OdeLayer new_ode = ode;
  new_ode.system = reduced;

  std::vector<Layer> layers;
  const auto at = static_cast<std::size_t>(ode_at);
  for (std::size_t i = 0; i < at; ++i) layers.push_back(model.layers[i]);

  // Project in: x~(0) = V^T x(0). Signal mode starts at zero, which projects
  // to zero, so no layer is needed there.
  if (ode.input == OdeInput::InitialValue) {
    bool folded_in = false;
    if (fold && !layers.empty() && std::holds_alternative<LinearLayer>(layers.back())) {
      auto& lin = std::get<LinearLayer>(layers.back());
      lin.weights = Matrix(v.transpose() * lin.weights);
      if (lin.bias.size() > 0) lin.bias = Vector(v.transpose() * lin.bias);
      folded_in = true;
    }
    if (!folded_in) layers.push_back(LinearLayer{Matrix(v.transpose()), Vector()});
  }

  layers.push_back(new_ode);

  // Project out: x(t_end) = V x~(t_end).
  bool fold_out_pending = true;
  std::size_t next = at + 1;
  if (fold && next < model.layers.size()) {
    if (const auto* lin = std::get_if<LinearLayer>(&model.layers[next])) {
      layers.push_back(LinearLayer{Matrix(lin->weights * v), lin->bias});
      fold_out_pending = false;
      ++next;
    } else if (const auto* ro = std::get_if<ReadoutLayer>(&model.layers[next])) {
      layers.push_back(ReadoutLayer{Matrix(ro->weights * v), ro->bias});
      fold_out_pending = false;
      ++next;
    }
  }
  if (fold_out_pending) layers.push_back(LinearLayer{v, Vector()});
  for (std::size_t i = next; i < model.layers.size(); ++i) layers.push_back(model.layers[i]);

  out.layers = std::move(layers);
  out.mor = MorSection{k, m, o, fold, selection.points,
                       hash_string(fnv1a64(encode_snapshots(snapshots)))};
  out.compression = CompressionSection{"pod-deim", k, snapshots.provenance};
  out.validate();
  return out;
}

Vector deim_approximate(const DeimSelection& selection, const Vector& f) {
  selection.validate();
  if (f.size() != selection.basis.rows())
    fail("deim_approximate: sample size ", f.size(), " does not match basis rows ",
         selection.basis.rows());
  Vector sampled(static_cast<Index>(selection.points.size()));
  for (std::size_t j = 0; j < selection.points.size(); ++j)
    sampled(static_cast<Index>(j)) = f(selection.points[j]);
  const Matrix pu = selection.sampled_basis();
  Vector coeffs;
  if (selection.oversamples == 0)
    coeffs = solve_linear(pu, sampled).col(0);
  else
    coeffs = pseudo_inverse(pu) * sampled;
  return selection.basis * coeffs;
}

double deim_error_bound(const Matrix& basis, const DeimSelection& selection,
                        const Vector& f_sample) {
  if (selection.oversamples != 0)
    fail("deim_error_bound: defined for plain DEIM (o = 0) only");
  selection.validate();
  if (basis.rows() != f_sample.size())
    fail("deim_error_bound: dimension mismatch");

  Eigen::JacobiSVD<Matrix> dec(selection.sampled_basis());
  const double smin = dec.singularValues()(dec.singularValues().size() - 1);
  if (smin == 0.0) fail("deim_error_bound: P^T U is singular");
  const double inv_norm = 1.0 / smin;
  const Vector orth = f_sample - basis * (basis.transpose() * f_sample);
  return inv_norm * orth.norm();
}

}  // namespace odec
