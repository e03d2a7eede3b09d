#include "odec/baselines.hpp"

#include <algorithm>
#include <numeric>

namespace odec {

Vector SvdTruncatedBlock::rhs(const Vector& x, const Vector* u) const {
  if (x.size() != first.cols())
    fail("SvdTruncatedBlock::rhs: state size ", x.size(), " does not match factor columns ",
         first.cols());
  Vector out = apply_activation(activation, second * (first * x) + bias);
  if (u != nullptr) {
    if (!input_matrix)
      fail("SvdTruncatedBlock::rhs: input supplied but block has no input matrix");
    out += *input_matrix * *u;
  }
  return out;
}

Vector SvdTruncatedBlock::activation_values(const Vector& x) const {
  return apply_activation(activation, second * (first * x) + bias, /*count=*/false);
}

SvdTruncatedBlock svd_truncate_block(const OdeBlock& block, Index k) {
  block.validate();
  const Index n = block.dim();
  if (k < 1 || k > n) fail("svd_truncate_block: k=", k, " out of range [1, ", n, "]");

  const SvdResult t = truncate_svd(svd(block.weights), k);
  SvdTruncatedBlock out;
  out.first = t.singular.asDiagonal() * t.right.transpose();
  out.second = t.left;
  out.bias = block.bias;
  out.input_matrix = block.input_matrix;
  out.activation = block.activation;
  return out;
}

ModelSpec svd_truncate_model(const ModelSpec& model, Index k) {
  model.validate();
  const Index at = model.ode_layer_index();
  const auto& ode = std::get<OdeLayer>(model.layers[static_cast<std::size_t>(at)]);
  const auto* block = dynamic_cast<const OdeBlock*>(ode.system.get());
  if (block == nullptr) fail("svd_truncate_model: the ODE layer does not hold a dense block");

  ModelSpec out = model;
  OdeLayer new_ode = ode;
  new_ode.system = std::make_shared<SvdTruncatedBlock>(svd_truncate_block(*block, k));
  out.layers[static_cast<std::size_t>(at)] = new_ode;
  out.compression = CompressionSection{"svd", k, "weights-only"};
  out.validate();
  return out;
}

std::string to_string(ApozMode m) {
  return m == ApozMode::ZeroFraction ? "zero-fraction" : "abs-magnitude";
}

ApozMode apoz_mode_from_string(const std::string& s) {
  if (s == "zero-fraction") return ApozMode::ZeroFraction;
  if (s == "abs-magnitude") return ApozMode::AbsMagnitude;
  fail("unknown APoZ mode: ", s);
}

Vector ApozScores::importance() const {
  // Zero-fraction counts dead outputs, so more zeros = less important.
  if (mode == ApozMode::ZeroFraction) return -scores;
  return scores;
}

Vector apoz_from_activations(const Matrix& observations) {
  if (observations.size() == 0) fail("apoz_from_activations: empty observations");
  Vector out(observations.rows());
  for (Index c = 0; c < observations.rows(); ++c) {
    long zeros = 0;
    for (Index j = 0; j < observations.cols(); ++j)
      if (observations(c, j) == 0.0) ++zeros;
    out(c) = static_cast<double>(zeros) / static_cast<double>(observations.cols());
  }
  return out;
}

ApozScores apoz_scores(const ModelSpec& model, const Dataset& data, long sample_limit,
                       ApozMode mode) {
  if (sample_limit < 1) fail("apoz_scores: sample_limit must be >= 1");
  if (data.sample_count() == 0) fail("apoz_scores: empty dataset");
  model.validate();
  if (data.split != "train")
    fail("apoz_scores: importance scores must come from the training split, got '",
         data.split, "'");

  const long n = std::min<long>(sample_limit, data.sample_count());
  Matrix final_acts;
  long used = 0;
  for (long s = 0; s < n; ++s) {
    Trajectory traj;
    // stride beyond the step count: only step 0 is recorded; the final
    // activations come from final_state below
    forward(model, data.images.col(s), &traj, 1);
    const Vector last = traj.activations.col(traj.activations.cols() - 1);
    if (final_acts.size() == 0) final_acts.resize(last.size(), n);
    final_acts.col(used++) = last;
  }
  final_acts.conservativeResize(final_acts.rows(), used);

  ApozScores out;
  out.mode = mode;
  if (mode == ApozMode::ZeroFraction) {
    out.scores = apoz_from_activations(final_acts);
  } else {
    out.scores = final_acts.cwiseAbs().rowwise().mean();
  }
  return out;
}

namespace {

std::vector<Index> top_k_keep(const Vector& importance, Index keep) {
  std::vector<Index> order(static_cast<std::size_t>(importance.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    if (importance(a) != importance(b)) return importance(a) > importance(b);
    return a < b;  // ties keep the lower index
  });
  order.resize(static_cast<std::size_t>(keep));
  std::sort(order.begin(), order.end());
  return order;
}

Matrix select_rows_cols(const Matrix& a, const std::vector<Index>& keep) {
  Matrix out(static_cast<Index>(keep.size()), static_cast<Index>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i)
    for (std::size_t j = 0; j < keep.size(); ++j)
      out(static_cast<Index>(i), static_cast<Index>(j)) = a(keep[i], keep[j]);
  return out;
}

Matrix select_rows(const Matrix& a, const std::vector<Index>& keep) {
  Matrix out(static_cast<Index>(keep.size()), a.cols());
  for (std::size_t i = 0; i < keep.size(); ++i) out.row(static_cast<Index>(i)) = a.row(keep[i]);
  return out;
}

Matrix select_cols(const Matrix& a, const std::vector<Index>& keep) {
  Matrix out(a.rows(), static_cast<Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) out.col(static_cast<Index>(j)) = a.col(keep[j]);
  return out;
}

Vector select_entries(const Vector& v, const std::vector<Index>& keep) {
  Vector out(static_cast<Index>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i) out(static_cast<Index>(i)) = v(keep[i]);
  return out;
}

}  // namespace

ModelSpec apoz_prune(const ModelSpec& model, const ApozScores& scores, Index keep) {
  model.validate();
  const Index at = model.ode_layer_index();
  const auto& ode = std::get<OdeLayer>(model.layers[static_cast<std::size_t>(at)]);
  const auto* block = dynamic_cast<const OdeBlock*>(ode.system.get());
  if (block == nullptr) fail("apoz_prune: the ODE layer does not hold a dense block");
  const Index n = block->dim();
  if (scores.scores.size() != n)
    fail("apoz_prune: ", scores.scores.size(), " scores for a dimension-", n, " block");
  if (keep < 1 || keep > n) fail("apoz_prune: keep=", keep, " out of range [1, ", n, "]");

  const std::vector<Index> kept = top_k_keep(scores.importance(), keep);

  auto pruned = std::make_shared<OdeBlock>();
  pruned->weights = select_rows_cols(block->weights, kept);
  pruned->bias = select_entries(block->bias, kept);
  if (block->input_matrix) pruned->input_matrix = select_rows(*block->input_matrix, kept);
  pruned->activation = block->activation;

  OdeLayer new_ode = ode;
  new_ode.system = pruned;

  std::vector<Layer> layers;
  const auto idx = static_cast<std::size_t>(at);
  for (std::size_t i = 0; i < idx; ++i) layers.push_back(model.layers[i]);

  // The initial value must shrink to the kept coordinates.
  if (ode.input == OdeInput::InitialValue && keep < n) {
    if (!layers.empty() && std::holds_alternative<LinearLayer>(layers.back())) {
      auto& lin = std::get<LinearLayer>(layers.back());
      lin.weights = select_rows(lin.weights, kept);
      if (lin.bias.size() > 0) lin.bias = select_entries(lin.bias, kept);
    } else {
      layers.push_back(GatherLayer{kept});
    }
  }

  layers.push_back(new_ode);

  std::size_t next = idx + 1;
  if (keep < n && next < model.layers.size()) {
    if (const auto* lin = std::get_if<LinearLayer>(&model.layers[next])) {
      layers.push_back(LinearLayer{select_cols(lin->weights, kept), lin->bias});
      ++next;
    } else if (const auto* ro = std::get_if<ReadoutLayer>(&model.layers[next])) {
      layers.push_back(ReadoutLayer{select_cols(ro->weights, kept), ro->bias});
      ++next;
    } else {
      // Worst case: a nonlinear follower keeps its geometry, so the kept
      // values are written back to their original indices.
      layers.push_back(ScatterLayer{n, kept});
    }
  }
  for (std::size_t i = next; i < model.layers.size(); ++i) layers.push_back(model.layers[i]);

  ModelSpec out = model;
  out.layers = std::move(layers);
  out.compression =
      CompressionSection{"apoz", keep, concat("mode=", to_string(scores.mode))};
  out.validate();
  return out;
}

}  // namespace odec
