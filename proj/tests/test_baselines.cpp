#include <doctest.h>

#include <cmath>

#include "odec/baselines.hpp"
#include "test_util.hpp"

using namespace odec;
using testutil::random_matrix;
using testutil::random_vector;

namespace {

OdeBlock random_block(Rng& rng, Index n) {
  OdeBlock b;
  const double s = 1.0 / std::sqrt(static_cast<double>(n));
  b.weights = build_antisymmetric({random_matrix(rng, n, n, s), 0.1});
  b.bias = random_vector(rng, n, s);
  b.activation = Activation::Tanh;
  return b;
}

ModelSpec dense_model(std::uint64_t seed, Index in, Index n, int classes) {
  Rng rng(seed);
  auto block = std::make_shared<OdeBlock>(random_block(rng, n));
  OdeLayer ode;
  ode.system = block;
  ode.solver = {SolverMethod::Rk4, 0.0, 1.0, 0.1};
  ModelSpec model;
  model.layers.push_back(
      LinearLayer{random_matrix(rng, n, in, 1.0 / std::sqrt(static_cast<double>(in))),
                  random_vector(rng, n, 0.1)});
  model.layers.push_back(ode);
  model.layers.push_back(ReadoutLayer{random_matrix(rng, classes, n, 0.3),
                                      Vector::Zero(classes)});
  model.input_shape = {in};
  model.class_count = classes;
  return model;
}

}  // namespace

TEST_SUITE("baselines") {

TEST_CASE("svd_truncate_block is exact on a rank-1 weight matrix") {
  Rng rng(61);
  const Index n = 6;
  OdeBlock block;
  const Vector u = random_vector(rng, n);
  const Vector v = random_vector(rng, n);
  block.weights = u * v.transpose();
  block.bias = random_vector(rng, n, 0.2);
  block.activation = Activation::Tanh;

  const SvdTruncatedBlock fb = svd_truncate_block(block, 1);
  const Vector x = random_vector(rng, n);
  CHECK((fb.rhs(x, nullptr) - block.rhs(x, nullptr)).norm() < 1e-10);
  CHECK(fb.first.rows() == 1);
  CHECK(fb.second.cols() == 1);
}

TEST_CASE("svd_truncate_block with k = n reproduces the block") {
  Rng rng(62);
  const Index n = 5;
  const OdeBlock block = random_block(rng, n);
  const SvdTruncatedBlock fb = svd_truncate_block(block, n);
  CHECK((fb.second * fb.first - block.weights).norm() < 1e-10);
  const Vector x = random_vector(rng, n);
  CHECK((fb.rhs(x, nullptr) - block.rhs(x, nullptr)).norm() < 1e-12);
}

TEST_CASE("svd_truncate_block composes to the rank-k truncation") {
  Rng rng(63);
  const Index n = 8, k = 4;
  const OdeBlock block = random_block(rng, n);
  const SvdTruncatedBlock fb = svd_truncate_block(block, k);

  const SvdResult t = truncate_svd(svd(block.weights), k);
  const Matrix expected = t.left * t.singular.asDiagonal() * t.right.transpose();
  CHECK((fb.second * fb.first - expected).norm() < 1e-10);

  // Eckart-Young: composed error equals the singular tail
  const SvdResult s = svd(block.weights);
  double tail = 0.0;
  for (Index i = k; i < s.singular.size(); ++i) tail += s.singular(i) * s.singular(i);
  CHECK((fb.second * fb.first - block.weights).norm() ==
        doctest::Approx(std::sqrt(tail)).epsilon(1e-8));
}

TEST_CASE("svd_truncate_block parameter count is k(n+l)") {
  Rng rng(64);
  const Index n = 10, k = 3;
  const SvdTruncatedBlock fb = svd_truncate_block(random_block(rng, n), k);
  CHECK(fb.first.size() + fb.second.size() == k * (n + n));
}

TEST_CASE("svd-truncated block still evaluates n activations") {
  Rng rng(65);
  const Index n = 9, k = 2;
  const SvdTruncatedBlock fb = svd_truncate_block(random_block(rng, n), k);
  const Vector x = random_vector(rng, n);
  activation_counter::reset();
  fb.rhs(x, nullptr);
  CHECK(activation_counter::count() == static_cast<std::uint64_t>(n));
}

TEST_CASE("svd_truncate_block rejects out-of-range k") {
  Rng rng(66);
  const OdeBlock block = random_block(rng, 4);
  CHECK_THROWS_AS(svd_truncate_block(block, 0), Error);
  CHECK_THROWS_AS(svd_truncate_block(block, 5), Error);
}

TEST_CASE("apoz_from_activations counts zero fractions") {
  // one neuron, N=2 examples with M=2 feature-map positions: [0,0,1,0]
  Matrix obs(1, 4);
  obs << 0.0, 0.0, 1.0, 0.0;
  const Vector scores = apoz_from_activations(obs);
  CHECK(scores(0) == doctest::Approx(0.75));
}

TEST_CASE("magnitude scores order neurons by mean |final activation|") {
  // neuron 0: final activations 0.9, -0.8 -> 0.85; neuron 1: 0.01, 0.02
  Matrix obs(2, 2);
  obs << 0.9, -0.8,  //
      0.01, 0.02;
  const Vector mags = obs.cwiseAbs().rowwise().mean();
  CHECK(mags(0) == doctest::Approx(0.85));
  CHECK(mags(1) == doctest::Approx(0.015));

  ApozScores scores;
  scores.scores = mags;
  scores.mode = ApozMode::AbsMagnitude;
  const Vector imp = scores.importance();
  CHECK(imp(0) > imp(1));  // neuron 1 pruned first
}

TEST_CASE("apoz_scores match a direct per-sample loop") {
  ModelSpec model = dense_model(67, 4, 6, 3);
  const Dataset data = synth_dataset(68, 3, 10, {1, 2, 2}, 2.0);

  const ApozScores scores = apoz_scores(model, data, 10, ApozMode::AbsMagnitude);
  REQUIRE(scores.scores.size() == 6);

  // oracle: rerun each sample, grab the final-step activations directly
  const auto& ode = std::get<OdeLayer>(model.layers[1]);
  Matrix finals(6, 10);
  for (Index s = 0; s < 10; ++s) {
    Trajectory t;
    forward(model, data.images.col(s), &t, 1);
    finals.col(s) = ode.system->activation_values(t.final_state);
  }
  const Vector oracle = finals.cwiseAbs().rowwise().mean();
  CHECK((scores.scores - oracle).norm() < 1e-12);
}

TEST_CASE("apoz_scores zero-fraction mode on a relu block") {
  ModelSpec model = dense_model(69, 4, 6, 3);
  auto relu_block = std::make_shared<OdeBlock>();
  {
    Rng rng(70);
    relu_block->weights = random_matrix(rng, 6, 6, 0.4);
    relu_block->bias = random_vector(rng, 6, 0.4);
    relu_block->activation = Activation::Relu;
  }
  auto ode = std::get<OdeLayer>(model.layers[1]);
  ode.system = relu_block;
  model.layers[1] = ode;

  const Dataset data = synth_dataset(71, 3, 8, {1, 2, 2}, 2.0);
  const ApozScores scores = apoz_scores(model, data, 8, ApozMode::ZeroFraction);
  for (Index i = 0; i < scores.scores.size(); ++i) {
    CHECK(scores.scores(i) >= 0.0);
    CHECK(scores.scores(i) <= 1.0);
  }
  // relu produces some exact zeros on this block
  CHECK(scores.scores.maxCoeff() > 0.0);
}

TEST_CASE("apoz_scores insist on the training split") {
  ModelSpec model = dense_model(72, 4, 6, 3);
  Dataset data = synth_dataset(73, 3, 5, {1, 2, 2}, 2.0, "test");
  CHECK_THROWS_WITH_AS(apoz_scores(model, data, 5), doctest::Contains("training split"), Error);
}

TEST_CASE("apoz_prune keep=n leaves the model unchanged") {
  ModelSpec model = dense_model(74, 4, 6, 3);
  const Dataset data = synth_dataset(75, 3, 6, {1, 2, 2}, 2.0);
  const ApozScores scores = apoz_scores(model, data, 6);
  const ModelSpec pruned = apoz_prune(model, scores, 6);

  const Vector img = data.images.col(0);
  CHECK((forward(pruned, img) - forward(model, img)).norm() < 1e-14);
  CHECK(pruned.layers.size() == model.layers.size());
}

TEST_CASE("pruning a disconnected neuron leaves the forward pass unchanged") {
  ModelSpec model = dense_model(76, 4, 5, 3);
  // disconnect neuron 2: zero row+column in A, zero bias, zero readout column
  auto block = std::make_shared<OdeBlock>(
      *dynamic_cast<const OdeBlock*>(std::get<OdeLayer>(model.layers[1]).system.get()));
  block->weights.row(2).setZero();
  block->weights.col(2).setZero();
  block->bias(2) = 0.0;
  auto ode = std::get<OdeLayer>(model.layers[1]);
  ode.system = block;
  model.layers[1] = ode;
  std::get<ReadoutLayer>(model.layers[2]).weights.col(2).setZero();

  // force the disconnected neuron to the bottom of the importance order
  ApozScores scores;
  scores.mode = ApozMode::AbsMagnitude;
  scores.scores = Vector::Ones(5);
  scores.scores(2) = 0.0;

  const ModelSpec pruned = apoz_prune(model, scores, 4);
  const auto& pode = std::get<OdeLayer>(pruned.layers[1]);
  CHECK(pode.system->dim() == 4);

  const Dataset data = synth_dataset(77, 3, 6, {1, 2, 2}, 2.0);
  for (Index s = 0; s < data.sample_count(); ++s) {
    const Vector a = forward(model, data.images.col(s));
    const Vector b = forward(pruned, data.images.col(s));
    CHECK((a - b).norm() < 1e-12);
  }
}

TEST_CASE("apoz_prune matches a mask-based oracle at keep = n/2") {
  const Index n = 8, keep = 4;
  ModelSpec model = dense_model(78, 4, n, 3);
  const Dataset data = synth_dataset(79, 3, 10, {1, 2, 2}, 2.0);
  const ApozScores scores = apoz_scores(model, data, 10);
  const ModelSpec pruned = apoz_prune(model, scores, keep);

  // oracle: evaluate the full model with rows/columns/bias of the dropped
  // neurons masked to zero, gathering kept entries afterwards. Because the
  // kept block sees exactly the same sub-dynamics, final kept states agree.
  std::vector<Index> kept;
  {
    std::vector<std::pair<double, Index>> order;
    for (Index i = 0; i < n; ++i) order.push_back({scores.scores(i), i});
    std::stable_sort(order.begin(), order.end(), [](auto a, auto b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    for (Index i = 0; i < keep; ++i) kept.push_back(order[static_cast<std::size_t>(i)].second);
    std::sort(kept.begin(), kept.end());
  }

  ModelSpec masked = model;
  auto block = std::make_shared<OdeBlock>(
      *dynamic_cast<const OdeBlock*>(std::get<OdeLayer>(model.layers[1]).system.get()));
  std::vector<bool> keep_mask(static_cast<std::size_t>(n), false);
  for (Index i : kept) keep_mask[static_cast<std::size_t>(i)] = true;
  for (Index i = 0; i < n; ++i) {
    if (keep_mask[static_cast<std::size_t>(i)]) continue;
    block->weights.row(i).setZero();
    block->weights.col(i).setZero();
    block->bias(i) = 0.0;
  }
  auto ode = std::get<OdeLayer>(masked.layers[1]);
  ode.system = block;
  masked.layers[1] = ode;
  // masked lift rows: dropped neurons start at zero
  auto& lift = std::get<LinearLayer>(masked.layers[0]);
  for (Index i = 0; i < n; ++i)
    if (!keep_mask[static_cast<std::size_t>(i)]) {
      lift.weights.row(i).setZero();
      if (lift.bias.size() > 0) lift.bias(i) = 0.0;
    }
  // dropped readout columns contribute nothing
  auto& ro = std::get<ReadoutLayer>(masked.layers[2]);
  for (Index i = 0; i < n; ++i)
    if (!keep_mask[static_cast<std::size_t>(i)]) ro.weights.col(i).setZero();

  for (Index s = 0; s < 5; ++s) {
    const Vector a = forward(masked, data.images.col(s));
    const Vector b = forward(pruned, data.images.col(s));
    CHECK((a - b).norm() < 1e-12);
  }
}

TEST_CASE("pruned model evaluates exactly k activations per rhs call") {
  const Index n = 7, keep = 3;
  ModelSpec model = dense_model(80, 4, n, 3);
  const Dataset data = synth_dataset(81, 3, 5, {1, 2, 2}, 2.0);
  const ModelSpec pruned = apoz_prune(model, apoz_scores(model, data, 5), keep);
  const auto& ode = std::get<OdeLayer>(pruned.layers[1]);
  CHECK(ode.system->dim() == keep);

  Rng rng(82);
  const Vector x = random_vector(rng, keep);
  activation_counter::reset();
  ode.system->rhs(x, nullptr);
  CHECK(activation_counter::count() == static_cast<std::uint64_t>(keep));
}

TEST_CASE("keep-set is invariant under monotone score transforms") {
  const Index n = 6;
  ModelSpec model = dense_model(83, 4, n, 3);
  const Dataset data = synth_dataset(84, 3, 6, {1, 2, 2}, 2.0);
  ApozScores scores = apoz_scores(model, data, 6);

  ApozScores transformed = scores;
  transformed.scores = (3.0 * scores.scores.array() + 1.0).matrix();  // monotone

  const ModelSpec a = apoz_prune(model, scores, 3);
  const ModelSpec b = apoz_prune(model, transformed, 3);
  const auto* block_a =
      dynamic_cast<const OdeBlock*>(std::get<OdeLayer>(a.layers[1]).system.get());
  const auto* block_b =
      dynamic_cast<const OdeBlock*>(std::get<OdeLayer>(b.layers[1]).system.get());
  CHECK((block_a->weights - block_b->weights).norm() == 0.0);
  CHECK((block_a->bias - block_b->bias).norm() == 0.0);
}

TEST_CASE("apoz worst case: nonlinear follower gets a scatter adapter") {
  // maxpool after the ODE block forces the insert-to-original-indices path
  Rng rng(85);
  const Index n = 16;  // 1 channel, 4x4
  ModelSpec model;
  model.layers.push_back(LinearLayer{random_matrix(rng, n, 4, 0.5), Vector()});
  auto block = std::make_shared<OdeBlock>(random_block(rng, n));
  OdeLayer ode;
  ode.system = block;
  ode.solver = {SolverMethod::Rk4, 0.0, 1.0, 0.1};
  model.layers.push_back(ode);
  model.layers.push_back(MaxPoolLayer{1, 4, 4, 2, 2});
  model.layers.push_back(ReadoutLayer{random_matrix(rng, 3, 4, 0.5), Vector::Zero(3)});
  model.input_shape = {4};
  model.class_count = 3;
  model.validate();

  ApozScores scores;
  scores.mode = ApozMode::AbsMagnitude;
  scores.scores = Vector::Ones(n);
  for (Index i = 0; i < 6; ++i) scores.scores(i * 2) = 2.0;  // keep even-ish set

  const ModelSpec pruned = apoz_prune(model, scores, 6);
  CHECK(pruned.layers.size() == model.layers.size() + 1);
  CHECK(std::holds_alternative<ScatterLayer>(pruned.layers[2]));
  const auto& sc = std::get<ScatterLayer>(pruned.layers[2]);
  CHECK(sc.dim == n);
  CHECK(sc.indices.size() == 6);
  // pruned model still runs
  forward(pruned, Vector::Ones(4));
}

TEST_CASE("compression section records the method") {
  ModelSpec model = dense_model(86, 4, 6, 3);
  const ModelSpec svd_model = svd_truncate_model(model, 3);
  REQUIRE(svd_model.compression.has_value());
  CHECK(svd_model.compression->method == "svd");
  CHECK(svd_model.compression->dimension == 3);

  const Dataset data = synth_dataset(87, 3, 5, {1, 2, 2}, 2.0);
  const ModelSpec pruned = apoz_prune(model, apoz_scores(model, data, 5), 3);
  CHECK(pruned.compression->method == "apoz");
  CHECK(pruned.compression->dimension == 3);
}

}  // TEST_SUITE
