// Microbenchmarks for the per-step kernels that dominate model wall time:
// full, factored and reduced rhs evaluations, plus point selection and the
// snapshot SVD.

#include <benchmark/benchmark.h>

#include "odec/baselines.hpp"
#include "odec/layers.hpp"
#include "odec/mor.hpp"
#include "odec/snapshots.hpp"
#include "odec/util.hpp"

namespace {

using namespace odec;

Matrix random_matrix(Rng& rng, Index rows, Index cols, double scale) {
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) m(r, c) = scale * rng.normal();
  return m;
}

OdeBlock make_block(Index n, std::uint64_t seed) {
  Rng rng(seed);
  OdeBlock b;
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  b.weights = build_antisymmetric({random_matrix(rng, n, n, scale), 0.1});
  b.bias = random_matrix(rng, n, 1, scale).col(0);
  b.activation = Activation::Tanh;
  return b;
}

// Snapshots from a short bundle of trajectories, enough for a full-rank basis.
SnapshotSet make_snapshots(const OdeBlock& block, Index n, std::uint64_t seed) {
  Rng rng(seed);
  SolverConfig cfg{SolverMethod::Rk4, 0.0, 1.0, 0.1};
  std::vector<Trajectory> trajs;
  const Index count = n / 2 + 4;
  SnapshotSet s;
  s.states.resize(n, count * 11);
  s.nonlinear.resize(n, count * 11);
  for (Index i = 0; i < count; ++i) {
    const Trajectory t = integrate(block, random_matrix(rng, n, 1, 1.0).col(0), nullptr, cfg, 1);
    s.states.middleCols(i * 11, 11) = t.states;
    s.nonlinear.middleCols(i * 11, 11) = t.activations;
  }
  s.provenance = "bench";
  return s;
}

void BM_FullRhs(benchmark::State& state) {
  const Index n = state.range(0);
  const OdeBlock block = make_block(n, 7);
  Rng rng(8);
  const Vector x = random_matrix(rng, n, 1, 1.0).col(0);
  for (auto _ : state) benchmark::DoNotOptimize(block.rhs(x, nullptr));
}
BENCHMARK(BM_FullRhs)->Arg(64)->Arg(128)->Arg(256);

void BM_ReducedRhs(benchmark::State& state) {
  const Index n = 256;
  const Index k = state.range(0);
  const OdeBlock block = make_block(n, 7);
  const SnapshotSet snaps = make_snapshots(block, n, 9);
  const Matrix v = pod_basis(snaps.states, k);
  const DeimSelection sel = deim_select(pod_basis(snaps.nonlinear, k));
  const ReducedOdeBlock rb = assemble_rom(block, v, sel);
  Rng rng(10);
  const Vector x = random_matrix(rng, k, 1, 1.0).col(0);
  for (auto _ : state) benchmark::DoNotOptimize(rb.rhs(x, nullptr));
}
BENCHMARK(BM_ReducedRhs)->Arg(16)->Arg(32)->Arg(64);

void BM_SvdTruncatedRhs(benchmark::State& state) {
  const Index n = 256;
  const Index k = state.range(0);
  const OdeBlock block = make_block(n, 7);
  const SvdTruncatedBlock fb = svd_truncate_block(block, k);
  Rng rng(11);
  const Vector x = random_matrix(rng, n, 1, 1.0).col(0);
  for (auto _ : state) benchmark::DoNotOptimize(fb.rhs(x, nullptr));
}
BENCHMARK(BM_SvdTruncatedRhs)->Arg(16)->Arg(32)->Arg(64);

void BM_DeimSelect(benchmark::State& state) {
  const Index n = 256;
  const Index m = state.range(0);
  const OdeBlock block = make_block(n, 7);
  const SnapshotSet snaps = make_snapshots(block, n, 9);
  const Matrix u = pod_basis(snaps.nonlinear, m);
  for (auto _ : state) benchmark::DoNotOptimize(deim_select(u));
}
BENCHMARK(BM_DeimSelect)->Arg(16)->Arg(32)->Arg(64);

void BM_SnapshotSvd(benchmark::State& state) {
  const Index n = state.range(0);
  const OdeBlock block = make_block(n, 7);
  const SnapshotSet snaps = make_snapshots(block, n, 9);
  for (auto _ : state) benchmark::DoNotOptimize(svd(snaps.states));
}
BENCHMARK(BM_SnapshotSvd)->Arg(64)->Arg(128);

void BM_Integrate(benchmark::State& state) {
  const Index n = state.range(0);
  const OdeBlock block = make_block(n, 7);
  Rng rng(12);
  const Vector x0 = random_matrix(rng, n, 1, 1.0).col(0);
  SolverConfig cfg{SolverMethod::Rk4, 0.0, 1.0, 0.1};
  for (auto _ : state) benchmark::DoNotOptimize(integrate(block, x0, nullptr, cfg));
}
BENCHMARK(BM_Integrate)->Arg(64)->Arg(128);

}  // namespace

BENCHMARK_MAIN();
