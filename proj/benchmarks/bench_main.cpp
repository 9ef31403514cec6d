#include <benchmark/benchmark.h>

#include <random>

#include "sttrend/data.hpp"
#include "sttrend/excursions.hpp"
#include "sttrend/mesh.hpp"
#include "sttrend/model.hpp"
#include "sttrend/spde.hpp"

using namespace sttrend;

namespace {

std::vector<Point> grid(int side) {
  std::vector<Point> p;
  for (int j = 0; j < side; ++j)
    for (int i = 0; i < side; ++i) p.push_back({double(i), double(j)});
  return p;
}

void BM_BuildMesh(benchmark::State& state) {
  const auto locs = grid(static_cast<int>(state.range(0)));
  MeshOptions o;
  o.extension = 3.0;
  o.max_edge_inner = 1.0;
  o.max_edge_outer = 2.0;
  for (auto _ : state) benchmark::DoNotOptimize(build_mesh(locs, o).vertex_count());
}
BENCHMARK(BM_BuildMesh)->Arg(10)->Arg(30);

void BM_FactorizeSpde(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Mesh mesh = regular_mesh(0, 10, 0, 10, n, n);
  const FemMatrices fem = fem_matrices(mesh);
  const SparseSymmetric q = spde_precision(1.0, 1.0, fem.mass, fem.stiffness);
  SymbolicCholesky analysis(q);
  for (auto _ : state) benchmark::DoNotOptimize(analysis.factorize(q).log_det());
  state.counters["vertices"] = mesh.vertex_count();
}
BENCHMARK(BM_FactorizeSpde)->Arg(20)->Arg(60)->Arg(120)->Unit(benchmark::kMillisecond);

void BM_LogLikelihood(benchmark::State& state) {
  const auto locs = grid(10);
  std::vector<double> times;
  for (int t = 0; t < 65; ++t) times.push_back(0.1 * (t - 32));
  MeshOptions o;
  o.extension = 3.0;
  o.max_edge_inner = 1.5;
  o.max_edge_outer = 3.0;
  const Mesh mesh = build_mesh(locs, o);
  const HyperParams theta = to_internal({0.09, 0.4, 0.05, 5.0, 1.0, 15.0});
  const SimulationResult sim = simulate(theta, mesh, locs, times, 1);
  const auto path = state.range(0) ? EvaluationPath::Spectral : EvaluationPath::Sparse;
  LatentModel model(sim.panel, SpatialDesign::from_mesh(mesh, locs), Priors::weakly_informative(3.0), path);
  for (auto _ : state) benchmark::DoNotOptimize(model.log_marginal_likelihood(theta));
  state.SetLabel(state.range(0) ? "spectral" : "sparse");
}
BENCHMARK(BM_LogLikelihood)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_SimultaneousBand(benchmark::State& state) {
  const int g = static_cast<int>(state.range(0));
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z;
  Eigen::MatrixXd x(20000, g);
  for (int i = 0; i < x.rows(); ++i)
    for (int j = 0; j < g; ++j) x(i, j) = z(rng);
  const FieldMarginals f({1.0}, Eigen::MatrixXd::Zero(1, g), Eigen::MatrixXd::Ones(1, g));
  for (auto _ : state) benchmark::DoNotOptimize(simultaneous_band(x, f, 0.05).band_rho);
}
BENCHMARK(BM_SimultaneousBand)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
