#include <memory>

#include <benchmark/benchmark.h>

#include "eigstab/eigensolve.hpp"
#include "eigstab/experiments.hpp"
#include "eigstab/fem.hpp"
#include "eigstab/stabilize.hpp"

namespace {

eigstab::MatchedMeshPair stretched(std::size_t n, double t) {
  eigstab::RunConfig c;
  c.domain.eps = t;
  c.mesh.n = n;
  return eigstab::build_problem(c).pair;
}

void BM_Assemble(benchmark::State& state) {
  const auto mesh = eigstab::rect_mesh(static_cast<std::size_t>(state.range(0)), 1, 1, eigstab::MeshPattern::Left);
  for (auto _ : state) benchmark::DoNotOptimize(eigstab::assemble(mesh));
  state.counters["elements"] = static_cast<double>(mesh.element_count());
}
BENCHMARK(BM_Assemble)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMicrosecond);

void BM_SmallestPairs(benchmark::State& state) {
  const auto mesh = eigstab::rect_mesh(static_cast<std::size_t>(state.range(0)), 1, 1, eigstab::MeshPattern::Left);
  const auto sys = eigstab::assemble(mesh);
  for (auto _ : state) benchmark::DoNotOptimize(eigstab::smallest_pairs(sys.stiffness, sys.mass, 3));
  state.counters["dofs"] = static_cast<double>(sys.dofs.size());
}
BENCHMARK(BM_SmallestPairs)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_StabilizeCluster(benchmark::State& state) {
  const auto pair = stretched(static_cast<std::size_t>(state.range(0)), 1e-5);
  for (auto _ : state) benchmark::DoNotOptimize(eigstab::stabilize_cluster(pair, {2, 3, 0}));
}
BENCHMARK(BM_StabilizeCluster)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_TildeForms(benchmark::State& state) {
  const auto pair = stretched(64, 0.1);
  const auto coeffs = eigstab::element_coeffs(pair);
  const auto u = eigstab::FEFunction::interpolate(pair.mesh0, [](eigstab::Point2 p) { return p.x * (1 - p.x) * p.y; });
  for (auto _ : state) {
    benchmark::DoNotOptimize(eigstab::tilde_a(u, u, coeffs, 49.3));
    benchmark::DoNotOptimize(eigstab::tilde_b(u, u, coeffs, eigstab::WeightMode::Det));
  }
}
BENCHMARK(BM_TildeForms)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
