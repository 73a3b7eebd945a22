// OpenMP kernels against their serial references.

#include <benchmark/benchmark.h>

#include <cmath>

#include "gradcon/fem.hpp"

using namespace gradcon;

namespace {

struct Fixture {
  explicit Fixture(std::size_t n) : mesh(Rect{}, n, n), qp(mesh), pattern(mesh) {
    alpha = Vector(qp.size(), 1.0);
    p.resize(mesh.num_edges());
    for (std::size_t e = 0; e < p.size(); ++e) p[e] = 1e-3 * std::sin(0.37 * static_cast<double>(e));
  }
  Mesh mesh;
  QuadraturePoints qp;
  Rt0Pattern pattern;
  Vector alpha;
  Vector p;
};

constexpr double tau = 1e-4;

void BM_residual_omp(benchmark::State& s) {
  const Fixture f(s.range(0));
  for (auto _ : s) benchmark::DoNotOptimize(assemble_huber_residual(f.mesh, f.qp, f.p, f.alpha, tau));
}

void BM_residual_serial(benchmark::State& s) {
  const Fixture f(s.range(0));
  for (auto _ : s) benchmark::DoNotOptimize(serial::assemble_huber_residual(f.mesh, f.qp, f.p, f.alpha, tau));
}

void BM_jacobian_omp(benchmark::State& s) {
  const Fixture f(s.range(0));
  for (auto _ : s) benchmark::DoNotOptimize(assemble_huber_jacobian(f.mesh, f.pattern, f.qp, f.p, f.alpha, tau));
}

void BM_jacobian_serial(benchmark::State& s) {
  const Fixture f(s.range(0));
  for (auto _ : s) benchmark::DoNotOptimize(serial::assemble_huber_jacobian(f.mesh, f.qp, f.p, f.alpha, tau));
}

void BM_spmv_omp(benchmark::State& s) {
  const Fixture f(s.range(0));
  const SparseMatrix a = assemble_reduced_jacobian(f.mesh, f.pattern, f.qp, f.p, f.alpha, tau);
  for (auto _ : s) benchmark::DoNotOptimize(spmv(a, f.p));
}

void BM_spmv_serial(benchmark::State& s) {
  const Fixture f(s.range(0));
  const SparseMatrix a = assemble_reduced_jacobian(f.mesh, f.pattern, f.qp, f.p, f.alpha, tau);
  for (auto _ : s) benchmark::DoNotOptimize(serial::spmv(a, f.p));
}

}  // namespace

BENCHMARK(BM_residual_omp)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_residual_serial)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_jacobian_omp)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_jacobian_serial)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_spmv_omp)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_spmv_serial)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
