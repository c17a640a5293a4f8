// Serial vs OpenMP kernels on a realistic H_eff manifold block.

#include <benchmark/benchmark.h>

#include <random>

#include "phq/operators.hpp"

namespace {

using namespace phq;

// Hard-core hopping block of n photons on 6x6 at Nphi = 2n.
const SparseOperator &hopping(int n) {
  static std::vector<SparseOperator> cache(4);
  auto &op = cache.at(static_cast<std::size_t>(n));
  if (op.rows == 0) {
    const auto g = build_geometry(6, 6, 2 * n);
    op = build_hopping_block(enumerate_manifold(g, n, 1), build_link_phases(g));
  }
  return op;
}

std::vector<cplx> random_vector(std::size_t n) {
  std::mt19937 rng(1);
  std::normal_distribution<double> gauss;
  std::vector<cplx> v(n);
  for (cplx &x : v) {
    x = cplx(gauss(rng), gauss(rng));
  }
  return v;
}

template <void (*Kernel)(const SparseOperator &, std::span<const cplx>, std::span<cplx>)>
void BM_spmv(benchmark::State &state) {
  const auto &a = hopping(static_cast<int>(state.range(0)));
  const auto x = random_vector(a.cols);
  std::vector<cplx> y(a.rows);
  for (auto _ : state) {
    Kernel(a, x, y);
    benchmark::DoNotOptimize(y.data());
  }
  state.counters["rows"] = static_cast<double>(a.rows);
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(a.nnz()));
}

template <cplx (*Kernel)(std::span<const cplx>, std::span<const cplx>)>
void BM_dot(benchmark::State &state) {
  const auto x = random_vector(static_cast<std::size_t>(state.range(0)));
  const auto y = random_vector(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(Kernel(x, y));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

} // namespace

BENCHMARK(BM_spmv<kernels::spmv_serial>)->Name("spmv_serial")->DenseRange(2, 3)->UseRealTime();
BENCHMARK(BM_spmv<kernels::spmv_omp>)->Name("spmv_omp")->DenseRange(2, 3)->UseRealTime();
BENCHMARK(BM_dot<kernels::dot_serial>)->Name("dot_serial")->RangeMultiplier(8)->Range(1 << 12, 1 << 21)->UseRealTime();
BENCHMARK(BM_dot<kernels::dot_omp>)->Name("dot_omp")->RangeMultiplier(8)->Range(1 << 12, 1 << 21)->UseRealTime();

BENCHMARK_MAIN();
