#include <benchmark/benchmark.h>

#include "dbr/cayley.hpp"
#include "dbr/corpus.hpp"
#include "dbr/kernels.hpp"
#include "dbr/model_c.hpp"
#include "dbr/rng.hpp"
#include "dbr/span.hpp"

namespace {

using namespace dbr;

SchurFunction bench_function() { return random_contractive_rational(7, 3); }

void BM_KernelEval(benchmark::State& state) {
  SchurFunction f = bench_function();
  RngStream rng(1, "bench-kernel");
  std::vector<Complex> mus, lams;
  for (int i = 0; i < 64; ++i) {
    mus.push_back(rng.halfplane_point());
    lams.push_back(rng.halfplane_point());
  }
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(eval_kernel(KernelKind::kc(), f, mus[i & 63], lams[i & 63]));
    ++i;
  }
}
BENCHMARK(BM_KernelEval);

void BM_GramAssembly(benchmark::State& state) {
  SchurFunction f = bench_function();
  RngStream rng(2, "bench-gram");
  std::vector<Complex> nodes = rng.halfplane_nodes(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(gram(KernelKind::kc(), f, nodes));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_GramAssembly)->Arg(16)->Arg(64)->Arg(128)->Complexity();

void BM_PositivityCheck(benchmark::State& state) {
  SchurFunction f = bench_function();
  RngStream rng(3, "bench-pos");
  GramMatrix g = gram(KernelKind::kc(), f, rng.halfplane_nodes(static_cast<int>(state.range(0))));
  for (auto _ : state) {
    benchmark::DoNotOptimize(positivity_check(g));
  }
}
BENCHMARK(BM_PositivityCheck)->Arg(64)->Arg(128);

void BM_DiscreteTransfer(benchmark::State& state) {
  SchurFunction f = bench_function();
  RngStream rng(4, "bench-transfer");
  std::vector<Complex> zs;
  for (int i = 0; i < 64; ++i) zs.push_back(rng.disk_point());
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(cayley::discrete_transfer(f, Complex(1.0, 0.0), zs[i & 63]));
    ++i;
  }
}
BENCHMARK(BM_DiscreteTransfer);

void BM_H2Quadrature(benchmark::State& state) {
  Evaluator g = [](Complex mu) { return CVec::Constant(1, 1.0 / (mu + Complex(0.4, 1.7))); };
  Evaluator h = [](Complex mu) { return CVec::Constant(1, 1.0 / (mu + Complex(2.0, -0.3))); };
  for (auto _ : state) {
    benchmark::DoNotOptimize(h2_inner_quadrature(g, h));
  }
}
BENCHMARK(BM_H2Quadrature);

void BM_CayleyBlock(benchmark::State& state) {
  SchurFunction f = bench_function();
  RngStream rng(5, "bench-block");
  SpanBasis basis = SpanBasis::build(KernelKind::kc(), f, rng.halfplane_nodes(24));
  for (auto _ : state) {
    benchmark::DoNotOptimize(cayley::cayley_block_c(f, Complex(1.3, 0.2), basis));
  }
}
BENCHMARK(BM_CayleyBlock);

}  // namespace

BENCHMARK_MAIN();
