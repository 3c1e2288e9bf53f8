#include <benchmark/benchmark.h>

#include "tvt/kernels.h"

namespace tvt {
namespace {

Tensor Random(Shape shape, uint64_t seed) {
  Rng rng(seed);
  return TruncNormalInit(rng, std::move(shape), 1.0f);
}

void BM_MatMul(benchmark::State& state) {
  const int64_t n = state.range(0);
  const Tensor a = Random({n, n}, 1), b = Random({n, n}, 2);
  for (auto _ : state) benchmark::DoNotOptimize(MatMul(a, b));
  state.SetItemsProcessed(state.iterations() * 2 * n * n * n);
}

void BM_MatMulReference(benchmark::State& state) {
  const int64_t n = state.range(0);
  const Tensor a = Random({n, n}, 1), b = Random({n, n}, 2);
  for (auto _ : state) benchmark::DoNotOptimize(reference::MatMul(a, b));
  state.SetItemsProcessed(state.iterations() * 2 * n * n * n);
}

void BM_Conv2d(benchmark::State& state) {
  const int64_t c = state.range(0);
  const Tensor x = Random({c, 32, 32}, 3), w = Random({c, c, 3, 3}, 4);
  for (auto _ : state) benchmark::DoNotOptimize(Conv2d(x, w, nullptr, 1, 1));
}

void BM_Conv2dReference(benchmark::State& state) {
  const int64_t c = state.range(0);
  const Tensor x = Random({c, 32, 32}, 3), w = Random({c, c, 3, 3}, 4);
  for (auto _ : state) benchmark::DoNotOptimize(reference::Conv2d(x, w, nullptr, 1, 1));
}

void BM_Resize(benchmark::State& state) {
  const Tensor x = Random({64, 8, 8}, 5);
  const int64_t out = state.range(0);
  for (auto _ : state) benchmark::DoNotOptimize(BilinearResize(x, out, out));
}

void BM_ResizeReference(benchmark::State& state) {
  const Tensor x = Random({64, 8, 8}, 5);
  const int64_t out = state.range(0);
  for (auto _ : state) benchmark::DoNotOptimize(reference::BilinearResize(x, out, out));
}

BENCHMARK(BM_MatMul)->Arg(64)->Arg(256);
BENCHMARK(BM_MatMulReference)->Arg(64)->Arg(256);
BENCHMARK(BM_Conv2d)->Arg(16)->Arg(64);
BENCHMARK(BM_Conv2dReference)->Arg(16)->Arg(64);
BENCHMARK(BM_Resize)->Arg(14)->Arg(64);
BENCHMARK(BM_ResizeReference)->Arg(14)->Arg(64);

}  // namespace
}  // namespace tvt

BENCHMARK_MAIN();
