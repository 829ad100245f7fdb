#include <benchmark/benchmark.h>

#include "sdae/autoencoder.hpp"
#include "sdae/data.hpp"
#include "sdae/linalg.hpp"
#include "sdae/sda.hpp"

namespace {

using namespace sdae;

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  for (double& v : m.span()) v = rng.uniform(-1.0, 1.0);
  return m;
}

void BM_Matvec(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const Matrix m = random_matrix(n, 784, rng);
  const Matrix x = random_matrix(1, 784, rng);
  for (auto _ : state) benchmark::DoNotOptimize(matvec(m, x.row(0)));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * 784));
}
BENCHMARK(BM_Matvec)->Arg(200)->Arg(1000);

void BM_AffineRows(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(2);
  const Matrix w = random_matrix(n, 784, rng);
  const std::vector<double> bias(n, 0.1);
  const Matrix in = random_matrix(20, 784, rng);
  Matrix out(20, n);
  for (auto _ : state) {
    affine_rows(w, bias, in, out);
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(20 * n * 784));
}
BENCHMARK(BM_AffineRows)->Arg(200)->Arg(1000);

void BM_DaEpoch(benchmark::State& state) {
  const auto h = static_cast<std::size_t>(state.range(0));
  Rng rng(3);
  const Matrix data = random_matrix(200, 784, rng);
  Matrix unit = data;
  for (double& v : unit.span()) v = 0.5 * (v + 1.0);
  const auto da = make_da(784, h, Activation::Sigmoid, Activation::Sigmoid, {0.3, 3}, rng);
  const SgdConfig cfg{0.01, 20, 1, 3};
  for (auto _ : state) benchmark::DoNotOptimize(train_da(da, unit, cfg));
  state.SetItemsProcessed(state.iterations() * 200);
}
BENCHMARK(BM_DaEpoch)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_ForwardBatch(benchmark::State& state) {
  Rng rng(4);
  const StackSpec spec{784, {200, 200}, Activation::Sigmoid, 10, {0.3, 4}, CorruptionMode::EveryLayer};
  const SupervisedNet net = random_net(spec, rng);
  const Matrix x = random_matrix(512, 784, rng);
  for (auto _ : state) benchmark::DoNotOptimize(predict_rows(net, x));
  state.SetItemsProcessed(state.iterations() * 512);
}
BENCHMARK(BM_ForwardBatch)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
