#include <benchmark/benchmark.h>

#include "hap/coarsen.hpp"
#include "hap/datagen.hpp"
#include "hap/embed.hpp"
#include "hap/graph.hpp"

using namespace hap;

namespace {

constexpr int kDim = 32;
constexpr int kClusters = 16;

struct Fixture {
  Graph g;
  Matrix H;
  DiffMatrix A_in, H_in;
  CoarseningLayer layer;  // unrecorded constants, inference-mode timing

  explicit Fixture(int n) {
    Rng rng(1234);
    g = er_random_graph(n, 0.3, rng);
    H = Matrix(n, kDim);
    for (size_t k = 0; k < H.size(); ++k) H[k] = rng.uniform(-1.0, 1.0);
    A_in = DiffMatrix::constant(g.adjacency);
    H_in = DiffMatrix::constant(H);
    layer.n_clusters = kClusters;
    layer.tau = 0.1;
    layer.T = DiffMatrix::constant(glorot_uniform(kDim, kClusters, rng));
    layer.a_row = DiffMatrix::constant(glorot_uniform(1, kClusters, rng));
    layer.a_col = DiffMatrix::constant(glorot_uniform(1, kClusters, rng));
  }
};

void BM_CoarsenForward(benchmark::State& state) {
  Fixture f(static_cast<int>(state.range(0)));
  uint64_t rep = 0;
  for (auto _ : state) {
    Rng noise(rep++);
    CoarsenOutput out = coarsen_forward(f.layer, f.H_in, f.A_in, noise, false);
    benchmark::DoNotOptimize(out.A_sampled.value().data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_CoarsenForward)->RangeMultiplier(2)->Range(32, 512)->Complexity();

void BM_CoarsenBackward(benchmark::State& state) {
  Fixture f(static_cast<int>(state.range(0)));
  Rng init(5);
  uint64_t rep = 0;
  for (auto _ : state) {
    Rng noise(rep++);
    Tape tape;
    CoarseningLayer layer = CoarseningLayer::init(
        kDim, kClusters, 0.1, ColumnMode::kAffinitySummary, tape, init);
    CoarsenOutput out = coarsen_forward(layer, tape.leaf(f.H, false),
                                        DiffMatrix::constant(f.g.adjacency),
                                        noise, true);
    GradientMap grads = tape.backward(full_sum(out.H_coarse));
    benchmark::DoNotOptimize(grads.at(layer.T).data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_CoarsenBackward)->RangeMultiplier(2)->Range(32, 256)->Complexity();

void BM_GcnForward(benchmark::State& state) {
  Fixture f(static_cast<int>(state.range(0)));
  Rng rng(7);
  GcnLayer layer;
  layer.W = DiffMatrix::constant(glorot_uniform(kDim, kDim, rng));
  for (auto _ : state) {
    DiffMatrix out = gcn_forward(layer, f.A_in, f.H_in);
    benchmark::DoNotOptimize(out.value().data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_GcnForward)->RangeMultiplier(2)->Range(32, 512)->Complexity();

void BM_GedExact(benchmark::State& state) {
  Rng rng(99);
  int n = static_cast<int>(state.range(0));
  Graph a = er_random_graph(n, 0.4, rng);
  Graph b = er_random_graph(n, 0.4, rng);
  for (auto _ : state) {
    double d = ged_exact(a, b);
    benchmark::DoNotOptimize(d);
  }
}
BENCHMARK(BM_GedExact)->DenseRange(4, 8, 2);

}  // namespace

BENCHMARK_MAIN();
