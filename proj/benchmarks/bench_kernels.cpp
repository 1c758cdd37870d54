#include <vector>

#include <benchmark/benchmark.h>

#include "cursor/cur2.hpp"
#include "cursor/problems.hpp"
#include "cursor/rng.hpp"
#include "cursor/tensor3.hpp"

namespace {

struct Fixture {
  cursor::PointSet p1;
  cursor::PointSet p2;
  cursor::FirstOrderCompat m;
  cursor::CurFactors factors;
  cursor::CandidateSet cands;
  std::vector<cursor::Triple> triples;

  Fixture(std::size_t n, std::size_t c, std::size_t k, std::size_t t)
      : p1(cursor::normalize(cursor::gen_synthetic({n, n, 0.02, 1}).source)),
        p2(cursor::normalize(cursor::gen_synthetic({n, n, 0.02, 1}).target)),
        m(cursor::first_order(p1, p2, {})),
        factors(cursor::build_cur(p1, p2, c, 2, {})),
        cands(cursor::top_k(cursor::prl2_match(factors, m.m, {}).soft, k)),
        triples(cursor::sample_hyperedges(n, t, 3)) {}
};

const Fixture& fixture(std::size_t n) {
  static const Fixture f30(30, 15, 5, 900);
  static const Fixture f100(100, 100, 15, 10000);
  return n == 30 ? f30 : f100;
}

std::vector<double> ones(std::size_t n) { return std::vector<double>(n, 1.0); }

void BM_FitU(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto c = static_cast<std::size_t>(state.range(1));
  const auto& f = fixture(n);
  const cursor::CompatMatrix h(f.p1, f.p2, {});
  const auto sample = cursor::sample_cur(n, n, c, 4);
  const auto C = cursor::build_columns(h, sample);
  const auto values = cursor::omega_values(h, sample);
  for (auto _ : state) benchmark::DoNotOptimize(cursor::fit_U(C, sample.omega, values));
}
BENCHMARK(BM_FitU)->Args({30, 15})->Args({100, 50})->Args({100, 100})->Unit(benchmark::kMillisecond);

void BM_ApplyH(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  const auto x = ones(f.factors.dim());
  for (auto _ : state) benchmark::DoNotOptimize(cursor::apply_H(f.factors, x));
}
BENCHMARK(BM_ApplyH)->Arg(30)->Arg(100);

void BM_FiberGeneration(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  const auto r = static_cast<std::size_t>(state.range(1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(cursor::generate_fiber_cur(f.p1, f.p2, f.cands, f.triples, r, 10.0));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.triples.size()));
}
BENCHMARK(BM_FiberGeneration)->Args({30, 5})->Args({100, 20})->Unit(benchmark::kMillisecond);

void BM_ExhaustiveGeneration(benchmark::State& state) {
  const auto& f = fixture(30);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cursor::generate_exhaustive(f.p1, f.p2, f.triples, 270, 10.0, 1e12));
  }
}
BENCHMARK(BM_ExhaustiveGeneration)->Unit(benchmark::kMillisecond);

void BM_ModeProduct(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  const auto t = cursor::generate_fiber_cur(f.p1, f.p2, f.cands, f.triples, 20, 10.0);
  const auto x = ones(t.dim());
  const auto threads = static_cast<unsigned>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(cursor::mode_product_xx(t, x, threads));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(t.nnz()));
}
BENCHMARK(BM_ModeProduct)->Args({30, 1})->Args({100, 1})->Args({100, 2});

}  // namespace
BENCHMARK_MAIN();
