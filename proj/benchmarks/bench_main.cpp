#include <benchmark/benchmark.h>

#include <vector>

#include "llbar/config.hpp"
#include "llbar/integrator.hpp"
#include "llbar/selftest.hpp"

namespace {

llbar::SpectralBasis make_basis(int dim, int points) {
  const std::vector<double> len(dim, 1.0);
  const std::vector<int> pts(dim, points), cut(dim, points / 2);
  return llbar::build_basis(llbar::BoxDomain::make(len, pts), cut);
}

void BM_RoundTrip(benchmark::State& state) {
  const auto b = make_basis(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  const auto u = llbar::random_field(b, b.max_cutoff(), 1, 0);
  for (auto _ : state) {
    auto v = llbar::inverse_transform(b, u, llbar::GridLevel::padded);
    benchmark::DoNotOptimize(llbar::forward_transform(b, v));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(b.mode_count()));
}
BENCHMARK(BM_RoundTrip)->Args({1, 128})->Args({2, 64})->Args({3, 16});

void BM_Drift(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  const auto b = make_basis(dim, static_cast<int>(state.range(1)));
  const auto u = llbar::random_field(b, b.max_cutoff(), 2, 0);
  const auto p = llbar::pairing_params(dim);
  const auto fam = llbar::build_noise_family(b, {0, 2.0, 0.0, 0.0});
  llbar::Stepper st(b, p, fam, {});
  for (auto _ : state) benchmark::DoNotOptimize(st.drift(u));
}
BENCHMARK(BM_Drift)->Args({1, 128})->Args({2, 64});

void BM_Step(benchmark::State& state) {
  const auto r = llbar::resolve(llbar::preset("below-curie"));
  const auto& c = r.config;
  llbar::Stepper st(r.basis, c.model, r.noise, c.scheme);
  const llbar::NoisePath path{c.seed, 0, c.scheme.dt, 1};
  llbar::TrajectoryState s{0.0, r.u0, 0};
  for (auto _ : state) {
    st.step(s, path);
    if (s.step >= 1000) s = {0.0, r.u0, 0};
  }
}
BENCHMARK(BM_Step);

}  // namespace

BENCHMARK_MAIN();
