#include <benchmark/benchmark.h>

#include <cmath>
#include <utility>
#include <vector>

#include "tcilab/heat.hpp"
#include "tcilab/markov.hpp"
#include "tcilab/metric_space.hpp"
#include "tcilab/rng.hpp"
#include "tcilab/spde.hpp"
#include "tcilab/transport.hpp"

namespace {

using namespace tci;

std::pair<DiscreteMeasure, DiscreteMeasure> random_instance(std::size_t n,
                                                            std::uint64_t seed) {
  NormalStream rng(seed, 0);
  std::vector<double> coords(n);
  std::vector<std::string> labels(n);
  double x = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    x += rng.next_uniform(0.05, 1.0);
    coords[i] = x;
    labels[i] = "x" + std::to_string(i);
  }
  SpacePtr space = line_space(std::move(labels), coords);
  auto weights = [&rng, n] {
    std::vector<double> w(n);
    double sum = 0.0;
    for (double& v : w) {
      v = rng.next_uniform();
      sum += v;
    }
    for (double& v : w) v /= sum;
    return w;
  };
  DiscreteMeasure nu(space, weights());
  DiscreteMeasure mu(space, weights());
  return {std::move(nu), std::move(mu)};
}

void BM_ExactTransport(benchmark::State& state) {
  const auto [nu, mu] = random_instance(static_cast<std::size_t>(state.range(0)), 7);
  for (auto _ : state)
    benchmark::DoNotOptimize(w2_squared_exact(nu, mu).value);
}
BENCHMARK(BM_ExactTransport)->Arg(8)->Arg(16)->Arg(32)->Arg(64)->Arg(81);

void BM_SinkhornTransport(benchmark::State& state) {
  const auto [nu, mu] = random_instance(static_cast<std::size_t>(state.range(0)), 7);
  for (auto _ : state)
    benchmark::DoNotOptimize(w2_squared_sinkhorn(nu, mu, 0.05, 20000, 1e-8));
}
BENCHMARK(BM_SinkhornTransport)->Arg(8)->Arg(16)->Arg(32);

void BM_PathLawEnumeration(benchmark::State& state) {
  SpacePtr base = line_space({"a", "b", "c"}, {0.0, 1.0, 2.0});
  const double third = 1.0 / 3.0;
  MarkovChainSpec spec(base,
                       {{0.5, 0.5, 0.0}, {0.25, 0.5, 0.25}, {0.0, 0.5, 0.5}},
                       static_cast<int>(state.range(0)),
                       DiscreteMeasure(base, {third, third, third}));
  PathSpace ps(spec);
  for (auto _ : state) benchmark::DoNotOptimize(path_law(spec, ps).weight(0));
  state.SetComplexityN(static_cast<long long>(ps.paths()));
}
BENCHMARK(BM_PathLawEnumeration)->Arg(3)->Arg(6)->Arg(9);

void BM_EntropyChain(benchmark::State& state) {
  SpacePtr base = line_space({"a", "b", "c"}, {0.0, 1.0, 2.0});
  const double third = 1.0 / 3.0;
  MarkovChainSpec spec(base,
                       {{0.5, 0.5, 0.0}, {0.25, 0.5, 0.25}, {0.0, 0.5, 0.5}}, 3,
                       DiscreteMeasure(base, {third, third, third}));
  PathSpace ps(spec);
  DiscreteMeasure law = path_law(spec, ps);
  NormalStream rng(5, 0);
  std::vector<double> phi(ps.paths());
  for (double& v : phi) v = rng.next();
  DiscreteMeasure q = tilt_measure(law, phi, 1.0);
  for (auto _ : state)
    benchmark::DoNotOptimize(entropy_chain_identity(q, spec, ps).total);
}
BENCHMARK(BM_EntropyChain);

void BM_SpdeStep(benchmark::State& state) {
  SpdeConfig cfg;
  cfg.intervals = static_cast<std::size_t>(state.range(0));
  cfg.horizon = 0.25;
  cfg.dt = cfg.horizon / 512.0;
  cfg.coeffs = coeff_catalog("sin");
  cfg.n_paths = 2;
  GridFunction f = initial_profile("sin:1", cfg.intervals);
  std::vector<double> noise(cfg.intervals - 1, 0.3);
  std::vector<double> state_vec = f.values();
  for (auto _ : state) {
    state_vec = step(state_vec, noise, cfg);
    benchmark::DoNotOptimize(state_vec.data());
  }
}
BENCHMARK(BM_SpdeStep)->Arg(64)->Arg(256)->Arg(1024);

void BM_NoiseField(benchmark::State& state) {
  SpdeConfig cfg;
  cfg.intervals = 64;
  cfg.horizon = 0.25;
  cfg.dt = cfg.horizon / 512.0;
  cfg.coeffs = coeff_catalog("additive");
  cfg.n_paths = 2;
  std::uint64_t id = 0;
  for (auto _ : state) {
    NoiseField field(cfg, id++);
    benchmark::DoNotOptimize(field.xi(0, 1));
  }
}
BENCHMARK(BM_NoiseField);

void BM_SemigroupApply(benchmark::State& state) {
  const std::size_t J = static_cast<std::size_t>(state.range(0));
  GridFunction f = initial_profile("hat:1", J);
  for (auto _ : state)
    benchmark::DoNotOptimize(semigroup_apply(f, 0.1)[J / 2]);
}
BENCHMARK(BM_SemigroupApply)->Arg(64)->Arg(256);

}  // namespace

BENCHMARK_MAIN();
