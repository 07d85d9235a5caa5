// OpenMP kernels against the serial reference, and the two perturbation
// variants on one simulated study.

#include "reference_kernels.hpp"
#include "steam/inference.hpp"
#include "steam/kernels.hpp"
#include "steam/pipeline.hpp"
#include "steam/sim.hpp"

#include <benchmark/benchmark.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

using namespace steam;

namespace {

struct Cloud {
  std::vector<double> a, b, value, qa, qb;
};

Cloud cloud(std::size_t points, std::size_t queries)
{
  Rng rng(11);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Cloud c;
  for (std::size_t j = 0; j < points; ++j)
    c.a.push_back(unit(rng));
  std::sort(c.a.begin(), c.a.end());
  for (std::size_t j = 0; j < points; ++j) {
    c.b.push_back(unit(rng));
    c.value.push_back(unit(rng) < 0.5 ? 1.0 : 0.0);
  }
  for (std::size_t k = 0; k < queries; ++k) {
    c.qa.push_back(unit(rng));
    c.qb.push_back(unit(rng));
  }
  return c;
}

// Plug-in bandwidth at the pooled size, as the density-ratio smoother uses.
double bandwidth(std::size_t points)
{
  return 0.29 * std::pow(static_cast<double>(points), -1.0 / 6.0);
}

void BM_nw2d_parallel(benchmark::State& state)
{
  const auto n = static_cast<std::size_t>(state.range(0));
  const Cloud c = cloud(n, 200);
  kernels::set_thread_count(static_cast<int>(state.range(1)));
  const double h = bandwidth(n);
  for (auto _ : state)
    benchmark::DoNotOptimize(kernels::nw2d(c.a, c.b, c.value, h, h, c.qa, c.qb));
  kernels::set_thread_count(0);
}
BENCHMARK(BM_nw2d_parallel)->Args({2000, 1})->Args({20000, 1})->Args({20000, 0})->Unit(benchmark::kMillisecond);

void BM_nw2d_reference(benchmark::State& state)
{
  const auto n = static_cast<std::size_t>(state.range(0));
  const Cloud c = cloud(n, 200);
  const double h = bandwidth(n);
  for (auto _ : state)
    benchmark::DoNotOptimize(reference::nw2d(c.a, c.b, c.value, h, h, c.qa, c.qb));
}
BENCHMARK(BM_nw2d_reference)->Arg(2000)->Arg(20000)->Unit(benchmark::kMillisecond);

void BM_nw1d_parallel(benchmark::State& state)
{
  const auto n = static_cast<std::size_t>(state.range(0));
  const Cloud c = cloud(n, n);
  const std::vector<double> w(n, 1.0);
  const double h = 0.29 * std::pow(static_cast<double>(n), -0.4);
  for (auto _ : state)
    benchmark::DoNotOptimize(kernels::nw1d(c.a, c.value, w, h, c.qa));
}
BENCHMARK(BM_nw1d_parallel)->Arg(200)->Arg(2000)->Unit(benchmark::kMicrosecond);

void BM_nw1d_reference(benchmark::State& state)
{
  const auto n = static_cast<std::size_t>(state.range(0));
  const Cloud c = cloud(n, n);
  const std::vector<double> w(n, 1.0);
  const double h = 0.29 * std::pow(static_cast<double>(n), -0.4);
  for (auto _ : state)
    benchmark::DoNotOptimize(reference::nw1d(c.a, c.value, w, h, c.qa));
}
BENCHMARK(BM_nw1d_reference)->Arg(200)->Arg(2000)->Unit(benchmark::kMicrosecond);

struct Fitted {
  PreparedData data;
  EstimationConfig config;
  PointEstimate point;
};

const Fitted& fitted()
{
  static const Fitted f = [] {
    SimScenario sc;
    Rng rng(sc.seed);
    const SimDataset ds = generate_dataset(sc, rng);
    EstimationConfig config;
    const auto [mu, pi] = scenario_bases(Misspec::both_correct);
    config.mu_basis = mu;
    config.pi_basis = pi;
    config.methods = {Method::steam};
    PreparedData data = PreparedData::from(ds.data, config);
    PointEstimate point = estimate(data, config);
    return Fitted{std::move(data), config, std::move(point)};
  }();
  return f;
}

void BM_perturb(benchmark::State& state)
{
  const Fitted& f = fitted();
  const auto variant = state.range(0) == 0 ? PerturbVariant::exact : PerturbVariant::approx;
  const Eigen::MatrixXd G = perturbation_matrix(state.range(1), f.data.n(), 5);
  for (auto _ : state)
    benchmark::DoNotOptimize(perturb(f.data, f.point, f.config, G, variant));
  state.SetLabel(std::string(variant_name(variant)));
}
BENCHMARK(BM_perturb)->Args({0, 100})->Args({1, 100})->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
