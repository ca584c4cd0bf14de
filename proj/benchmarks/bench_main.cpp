#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "wlab/entropy.hpp"
#include "wlab/geometry.hpp"
#include "wlab/heat_flow.hpp"
#include "wlab/lsi.hpp"
#include "wlab/stochastic.hpp"
#include "wlab/witten_operator.hpp"

using namespace wlab;

namespace {

ModelSpace cosine_circle(std::size_t n) {
  SpaceSpec s;
  s.nodes = n;
  s.potential = PotentialSpec::cosine(0.1);
  s.m = 3.0;
  return ModelSpace::build(s);
}

ModelSpace flat_line(std::size_t n) {
  SpaceSpec s;
  s.kind = SpaceKind::line;
  s.nodes = n;
  s.length = 24.0;
  s.origin = -12.0;
  return ModelSpace::build(s);
}

void BM_Assemble(benchmark::State& st) {
  const auto s = cosine_circle(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(assemble(s));
}
BENCHMARK(BM_Assemble)->RangeMultiplier(2)->Range(128, 2048);

void BM_Apply(benchmark::State& st) {
  const auto s = cosine_circle(static_cast<std::size_t>(st.range(0)));
  const auto op = assemble(s);
  std::vector<double> u(s.size()), out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) u[i] = std::sin(3.0 * s.x(i));
  for (auto _ : st) {
    op.apply(u, out);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_Apply)->RangeMultiplier(2)->Range(128, 2048);

void BM_HeatKernel(benchmark::State& st) {
  const auto op = assemble(cosine_circle(static_cast<std::size_t>(st.range(0))));
  for (auto _ : st) benchmark::DoNotOptimize(HeatKernel(op));
}
BENCHMARK(BM_HeatKernel)->RangeMultiplier(2)->Range(128, 512)->Unit(benchmark::kMillisecond);

void BM_CrankNicolson(benchmark::State& st) {
  const auto s = cosine_circle(static_cast<std::size_t>(st.range(0)));
  const auto op = assemble(s);
  std::vector<double> u0(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) u0[i] = 0.05 + std::exp(-std::pow(s.x(i) - 3.0, 2) / 0.2);
  const double dt = default_time_step(op);
  for (auto _ : st) benchmark::DoNotOptimize(solve(op, u0, 1.0, dt, 16));
}
BENCHMARK(BM_CrankNicolson)->RangeMultiplier(2)->Range(128, 512)->Unit(benchmark::kMillisecond);

void BM_EntropyTrace(benchmark::State& st) {
  const auto s = cosine_circle(256);
  const auto op = assemble(s);
  const HeatKernel kern(op);
  const auto times = geometric_times(0.05, 1.2, 20);
  for (auto _ : st) benchmark::DoNotOptimize(h_m_trace(s, op, kern, 128, 3.0, times));
}
BENCHMARK(BM_EntropyTrace)->Unit(benchmark::kMillisecond);

void BM_Simulate(benchmark::State& st) {
  const auto s = cosine_circle(256);
  SimulationOptions o;
  o.T = 1.0;
  o.dt = 1e-3;
  o.paths = static_cast<std::size_t>(st.range(0));
  o.record_every = 100;
  for (auto _ : st) benchmark::DoNotOptimize(simulate(s, 2.0, o));
  st.SetItemsProcessed(st.iterations() * st.range(0) * 1000);
}
BENCHMARK(BM_Simulate)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_MinimizeMu(benchmark::State& st) {
  const auto s = flat_line(static_cast<std::size_t>(st.range(0)));
  const auto op = assemble(s);
  for (auto _ : st) benchmark::DoNotOptimize(minimize_mu(s, op, 0.25, 1.0));
}
BENCHMARK(BM_MinimizeMu)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
