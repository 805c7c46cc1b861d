#include <benchmark/benchmark.h>

#include <cmath>

#include "crflow/bubbles.hpp"
#include "crflow/flow.hpp"
#include "crflow/heisenberg.hpp"
#include "crflow/manifold.hpp"
#include "crflow/quadrature.hpp"
#include "crflow/shadow.hpp"

using namespace crflow;

namespace {

FlowState wavy(int N) {
  auto m = make_model({N, N, N, 8});
  auto f = sample(m, [](const PolarPoint& p) { return 1.0 + 0.3 * std::cos(2 * kPi * p.x); });
  auto u = sample(m, [](const PolarPoint& p) { return 1.0 + 0.2 * std::sin(2 * kPi * p.y); });
  return make_state(m, normalize_constraint(*m, u, f), f);
}

void BM_Sublaplacian(benchmark::State& st) {
  const int N = static_cast<int>(st.range(0));
  auto s = wavy(N);
  std::vector<double> out(s.u.size()), scratch;
  for (auto _ : st) {
    s.model->apply_sublaplacian(s.u.values, out, scratch);
    benchmark::DoNotOptimize(out.data());
  }
  st.SetItemsProcessed(st.iterations() * static_cast<long>(s.u.size()));
}
BENCHMARK(BM_Sublaplacian)->Arg(16)->Arg(32)->Arg(64);

void BM_FlowStep(benchmark::State& st) {
  const int N = static_cast<int>(st.range(0));
  auto s = wavy(N);
  const double dt = stable_dt(s, 0.2);
  for (auto _ : st) {
    auto next = step(s, dt);
    benchmark::DoNotOptimize(next.u.values.data());
  }
  st.SetItemsProcessed(st.iterations() * static_cast<long>(s.u.size()));
}
BENCHMARK(BM_FlowStep)->Arg(16)->Arg(32)->Arg(64);

void BM_Constants(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(compute_constants(1, 1e-8));
}
BENCHMARK(BM_Constants)->Unit(benchmark::kMillisecond);

void BM_BubbleFit(benchmark::State& st) {
  const int N = static_cast<int>(st.range(0));
  auto m = make_model({N, N, N, 8});
  const std::size_t a = m->index(N / 3, N / 2, N / 4);
  GreenData g;
  g.flat = true;
  g.pole = a;
  g.mass = 1.0;
  auto u = test_function(m, a, 0.1, 0.2, g);
  const auto s = make_state(m, u, ScalarField(m, 1.0));
  FitOptions o;
  o.delta = 0.2;
  o.Lambda = 1.0;
  for (auto _ : st) benchmark::DoNotOptimize(fit_bubble(s, std::nullopt, o));
}
BENCHMARK(BM_BubbleFit)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_ShadowRK4(benchmark::State& st) {
  ShadowState s;
  s.eps = 0.1;
  s.a = {0.2, -0.1, 0.0};
  s.landscape = std::make_shared<const Landscape>(peak_landscape(0.5, 1.0, 0.4));
  s.mass = 0.01;
  s.lambda = 10.0;
  s.ratios = closed_form_constants_n1().ratios();
  for (auto _ : st) benchmark::DoNotOptimize(integrate(s, {2.0, 0.005, 1e-4, 1.0, 100}));
}
BENCHMARK(BM_ShadowRK4)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
