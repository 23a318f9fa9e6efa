#include <benchmark/benchmark.h>

#include <cmath>

#include "nflow/flow.hpp"
#include "nflow/homotopy.hpp"

using namespace nflow;

namespace {

void bench_rhs_torus4(benchmark::State& state) {
  DomainSpec dom;
  dom.kind = DomainKind::Torus;
  dom.dim = 4;
  int r = static_cast<int>(state.range(0));
  dom.resolution = {r, r, r, r};
  DomainGrid grid(dom);
  SphereTarget target(4);

  InitSpec init;
  init.kind = InitKind::Constant;
  MapField u = init_map(init, grid, target);
  // give the field some structure so the nonlinear terms are exercised
  for (std::int64_t i = 0; i < grid.size(); ++i) {
    auto x = grid.position(i);
    double* v = u.at(i);
    v[0] = std::sin(2 * M_PI * x[0]) * 0.4;
    v[1] = std::sin(2 * M_PI * x[1]) * 0.4;
  }
  target.project(u);

  FlowParams prm;
  prm.variant = FlowVariant::RectifiedN;
  for (auto _ : state) {
    RhsResult rr = flow_rhs(u, grid, target, prm);
    benchmark::DoNotOptimize(rr.F.data.data());
  }
  state.SetItemsProcessed(state.iterations() * grid.size());
}
BENCHMARK(bench_rhs_torus4)->Arg(8)->Arg(16);

void bench_step_sphere2(benchmark::State& state) {
  DomainSpec dom;
  dom.kind = DomainKind::Sphere2;
  dom.dim = 2;
  int r = static_cast<int>(state.range(0));
  dom.resolution = {r, 2 * r, 0, 0};
  DomainGrid grid(dom);
  SphereTarget target(2);

  InitSpec init;
  init.kind = InitKind::DegreeK;
  init.k = 2;
  MapField u0 = init_map(init, grid, target);

  FlowParams prm;
  prm.variant = FlowVariant::RegularizedN;
  prm.epsilon = 1e-3;
  for (auto _ : state) {
    FlowState st;
    st.u = u0;
    step(st, grid, target, prm, 1e30);
    benchmark::DoNotOptimize(st.u.data.data());
  }
  state.SetItemsProcessed(state.iterations() * grid.size());
}
BENCHMARK(bench_step_sphere2)->Arg(32)->Arg(64);

}  // namespace

BENCHMARK_MAIN();
