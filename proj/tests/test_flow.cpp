#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "nflow/diagnostics.hpp"
#include "nflow/flow.hpp"
#include "nflow/homotopy.hpp"

using namespace nflow;

namespace {

DomainGrid torus(int dim, int res) {
  DomainSpec s;
  s.kind = DomainKind::Torus;
  s.dim = dim;
  for (int i = 0; i < dim; ++i) s.resolution[i] = res;
  return DomainGrid(s);
}

DomainGrid sphere(int ntheta, int nphi) {
  DomainSpec s;
  s.kind = DomainKind::Sphere2;
  s.dim = 2;
  s.resolution = {ntheta, nphi, 0, 0};
  return DomainGrid(s);
}

// Low-frequency random S^2-valued field on the torus. `amp` controls how far
// it swings from the north pole.
MapField random_smooth(const DomainGrid& g, const SphereTarget& t, std::uint64_t seed,
                       double amp) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> phase(0.0, 2 * M_PI);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  const int modes = 3;
  std::vector<double> cx(modes * 3 * 4), ph(modes * 3 * 4);
  for (auto& v : cx) v = coef(rng);
  for (auto& v : ph) v = phase(rng);

  MapField u(g.size(), 3);
  for (std::int64_t i = 0; i < g.size(); ++i) {
    auto x = g.position(i);
    double* p = u.at(i);
    p[2] = 1.0;
    for (int c = 0; c < 2; ++c) {
      double v = 0;
      for (int m = 0; m < modes; ++m) {
        for (int ax = 0; ax < g.dim(); ++ax) {
          int idx = (c * modes + m) * 4 + ax;
          v += cx[idx] * std::sin(2 * M_PI * (m + 1) * x[ax] + ph[idx]);
        }
      }
      p[c] = amp * v;
    }
  }
  t.project(u);
  return u;
}

// Tangent perturbation field with the same smoothness.
MapField random_tangent(const MapField& u, const DomainGrid& g, const SphereTarget& t,
                        std::uint64_t seed) {
  MapField w = random_smooth(g, t, seed, 0.5);
  for (std::int64_t i = 0; i < g.size(); ++i) {
    const double* p = u.at(i);
    double* v = w.at(i);
    double dot = 0;
    for (int c = 0; c < 3; ++c) dot += v[c] * p[c];
    for (int c = 0; c < 3; ++c) v[c] -= dot * p[c];
  }
  return w;
}

double inner(const MapField& a, const MapField& b, const DomainGrid& g) {
  ScalarField f(g.size());
  for (std::int64_t i = 0; i < g.size(); ++i) {
    double s = 0;
    for (int c = 0; c < a.L; ++c) s += a.at(i)[c] * b.at(i)[c];
    f[i] = s;
  }
  return integrate(f, g);
}

double fd_gradient_error(FlowVariant variant, const DomainGrid& g, const SphereTarget& t,
                         std::uint64_t seed) {
  FlowParams prm;
  prm.variant = variant;
  prm.a = 0.7;
  prm.epsilon = 1e-2;
  prm.p = g.dim() > 2 && variant == FlowVariant::PFlow ? 3.0 : 2.0;

  MapField u = random_smooth(g, t, seed, 0.6);
  MapField w = random_tangent(u, g, t, seed + 1000);

  RhsResult rr = flow_rhs(u, g, t, prm);
  double predicted = -inner(rr.F, w, g);

  FunctionalSpec spec = functional_for(prm, g.dim());
  const double tau = 1e-5;
  MapField up = u, um = u;
  for (std::size_t i = 0; i < u.data.size(); ++i) {
    up.data[i] = u.data[i] + tau * w.data[i];
    um.data[i] = u.data[i] - tau * w.data[i];
  }
  t.project(up);
  t.project(um);
  double fd = (energy(up, g, spec) - energy(um, g, spec)) / (2 * tau);
  return std::abs(fd - predicted) / std::max(std::abs(fd), 1e-30);
}

}  // namespace

TEST_CASE("flow_rhs is the negative discrete gradient of each functional") {
  DomainGrid g = torus(2, 24);
  SphereTarget t(2);
  for (FlowVariant v : {FlowVariant::RectifiedN, FlowVariant::RegularizedN,
                        FlowVariant::MinimizingN, FlowVariant::PFlow}) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      CHECK(fd_gradient_error(v, g, t, seed * 31) < 1e-4);
    }
  }
  // the structure holds in the critical dimension 4 as well, where the
  // p-flow admits a genuine p in (2, n)
  DomainGrid g4 = torus(4, 8);
  CHECK(fd_gradient_error(FlowVariant::RectifiedN, g4, t, 99) < 1e-4);
  CHECK(fd_gradient_error(FlowVariant::PFlow, g4, t, 101) < 1e-4);
}

TEST_CASE("identity map of S^2 is nearly stationary") {
  DomainGrid g = sphere(64, 128);
  SphereTarget t(2);
  InitSpec init;
  init.kind = InitKind::Identity;
  MapField u = init_map(init, g, t);

  FlowParams prm;
  prm.variant = FlowVariant::RegularizedN;
  prm.epsilon = 1e-6;
  ScalarField res = el_residual(u, g, t, prm);
  CHECK(sup_norm(res) < 5e-2);
}

TEST_CASE("stable_dt matches the quasi-uniform bound at a = 1") {
  // with full rectification the mobility cancels the diffusion coefficient
  // and dt = cfl h^2 / (2 n (n-1)) independent of |nabla u|
  for (int n : {2, 4}) {
    int res = (n == 2) ? 32 : 8;
    DomainGrid g = torus(n, res);
    SphereTarget t(2);
    FlowParams prm;
    prm.variant = FlowVariant::RectifiedN;
    prm.a = 1.0;
    prm.cfl = 0.25;
    prm.dt_max = 1e9;
    double h = g.spacing(0);
    double expected = prm.cfl * h * h / (2.0 * n * (n - 1));

    for (double amp : {0.1, 0.9}) {
      MapField u = random_smooth(g, t, 3, amp);
      RhsResult rr = flow_rhs(u, g, t, prm);
      CHECK(stable_dt(rr.s2, g, prm) == doctest::Approx(expected).epsilon(1e-12));
    }
  }
}

TEST_CASE("stable_dt degenerates without rectification") {
  // a = 0: doubling the gradient quarters the step in dimension 4
  DomainGrid g = torus(4, 8);
  SphereTarget t(2);
  FlowParams prm;
  prm.variant = FlowVariant::RectifiedN;
  prm.a = 0.0;
  prm.dt_max = 1e9;

  MapField u = random_smooth(g, t, 3, 0.4);
  JacobianField J = gradient(u, g);
  ScalarField s2 = grad_norm_sq(J, g);
  ScalarField s2x4 = s2;
  for (auto& v : s2x4) v *= 4.0;  // gradients doubled
  double d1 = stable_dt(s2, g, prm);
  double d2 = stable_dt(s2x4, g, prm);
  CHECK(d1 / d2 == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("guarded step never increases the variant energy") {
  DomainGrid g = torus(2, 24);
  SphereTarget t(2);
  FlowParams prm;
  prm.variant = FlowVariant::MinimizingN;
  prm.epsilon = 1e-3;

  FlowState st;
  st.u = random_smooth(g, t, 21, 0.8);
  FunctionalSpec spec = functional_for(prm, g.dim());
  double e_prev = energy(st.u, g, spec);
  for (int k = 0; k < 50; ++k) {
    StepResult sr = step(st, g, t, prm, 1e30);  // request is capped internally
    CHECK(sr.energy_after <= sr.energy_before * (1.0 + 1e-10));
    CHECK(sr.energy_before == doctest::Approx(e_prev).epsilon(1e-12));
    e_prev = sr.energy_after;
  }
}

TEST_CASE("run reaches stationarity and satisfies the energy identity") {
  DomainGrid g = torus(2, 32);
  SphereTarget t(2);
  FlowParams prm;
  prm.variant = FlowVariant::RegularizedN;
  prm.epsilon = 1e-2;
  prm.t_end = 50.0;
  prm.el_tol = 1e-3;
  prm.monitor_cadence = 10;

  MapField u0 = random_smooth(g, t, 8, 0.3);
  RunResult rr = run(u0, g, t, prm);
  CHECK(rr.traj.converged);
  // small data, trivial topology: the flow relaxes to a constant
  CHECK(rr.traj.samples.back().energy_n < 1e-4);
  // the defect is first order in dt and accumulates over the transient;
  // the tight bound on a short fixed-length run is in the acceptance suite
  CHECK(energy_identity_residual(rr.traj, rr.state.t) < 2e-2);
  // energies sampled along the run decrease
  for (std::size_t i = 1; i < rr.traj.samples.size(); ++i)
    CHECK(rr.traj.samples[i].energy_variant <=
          rr.traj.samples[i - 1].energy_variant * (1.0 + 1e-10));
}

TEST_CASE("parameter validation") {
  DomainGrid g = torus(2, 8);
  SphereTarget t(2);
  MapField u0 = random_smooth(g, t, 1, 0.2);
  FlowParams prm;
  prm.a = 1.5;
  CHECK_THROWS_AS(run(u0, g, t, prm), std::invalid_argument);
  prm.a = 1.0;
  prm.cfl = 0.0;
  CHECK_THROWS_AS(run(u0, g, t, prm), std::invalid_argument);
}
