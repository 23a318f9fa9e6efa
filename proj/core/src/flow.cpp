#include "nflow/flow.hpp"

#include <cmath>
#include <stdexcept>

#include "nflow/diagnostics.hpp"
#include "nflow/homotopy.hpp"

namespace nflow {

std::string to_string(FlowVariant v) {
  switch (v) {
    case FlowVariant::RectifiedN: return "rectified_n";
    case FlowVariant::RegularizedN: return "regularized_n";
    case FlowVariant::MinimizingN: return "minimizing_n";
    case FlowVariant::PFlow: return "p_flow";
  }
  return "?";
}

namespace {

inline double pow_half_int(double s2, int k) {
  if (k <= 0) return 1.0;
  double s = std::sqrt(s2);
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= s;
  return r;
}

void validate(const FlowParams& prm, int n) {
  if (prm.a < 0.0 || prm.a > 1.0) throw std::invalid_argument("flow: a must lie in [0,1]");
  if (!(prm.cfl > 0.0) || prm.cfl > 1.0) throw std::invalid_argument("flow: cfl must lie in (0,1]");
  if (prm.variant == FlowVariant::PFlow && (prm.p < 2.0 || prm.p > n))
    throw std::invalid_argument("flow: p must lie in [2, n]");
}

}  // namespace

FunctionalSpec functional_for(const FlowParams& prm, int n) {
  FunctionalSpec spec;
  spec.n = n;
  spec.p = prm.p;
  spec.eps = prm.eps_eff();
  switch (prm.variant) {
    case FlowVariant::RectifiedN:
    case FlowVariant::RegularizedN:
      spec.kind = FunctionalKind::EnergyNEps;
      break;
    case FlowVariant::MinimizingN:
      spec.kind = FunctionalKind::EnergyMinEps;
      break;
    case FlowVariant::PFlow:
      spec.kind = FunctionalKind::EnergyPEps;
      break;
  }
  return spec;
}

double mobility(double s2, const FlowParams& prm, int n) {
  const double eps = prm.eps_eff();
  switch (prm.variant) {
    case FlowVariant::RectifiedN:
    case FlowVariant::RegularizedN:
      return 1.0 - prm.a + eps + prm.a * pow_half_int(s2, n - 2);
    case FlowVariant::MinimizingN:
      return 1.0 - prm.a + eps + prm.a * pow_half_int(s2, n - 2) +
             eps * pow_half_int(s2, n - 1);
    case FlowVariant::PFlow:
      return 1.0;
  }
  throw std::logic_error("mobility: bad variant");
}

double diffusion_coef(double s2, const FlowParams& prm, int n) {
  return density_slope(s2, functional_for(prm, n));
}

RhsResult flow_rhs(const MapField& u, const DomainGrid& grid,
                   const SphereTarget& target, const FlowParams& prm) {
  validate(prm, grid.dim());
  const std::int64_t N = grid.size();
  const int n = grid.dim();
  const int L = u.L;
  const FunctionalSpec spec = functional_for(prm, n);

  JacobianField J = gradient(u, grid);
  ScalarField s2 = grad_norm_sq(J, grid);

  // Contravariant flux c(s) g^{ii} d_i u, built in place.
#pragma omp parallel for schedule(static)
  for (std::int64_t x = 0; x < N; ++x) {
    double c = density_slope(s2[x], spec);
    for (int i = 0; i < n; ++i) {
      double f = c * grid.inv_metric(i, x);
      double* j = J.at(x, i);
      for (int a = 0; a < L; ++a) j[a] *= f;
    }
  }

  RhsResult out;
  out.F = divergence(J, grid);
  out.s2 = std::move(s2);

  // Curvature term, then tangential projection. The projection removes the
  // discretization leakage in the normal direction, so that -F is the exact
  // constrained gradient of the discrete functional.
#pragma omp parallel for schedule(static)
  for (std::int64_t x = 0; x < N; ++x) {
    double c = density_slope(out.s2[x], spec);
    const double* p = u.at(x);
    double* f = out.F.at(x);
    double dot = 0.0;
    for (int a = 0; a < L; ++a) {
      f[a] += c * out.s2[x] * p[a];
      dot += f[a] * p[a];
    }
    for (int a = 0; a < L; ++a) f[a] -= dot * p[a];
  }
  return out;
}

double stable_dt(const ScalarField& s2, const DomainGrid& grid, const FlowParams& prm) {
  validate(prm, grid.dim());
  const std::int64_t N = grid.size();
  const int n = grid.dim();
  const double eps = prm.eps_eff();

  double worst = 0.0;
#pragma omp parallel for schedule(static) reduction(max : worst)
  for (std::int64_t x = 0; x < N; ++x) {
    double lam;
    switch (prm.variant) {
      case FlowVariant::RectifiedN:
      case FlowVariant::RegularizedN:
        lam = (n - 1) * (eps + pow_half_int(s2[x], n - 2));
        break;
      case FlowVariant::MinimizingN:
        lam = (n - 1) * (eps + pow_half_int(s2[x], n - 2)) +
              eps * n * pow_half_int(s2[x], n - 1);
        break;
      case FlowVariant::PFlow: {
        double s = s2[x] > 0 ? std::sqrt(s2[x]) : 0.0;
        double spm2 = (prm.p == 2.0) ? 1.0 : std::pow(s, prm.p - 2.0);
        lam = (prm.p - 1) * (eps + spm2) + eps * n * pow_half_int(s2[x], n - 1);
        break;
      }
      default:
        lam = 0.0;
    }
    lam /= mobility(s2[x], prm, n);
    double stiff = 0.0;
    for (int i = 0; i < n; ++i)
      stiff += 2.0 * grid.inv_metric(i, x) / (grid.spacing(i) * grid.spacing(i));
    double v = lam * stiff;
    if (v > worst) worst = v;
  }
  double cap = prm.dt_max > 0.0 ? prm.dt_max : grid.min_spacing();
  if (worst <= 0.0) return cap;
  double dt = prm.cfl / worst;
  return dt < cap ? dt : cap;
}

// Gradient-norm field smoothed by a stencil max. The step divides by the
// mobility evaluated here rather than pointwise: at an isolated zero of the
// gradient the pointwise mobility collapses to eps while the divergence term
// is still driven by O(1) neighbor coefficients, and the explicit update
// would be stiff far beyond what stable_dt accounts for. Taking the star max
// bounds the local rate by the same neighbor coefficients and restores the
// (n-1) stiffness ratio the step size is based on; where the gradient varies
// slowly it changes nothing, and it is consistent as h -> 0.
ScalarField star_max_s2(const ScalarField& s2, const DomainGrid& grid) {
  const std::int64_t N = grid.size();
  const int n = grid.dim();
  ScalarField out(static_cast<std::size_t>(N));
  const bool sphere = grid.kind() == DomainKind::Sphere2;
  const int nth = sphere ? grid.res(0) : 0;
#pragma omp parallel for schedule(static)
  for (std::int64_t x = 0; x < N; ++x) {
    double m = s2[x];
    for (int i = 0; i < n; ++i) {
      for (int sgn : {-1, 1}) {
        if (sphere && i == 0) {
          std::int64_t row = x / grid.res(1);
          if (row + sgn < 0 || row + sgn > nth - 1) continue;
        }
        double v = s2[grid.neighbor(x, i, sgn)];
        if (v > m) m = v;
      }
    }
    out[static_cast<std::size_t>(x)] = m;
  }
  return out;
}

StepResult step(FlowState& state, const DomainGrid& grid, const SphereTarget& target,
                const FlowParams& prm, double dt_request) {
  const std::int64_t N = grid.size();
  const int L = state.u.L;
  const FunctionalSpec spec = functional_for(prm, grid.dim());

  RhsResult rhs = flow_rhs(state.u, grid, target, prm);
  double e_before = energy_from_s2(rhs.s2, grid, spec);

  double el_sup = 0.0;
#pragma omp parallel for schedule(static) reduction(max : el_sup)
  for (std::int64_t x = 0; x < N; ++x) {
    const double* f = rhs.F.at(x);
    double m2 = 0.0;
    for (int a = 0; a < L; ++a) m2 += f[a] * f[a];
    if (m2 > el_sup) el_sup = m2;
  }
  el_sup = std::sqrt(el_sup);

  double dt = std::min(dt_request, stable_dt(rhs.s2, grid, prm));
  if (!(dt > 0.0)) throw std::runtime_error("step: nonpositive time step");

  ScalarField s2hat = star_max_s2(rhs.s2, grid);

  MapField trial(N, L);
  StepResult res;
  res.energy_before = e_before;
  res.el_sup = el_sup;
  for (int halving = 0;; ++halving) {
    if (halving > FlowParams::kMaxHalvings)
      throw std::runtime_error("step: energy guard exhausted 20 halvings (stiff state)");
#pragma omp parallel for schedule(static)
    for (std::int64_t x = 0; x < N; ++x) {
      double mob = mobility(s2hat[x], prm, grid.dim());
      const double* ux = state.u.at(x);
      const double* f = rhs.F.at(x);
      double* v = trial.at(x);
      for (int a = 0; a < L; ++a) v[a] = ux[a] + dt * f[a] / mob;
      target.project(v);
    }
    JacobianField Jt = gradient(trial, grid);
    ScalarField s2t = grad_norm_sq(Jt, grid);
    double e_after = energy_from_s2(s2t, grid, spec);
    if (e_after <= e_before * (1.0 + FlowParams::kGuardTol) + 1e-300) {
      // Dissipation increment with the same mobility the update divided by,
      // so the discrete energy identity telescopes.
      std::vector<double> contrib(static_cast<std::size_t>(N));
#pragma omp parallel for schedule(static)
      for (std::int64_t x = 0; x < N; ++x) {
        double mob = mobility(s2hat[x], prm, grid.dim());
        const double* ux = state.u.at(x);
        const double* v = trial.at(x);
        double d2 = 0.0;
        for (int a = 0; a < L; ++a) {
          double d = v[a] - ux[a];
          d2 += d * d;
        }
        contrib[static_cast<std::size_t>(x)] = grid.quad_weight(x) * mob * d2;
      }
      state.dissipation += pairwise_sum(contrib) / dt;
      state.u = std::move(trial);
      state.t += dt;
      state.step_count += 1;
      res.dt = dt;
      res.halvings = halving;
      res.energy_after = e_after;
      return res;
    }
    state.guard_rejects += 1;
    dt *= 0.5;
  }
}

RunResult run(const MapField& u0, const DomainGrid& grid, const SphereTarget& target,
              const FlowParams& prm) {
  validate(prm, grid.dim());
  RunResult out;
  out.state.u = u0;
  target.project(out.state.u);

  const bool sphere_degree = prm.track_degree && grid.kind() == DomainKind::Sphere2 &&
                             target.m() == 2;
  FunctionalSpec en{FunctionalKind::EnergyN, grid.dim(), prm.p, 0.0};
  double e_n0 = energy(out.state.u, grid, en);
  double eps0 = prm.concentration_eps0 > 0.0 ? prm.concentration_eps0 : 0.1 * e_n0;

  int prev_conc = -1;
  double prev_degree = 0.0;
  bool have_prev_degree = false;

  auto sample_now = [&](double el_sup) {
    Sample s;
    s.t = out.state.t;
    s.step = out.state.step_count;
    s.energy_n = energy(out.state.u, grid, en);
    s.energy_variant = energy(out.state.u, grid, functional_for(prm, grid.dim()));
    s.dissipation = out.state.dissipation;
    s.el_sup = el_sup;
    s.guard_rejects = out.state.guard_rejects;
    if (sphere_degree) {
      s.degree = degree_real(out.state.u, grid);
      if (have_prev_degree && std::lround(s.degree) != std::lround(prev_degree)) {
        out.traj.events.push_back({"degree_change", s.t, s.step, s.degree});
      }
      prev_degree = s.degree;
      have_prev_degree = true;
    }
    if (prm.track_concentration) {
      auto conc = concentration_scan(out.state.u, grid, prm.concentration_radius, eps0);
      s.concentration_count = static_cast<int>(conc.size());
      if (prev_conc >= 0 && s.concentration_count > prev_conc)
        out.traj.events.push_back({"concentration_appeared", s.t, s.step,
                                   static_cast<double>(s.concentration_count)});
      if (prev_conc >= 0 && s.concentration_count < prev_conc)
        out.traj.events.push_back({"concentration_lost", s.t, s.step,
                                   static_cast<double>(s.concentration_count)});
      prev_conc = s.concentration_count;
    }
    out.traj.samples.push_back(s);
  };

  // Initial sample needs an EL evaluation of its own.
  {
    ScalarField r0 = el_residual(out.state.u, grid, target, prm);
    sample_now(sup_norm(r0));
    if (out.traj.samples.back().el_sup < prm.el_tol) {
      out.traj.converged = true;
      out.traj.events.push_back({"converged", 0.0, 0, out.traj.samples.back().el_sup});
      return out;
    }
  }
  if (prm.snapshot_cadence > 0) {
    out.traj.snapshots.push_back(out.state.u);
    out.traj.snapshot_times.push_back(0.0);
  }

  while (out.state.t < prm.t_end && out.state.step_count < prm.max_steps) {
    double remain = prm.t_end - out.state.t;
    StepResult sr = step(out.state, grid, target, prm, remain);
    bool at_sample = (out.state.step_count % prm.monitor_cadence == 0) ||
                     out.state.t >= prm.t_end;
    if (prm.snapshot_cadence > 0 && out.state.step_count % prm.snapshot_cadence == 0) {
      out.traj.snapshots.push_back(out.state.u);
      out.traj.snapshot_times.push_back(out.state.t);
    }
    if (at_sample) {
      sample_now(sr.el_sup);
      if (sr.el_sup < prm.el_tol) {
        out.traj.converged = true;
        out.traj.events.push_back({"converged", out.state.t, out.state.step_count, sr.el_sup});
        break;
      }
    }
  }
  if (out.traj.samples.empty() || out.traj.samples.back().step != out.state.step_count) {
    ScalarField r = el_residual(out.state.u, grid, target, prm);
    sample_now(sup_norm(r));
  }
  if (!out.traj.converged && out.state.step_count >= prm.max_steps)
    out.traj.events.push_back({"max_steps", out.state.t, out.state.step_count, 0.0});
  return out;
}

}  // namespace nflow
