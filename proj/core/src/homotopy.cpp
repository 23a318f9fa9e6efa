#include "nflow/homotopy.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

namespace nflow {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Stereographic chart from the north pole: south -> 0, north -> infinity.
std::complex<double> stereo(const double* p) {
  double denom = 1.0 - p[2];
  if (denom < 1e-300) return {1e300, 0.0};
  return {p[0] / denom, p[1] / denom};
}

void inv_stereo(const std::complex<double>& z, double* out) {
  double r2 = std::norm(z);
  if (r2 > 1e200) {
    out[0] = out[1] = 0.0;
    out[2] = 1.0;
    return;
  }
  double d = 1.0 / (1.0 + r2);
  out[0] = 2.0 * z.real() * d;
  out[1] = 2.0 * z.imag() * d;
  out[2] = (r2 - 1.0) * d;
}

std::complex<double> ipow(std::complex<double> z, int k) {
  if (k < 0) return std::pow(std::conj(z), -k);
  return std::pow(z, k);
}

// Signed area of the spherical triangle (p, q, r) via the van Oosterom /
// Strackee formula; robust for small triangles.
double signed_area(const double* p, const double* q, const double* r) {
  double cx = q[1] * r[2] - q[2] * r[1];
  double cy = q[2] * r[0] - q[0] * r[2];
  double cz = q[0] * r[1] - q[1] * r[0];
  double num = p[0] * cx + p[1] * cy + p[2] * cz;
  double pq = p[0] * q[0] + p[1] * q[1] + p[2] * q[2];
  double qr = q[0] * r[0] + q[1] * r[1] + q[2] * r[2];
  double rp = r[0] * p[0] + r[1] * p[1] + r[2] * p[2];
  return 2.0 * std::atan2(num, 1.0 + pq + qr + rp);
}

}  // namespace

MapField init_map(const InitSpec& spec, const DomainGrid& grid, const SphereTarget& target) {
  const std::int64_t N = grid.size();
  const int L = target.ambient();
  MapField u(N, L);

  switch (spec.kind) {
    case InitKind::Constant: {
      for (std::int64_t x = 0; x < N; ++x) {
        double* p = u.at(x);
        p[L - 1] = 1.0;
      }
      return u;
    }
    case InitKind::Identity: {
      if (grid.kind() != DomainKind::Sphere2 || target.m() != 2)
        throw std::invalid_argument("init_map: identity needs sphere2 -> S^2");
      for (std::int64_t x = 0; x < N; ++x) {
        auto pos = grid.position(x);
        double* p = u.at(x);
        for (int a = 0; a < 3; ++a) p[a] = pos[a];
      }
      return u;
    }
    case InitKind::DegreeK: {
      if (grid.kind() != DomainKind::Sphere2 || target.m() != 2)
        throw std::invalid_argument("init_map: degree_k needs sphere2 -> S^2");
      if (spec.k == 0) throw std::invalid_argument("init_map: degree_k with k = 0");
      for (std::int64_t x = 0; x < N; ++x) {
        auto pos = grid.position(x);
        double dp[4] = {pos[0], pos[1], pos[2], 0.0};
        if (pos[2] > 1.0 - 1e-12) {
          double* p = u.at(x);
          p[0] = p[1] = 0.0;
          p[2] = 1.0;
          continue;
        }
        inv_stereo(ipow(stereo(dp), spec.k), u.at(x));
      }
      return u;
    }
    case InitKind::Concentrated: {
      if (target.m() != 2)
        throw std::invalid_argument("init_map: concentrated needs an S^2 target");
      if (spec.k == 0) throw std::invalid_argument("init_map: concentrated with k = 0");
      double h = grid.min_spacing();
      if (!(spec.sigma > 4.0 * h) || !(spec.sigma < 0.25))
        throw std::invalid_argument("init_map: sigma must lie in (4h, 0.25)");

      if (grid.kind() == DomainKind::Sphere2) {
        // Moebius dilation: a degree-k bubble of scale sigma at the south pole.
        for (std::int64_t x = 0; x < N; ++x) {
          auto pos = grid.position(x);
          double dp[4] = {pos[0], pos[1], pos[2], 0.0};
          if (pos[2] > 1.0 - 1e-12) {
            double* p = u.at(x);
            p[0] = p[1] = 0.0;
            p[2] = 1.0;
            continue;
          }
          inv_stereo(ipow(stereo(dp) / spec.sigma, spec.k), u.at(x));
        }
        return u;
      }

      if (grid.dim() != 2)
        throw std::invalid_argument("init_map: concentrated torus data is 2-d only");
      // Flat-chart bubble, concentration scale sigma/4, glued into the
      // constant north map outside B_{2 sigma}.
      double lambda = 0.25 * spec.sigma;
      MapField bump(N, L), north(N, L);
      for (std::int64_t x = 0; x < N; ++x) {
        auto pos = grid.position(x);
        double dx = pos[0] - spec.center[0];
        double dy = pos[1] - spec.center[1];
        dx -= grid.extent() * std::round(dx / grid.extent());
        dy -= grid.extent() * std::round(dy / grid.extent());
        std::complex<double> z(dx / lambda, dy / lambda);
        inv_stereo(ipow(z, spec.k), bump.at(x));
        north.at(x)[2] = 1.0;
      }
      double rho = spec.glue_radius > 0.0 ? spec.glue_radius : 2.0 * spec.sigma;
      return glue(bump, north, spec.center, rho, grid, target);
    }
  }
  throw std::logic_error("init_map: bad kind");
}

double degree_real(const MapField& u, const DomainGrid& grid) {
  if (grid.kind() != DomainKind::Sphere2 || u.L != 3)
    throw std::invalid_argument("degree: needs sphere2 -> S^2");
  const int nth = grid.res(0), nph = grid.res(1);
  auto at = [&](int j, int i) { return u.at(static_cast<std::int64_t>(j) * nph + (i % nph)); };

  std::vector<double> areas;
  areas.reserve(static_cast<std::size_t>(2 * (nth - 3) * nph + 2 * nph));
  // South cap fan (row 0 collapsed), oriented consistently with increasing
  // theta x increasing phi.
  for (int i = 0; i < nph; ++i)
    areas.push_back(signed_area(at(0, 0), at(1, i), at(1, i + 1)));
  for (int j = 1; j < nth - 2; ++j) {
    for (int i = 0; i < nph; ++i) {
      areas.push_back(signed_area(at(j, i), at(j + 1, i), at(j, i + 1)));
      areas.push_back(signed_area(at(j + 1, i), at(j + 1, i + 1), at(j, i + 1)));
    }
  }
  for (int i = 0; i < nph; ++i)
    areas.push_back(signed_area(at(nth - 1, 0), at(nth - 2, i + 1), at(nth - 2, i)));
  return pairwise_sum(areas) / (4.0 * kPi);
}

DegreeResult degree(const MapField& u, const DomainGrid& grid) {
  DegreeResult r;
  r.raw = degree_real(u, grid);
  r.k = static_cast<int>(std::lround(r.raw));
  r.reliable = std::fabs(r.raw - r.k) <= 0.1;
  return r;
}

ScheduleResult minimize_in_class(const MapField& u0, const DomainGrid& grid,
                                 const SphereTarget& target, ScheduleParams prm) {
  if (prm.epsilons.empty()) {
    for (int i = 0; i < 6; ++i) prm.epsilons.push_back(1e-2 * std::pow(4.0, -i));
  }
  for (std::size_t i = 1; i < prm.epsilons.size(); ++i)
    if (prm.epsilons[i] >= prm.epsilons[i - 1])
      throw std::invalid_argument("minimize_in_class: epsilon schedule must decrease");

  ScheduleResult out;
  out.u = u0;
  target.project(out.u);
  const int n = grid.dim();
  const bool sphere_deg = grid.kind() == DomainKind::Sphere2 && target.m() == 2;

  for (double eps : prm.epsilons) {
    FlowParams fp = prm.flow;
    fp.epsilon = eps;
    fp.t_end = prm.stage_t_end;
    fp.el_tol = prm.stage_el_tol;
    RunResult rr = run(out.u, grid, target, fp);
    out.u = rr.state.u;
    for (auto& ev : rr.traj.events) out.events.push_back(ev);

    StageResult st;
    st.epsilon = eps;
    JacobianField J = gradient(out.u, grid);
    ScalarField s2 = grad_norm_sq(J, grid);
    st.energy_n = energy_from_s2(s2, grid, {FunctionalKind::EnergyN, n, fp.p, 0.0});
    st.energy_variant = energy_from_s2(s2, grid, functional_for(fp, n));
    {
      ScalarField l2(s2.size()), np1(s2.size());
      for (std::size_t i = 0; i < s2.size(); ++i) {
        l2[i] = 0.5 * eps * s2[i];
        np1[i] = eps / (n + 1) * std::pow(std::sqrt(s2[i]), n + 1);
      }
      st.eps_term_l2 = integrate(l2, grid);
      st.eps_term_np1 = integrate(np1, grid);
    }
    st.el_sup = rr.traj.samples.empty() ? 0.0 : rr.traj.samples.back().el_sup;
    st.dissipation = rr.state.dissipation;
    st.converged = rr.traj.converged;
    if (sphere_deg) st.degree_raw = degree_real(out.u, grid);
    out.stages.push_back(st);
  }
  return out;
}

ProbeResult strong_convergence_probe(const MapField& u_limit, const MapField& u_candidate,
                                     const std::array<double, 4>& x0, double rho,
                                     const DomainGrid& grid, const SphereTarget& target) {
  ProbeResult r;
  const int n = grid.dim();
  FunctionalSpec en{FunctionalKind::EnergyN, n, 2.0, 0.0};
  MapField v = glue(u_limit, u_candidate, x0, rho, grid, target);
  r.energy_glued = energy(v, grid, en);
  r.energy_candidate = energy(u_candidate, grid, en);
  r.energy_limit = energy(u_limit, grid, en);

  MapField diff(grid.size(), u_limit.L);
  for (std::size_t i = 0; i < diff.data.size(); ++i)
    diff.data[i] = v.data[i] - u_limit.data[i];
  JacobianField J = gradient(diff, grid);
  ScalarField s2 = grad_norm_sq(J, grid);
  ScalarField dens(s2.size());
  for (std::size_t i = 0; i < s2.size(); ++i) dens[i] = std::pow(std::sqrt(s2[i]), n);
  r.w1n_gap = integrate(dens, grid);
  return r;
}

}  // namespace nflow
