#include "nflow/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace nflow {

ScalarField el_residual(const MapField& u, const DomainGrid& grid,
                        const SphereTarget& target, const FlowParams& prm) {
  RhsResult rhs = flow_rhs(u, grid, target, prm);
  const std::int64_t N = grid.size();
  ScalarField r(static_cast<std::size_t>(N));
#pragma omp parallel for schedule(static)
  for (std::int64_t x = 0; x < N; ++x) {
    const double* f = rhs.F.at(x);
    double m2 = 0.0;
    for (int a = 0; a < u.L; ++a) m2 += f[a] * f[a];
    r[static_cast<std::size_t>(x)] = std::sqrt(m2);
  }
  return r;
}

double sup_norm(const ScalarField& f) {
  double m = 0.0;
  for (double v : f) m = std::max(m, std::fabs(v));
  return m;
}

double energy_identity_residual(const Trajectory& traj, double s) {
  if (traj.samples.empty()) throw std::invalid_argument("energy_identity_residual: no samples");
  const Sample& first = traj.samples.front();
  const Sample* pick = &traj.samples.back();
  for (const auto& smp : traj.samples) {
    if (smp.t <= s) pick = &smp;
    else break;
  }
  double e0 = first.energy_variant;
  if (e0 == 0.0) return 0.0;
  return std::fabs(pick->energy_variant + pick->dissipation - e0) / std::fabs(e0);
}

double local_energy(const MapField& u, const DomainGrid& grid,
                    const FunctionalSpec& spec, const std::array<double, 4>& x0, double R) {
  JacobianField J = gradient(u, grid);
  ScalarField s2 = grad_norm_sq(J, grid);
  ScalarField e = energy_density_field(s2, spec);
  auto ball = ball_restrict(grid, x0, R);
  return integrate_ball(e, grid, ball);
}

LocalEnergyReport local_energy_monitor(const MapField& u_tau, const MapField& u_s,
                                       double tau, double s, const DomainGrid& grid,
                                       const FunctionalSpec& spec,
                                       const std::array<double, 4>& x0, double R,
                                       double total_energy0) {
  if (!(tau > s)) throw std::invalid_argument("local_energy_monitor: needs tau > s");
  LocalEnergyReport rep;
  rep.lhs = local_energy(u_tau, grid, spec, x0, R);
  rep.rhs_ball = local_energy(u_s, grid, spec, x0, 2.0 * R);
  rep.scale_term = (tau - s) / (R * R) * total_energy0;
  double excess = rep.lhs - rep.rhs_ball;
  rep.c_observed = excess <= 0.0 ? 0.0 : excess / rep.scale_term;
  return rep;
}

std::vector<Concentration> concentration_scan(const MapField& u, const DomainGrid& grid,
                                              double R, double eps0) {
  if (!(R > 0.0) || R >= grid.chart_radius())
    throw std::invalid_argument("concentration_scan: bad radius");
  const std::int64_t N = grid.size();
  JacobianField J = gradient(u, grid);
  ScalarField s2 = grad_norm_sq(J, grid);
  FunctionalSpec en{FunctionalKind::EnergyN, grid.dim(), 2.0, 0.0};
  ScalarField dens = energy_density_field(s2, en);

  // Shortlist by pointwise density, then score the shortlist with exact ball
  // energies. Deterministic: ties break toward the lower node index.
  const int K = 64;
  std::vector<std::int64_t> order(static_cast<std::size_t>(N));
  std::iota(order.begin(), order.end(), 0);
  std::partial_sort(order.begin(), order.begin() + std::min<std::int64_t>(K, N), order.end(),
                    [&](std::int64_t a, std::int64_t b) {
                      if (dens[a] != dens[b]) return dens[a] > dens[b];
                      return a < b;
                    });
  order.resize(static_cast<std::size_t>(std::min<std::int64_t>(K, N)));

  struct Cand {
    std::int64_t node;
    double e;
  };
  std::vector<Cand> cands;
  for (std::int64_t c : order) {
    auto x0 = grid.position(c);
    std::vector<double> contrib;
    contrib.reserve(1024);
    for (std::int64_t x = 0; x < N; ++x)
      if (grid.distance(x, x0) < R) contrib.push_back(dens[x] * grid.quad_weight(x));
    double e = pairwise_sum(contrib.data(), contrib.size());
    if (e >= eps0) cands.push_back({c, e});
  }
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (a.e != b.e) return a.e > b.e;
    return a.node < b.node;
  });

  std::vector<Concentration> out;
  for (const auto& c : cands) {
    auto pos = grid.position(c.node);
    bool separated = true;
    for (const auto& kept : out) {
      if (grid.distance(c.node, kept.x0) < 2.0 * R) {
        separated = false;
        break;
      }
    }
    if (separated) out.push_back({c.node, pos, c.e});
  }
  return out;
}

namespace {

// Fractional ball membership: 1 inside, 0 outside, linear across one cell at
// the boundary. Keeps radial integrals second-order accurate.
inline double coverage(double r, double R, double h) {
  double t = (R - r) / h + 0.5;
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  return t;
}

}  // namespace

double stationarity_residual(const MapField& u, const MapField* du_dt,
                             const DomainGrid& grid, const FlowParams& prm,
                             const std::array<double, 4>& x0, double rho, double R) {
  if (grid.kind() != DomainKind::Torus)
    throw std::invalid_argument("stationarity_residual: flat-chart domains only");
  if (!(0.0 < rho && rho < R && R < grid.chart_radius()))
    throw std::invalid_argument("stationarity_residual: need 0 < rho < R < chart radius");

  const std::int64_t N = grid.size();
  const int n = grid.dim();
  const int L = u.L;
  const double p = prm.p;
  const double eps = prm.eps_eff();
  const double h = grid.min_spacing();
  FunctionalSpec spec{FunctionalKind::EnergyPEps, n, p, eps};

  JacobianField J = gradient(u, grid);
  ScalarField s2 = grad_norm_sq(J, grid);

  // Per-node radius, energy density, the radial-derivative flux density, and
  // the <du/dt, x . grad u> pairing.
  std::vector<double> rad(static_cast<std::size_t>(N));
  std::vector<double> e_dens(static_cast<std::size_t>(N));
  std::vector<double> flux_dens(static_cast<std::size_t>(N));
  std::vector<double> pair_dens(static_cast<std::size_t>(N));
  std::vector<double> eps_l2(static_cast<std::size_t>(N));
  std::vector<double> eps_np1(static_cast<std::size_t>(N));

#pragma omp parallel for schedule(static)
  for (std::int64_t x = 0; x < N; ++x) {
    auto pos = grid.position(x);
    double d[4];
    double r2 = 0.0;
    for (int i = 0; i < n; ++i) {
      double di = pos[i] - x0[i];
      di -= grid.extent() * std::round(di / grid.extent());
      d[i] = di;
      r2 += di * di;
    }
    double r = std::sqrt(r2);
    rad[x] = r;
    double s = std::sqrt(s2[x]);
    e_dens[x] = energy_density(s2[x], spec);
    eps_l2[x] = eps * s2[x];
    eps_np1[x] = eps * std::pow(s, n + 1);

    // radial derivative d_r u = (x/r) . grad u
    double dr2 = 0.0;
    double pair = 0.0;
    if (r > 1e-14) {
      for (int a = 0; a < L; ++a) {
        double v = 0.0;
        for (int i = 0; i < n; ++i) v += d[i] * J.at(x, i)[a];
        dr2 += (v / r) * (v / r);
        if (du_dt) pair += du_dt->at(x)[a] * v;
      }
    }
    double c = density_slope(s2[x], spec);
    flux_dens[x] = c * dr2;
    pair_dens[x] = pair;  // already carries the factor r * d_r u
  }

  // Cumulative ball integrals on a fine radius ladder (fractional boundary),
  // via a single sort-based sweep per integrand.
  const int M = 256;
  std::vector<std::int64_t> order(static_cast<std::size_t>(N));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::int64_t a, std::int64_t b) { return rad[a] < rad[b]; });

  auto sweep = [&](const std::vector<double>& dens) {
    // cum[k] = smoothed integral over B_{r_k}
    std::vector<double> cum(M + 1, 0.0);
    std::size_t lo = 0;  // fully inside even the smoothing band
    double inside = 0.0;
    for (int k = 0; k <= M; ++k) {
      double r = rho + (R - rho) * k / M;
      while (lo < order.size() && rad[order[lo]] <= r - 0.5 * h) {
        std::int64_t x = order[lo];
        inside += dens[x] * grid.quad_weight(x);
        ++lo;
      }
      double band = 0.0;
      for (std::size_t q = lo; q < order.size(); ++q) {
        std::int64_t x = order[q];
        if (rad[x] > r + 0.5 * h) break;
        band += dens[x] * grid.quad_weight(x) * coverage(rad[x], r, h);
      }
      cum[k] = inside + band;
    }
    return cum;
  };

  std::vector<double> cum_l2 = sweep(eps_l2);
  std::vector<double> cum_np1 = sweep(eps_np1);
  std::vector<double> cum_pair = sweep(pair_dens);

  auto radial_integral = [&](const std::vector<double>& cum) {
    // int_rho^R r^{p-1-n} cum(r) dr, trapezoid on the ladder
    double acc = 0.0;
    for (int k = 0; k < M; ++k) {
      double r0 = rho + (R - rho) * k / M;
      double r1 = rho + (R - rho) * (k + 1) / M;
      double f0 = std::pow(r0, p - 1 - n) * cum[k];
      double f1 = std::pow(r1, p - 1 - n) * cum[k + 1];
      acc += 0.5 * (f0 + f1) * (r1 - r0);
    }
    return acc;
  };

  // Ball and annulus pieces (fractional boundaries).
  double e_rho = 0.0, e_R = 0.0, annulus_flux = 0.0;
  {
    std::vector<double> c1(static_cast<std::size_t>(N)), c2(static_cast<std::size_t>(N)),
        c3(static_cast<std::size_t>(N));
    for (std::int64_t x = 0; x < N; ++x) {
      double w = grid.quad_weight(x);
      double in_rho = coverage(rad[x], rho, h);
      double in_R = coverage(rad[x], R, h);
      c1[x] = e_dens[x] * w * in_rho;
      c2[x] = e_dens[x] * w * in_R;
      double rpn = rad[x] > 1e-14 ? std::pow(rad[x], p - n) : 0.0;
      c3[x] = flux_dens[x] * rpn * w * (in_R - in_rho);
    }
    e_rho = pairwise_sum(c1);
    e_R = pairwise_sum(c2);
    annulus_flux = pairwise_sum(c3);
  }

  double lhs1 = std::pow(rho, p - n) * e_rho;
  double lhs2 = (n * (p - 2.0) / (2.0 * p)) * radial_integral(cum_l2);
  double lhs3 = annulus_flux;
  double rhs1 = std::pow(R, p - n) * e_R;
  double rhs2 = ((n + 1.0 - p) / (n + 1.0)) * radial_integral(cum_np1);
  double rhs3 = radial_integral(cum_pair);

  double defect = (lhs1 + lhs2 + lhs3) - (rhs1 + rhs2 + rhs3);
  double scale = std::max({std::fabs(lhs1), std::fabs(lhs2), std::fabs(lhs3),
                           std::fabs(rhs1), std::fabs(rhs2), std::fabs(rhs3), 1e-300});
  return std::fabs(defect) / scale;
}

double killing_residual(const MapField& u, const MapField& du_dt,
                        const ScalarField& phi, int killing_index,
                        const DomainGrid& grid, const SphereTarget& target,
                        const FlowParams& prm) {
  const std::int64_t N = grid.size();
  const int n = grid.dim();
  const int L = u.L;
  FunctionalSpec spec{FunctionalKind::EnergyPEps, n, prm.p, prm.eps_eff()};

  JacobianField J = gradient(u, grid);
  ScalarField s2 = grad_norm_sq(J, grid);

  MapField phi_field(N, 1);
  for (std::int64_t x = 0; x < N; ++x) phi_field.at(x)[0] = phi[x];
  JacobianField Dphi = gradient(phi_field, grid);

  std::vector<double> lhs_c(static_cast<std::size_t>(N)), rhs_c(static_cast<std::size_t>(N));
#pragma omp parallel for schedule(static)
  for (std::int64_t x = 0; x < N; ++x) {
    double Xu[8];
    target.killing_apply(killing_index, u.at(x), Xu);
    double c = density_slope(s2[x], spec);
    double lhs = 0.0;
    for (int i = 0; i < n; ++i) {
      double g = grid.inv_metric(i, x);
      const double* j = J.at(x, i);
      double dot = 0.0;
      for (int a = 0; a < L; ++a) dot += Xu[a] * j[a];
      lhs += g * Dphi.at(x, i)[0] * c * dot;
    }
    double rhs = 0.0;
    for (int a = 0; a < L; ++a) rhs += Xu[a] * du_dt.at(x)[a];
    lhs_c[x] = grid.quad_weight(x) * lhs;
    rhs_c[x] = grid.quad_weight(x) * phi[x] * rhs;
  }
  double lhs = pairwise_sum(lhs_c);
  double rhs = -pairwise_sum(rhs_c);
  double e = energy_from_s2(s2, grid, spec);
  double phimax = sup_norm(phi);
  return std::fabs(lhs - rhs) / (std::max(phimax, 1e-300) * (1.0 + e));
}

}  // namespace nflow
