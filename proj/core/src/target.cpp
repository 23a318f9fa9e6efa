#include "nflow/target.hpp"

#include <cmath>
#include <stdexcept>

namespace nflow {

SphereTarget::SphereTarget(int m) : m_(m) {
  if (m < 1 || m > 7) throw std::invalid_argument("sphere target dimension must be 1..7");
}

void SphereTarget::project(double* v) const {
  const int L = ambient();
  double n2 = 0.0;
  for (int a = 0; a < L; ++a) n2 += v[a] * v[a];
  if (n2 < 1e-24) throw std::domain_error("project: vector too close to the origin");
  double inv = 1.0 / std::sqrt(n2);
  for (int a = 0; a < L; ++a) v[a] *= inv;
}

void SphereTarget::project(MapField& u) const {
  if (u.L != ambient()) throw std::invalid_argument("project: component mismatch");
  const std::int64_t N = static_cast<std::int64_t>(u.data.size()) / u.L;
#pragma omp parallel for schedule(static)
  for (std::int64_t x = 0; x < N; ++x) project(u.at(x));
}

void SphereTarget::sff_term(const double* p, double s2, double* out) const {
  for (int a = 0; a < ambient(); ++a) out[a] = s2 * p[a];
}

void SphereTarget::exp_map(const double* p, const double* v, double* out) const {
  const int L = ambient();
  double t2 = 0.0;
  for (int a = 0; a < L; ++a) t2 += v[a] * v[a];
  double t = std::sqrt(t2);
  if (t < 1e-15) {
    for (int a = 0; a < L; ++a) out[a] = p[a];
    return;
  }
  double c = std::cos(t), s = std::sin(t) / t;
  for (int a = 0; a < L; ++a) out[a] = c * p[a] + s * v[a];
}

void SphereTarget::log_map(const double* p, const double* q, double* out) const {
  const int L = ambient();
  double dot = 0.0;
  for (int a = 0; a < L; ++a) dot += p[a] * q[a];
  if (dot < -1.0 + 1e-12) throw std::domain_error("log_map: antipodal points");
  if (dot > 1.0) dot = 1.0;
  // q - <p,q>p is the tangential direction; rescale to the geodesic angle.
  // atan2 keeps this well conditioned when p and q nearly coincide.
  double norm = 0.0;
  for (int a = 0; a < L; ++a) {
    out[a] = q[a] - dot * p[a];
    norm += out[a] * out[a];
  }
  norm = std::sqrt(norm);
  if (norm < 1e-15) {
    for (int a = 0; a < L; ++a) out[a] = 0.0;
    return;
  }
  double theta = std::atan2(norm, dot);
  double f = theta / norm;
  for (int a = 0; a < L; ++a) out[a] *= f;
}

void SphereTarget::killing_apply(int which, const double* p, double* out) const {
  const int L = ambient();
  if (which < 0 || which >= killing_count())
    throw std::out_of_range("killing_apply: index out of range");
  // Enumerate pairs (i, j), i < j, in lexicographic order.
  int i = 0, j = 1, k = which;
  while (k >= L - 1 - i) {
    k -= L - 1 - i;
    ++i;
    j = i + 1;
  }
  j += k;
  for (int a = 0; a < L; ++a) out[a] = 0.0;
  out[i] = -p[j];
  out[j] = p[i];
}

double smoothstep5(double t) {
  if (t <= 0.5) return 0.0;
  if (t >= 1.0) return 1.0;
  double s = 2.0 * (t - 0.5);
  return s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
}

MapField glue(const MapField& u_limit, const MapField& u_far,
              const std::array<double, 4>& x0, double rho,
              const DomainGrid& grid, const SphereTarget& target) {
  if (u_limit.L != target.ambient() || u_far.L != target.ambient())
    throw std::invalid_argument("glue: component mismatch");
  if (!(rho > 0.0) || rho >= grid.chart_radius())
    throw std::invalid_argument("glue: rho outside chart");
  const std::int64_t N = grid.size();
  const int L = target.ambient();
  MapField v(N, L);
  const double pi_half = 1.57079632679489661923;
  for (std::int64_t x = 0; x < N; ++x) {
    double r = grid.distance(x, x0);
    double eta = smoothstep5(r / rho);
    const double* pl = u_limit.at(x);
    const double* pf = u_far.at(x);
    double* out = v.at(x);
    if (eta <= 0.0) {
      for (int a = 0; a < L; ++a) out[a] = pl[a];
      continue;
    }
    if (eta >= 1.0) {
      for (int a = 0; a < L; ++a) out[a] = pf[a];
      continue;
    }
    double tang[8];
    target.log_map(pl, pf, tang);
    double dist2 = 0.0;
    for (int a = 0; a < L; ++a) dist2 += tang[a] * tang[a];
    if (dist2 >= pi_half * pi_half)
      throw std::domain_error("glue: maps separate by >= pi/2 on the transition annulus");
    for (int a = 0; a < L; ++a) tang[a] *= eta;
    target.exp_map(pl, tang, out);
  }
  return v;
}

}  // namespace nflow
