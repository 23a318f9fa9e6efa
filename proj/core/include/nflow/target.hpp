#pragma once

#include "nflow/field.hpp"

namespace nflow {

// Round unit sphere S^m embedded in R^{m+1}. All maps in this code take
// values here; the second fundamental form contraction for the unit sphere
// is A(u)(du,du) = |nabla u|^2 u.
class SphereTarget {
 public:
  explicit SphereTarget(int m);

  int m() const { return m_; }
  int ambient() const { return m_ + 1; }

  // Nearest-point projection v / |v|. Throws on (near-)zero input.
  void project(double* v) const;
  void project(MapField& u) const;

  // sff contraction at one node: out = s2 * p.
  void sff_term(const double* p, double s2, double* out) const;

  // Geodesic exponential at p applied to tangent v (|p| = 1, <p,v> = 0).
  void exp_map(const double* p, const double* v, double* out) const;

  // Inverse of exp_map: tangent at p pointing to q, |result| = dist(p,q).
  // Requires q != -p.
  void log_map(const double* p, const double* q, double* out) const;

  // Orthonormal-scaled basis of Killing fields: the m(m+1)/2 elementary
  // rotation generators E_{ij} (antisymmetric matrices acting as X(u) = E u).
  int killing_count() const { return m_ * (m_ + 1) / 2; }
  void killing_apply(int which, const double* p, double* out) const;

 private:
  int m_;
};

// Interpolation between two maps: equals u_limit on B_{rho/2}(x0), equals
// u_far outside B_rho(x0), and in between moves u_limit toward u_far along
// geodesics with a quintic smoothstep profile eta(|x - x0| / rho).
// Requires the two maps to stay at geodesic distance < pi/2 on the
// transition annulus.
MapField glue(const MapField& u_limit, const MapField& u_far,
              const std::array<double, 4>& x0, double rho,
              const DomainGrid& grid, const SphereTarget& target);

// Quintic smoothstep: 0 for t <= 1/2, 1 for t >= 1, C^2 monotone between.
double smoothstep5(double t);

}  // namespace nflow
