#include "nflow/functional.hpp"

#include <cmath>
#include <stdexcept>

namespace nflow {

namespace {

// s^{k} for integer k >= 0 from s^2, avoiding pow() in hot loops.
inline double pow_half_int(double s2, int k) {
  if (k == 0) return 1.0;
  double s = std::sqrt(s2);
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= s;
  return r;
}

}  // namespace

double energy_density(double s2, const FunctionalSpec& spec) {
  const int n = spec.n;
  switch (spec.kind) {
    case FunctionalKind::EnergyN:
      return pow_half_int(s2, n) / n;
    case FunctionalKind::EnergyNEps:
      return 0.5 * spec.eps * s2 + pow_half_int(s2, n) / n;
    case FunctionalKind::EnergyMinEps:
      return 0.5 * spec.eps * s2 + pow_half_int(s2, n) / n +
             spec.eps / (n + 1) * pow_half_int(s2, n + 1);
    case FunctionalKind::EnergyPEps: {
      double sp = std::pow(s2 > 0 ? std::sqrt(s2) : 0.0, spec.p);
      return 0.5 * spec.eps * s2 + sp / spec.p +
             spec.eps / (n + 1) * pow_half_int(s2, n + 1);
    }
  }
  throw std::logic_error("energy_density: bad kind");
}

double density_slope(double s2, const FunctionalSpec& spec) {
  const int n = spec.n;
  switch (spec.kind) {
    case FunctionalKind::EnergyN:
      return pow_half_int(s2, n - 2);
    case FunctionalKind::EnergyNEps:
      return spec.eps + pow_half_int(s2, n - 2);
    case FunctionalKind::EnergyMinEps:
      return spec.eps + pow_half_int(s2, n - 2) + spec.eps * pow_half_int(s2, n - 1);
    case FunctionalKind::EnergyPEps: {
      double s = s2 > 0 ? std::sqrt(s2) : 0.0;
      double spm2 = (spec.p == 2.0) ? 1.0 : std::pow(s, spec.p - 2.0);
      if (s == 0.0 && spec.p < 2.0) throw std::domain_error("density_slope: p < 2 at s = 0");
      return spec.eps + spm2 + spec.eps * pow_half_int(s2, n - 1);
    }
  }
  throw std::logic_error("density_slope: bad kind");
}

ScalarField energy_density_field(const ScalarField& s2, const FunctionalSpec& spec) {
  ScalarField e(s2.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(s2.size()); ++i)
    e[i] = energy_density(s2[i], spec);
  return e;
}

double energy_from_s2(const ScalarField& s2, const DomainGrid& grid, const FunctionalSpec& spec) {
  ScalarField e = energy_density_field(s2, spec);
  return integrate(e, grid);
}

double energy(const MapField& u, const DomainGrid& grid, const FunctionalSpec& spec) {
  JacobianField J = gradient(u, grid);
  ScalarField s2 = grad_norm_sq(J, grid);
  return energy_from_s2(s2, grid, spec);
}

}  // namespace nflow
