#pragma once

#include "nflow/field.hpp"

namespace nflow {

// The energy functionals in play. All are integrals of a density e(s) of the
// pointwise gradient norm s = |nabla u|:
//   EnergyN      : s^n / n
//   EnergyNEps   : eps/2 s^2 + s^n / n
//   EnergyMinEps : eps/2 s^2 + s^n / n + eps/(n+1) s^{n+1}
//   EnergyPEps   : eps/2 s^2 + s^p / p + eps/(n+1) s^{n+1}
enum class FunctionalKind { EnergyN, EnergyNEps, EnergyMinEps, EnergyPEps };

struct FunctionalSpec {
  FunctionalKind kind = FunctionalKind::EnergyN;
  int n = 2;
  double p = 2.0;
  double eps = 0.0;
};

double energy_density(double s2, const FunctionalSpec& spec);

// e'(s)/s: the diffusion coefficient the Euler-Lagrange operator carries.
double density_slope(double s2, const FunctionalSpec& spec);

ScalarField energy_density_field(const ScalarField& s2, const FunctionalSpec& spec);

double energy(const MapField& u, const DomainGrid& grid, const FunctionalSpec& spec);
double energy_from_s2(const ScalarField& s2, const DomainGrid& grid, const FunctionalSpec& spec);

}  // namespace nflow
