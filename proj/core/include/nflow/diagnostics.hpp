#pragma once

#include "nflow/flow.hpp"

namespace nflow {

// |F| per node for the variant's Euler-Lagrange operator (tangential part).
ScalarField el_residual(const MapField& u, const DomainGrid& grid,
                        const SphereTarget& target, const FlowParams& prm);
double sup_norm(const ScalarField& f);

// Relative defect of the dissipation identity
//   E(u(s)) + int_0^s int mob |du/dt|^2 = E(u0)
// evaluated from the recorded samples at the latest sample time <= s
// (or the final sample when s exceeds the run).
double energy_identity_residual(const Trajectory& traj, double s);

// Local energy over a metric ball.
double local_energy(const MapField& u, const DomainGrid& grid,
                    const FunctionalSpec& spec, const std::array<double, 4>& x0, double R);

// Two sides of the local energy inequality between two recorded snapshots:
//   E(u(tau); B_R) <= E(u(s); B_2R) + C (tau - s) / R^2 * E(u0).
// Reported, not asserted; `c_observed` is the smallest admissible constant.
struct LocalEnergyReport {
  double lhs = 0.0;
  double rhs_ball = 0.0;     // E(u(s); B_2R)
  double scale_term = 0.0;   // (tau - s) / R^2 * E(u0)
  double c_observed = 0.0;
};
LocalEnergyReport local_energy_monitor(const MapField& u_tau, const MapField& u_s,
                                       double tau, double s, const DomainGrid& grid,
                                       const FunctionalSpec& spec,
                                       const std::array<double, 4>& x0, double R,
                                       double total_energy0);

struct Concentration {
  std::int64_t node = 0;
  std::array<double, 4> x0{};
  double local_energy = 0.0;
};

// Maxima of local E_n over balls of radius R that exceed eps0, greedily
// separated by 2R, largest first; ties broken by lowest node index.
std::vector<Concentration> concentration_scan(const MapField& u, const DomainGrid& grid,
                                              double R, double eps0);

// Pohozaev-type stationarity defect for the perturbed p-energy on the flat
// chart B_R(x0) (torus domains). du_dt may be null for a static snapshot.
// Returns the identity defect normalized by the largest participating term.
double stationarity_residual(const MapField& u, const MapField* du_dt,
                             const DomainGrid& grid, const FlowParams& prm,
                             const std::array<double, 4>& x0, double rho, double R);

// Weak Killing-field identity for the perturbed p-energy:
//   int < grad_k phi X(u), c(s) grad_k u > = - int < phi X(u), du/dt >.
// Returns the defect normalized by ||phi||_inf (1 + E_{p,eps}(u)).
double killing_residual(const MapField& u, const MapField& du_dt,
                        const ScalarField& phi, int killing_index,
                        const DomainGrid& grid, const SphereTarget& target,
                        const FlowParams& prm);

}  // namespace nflow
