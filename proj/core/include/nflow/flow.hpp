#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "nflow/functional.hpp"
#include "nflow/target.hpp"

namespace nflow {

// The four evolution laws. All share the form
//   mobility(|nabla u|) du/dt = div( c(|nabla u|) grad u ) + c A(u)(du,du)
// and differ in the diffusion coefficient c, the mobility, and the energy
// they dissipate:
//   RectifiedN   : c = eps + s^{n-2},                 mob = 1 - a + eps + a s^{n-2}
//   RegularizedN : same as RectifiedN (the rectified flow is run through its
//                  regularized form; eps is floored at 1e-8)
//   MinimizingN  : c = eps + s^{n-2} + eps s^{n-1},   mob = 1 - a + eps + a s^{n-2} + eps s^{n-1}
//   PFlow        : c = eps + s^{p-2} + eps s^{n-1},   mob = 1
enum class FlowVariant { RectifiedN, RegularizedN, MinimizingN, PFlow };

std::string to_string(FlowVariant v);

struct FlowParams {
  FlowVariant variant = FlowVariant::RegularizedN;
  double a = 1.0;        // rectification weight in [0, 1]
  double epsilon = 1e-4; // floored at kEpsilonMin
  double p = 2.0;        // PFlow exponent, in [2, n]
  double cfl = 0.25;
  double dt_max = 0.0;   // 0 -> min grid spacing
  double t_end = 1.0;
  double el_tol = 1e-3;  // convergence declared when sup |F| drops below
  std::int64_t max_steps = 100000000;
  int monitor_cadence = 100;

  // Optional event tracking, evaluated at monitor samples.
  bool track_degree = false;          // sphere2 -> S^2 runs only
  bool track_concentration = false;
  double concentration_radius = 0.1;  // ball radius for the scan
  double concentration_eps0 = 0.0;    // 0 -> 0.1 * E_n(u0)
  int snapshot_cadence = 0;           // 0 -> keep no snapshots

  static constexpr double kEpsilonMin = 1e-8;
  static constexpr double kGuardTol = 1e-10;
  static constexpr int kMaxHalvings = 20;

  double eps_eff() const { return epsilon < kEpsilonMin ? kEpsilonMin : epsilon; }
};

FunctionalSpec functional_for(const FlowParams& prm, int n);
double mobility(double s2, const FlowParams& prm, int n);
double diffusion_coef(double s2, const FlowParams& prm, int n);

struct RhsResult {
  MapField F;      // tangentially projected Euler-Lagrange operator
  ScalarField s2;  // |nabla u|^2, reused by mobility / stable_dt
};

// F = P_u[ div(c g^{ij} d_j u) + c |nabla u|^2 u ]. Because divergence() is
// the exact adjoint of gradient(), -F is the exact discrete L^2 gradient of
// the variant's functional along sphere-constrained variations.
RhsResult flow_rhs(const MapField& u, const DomainGrid& grid,
                   const SphereTarget& target, const FlowParams& prm);

// Largest explicit-Euler step certified by the parabolic eigenvalue bound
// Lambda(s) of the quasilinear system, capped at dt_max:
//   dt = cfl * min_x 1 / ( Lambda(x) * sum_i 2 g^{ii}(x) / h_i^2 ).
double stable_dt(const ScalarField& s2, const DomainGrid& grid, const FlowParams& prm);

struct FlowState {
  MapField u;
  double t = 0.0;
  std::int64_t step_count = 0;
  double dissipation = 0.0;     // cumulative int mob |du/dt|^2 dv dt
  std::int64_t guard_rejects = 0;
};

struct StepResult {
  double dt = 0.0;
  int halvings = 0;
  double energy_before = 0.0;
  double energy_after = 0.0;
  double el_sup = 0.0;
};

// One guarded explicit Euler step: u <- project(u + dt F / mob). If the
// variant energy rises beyond a 1e-10 relative tolerance the step is
// rejected and dt halved, at most kMaxHalvings times before a stiffness
// error is thrown.
StepResult step(FlowState& state, const DomainGrid& grid, const SphereTarget& target,
                const FlowParams& prm, double dt_request);

struct Event {
  std::string type;  // "converged", "degree_change", "concentration_appeared", ...
  double t = 0.0;
  std::int64_t step = 0;
  double value = 0.0;
};

struct Sample {
  double t = 0.0;
  std::int64_t step = 0;
  double energy_n = 0.0;
  double energy_variant = 0.0;
  double dissipation = 0.0;
  double el_sup = 0.0;
  std::int64_t guard_rejects = 0;
  double degree = 0.0;
  int concentration_count = 0;
};

struct Trajectory {
  std::vector<Sample> samples;
  std::vector<Event> events;
  std::vector<MapField> snapshots;
  std::vector<double> snapshot_times;
  bool converged = false;
};

struct RunResult {
  FlowState state;
  Trajectory traj;
};

// Integrate the flow until t_end, convergence (sup |F| < el_tol), or
// max_steps. Monitors are sampled every monitor_cadence steps and at the
// final state.
RunResult run(const MapField& u0, const DomainGrid& grid, const SphereTarget& target,
              const FlowParams& prm);

}  // namespace nflow
