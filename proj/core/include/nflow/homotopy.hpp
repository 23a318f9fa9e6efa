#pragma once

#include "nflow/diagnostics.hpp"
#include "nflow/flow.hpp"

namespace nflow {

// Initial data constructions.
//   Constant     : fixed north pole value.
//   Identity     : sphere2 -> S^2 identity.
//   DegreeK      : sphere2 -> S^2, z -> z^k through stereographic charts
//                  (conjugated for negative k).
//   Concentrated : bump of scale sigma and degree k at `center`.
//                  On sphere2 this is the Moebius dilation z -> (z/sigma)^k;
//                  on T^2 a dilated stereographic bump (concentration scale
//                  sigma/4) glued into the constant north-pole map outside
//                  B_{2 sigma}(center).
enum class InitKind { Constant, Identity, DegreeK, Concentrated };

struct InitSpec {
  InitKind kind = InitKind::Constant;
  int k = 1;
  double sigma = 0.05;
  std::array<double, 4> center{0.5, 0.5, 0.0, 0.0};
  // For Concentrated: glue radius override; 0 keeps the default 2 sigma.
  double glue_radius = 0.0;
};

MapField init_map(const InitSpec& spec, const DomainGrid& grid, const SphereTarget& target);

// Topological degree of a sphere2 -> S^2 map: sum of signed spherical areas
// of the image triangles over a fixed triangulation (quads split along one
// diagonal, fans at the collapsed poles), divided by 4 pi.
double degree_real(const MapField& u, const DomainGrid& grid);

struct DegreeResult {
  int k = 0;
  double raw = 0.0;
  bool reliable = false;  // |raw - k| <= 0.1
};
DegreeResult degree(const MapField& u, const DomainGrid& grid);

// One stage of the minimizing schedule.
struct StageResult {
  double epsilon = 0.0;
  double energy_n = 0.0;
  double energy_variant = 0.0;
  double eps_term_l2 = 0.0;    // eps/2 int |nabla u|^2
  double eps_term_np1 = 0.0;   // eps/(n+1) int |nabla u|^{n+1}
  double el_sup = 0.0;
  double dissipation = 0.0;
  double degree_raw = 0.0;
  bool converged = false;
};

struct ScheduleResult {
  MapField u;
  std::vector<StageResult> stages;
  std::vector<Event> events;
};

struct ScheduleParams {
  FlowParams flow;                  // variant/a/p/cfl template for each stage
  std::vector<double> epsilons;     // default 1e-2 * 4^{-i}, 6 stages
  double stage_t_end = 50.0;
  double stage_el_tol = 1e-3;
};

// Flow to near-stationarity at each epsilon of a decreasing schedule,
// reusing the previous stage's endpoint as initial data.
ScheduleResult minimize_in_class(const MapField& u0, const DomainGrid& grid,
                                 const SphereTarget& target, ScheduleParams prm);

// W^{1,n}-style comparison of a candidate bubble against the weak limit
// after geodesic gluing at radius rho around x0.
struct ProbeResult {
  double energy_glued = 0.0;      // E_n(v)
  double energy_candidate = 0.0;  // E_n(u_i)
  double energy_limit = 0.0;      // E_n(u)
  double w1n_gap = 0.0;           // int |nabla(v - u)|^n
};
ProbeResult strong_convergence_probe(const MapField& u_limit, const MapField& u_candidate,
                                     const std::array<double, 4>& x0, double rho,
                                     const DomainGrid& grid, const SphereTarget& target);

}  // namespace nflow
