#pragma once

#include "nflow/diagnostics.hpp"

namespace nflow {

struct TopScale {
  std::int64_t node = 0;
  std::array<double, 4> x0{};
  double r = 0.0;  // 1 / max |nabla u|
};

// Scale and location of the steepest gradient (ties: lowest node index).
// Throws for constant maps.
TopScale top_bubble_scale(const MapField& u, const DomainGrid& grid);

struct RescaleResult {
  MapField u;
  DomainSpec domain;  // flat periodic box of side 2 R_out
  double r = 0.0;
  double R_out = 0.0;
  std::array<double, 4> x0{};
  std::array<double, 4> center{};  // chart coordinates of x0 in the new box
};

// Zoomed view u~(y) = u(x0 + r y) on a fresh flat grid covering [-R_out,
// R_out]^n, cubic (Catmull-Rom) interpolation from the source grid, nearest-
// point projected back to the target. Requires r * R_out below the source
// chart radius. Torus sources only.
RescaleResult rescale(const MapField& u, const DomainGrid& grid,
                      const SphereTarget& target, const std::array<double, 4>& x0,
                      double r, double R_out, int res_out);

struct AnnulusEnergy {
  double r_in = 0.0;
  double r_out = 0.0;  // = 2 r_in (dyadic)
  double energy = 0.0; // E_n over the annulus
};

// Dyadic annulus n-energies around x0 from r_min up to r_max.
std::vector<AnnulusEnergy> annulus_profile(const MapField& u, const DomainGrid& grid,
                                           const std::array<double, 4>& x0,
                                           double r_min, double r_max);

// Cluster scale sequences (one value per snapshot) whose mutual ratio stays
// below ratio_bound across the window. Returns the class id per sequence and
// a representative scale per class (ascending).
struct ScaleClasses {
  std::vector<int> class_of;
  std::vector<double> representative;
};
ScaleClasses classify_scales(const std::vector<std::vector<double>>& sequences,
                             double ratio_bound);

struct DecomposeConfig {
  double R0 = 0.4;           // analysis ball radius
  double eps_neck = 1e-3;    // annulus flag threshold
  double ratio_bound = 8.0;  // scale-class ratio bound
  int depth = 4;             // maximal nesting depth considered
  double plateau_tol = 0.01; // relative ball-energy growth for a plateau
  double el_tol = 0.5;       // EL residual acceptance on the rescaled ball
  int rescale_res = 128;
  double rescale_R_out = 16.0;
  double body_fraction = 0.9;  // neck region ends at body_fraction * R0
};

struct BubbleCandidate {
  int class_id = 0;
  std::array<double, 4> center{};
  double scale = 0.0;
  double energy = 0.0;          // plateau value of E_n over B_rho(center)
  double plateau_radius = 0.0;
  double el_sup = 0.0;          // EL residual of the rescaled field (core)
  bool accepted = false;
  RescaleResult rescaled;
};

struct NeckRegion {
  double r_in = 0.0;
  double r_out = 0.0;
  double energy = 0.0;
};

struct BubbleReport {
  double total_energy = 0.0;  // E_n over B_{R0}(x0)
  double body_energy = 0.0;   // outermost shell of the analysis ball
  std::vector<BubbleCandidate> bubbles;
  std::vector<NeckRegion> necks;
  std::vector<int> class_of_sequence;
  double audit = 0.0;        // |E_total - body - sum accepted bubbles| / E_total
  double discrepancy = 0.0;  // E_total - body - bubbles - necks (signed)
};

// Bubble-neck ledger at a single concentration point across a snapshot
// sequence (nested scales handled through the scale classes).
BubbleReport decompose(const std::vector<MapField>& snapshots, const DomainGrid& grid,
                       const SphereTarget& target, const std::array<double, 4>& x0,
                       const DecomposeConfig& cfg);

double energy_audit(const BubbleReport& report);

std::string report_to_json(const BubbleReport& report);

}  // namespace nflow
