#pragma once

#include "nflow/grid.hpp"

namespace nflow {

// Map into R^{L} sampled at nodes, node-major storage: value(node, comp).
struct MapField {
  int L = 0;
  std::vector<double> data;  // size = grid.size() * L

  MapField() = default;
  MapField(std::int64_t nodes, int comps) : L(comps), data(static_cast<std::size_t>(nodes) * comps, 0.0) {}
  double* at(std::int64_t node) { return data.data() + static_cast<std::size_t>(node) * L; }
  const double* at(std::int64_t node) const { return data.data() + static_cast<std::size_t>(node) * L; }
};

// Per-node Jacobian, layout [node][axis][comp]. The same layout holds flux
// fields (contravariant components).
struct JacobianField {
  int n = 0;
  int L = 0;
  std::vector<double> data;

  JacobianField() = default;
  JacobianField(std::int64_t nodes, int dim, int comps)
      : n(dim), L(comps), data(static_cast<std::size_t>(nodes) * dim * comps, 0.0) {}
  double* at(std::int64_t node, int axis) {
    return data.data() + (static_cast<std::size_t>(node) * n + axis) * L;
  }
  const double* at(std::int64_t node, int axis) const {
    return data.data() + (static_cast<std::size_t>(node) * n + axis) * L;
  }
};

// Centered-difference coordinate gradient. On the sphere, theta derivatives
// at the rows next to a pole use the collapsed pole value; the pole rows
// themselves carry a zero Jacobian.
JacobianField gradient(const MapField& u, const DomainGrid& grid);

// |nabla u|^2 per node, metric-aware: sum_i g^{ii} |D_i u|^2.
ScalarField grad_norm_sq(const JacobianField& J, const DomainGrid& grid);

// Discrete divergence of a contravariant flux, defined as the exact negative
// adjoint of gradient() under the quad-weight inner product:
//   sum_x w(x) <div F, v>(x) = - sum_x w(x) <F, grad v>(x)   for all v.
// On the torus this is the centered difference of F; on the sphere it is the
// conservative form with the collapsed-pole row handled exactly.
MapField divergence(const JacobianField& F, const DomainGrid& grid);

}  // namespace nflow
