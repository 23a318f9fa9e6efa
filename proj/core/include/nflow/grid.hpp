#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace nflow {

// Deterministic pairwise summation tree. Used by every integral in the code
// so that results are bitwise reproducible independent of thread count.
double pairwise_sum(const double* a, std::size_t n);
double pairwise_sum(const std::vector<double>& a);

enum class DomainKind { Torus, Sphere2 };

struct DomainSpec {
  DomainKind kind = DomainKind::Torus;
  int dim = 2;                      // 2..4 for torus, always 2 for sphere
  std::array<int, 4> resolution{};  // per-axis node counts (dim entries)
  double extent = 1.0;              // torus period per axis
};

// Structured grid over the flat unit torus T^n or the round unit 2-sphere.
//
// Torus: uniform periodic grid, spacing h_i = 1/res_i, metric identity.
// Sphere: latitude-longitude grid theta_j = j*pi/(Ntheta-1). The two pole
// rows are stored as Nphi duplicated entries but act as single collapsed
// nodes: they carry the polar-cap quadrature weight, their Jacobian is zero,
// and the divergence assigns them one common value (the exact adjoint of the
// gradient stencil with respect to the collapsed degree of freedom).
class DomainGrid {
 public:
  explicit DomainGrid(const DomainSpec& spec);

  DomainKind kind() const { return kind_; }
  int dim() const { return n_; }
  int res(int axis) const { return res_[axis]; }
  double spacing(int axis) const { return h_[axis]; }
  std::int64_t size() const { return size_; }
  double min_spacing() const;

  // Quadrature weight (includes sqrt|g| and the cell volume).
  double quad_weight(std::int64_t node) const { return qw_[node]; }
  const std::vector<double>& quad_weights() const { return qw_; }
  double total_measure() const;

  // Diagonal inverse metric entry g^{ii} at a node (1 on the torus).
  double inv_metric(int axis, std::int64_t node) const {
    if (kind_ == DomainKind::Torus || axis == 0) return 1.0;
    return ginv_phi_[node / res_[1]];
  }

  std::int64_t index(const std::array<int, 4>& c) const;
  std::array<int, 4> coords(std::int64_t node) const;
  std::int64_t neighbor(std::int64_t node, int axis, int step) const;

  // Chart coordinates of a node: torus -> point in [0,1)^n,
  // sphere -> embedded position in R^3.
  std::array<double, 4> position(std::int64_t node) const;

  // Distance between a node and a reference point given in the same
  // convention as position(): torus min-image Euclidean, sphere geodesic.
  double distance(std::int64_t node, const std::array<double, 4>& x0) const;

  // Largest radius for which metric balls are unambiguous.
  double chart_radius() const;

  bool is_pole_row(int j) const {
    return kind_ == DomainKind::Sphere2 && (j == 0 || j == res_[0] - 1);
  }
  double sin_theta(int row) const { return sin_theta_[row]; }
  double extent() const { return extent_; }

 private:
  DomainKind kind_;
  int n_;
  double extent_ = 1.0;
  std::array<int, 4> res_{};
  std::array<double, 4> h_{};
  std::int64_t size_ = 0;
  std::array<std::int64_t, 4> stride_{};
  std::vector<double> qw_;
  std::vector<double> sin_theta_;  // per row (sphere only)
  std::vector<double> ginv_phi_;   // per row (sphere only)
};

DomainGrid build_domain(const DomainSpec& spec);

// Scalar quantity sampled at nodes.
using ScalarField = std::vector<double>;

// Integral of f over the domain, compensated (fixed pairwise tree).
double integrate(const ScalarField& f, const DomainGrid& grid);

struct BallNode {
  std::int64_t node;
  double weight;
};

// Nodes of the metric ball B_R(x0) with their quadrature weights
// (cell-center membership rule). Throws if R exceeds the chart radius.
std::vector<BallNode> ball_restrict(const DomainGrid& grid,
                                    const std::array<double, 4>& x0, double R);

double integrate_ball(const ScalarField& f, const DomainGrid& grid,
                      const std::vector<BallNode>& ball);

}  // namespace nflow
