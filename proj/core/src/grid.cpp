#include "nflow/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nflow {

double pairwise_sum(const double* a, std::size_t n) {
  if (n <= 32) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i];
    return s;
  }
  std::size_t half = n / 2;
  return pairwise_sum(a, half) + pairwise_sum(a + half, n - half);
}

double pairwise_sum(const std::vector<double>& a) {
  return pairwise_sum(a.data(), a.size());
}

DomainGrid::DomainGrid(const DomainSpec& spec)
    : kind_(spec.kind), n_(spec.dim), extent_(spec.extent) {
  if (kind_ == DomainKind::Torus) {
    if (!(extent_ > 0.0)) throw std::invalid_argument("torus extent must be positive");
    if (n_ < 2 || n_ > 4) throw std::invalid_argument("torus dim must be 2..4");
  } else {
    if (n_ != 2) throw std::invalid_argument("sphere2 domain is 2-dimensional");
  }
  res_ = spec.resolution;
  for (int i = 0; i < n_; ++i) {
    if (res_[i] < 8) throw std::invalid_argument("resolution below 8 nodes per axis");
  }
  size_ = 1;
  for (int i = n_ - 1; i >= 0; --i) {
    stride_[i] = size_;
    size_ *= res_[i];
  }

  qw_.resize(static_cast<std::size_t>(size_));
  if (kind_ == DomainKind::Torus) {
    double cell = 1.0;
    for (int i = 0; i < n_; ++i) {
      h_[i] = extent_ / res_[i];
      cell *= h_[i];
    }
    std::fill(qw_.begin(), qw_.end(), cell);
  } else {
    const int nth = res_[0], nph = res_[1];
    const double pi = 3.14159265358979323846;
    h_[0] = pi / (nth - 1);
    h_[1] = 2.0 * pi / nph;
    sin_theta_.resize(nth);
    ginv_phi_.resize(nth);
    // Polar-cap weight shared by the duplicated pole entries.
    const double cap = 2.0 * pi * (1.0 - std::cos(0.5 * h_[0]));
    for (int j = 0; j < nth; ++j) {
      double th = j * h_[0];
      sin_theta_[j] = std::sin(th);
      bool pole = (j == 0 || j == nth - 1);
      double st = pole ? 1.0 : sin_theta_[j];
      ginv_phi_[j] = pole ? 0.0 : 1.0 / (st * st);
      double w = pole ? cap / nph : sin_theta_[j] * h_[0] * h_[1];
      for (int i = 0; i < nph; ++i) qw_[static_cast<std::size_t>(j) * nph + i] = w;
    }
  }
}

double DomainGrid::min_spacing() const {
  double m = h_[0];
  for (int i = 1; i < n_; ++i) m = std::min(m, h_[i]);
  return m;
}

double DomainGrid::total_measure() const {
  return pairwise_sum(qw_);
}

std::int64_t DomainGrid::index(const std::array<int, 4>& c) const {
  std::int64_t id = 0;
  for (int i = 0; i < n_; ++i) id += static_cast<std::int64_t>(c[i]) * stride_[i];
  return id;
}

std::array<int, 4> DomainGrid::coords(std::int64_t node) const {
  std::array<int, 4> c{};
  for (int i = 0; i < n_; ++i) {
    c[i] = static_cast<int>(node / stride_[i]);
    node -= static_cast<std::int64_t>(c[i]) * stride_[i];
  }
  return c;
}

std::int64_t DomainGrid::neighbor(std::int64_t node, int axis, int step) const {
  auto c = coords(node);
  int v = c[axis] + step;
  int r = res_[axis];
  if (kind_ == DomainKind::Torus || axis == 1) {
    v = ((v % r) + r) % r;
  } else {
    if (v < 0 || v >= r) throw std::out_of_range("theta neighbor out of range");
  }
  c[axis] = v;
  return index(c);
}

std::array<double, 4> DomainGrid::position(std::int64_t node) const {
  auto c = coords(node);
  std::array<double, 4> p{};
  if (kind_ == DomainKind::Torus) {
    for (int i = 0; i < n_; ++i) p[i] = c[i] * h_[i];
  } else {
    double th = c[0] * h_[0];
    double ph = c[1] * h_[1];
    p[0] = std::sin(th) * std::cos(ph);
    p[1] = std::sin(th) * std::sin(ph);
    p[2] = std::cos(th);
  }
  return p;
}

double DomainGrid::distance(std::int64_t node, const std::array<double, 4>& x0) const {
  auto p = position(node);
  if (kind_ == DomainKind::Torus) {
    double d2 = 0.0;
    for (int i = 0; i < n_; ++i) {
      double d = std::fabs(p[i] - x0[i]) / extent_;
      d -= std::floor(d);
      d = std::min(d, 1.0 - d);
      d2 += d * d * extent_ * extent_;
    }
    return std::sqrt(d2);
  }
  double dot = p[0] * x0[0] + p[1] * x0[1] + p[2] * x0[2];
  dot = std::clamp(dot, -1.0, 1.0);
  return std::acos(dot);
}

double DomainGrid::chart_radius() const {
  if (kind_ == DomainKind::Torus) return 0.5 * extent_;
  return 3.14159265358979323846;
}

DomainGrid build_domain(const DomainSpec& spec) { return DomainGrid(spec); }

double integrate(const ScalarField& f, const DomainGrid& grid) {
  if (static_cast<std::int64_t>(f.size()) != grid.size())
    throw std::invalid_argument("field size does not match grid");
  std::vector<double> c(f.size());
  const auto& qw = grid.quad_weights();
  for (std::size_t i = 0; i < f.size(); ++i) c[i] = f[i] * qw[i];
  return pairwise_sum(c);
}

std::vector<BallNode> ball_restrict(const DomainGrid& grid,
                                    const std::array<double, 4>& x0, double R) {
  if (!(R > 0.0) || R >= grid.chart_radius())
    throw std::invalid_argument("ball radius must lie in (0, chart radius)");
  std::vector<BallNode> out;
  const std::int64_t N = grid.size();
  for (std::int64_t i = 0; i < N; ++i) {
    if (grid.distance(i, x0) < R) out.push_back({i, grid.quad_weight(i)});
  }
  return out;
}

double integrate_ball(const ScalarField& f, const DomainGrid& grid,
                      const std::vector<BallNode>& ball) {
  (void)grid;
  std::vector<double> c(ball.size());
  for (std::size_t k = 0; k < ball.size(); ++k) c[k] = f[ball[k].node] * ball[k].weight;
  return pairwise_sum(c);
}

}  // namespace nflow
