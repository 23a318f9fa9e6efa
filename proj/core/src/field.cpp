#include "nflow/field.hpp"

#include <cmath>
#include <stdexcept>

namespace nflow {

namespace {

// Coordinate of `node` along `axis` given stride/res, without materializing
// the full coordinate tuple. Hot path for the stencil loops.
inline int axis_coord(std::int64_t node, std::int64_t stride, int res) {
  return static_cast<int>((node / stride) % res);
}

}  // namespace

JacobianField gradient(const MapField& u, const DomainGrid& grid) {
  const std::int64_t N = grid.size();
  const int n = grid.dim();
  const int L = u.L;
  if (static_cast<std::int64_t>(u.data.size()) != N * L)
    throw std::invalid_argument("gradient: field/grid mismatch");
  JacobianField J(N, n, L);

  if (grid.kind() == DomainKind::Torus) {
    std::array<std::int64_t, 4> stride{};
    std::array<int, 4> res{};
    std::array<double, 4> inv2h{};
    std::int64_t s = 1;
    for (int i = n - 1; i >= 0; --i) {
      stride[i] = s;
      res[i] = grid.res(i);
      s *= res[i];
      inv2h[i] = 0.5 / grid.spacing(i);
    }
#pragma omp parallel for schedule(static)
    for (std::int64_t x = 0; x < N; ++x) {
      const double* ux = u.at(x);
      (void)ux;
      for (int i = 0; i < n; ++i) {
        int c = axis_coord(x, stride[i], res[i]);
        std::int64_t xp = x + (c == res[i] - 1 ? stride[i] * (1 - res[i]) : stride[i]);
        std::int64_t xm = x - (c == 0 ? stride[i] * (1 - res[i]) : stride[i]);
        const double* up = u.at(xp);
        const double* um = u.at(xm);
        double* j = J.at(x, i);
        for (int a = 0; a < L; ++a) j[a] = (up[a] - um[a]) * inv2h[i];
      }
    }
    return J;
  }

  const int nth = grid.res(0), nph = grid.res(1);
  const double inv2hth = 0.5 / grid.spacing(0);
  const double inv2hph = 0.5 / grid.spacing(1);
#pragma omp parallel for schedule(static)
  for (std::int64_t x = 0; x < N; ++x) {
    int j = static_cast<int>(x / nph);
    int i = static_cast<int>(x % nph);
    double* jt = J.at(x, 0);
    double* jp = J.at(x, 1);
    if (grid.is_pole_row(j)) {
      for (int a = 0; a < L; ++a) jt[a] = jp[a] = 0.0;
      continue;
    }
    const double* up = u.at(x + nph);
    const double* um = u.at(x - nph);
    for (int a = 0; a < L; ++a) jt[a] = (up[a] - um[a]) * inv2hth;
    std::int64_t ip = static_cast<std::int64_t>(j) * nph + (i + 1) % nph;
    std::int64_t im = static_cast<std::int64_t>(j) * nph + (i + nph - 1) % nph;
    const double* vp = u.at(ip);
    const double* vm = u.at(im);
    for (int a = 0; a < L; ++a) jp[a] = (vp[a] - vm[a]) * inv2hph;
  }
  return J;
}

ScalarField grad_norm_sq(const JacobianField& J, const DomainGrid& grid) {
  const std::int64_t N = grid.size();
  const int n = J.n, L = J.L;
  ScalarField s2(static_cast<std::size_t>(N), 0.0);
#pragma omp parallel for schedule(static)
  for (std::int64_t x = 0; x < N; ++x) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      const double* j = J.at(x, i);
      double g = grid.inv_metric(i, x);
      double t = 0.0;
      for (int a = 0; a < L; ++a) t += j[a] * j[a];
      acc += g * t;
    }
    s2[x] = acc;
  }
  return s2;
}

MapField divergence(const JacobianField& F, const DomainGrid& grid) {
  const std::int64_t N = grid.size();
  const int n = F.n, L = F.L;
  MapField d(N, L);

  if (grid.kind() == DomainKind::Torus) {
    std::array<std::int64_t, 4> stride{};
    std::array<int, 4> res{};
    std::array<double, 4> inv2h{};
    std::int64_t s = 1;
    for (int i = n - 1; i >= 0; --i) {
      stride[i] = s;
      res[i] = grid.res(i);
      s *= res[i];
      inv2h[i] = 0.5 / grid.spacing(i);
    }
#pragma omp parallel for schedule(static)
    for (std::int64_t x = 0; x < N; ++x) {
      double* out = d.at(x);
      for (int i = 0; i < n; ++i) {
        int c = axis_coord(x, stride[i], res[i]);
        std::int64_t xp = x + (c == res[i] - 1 ? stride[i] * (1 - res[i]) : stride[i]);
        std::int64_t xm = x - (c == 0 ? stride[i] * (1 - res[i]) : stride[i]);
        const double* fp = F.at(xp, i);
        const double* fm = F.at(xm, i);
        for (int a = 0; a < L; ++a) out[a] += (fp[a] - fm[a]) * inv2h[i];
      }
    }
    return d;
  }

  const int nth = grid.res(0), nph = grid.res(1);
  const double inv2hth = 0.5 / grid.spacing(0);
  const double inv2hph = 0.5 / grid.spacing(1);
  const double cap = grid.quad_weight(0) * nph;

#pragma omp parallel for schedule(static)
  for (std::int64_t x = 0; x < N; ++x) {
    int j = static_cast<int>(x / nph);
    if (grid.is_pole_row(j)) continue;  // filled below
    int i = static_cast<int>(x % nph);
    double* out = d.at(x);
    const double wj = grid.quad_weight(x);
    // theta, conservative form; the pole rows carry no flux.
    if (j - 1 >= 1) {
      const double* fm = F.at(x - nph, 0);
      double wm = grid.quad_weight(x - nph);
      for (int a = 0; a < L; ++a) out[a] -= wm * fm[a] * inv2hth / wj;
    }
    if (j + 1 <= nth - 2) {
      const double* fp = F.at(x + nph, 0);
      double wp = grid.quad_weight(x + nph);
      for (int a = 0; a < L; ++a) out[a] += wp * fp[a] * inv2hth / wj;
    }
    // phi, centered within the row (row weight constant, cancels).
    std::int64_t ip = static_cast<std::int64_t>(j) * nph + (i + 1) % nph;
    std::int64_t im = static_cast<std::int64_t>(j) * nph + (i + nph - 1) % nph;
    const double* fp = F.at(ip, 1);
    const double* fm = F.at(im, 1);
    for (int a = 0; a < L; ++a) out[a] += (fp[a] - fm[a]) * inv2hph;
  }

  // Collapsed poles: exact adjoint of the theta stencils of the adjacent row.
  for (int pole = 0; pole < 2; ++pole) {
    int jp = (pole == 0) ? 0 : nth - 1;
    int ja = (pole == 0) ? 1 : nth - 2;
    double sign = (pole == 0) ? 1.0 : -1.0;
    double wa = grid.quad_weight(static_cast<std::int64_t>(ja) * nph);
    std::vector<double> acc(static_cast<std::size_t>(nph));
    double common[16];
    for (int a = 0; a < L; ++a) {
      for (int i = 0; i < nph; ++i)
        acc[static_cast<std::size_t>(i)] = F.at(static_cast<std::int64_t>(ja) * nph + i, 0)[a];
      common[a] = sign * wa * inv2hth * pairwise_sum(acc) / cap;
    }
    for (int i = 0; i < nph; ++i) {
      double* out = d.at(static_cast<std::int64_t>(jp) * nph + i);
      for (int a = 0; a < L; ++a) out[a] = common[a];
    }
  }
  return d;
}

}  // namespace nflow
