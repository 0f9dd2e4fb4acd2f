// sphaira - multiscale spherical neighborhoods for 3D point cloud classification
// SPDX-License-Identifier: MIT
#pragma once

#include <array>
#include <cmath>
#include <cstddef>

#include "sphaira/core/error.hpp"
#include "sphaira/core/types.hpp"

namespace sphaira {

// Symmetric 3x3 matrix stored as its upper triangle, so the mirrored entries
// are equal by construction.
struct SymMat3 {
  double xx = 0, xy = 0, xz = 0, yy = 0, yz = 0, zz = 0;

  double trace() const { return xx + yy + zz; }
};

/**
 * Eigendecomposition of a positive semidefinite symmetric 3x3 matrix.
 *
 * values are descending; tiny negatives from roundoff are clamped to zero.
 * vectors[i] is the unit eigenvector of values[i]; the set is orthonormal.
 * Sign convention: each vector is flipped so its largest-magnitude component
 * is positive (first such component on ties), making the basis deterministic.
 */
struct EigenTriple {
  std::array<double, 3> values{};
  std::array<std::array<double, 3>, 3> vectors{};
};

namespace detail {

inline void jacobi_rotate(double a[3][3], double v[3][3], int p, int q) {
  if (a[p][q] == 0.0) return;
  const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
  const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                   (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
  const double c = 1.0 / std::sqrt(t * t + 1.0);
  const double s = t * c;
  const double tau = s / (1.0 + c);

  const double apq = a[p][q];
  a[p][p] -= t * apq;
  a[q][q] += t * apq;
  a[p][q] = 0.0;
  a[q][p] = 0.0;
  for (int k = 0; k < 3; ++k) {
    if (k == p || k == q) continue;
    const double akp = a[k][p];
    const double akq = a[k][q];
    a[k][p] = akp - s * (akq + tau * akp);
    a[p][k] = a[k][p];
    a[k][q] = akq + s * (akp - tau * akq);
    a[q][k] = a[k][q];
  }
  for (int k = 0; k < 3; ++k) {
    const double vkp = v[k][p];
    const double vkq = v[k][q];
    v[k][p] = vkp - s * (vkq + tau * vkp);
    v[k][q] = vkq + s * (vkp - tau * vkq);
  }
}

}  // namespace detail

inline EigenTriple eigen_symmetric3(const SymMat3& m) {
  if (!std::isfinite(m.xx) || !std::isfinite(m.xy) || !std::isfinite(m.xz) ||
      !std::isfinite(m.yy) || !std::isfinite(m.yz) || !std::isfinite(m.zz))
    throw ParameterError("eigendecomposition input has non-finite entries");

  double a[3][3] = {{m.xx, m.xy, m.xz}, {m.xy, m.yy, m.yz}, {m.xz, m.yz, m.zz}};
  double v[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};

  const double frob2 = m.xx * m.xx + m.yy * m.yy + m.zz * m.zz +
                       2.0 * (m.xy * m.xy + m.xz * m.xz + m.yz * m.yz);
  const double stop = frob2 * 1e-30;  // quadratic convergence makes this cheap

  for (int sweep = 0; sweep < 64; ++sweep) {
    const double off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
    if (off <= stop || off == 0.0) break;
    detail::jacobi_rotate(a, v, 0, 1);
    detail::jacobi_rotate(a, v, 0, 2);
    detail::jacobi_rotate(a, v, 1, 2);
  }

  std::array<int, 3> order{0, 1, 2};
  // Stable descending sort of three items.
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2 - i; ++j)
      if (a[order[j + 1]][order[j + 1]] > a[order[j]][order[j]])
        std::swap(order[j], order[j + 1]);

  EigenTriple out;
  for (int r = 0; r < 3; ++r) {
    const int src = order[r];
    out.values[r] = a[src][src] < 0.0 ? 0.0 : a[src][src];
    std::array<double, 3> e{v[0][src], v[1][src], v[2][src]};
    int biggest = 0;
    if (std::fabs(e[1]) > std::fabs(e[0])) biggest = 1;
    if (std::fabs(e[2]) > std::fabs(e[biggest])) biggest = 2;
    if (e[biggest] < 0.0) {
      e[0] = -e[0];
      e[1] = -e[1];
      e[2] = -e[2];
    }
    out.vectors[r] = e;
  }
  return out;
}

}  // namespace sphaira
