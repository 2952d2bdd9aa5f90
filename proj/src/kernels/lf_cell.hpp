#pragma once

#include <cmath>

#include "ebv/kernels.hpp"

namespace ebv::kernels::detail {

// One cell of the Lax-Friedrichs update. Shared by the scalar path and the
// AVX2 row edges; the vector body reproduces this operation order exactly.
inline double lf_cell(double c, double l, double r, double d, double u, double vx, double vy,
                      const StencilParams& prm, double& bx, double& by) {
  const double dxm = (c - l) * prm.inv_h;
  const double dxp = (r - c) * prm.inv_h;
  const double dym = (c - d) * prm.inv_h;
  const double dyp = (u - c) * prm.inv_h;
  const double px = prm.p1 + 0.5 * (dxm + dxp);
  const double py = prm.p2 + 0.5 * (dym + dyp);
  const double hsx = 0.5 * prm.sigma_x;
  const double hsy = 0.5 * prm.sigma_y;
  const double h = px * px + py * py + vx * px + vy * py - hsx * (dxp - dxm) - hsy * (dyp - dym);
  const double ax = std::fmax(std::fabs(2.0 * (prm.p1 + dxm) + vx), std::fabs(2.0 * (prm.p1 + dxp) + vx));
  const double ay = std::fmax(std::fabs(2.0 * (prm.p2 + dym) + vy), std::fabs(2.0 * (prm.p2 + dyp) + vy));
  bx = std::fmax(bx, ax);
  by = std::fmax(by, ay);
  return h;
}

// Same selection rule as maxpd / minpd: the second operand wins ties.
inline double vmax(double a, double b) { return a > b ? a : b; }
inline double vmin(double a, double b) { return a < b ? a : b; }

// Per-axis Godunov flux of g(q) = q^2 + v q between one-sided slopes a, b.
inline double godunov_axis(double a, double b, double v) {
  if (a <= b) {
    const double q = vmin(vmax(-0.5 * v, a), b);
    return q * q + v * q;
  }
  return vmax(a * a + v * a, b * b + v * b);
}

inline double godunov_cell(double c, double l, double r, double d, double u, double vx, double vy,
                           const StencilParams& prm, double& bx, double& by) {
  const double ax_m = prm.p1 + (c - l) * prm.inv_h;
  const double ax_p = prm.p1 + (r - c) * prm.inv_h;
  const double ay_m = prm.p2 + (c - d) * prm.inv_h;
  const double ay_p = prm.p2 + (u - c) * prm.inv_h;
  const double h = godunov_axis(ax_m, ax_p, vx) + godunov_axis(ay_m, ay_p, vy);
  bx = std::fmax(bx, std::fmax(std::fabs(2.0 * ax_m + vx), std::fabs(2.0 * ax_p + vx)));
  by = std::fmax(by, std::fmax(std::fabs(2.0 * ay_m + vy), std::fabs(2.0 * ay_p + vy)));
  return h;
}

}  // namespace ebv::kernels::detail
