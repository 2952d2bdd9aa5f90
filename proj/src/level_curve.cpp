#include "ebv/level_curve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ebv/cell_solver.hpp"
#include "ebv/parallel.hpp"

namespace ebv {

double LevelCurve::min_radius() const {
  double r = std::numeric_limits<double>::infinity();
  for (const auto& s : samples) r = std::min(r, norm(s.point));
  return r;
}

double LevelCurve::max_radius() const {
  double r = 0.0;
  for (const auto& s : samples) r = std::max(r, norm(s.point));
  return r;
}

double LevelCurve::non_roundness() const { return max_radius() / min_radius() - 1.0; }

LevelCurve hbar_level_curve(double c, const std::function<HbarEvaluator()>& make_eval, double tol, int n_angles,
                            double r_max, int threads) {
  if (!(c > 0.0)) throw DomainError("level c must exceed min Hbar = 0");
  if (n_angles < 4) throw DomainError("need at least 4 angles");
  LevelCurve curve;
  curve.meta.kind = "hbar";
  curve.meta.level = c;
  curve.meta.tol = tol;
  curve.samples.resize(static_cast<std::size_t>(n_angles));

  parallel_for(n_angles, threads, [&](int i) {
    const double theta = kTwoPi * i / n_angles;
    const Vec2 e = unit_at(theta);
    HbarEvaluator eval = make_eval();
    double lo = 0.0, hi = std::sqrt(c);
    HbarResult at_hi = eval(e * hi);
    while (at_hi.value < c) {
      lo = hi;
      hi *= 1.25;
      if (hi > r_max) throw DomainError("level c unreachable within r_max along a ray");
      at_hi = eval(e * hi);
    }
    HbarResult best = at_hi;
    double r = hi;
    for (int it = 0; it < 200 && std::abs(best.value - c) > tol && hi - lo > 1e-12 * std::max(1.0, hi); ++it) {
      const double mid = 0.5 * (lo + hi);
      const HbarResult res = eval(e * mid);
      if (res.value < c) {
        lo = mid;
      } else {
        hi = mid;
      }
      if (std::abs(res.value - c) <= std::abs(best.value - c)) {
        best = res;
        r = mid;
      }
    }
    auto& s = curve.samples[static_cast<std::size_t>(i)];
    s.theta = theta;
    s.point = e * r;
    s.value_used = best.value;
    s.value_err = best.error_estimate;
  });
  return curve;
}

}  // namespace ebv
