#include "ebv/front.hpp"

#include <algorithm>
#include <cmath>

#include "ebv/burnvel.hpp"

namespace ebv {

const char* alpha_kind_name(AlphaKind k) {
  switch (k) {
    case AlphaKind::euclidean:
      return "euclidean";
    case AlphaKind::ell1:
      return "ell1";
    case AlphaKind::sampled:
      return "sampled";
  }
  return "unknown";
}

const char* provenance_name(Provenance p) {
  switch (p) {
    case Provenance::regular:
      return "regular";
    case Provenance::corner_fan:
      return "corner_fan";
    case Provenance::flat_translate:
      return "flat_translate";
  }
  return "unknown";
}

AlphaModel AlphaModel::euclidean(double scale) {
  if (!(scale > 0.0)) throw DomainError("alpha scale must be positive");
  AlphaModel m;
  m.kind_ = AlphaKind::euclidean;
  m.scale_ = scale;
  return m;
}

AlphaModel AlphaModel::ell1(double scale) {
  if (!(scale > 0.0)) throw DomainError("alpha scale must be positive");
  AlphaModel m;
  m.kind_ = AlphaKind::ell1;
  m.scale_ = scale;
  return m;
}

AlphaModel AlphaModel::sampled(std::vector<double> alpha, double kappa_tol) {
  const int n = static_cast<int>(alpha.size());
  if (n < 8) throw DomainError("sampled alpha model needs at least 8 angles");
  for (double a : alpha)
    if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("sampled alpha must be positive and finite");
  AlphaModel m;
  m.kind_ = AlphaKind::sampled;
  m.alpha_ = std::move(alpha);
  const double dth = kTwoPi / n;
  m.cone_grad_.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double th = dth * i;
    const double a0 = m.alpha_[static_cast<std::size_t>(i)];
    const double a1 = m.alpha_[static_cast<std::size_t>((i + 1) % n)];
    m.cone_grad_[static_cast<std::size_t>(i)] =
        unit_at(th) * a0 + perp(unit_at(th)) * ((a1 - std::cos(dth) * a0) / std::sin(dth));
  }
  m.detect_corners();

  LevelCurve c;
  c.meta.kind = "alpha";
  c.samples.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    auto& s = c.samples[static_cast<std::size_t>(i)];
    s.theta = dth * i;
    s.value_used = m.alpha_[static_cast<std::size_t>(i)];
    s.point = unit_at(s.theta) / s.value_used;
  }
  m.flats_ = detect_flat_pieces(std::move(c), kappa_tol).flat_arcs;
  return m;
}

AlphaModel AlphaModel::from_level_curve(const LevelCurve& curve) {
  const int n = static_cast<int>(curve.samples.size());
  std::vector<double> alpha;
  alpha.reserve(curve.samples.size());
  for (int i = 0; i < n; ++i) {
    const auto& s = curve.samples[static_cast<std::size_t>(i)];
    if (std::abs(s.theta - kTwoPi * i / n) > 1e-12) throw DomainError("level curve is not on a uniform angle grid");
    alpha.push_back(s.value_used);
  }
  AlphaModel m = sampled(std::move(alpha), 0.0);
  m.flats_ = curve.flat_arcs;
  return m;
}

void AlphaModel::detect_corners() {
  const int n = static_cast<int>(alpha_.size());
  const double dth = kTwoPi / n;
  std::vector<double> jump(static_cast<std::size_t>(n));
  double top = 0.0;
  for (int i = 0; i < n; ++i) {
    const Vec2 ep = perp(unit_at(dth * i));
    const Vec2 gm = cone_gradient((i + n - 1) % n);
    const Vec2 gp = cone_gradient(i);
    jump[static_cast<std::size_t>(i)] = std::abs(dot(ep, gp) - dot(ep, gm));
    top = std::max(top, alpha_[static_cast<std::size_t>(i)]);
  }
  std::vector<double> sorted = jump;
  std::nth_element(sorted.begin(), sorted.begin() + n / 2, sorted.end());
  const double scale = std::max(sorted[static_cast<std::size_t>(n / 2)], 1e-12 * top);
  corners_.clear();
  for (int i = 0; i < n; ++i)
    if (jump[static_cast<std::size_t>(i)] > 5.0 * scale)
      corners_.push_back({i, cone_gradient((i + n - 1) % n), cone_gradient(i)});
}

Vec2 AlphaModel::cone_gradient(int i) const {
  const int n = static_cast<int>(cone_grad_.size());
  return cone_grad_[static_cast<std::size_t>(((i % n) + n) % n)] * scale_;
}

Vec2 AlphaModel::sample_gradient(int i) const {
  const int n = static_cast<int>(alpha_.size());
  const double dth = kTwoPi / n;
  const double am = alpha_[static_cast<std::size_t>((i + n - 1) % n)];
  const double a0 = alpha_[static_cast<std::size_t>(i % n)];
  const double ap = alpha_[static_cast<std::size_t>((i + 1) % n)];
  const Vec2 e = unit_at(dth * i);
  return (e * a0 + perp(e) * ((ap - am) / (2.0 * std::sin(dth)))) * scale_;
}

bool AlphaModel::in_flat_interior(int i) const {
  const int n = static_cast<int>(alpha_.size());
  for (const auto& a : flats_) {
    const int off = ((i - a.start_index) % n + n) % n;
    if (off > 0 && off < a.sample_count(n) - 1) return true;
  }
  return false;
}

double AlphaModel::operator()(Vec2 p) const {
  switch (kind_) {
    case AlphaKind::euclidean:
      return scale_ * norm(p);
    case AlphaKind::ell1:
      return scale_ * (std::abs(p.x) + std::abs(p.y));
    case AlphaKind::sampled: {
      if (p == Vec2{}) return 0.0;
      const int n = static_cast<int>(alpha_.size());
      double th = std::atan2(p.y, p.x);
      if (th < 0.0) th += kTwoPi;
      const int i = std::min(static_cast<int>(th / (kTwoPi / n)), n - 1);
      return dot(p, cone_gradient(i));
    }
  }
  return 0.0;
}

namespace {

// max of y.e over unit vectors e on the counterclockwise arc from a to b
// (arc shorter than pi)
double arc_max(Vec2 y, Vec2 a, Vec2 b) {
  if (cross(a, y) >= 0.0 && cross(y, b) >= 0.0) return norm(y);
  return std::max(dot(y, a), dot(y, b));
}

}  // namespace

double hopf_lax_value(Vec2 x, double t, const AlphaModel& m) {
  if (t < 0.0) throw DomainError("time must be nonnegative");
  double best = 0.0;
  switch (m.kind()) {
    case AlphaKind::euclidean:
      best = std::max(best, norm(x) - t * m.scale());
      break;
    case AlphaKind::ell1:
      for (int q = 0; q < 4; ++q) {
        const Vec2 a = unit_at(0.5 * kPi * q);
        const Vec2 b = perp(a);
        // alpha = scale (a + b).e on this quadrant
        best = std::max(best, arc_max(x - (a + b) * (t * m.scale()), a, b));
      }
      break;
    case AlphaKind::sampled: {
      const int n = static_cast<int>(m.table().size());
      const double dth = kTwoPi / n;
      for (int i = 0; i < n; ++i)
        best = std::max(best, arc_max(x - m.cone_gradient(i) * t, unit_at(dth * i), unit_at(dth * (i + 1))));
      break;
    }
  }
  return best - 1.0;
}

namespace {

void emit_fan(FrontSnapshot& s, Vec2 p, Vec2 g0, Vec2 g1, double t, double spacing) {
  const double len = t * norm(g1 - g0);
  const int segs = len > 0.0 ? std::max(1, static_cast<int>(std::ceil(len / spacing))) : 0;
  for (int j = 0; j <= segs; ++j) {
    const double w = segs == 0 ? 0.0 : static_cast<double>(j) / segs;
    s.points.push_back(p + (g0 * (1.0 - w) + g1 * w) * t);
    s.provenance.push_back(Provenance::corner_fan);
  }
}

}  // namespace

FrontSnapshot front_trace(const AlphaModel& m, double t, int n_angles) {
  if (t < 0.0) throw DomainError("time must be nonnegative");
  FrontSnapshot s;
  s.t = t;
  switch (m.kind()) {
    case AlphaKind::euclidean: {
      if (n_angles < 8) throw DomainError("front trace needs n_angles >= 8");
      for (int i = 0; i < n_angles; ++i) {
        const Vec2 e = unit_at(kTwoPi * i / n_angles);
        s.points.push_back(e + e * (t * m.scale()));
        s.provenance.push_back(Provenance::regular);
      }
      break;
    }
    case AlphaKind::ell1: {
      if (n_angles < 8) throw DomainError("front trace needs n_angles >= 8");
      const int per = n_angles / 4;
      const double dth = 0.5 * kPi / per;
      const double spacing = dth * (1.0 + t * m.scale());
      for (int q = 0; q < 4; ++q) {
        const Vec2 a = unit_at(0.5 * kPi * q);
        const Vec2 b = perp(a);
        // corner at a: the subdifferential runs from the previous quadrant's
        // gradient (a - b) to this quadrant's (a + b)
        emit_fan(s, a, (a - b) * m.scale(), (a + b) * m.scale(), t, spacing);
        for (int j = 1; j < per; ++j) {
          const Vec2 e = unit_at(0.5 * kPi * q + dth * j);
          s.points.push_back(e + (a + b) * (t * m.scale()));
          s.provenance.push_back(Provenance::regular);
        }
      }
      break;
    }
    case AlphaKind::sampled: {
      const int n = static_cast<int>(m.table().size());
      if (n_angles != 0 && n_angles != n) throw DomainError("sampled models trace at their own angles");
      const double dth = kTwoPi / n;
      double amax = 0.0;
      for (double a : m.table()) amax = std::max(amax, a);
      const double spacing = dth * (1.0 + t * amax * m.scale());
      std::size_t next_corner = 0;
      for (int i = 0; i < n; ++i) {
        const Vec2 e = unit_at(dth * i);
        if (next_corner < m.corners().size() && m.corners()[next_corner].index == i) {
          const auto& c = m.corners()[next_corner++];
          emit_fan(s, e, c.grad_minus, c.grad_plus, t, spacing);
          continue;
        }
        s.points.push_back(e + m.sample_gradient(i) * t);
        s.provenance.push_back(m.in_flat_interior(i) ? Provenance::flat_translate : Provenance::regular);
      }
      break;
    }
  }
  return s;
}

FrontConsistency front_consistency(const AlphaModel& m, double t, const FrontSnapshot& snapshot) {
  FrontConsistency r;
  const auto& pts = snapshot.points;
  for (const Vec2& x : pts) r.max_abs_u = std::max(r.max_abs_u, std::abs(hopf_lax_value(x, t, m)));
  const std::size_t n = pts.size();
  r.min_turning = kPi;
  // skip repeated points so zero-length edges do not count
  std::vector<Vec2> poly;
  for (std::size_t i = 0; i < n; ++i)
    if (poly.empty() || norm(pts[i] - poly.back()) > 1e-14) poly.push_back(pts[i]);
  while (poly.size() > 1 && norm(poly.front() - poly.back()) <= 1e-14) poly.pop_back();
  const std::size_t k = poly.size();
  for (std::size_t i = 0; i < k && k >= 3; ++i) {
    const Vec2 e0 = poly[i] - poly[(i + k - 1) % k];
    const Vec2 e1 = poly[(i + 1) % k] - poly[i];
    const double sn = cross(e0, e1) / (norm(e0) * norm(e1));
    r.convexity_defect = std::max(r.convexity_defect, -sn);
    r.min_turning = std::min(r.min_turning, std::atan2(cross(e0, e1), dot(e0, e1)));
  }
  return r;
}

bool convex_polygon_contains(const std::vector<Vec2>& polygon, Vec2 x, double slack) {
  const std::size_t n = polygon.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = polygon[i];
    const Vec2 b = polygon[(i + 1) % n];
    const Vec2 e = b - a;
    const double len = norm(e);
    if (len == 0.0) continue;
    if (cross(e, x - a) / len < -slack) return false;
  }
  return true;
}

}  // namespace ebv
