#include "ebv/burnvel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "ebv/parallel.hpp"

namespace ebv {

namespace {

constexpr int kMaxBracketSteps = 40;
constexpr double kGolden = 0.6180339887498949;

struct Probe {
  double h = 0.0;
  HbarResult r;
};

}  // namespace

BurningVelocityResult burning_velocity(Vec2 p, const HbarEvaluator& eval, double lambda_rel_tol, double hbar_tol) {
  const double pn = norm(p);
  if (!(pn > 0.0) || !std::isfinite(pn)) throw DomainError("burning velocity needs a finite p != 0");
  if (!(lambda_rel_tol > 0.0)) throw DomainError("lambda_rel_tol must be positive");

  long evals = 0;
  auto probe = [&](double lam) {
    Probe pr;
    pr.r = eval(p * lam);
    pr.h = (1.0 + pr.r.value) / lam;
    ++evals;
    return pr;
  };

  double b = 1.0 / pn;
  Probe pb = probe(b);
  double a = 0.5 * b;
  Probe pa = probe(a);
  int steps = 0;
  while (pa.h < pb.h) {
    if (++steps > kMaxBracketSteps) throw DomainError("no minimizing bracket for lambda within 40 halvings");
    b = a;
    pb = pa;
    a = 0.5 * b;
    pa = probe(a);
  }
  double c = 2.0 * b;
  Probe pc = probe(c);
  steps = 0;
  while (pc.h < pb.h) {
    if (++steps > kMaxBracketSteps) throw DomainError("no minimizing bracket for lambda within 40 doublings");
    a = b;
    pa = pb;
    b = c;
    pb = pc;
    c = 2.0 * b;
    pc = probe(c);
  }

  double lo = a, hi = c;
  double x1 = hi - kGolden * (hi - lo), x2 = lo + kGolden * (hi - lo);
  Probe p1 = probe(x1), p2 = probe(x2);
  while (hi - lo >= lambda_rel_tol * std::min(x1, x2)) {
    if (p1.h <= p2.h) {
      hi = x2;
      x2 = x1;
      p2 = p1;
      x1 = hi - kGolden * (hi - lo);
      p1 = probe(x1);
    } else {
      lo = x1;
      x1 = x2;
      p1 = p2;
      x2 = lo + kGolden * (hi - lo);
      p2 = probe(x2);
    }
  }
  const bool first = p1.h <= p2.h;
  const double lam = first ? x1 : x2;
  const Probe& best = first ? p1 : p2;

  BurningVelocityResult res;
  res.p = p;
  res.lambda_p = lam;
  res.lambda_lo = lo;
  res.lambda_hi = hi;
  res.hbar_at_min = best.r.value;
  res.alpha = (1.0 + res.hbar_at_min) / lam;
  res.alpha_err = best.r.error_estimate / lam + std::abs(p1.h - p2.h);

  const double step = std::max(lambda_rel_tol, 3.0 * std::sqrt(hbar_tol)) * lam;
  const Probe up = probe(lam + step);
  const Probe dn = probe(lam - step);
  const double dhbar = (up.r.value - dn.r.value) / (2.0 * step);
  res.fd_step = step;
  res.optimality_gap = lam * dhbar - (1.0 + res.hbar_at_min);
  const double curv = (up.h - 2.0 * best.h + dn.h) / (step * step);
  res.gap_bound = 5.0 * step * lam * lam * std::abs(curv);
  res.evaluations = evals;
  return res;
}

BurningVelocityResult burning_velocity(Vec2 p, const FlowField& f, const SolverConfig& cfg) {
  return burning_velocity(p, make_hbar_evaluator(f, cfg), cfg.lambda_rel_tol, cfg.tol);
}

LevelCurve alpha_level_curve(const std::function<HbarEvaluator()>& make_eval, double lambda_rel_tol, double hbar_tol,
                             int n_angles, int threads) {
  if (n_angles < 64) throw DomainError("alpha level curve needs n_angles >= 64");
  LevelCurve curve;
  curve.meta.kind = "alpha";
  curve.meta.level = 1.0;
  curve.meta.tol = hbar_tol;
  curve.samples.resize(static_cast<std::size_t>(n_angles));
  parallel_for(n_angles, threads, [&](int i) {
    const double theta = kTwoPi * i / n_angles;
    const Vec2 e = unit_at(theta);
    const BurningVelocityResult bv = burning_velocity(e, make_eval(), lambda_rel_tol, hbar_tol);
    auto& s = curve.samples[static_cast<std::size_t>(i)];
    s.theta = theta;
    s.point = e / bv.alpha;
    s.value_used = bv.alpha;
    s.value_err = bv.alpha_err;
    s.lambda = bv.lambda_p;
  });
  return curve;
}

LevelCurve alpha_level_curve(const FlowField& f, const SolverConfig& cfg, int n_angles, int threads) {
  cfg.validate();
  LevelCurve curve =
      alpha_level_curve([&] { return make_hbar_evaluator(f, cfg); }, cfg.lambda_rel_tol, cfg.tol, n_angles, threads);
  curve.meta.flow_label = f.label();
  curve.meta.amplitude = f.amplitude();
  return curve;
}

std::vector<ResonantDirection> resonant_directions(const FlowField& f) {
  std::vector<ResonantDirection> out;
  if (f.is_zero()) return out;
  std::map<Wave, double> families;
  for (const auto& [k, v] : f.modes()) {
    const double mag = std::sqrt(std::norm(v.x) + std::norm(v.y));
    if (mag == 0.0) continue;
    const int g = std::gcd(std::abs(k[0]), std::abs(k[1]));
    Wave kh{k[0] / g, k[1] / g};
    if (kh[0] < 0 || (kh[0] == 0 && kh[1] < 0)) kh = neg(kh);
    double& s = families[kh];
    s = std::max(s, mag);
  }
  for (const auto& [kh, s] : families) {
    ResonantDirection d;
    d.k = kh;
    Vec2 q = perp(Vec2{static_cast<double>(kh[0]), static_cast<double>(kh[1])});
    if (q.x < 0.0 || (q.x == 0.0 && q.y < 0.0)) q = -q;
    d.normal = q / norm(q);
    d.strength = std::abs(f.amplitude()) * s;
    out.push_back(d);
  }
  std::sort(out.begin(), out.end(), [](const ResonantDirection& a, const ResonantDirection& b) {
    if (a.strength != b.strength) return a.strength > b.strength;
    if (a.normal.x != b.normal.x) return a.normal.x > b.normal.x;
    return a.normal.y > b.normal.y;
  });
  return out;
}

double default_kappa_tol(const LevelCurve& curve) {
  const std::size_t n = curve.samples.size();
  if (n < 3) return 0.0;
  double rel = 0.0, radius = 0.0, chord = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = curve.samples[i];
    if (s.value_used != 0.0) rel = std::max(rel, std::abs(s.value_err / s.value_used));
    radius += norm(s.point);
    chord += norm(curve.samples[(i + 1) % n].point - s.point);
  }
  radius /= static_cast<double>(n);
  chord /= static_cast<double>(n);
  rel = std::max(rel, 1e-12);
  return 4.0 * rel * radius / (chord * chord);
}

LevelCurve detect_flat_pieces(LevelCurve curve, double kappa_tol, const std::vector<ResonantDirection>& predicted) {
  curve.flat_arcs.clear();
  curve.meta.kappa_tol = kappa_tol;
  const int n = static_cast<int>(curve.samples.size());
  if (n < 3) return curve;
  auto pt = [&](int i) { return curve.samples[static_cast<std::size_t>(((i % n) + n) % n)].point; };

  std::vector<char> flat(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const Vec2 e0 = pt(i) - pt(i - 1);
    const Vec2 e1 = pt(i + 1) - pt(i);
    const double turn = std::abs(std::atan2(cross(e0, e1), dot(e0, e1)));
    const double len = 0.5 * (norm(e0) + norm(e1));
    flat[static_cast<std::size_t>(i)] = len > 0.0 && turn / len < kappa_tol;
  }
  // start scanning just after a curved vertex so runs never straddle index 0
  int origin = -1;
  for (int i = 0; i < n; ++i)
    if (!flat[static_cast<std::size_t>(i)]) {
      origin = i;
      break;
    }
  if (origin < 0) return curve;

  const double match_angle = 2.0 * kTwoPi / n;
  for (int off = 1; off <= n;) {
    const int i = (origin + off) % n;
    if (!flat[static_cast<std::size_t>(i)]) {
      ++off;
      continue;
    }
    int len = 0;
    while (off + len <= n && flat[static_cast<std::size_t>((origin + off + len) % n)]) ++len;
    LevelCurve::FlatArc arc;
    arc.start_index = ((i - 1) % n + n) % n;
    arc.end_index = (i + len) % n;
    const int count = len + 2;

    Vec2 c{};
    for (int q = 0; q < count; ++q) c = c + pt(arc.start_index + q);
    c = c / count;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (int q = 0; q < count; ++q) {
      const Vec2 d = pt(arc.start_index + q) - c;
      sxx += d.x * d.x;
      sxy += d.x * d.y;
      syy += d.y * d.y;
    }
    const double phi = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
    Vec2 normal = perp(unit_at(phi));
    if (dot(normal, c) < 0.0) normal = -normal;
    arc.normal = normal;
    for (int q = 0; q < count; ++q)
      arc.chord_deviation = std::max(arc.chord_deviation, std::abs(dot(pt(arc.start_index + q) - c, normal)));
    for (const auto& d : predicted) {
      const double cs = dot(normal, d.normal);
      if (std::abs(cs) >= std::cos(match_angle)) {
        arc.matches_resonance = true;
        arc.matched_normal = cs >= 0.0 ? d.normal : -d.normal;
        break;
      }
    }
    curve.flat_arcs.push_back(arc);
    off += len;
  }
  std::sort(curve.flat_arcs.begin(), curve.flat_arcs.end(),
            [](const auto& a, const auto& b) { return a.start_index < b.start_index; });
  return curve;
}

Wave rational_direction(Vec2 q) {
  const double len = norm(q);
  if (!(len > 0.0) || !std::isfinite(len)) throw DomainError("direction must be finite and nonzero");
  const Vec2 u = q / len;
  const bool x_major = std::abs(u.x) >= std::abs(u.y);
  for (int m = 1; m <= 10000; ++m) {
    Wave k;
    if (x_major) {
      k = {u.x > 0.0 ? m : -m, static_cast<int>(std::lround(u.y / std::abs(u.x) * m))};
    } else {
      k = {static_cast<int>(std::lround(u.x / std::abs(u.y) * m)), u.y > 0.0 ? m : -m};
    }
    const Vec2 kv{static_cast<double>(k[0]), static_cast<double>(k[1])};
    if (norm(kv / norm(kv) - u) <= 1e-12 && std::gcd(std::abs(k[0]), std::abs(k[1])) == 1) return k;
  }
  throw DomainError("direction is not rational (no integer vector with entries <= 1e4 matches)");
}

Vec2 line_integral_check(const FlowField& f, Wave dir, Vec2 x0) {
  if ((dir[0] == 0 && dir[1] == 0) || std::gcd(std::abs(dir[0]), std::abs(dir[1])) != 1)
    throw DomainError("line integral direction must be a primitive integer vector");
  const Vec2 ab{static_cast<double>(dir[0]), static_cast<double>(dir[1])};
  const double period = norm(ab);
  const Vec2 q = ab / period;
  long top = 0;
  for (const auto& [k, v] : f.modes()) top = std::max(top, std::labs(static_cast<long>(k[0]) * dir[0] + static_cast<long>(k[1]) * dir[1]));
  const long nq = 2 * top + 8;
  Vec2 sum{};
  for (long m = 0; m < nq; ++m) {
    const double s = static_cast<double>(m) / static_cast<double>(nq);
    const Mat2 g = eval_gradient(f, x0 + ab * s);
    sum = sum + Vec2{q.x * g.m[0][0] + q.y * g.m[1][0], q.x * g.m[0][1] + q.y * g.m[1][1]};
  }
  return sum * (period / static_cast<double>(nq));
}

Vec2 line_integral_check(const FlowField& f, Vec2 q, Vec2 x0) { return line_integral_check(f, rational_direction(q), x0); }

Vec2 line_integral_prediction(const FlowField& f, Wave dir, Vec2 x0) {
  const Vec2 ab{static_cast<double>(dir[0]), static_cast<double>(dir[1])};
  const double period = norm(ab);
  const Vec2 q = ab / period;
  cplx sx = 0.0, sy = 0.0;
  for (const auto& [k, v] : f.modes()) {
    if (k[0] * dir[0] + k[1] * dir[1] != 0) continue;
    const double ph = kTwoPi * (k[0] * x0.x + k[1] * x0.y);
    const cplx c = dot(q, v) * cplx(0.0, kTwoPi) * cplx(std::cos(ph), std::sin(ph));
    sx += c * static_cast<double>(k[0]);
    sy += c * static_cast<double>(k[1]);
  }
  return Vec2{sx.real(), sy.real()} * (period * f.amplitude());
}

}  // namespace ebv
