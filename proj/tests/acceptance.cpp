// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance [--only 1,2,...] [--expect-fail 3,...]
//
// Exit status is 0 when the set of failing criteria equals the expected set.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ebv/burnvel.hpp"
#include "ebv/front.hpp"
#include "ebv/perturb.hpp"

using namespace ebv;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

Vec2 sample_momentum(std::mt19937_64& g, double rmin, double rmax) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double th = kTwoPi * u(g);
  return unit_at(th) * (rmin + (rmax - rmin) * u(g));
}

SolverConfig with(HbarMethod m, int n) {
  SolverConfig c;
  c.method = m;
  c.n = n;
  return c;
}

Outcome zero_flow() {
  std::mt19937_64 g(101);
  double worst_h = 0.0, worst_a = 0.0;
  for (int i = 0; i < 16; ++i) {
    const Vec2 p = sample_momentum(g, 0.25, 2.0);
    for (HbarMethod m : {HbarMethod::time_marching, HbarMethod::discounted}) {
      const SolverConfig c = with(m, 128);
      worst_h = std::max(worst_h, rel(hbar(p, make_zero(), c).value, norm2(p)));
      worst_a = std::max(worst_a, rel(burning_velocity(p, make_zero(), c).alpha, 2.0 * norm(p)));
    }
  }
  return {worst_h <= 1e-2 && worst_a <= 1e-2, fmt("max rel err Hbar %.2e alpha %.2e (tol 1e-2)", worst_h, worst_a)};
}

Outcome shear_equivalence() {
  std::mt19937_64 g(202);
  const int n = 128;
  double worst = 0.0;
  for (double a : {0.5, 1.0, 2.0}) {
    const FlowField f = make_shear_sin(a);
    const ShearOracle oracle(PeriodicProfile::from_shear(f, 1024));
    for (int i = 0; i < 24; ++i) {
      const Vec2 p = sample_momentum(g, 0.25, 2.0);
      const double ref = oracle.hbar(p).value;
      for (HbarMethod m : {HbarMethod::time_marching, HbarMethod::discounted})
        worst = std::max(worst, rel(hbar(p, f, with(m, n)).value, ref));
    }
  }
  const FlowField unit = make_shear_sin(1.0);
  const double w = 2.0 * std::sqrt(2.0) / kPi;
  double plateau = 0.0;
  for (double s : {0.0, 0.3, 0.6, 0.9})
    for (HbarMethod m : {HbarMethod::time_marching, HbarMethod::discounted})
      plateau = std::max(plateau, rel(hbar({1.0, s * w}, unit, with(m, n)).value, 2.0));
  return {worst <= 2e-2 && plateau <= 2e-2,
          fmt("144 solves max rel err %.2e; plateau Hbar(1, p2) = 2, |p2| <= 0.9 W, max rel err %.2e (tol 2e-2)", worst,
              plateau)};
}

Outcome expansion_order() {
  const double gr = 0.5 * (1.0 + std::sqrt(5.0));
  const Vec2 p = Vec2{1.0, gr} / std::hypot(1.0, gr);
  const FlowField f = make_cellular();
  const double target = a2(p, f).a2;
  const auto rows = expansion_residual(p, f, {0.2, 0.1, 0.05}, with(HbarMethod::time_marching, 128));
  bool monotone = true;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    monotone = monotone && std::abs(rows[i].ratio_h - target) < std::abs(rows[i - 1].ratio_h - target);
    monotone = monotone && std::abs(rows[i].ratio_alpha - target) < std::abs(rows[i - 1].ratio_alpha - target);
  }
  const double dh = rel(rows.back().ratio_h, target), da = rel(rows.back().ratio_alpha, target);
  const auto res = corrector_residual(p, f, {0.1, 0.05, 0.025}, 64);
  double rmin = 1e300, rmax = 0.0;
  for (std::size_t i = 1; i < res.size(); ++i) {
    const double r = res[i - 1].second_order / res[i].second_order;
    rmin = std::min(rmin, r);
    rmax = std::max(rmax, r);
  }
  const bool pass = monotone && dh <= 0.2 && da <= 0.2 && rmin >= 6.0 && rmax <= 10.0;
  return {pass, fmt("a2 %.4f; r_H %.3f %.3f %.3f; r_alpha %.3f %.3f %.3f; monotone %s; rel dev at 0.05: %.3f %.3f "
                    "(tol 0.2); residual ratios [%.2f, %.2f] (want [6, 10])",
                    target, rows[0].ratio_h, rows[1].ratio_h, rows[2].ratio_h, rows[0].ratio_alpha,
                    rows[1].ratio_alpha, rows[2].ratio_alpha, monotone ? "yes" : "no", dh, da, rmin, rmax)};
}

Outcome hand_a2() {
  const FlowField f = make_shear_sin();
  const double v = a2({1.0, 1.0}, f).a2;
  // independent sum over the mode list
  double brute = 0.0;
  for (const auto& [k, vk] : f.modes()) {
    const double pk = k[0] + k[1];
    brute += std::norm(vk.x + vk.y) * (k[0] * k[0] + k[1] * k[1]) / (pk * pk);
  }
  brute *= 0.25;
  return {std::abs(v - 0.125) <= 1e-12 && std::abs(brute - 0.125) <= 1e-12,
          fmt("a2 = %.15f, brute force %.15f (target 0.125, tol 1e-12)", v, brute)};
}

Outcome shear_flat_pieces() {
  const FlowField f = make_shear_sin(1.0);
  SolverConfig c = with(HbarMethod::shear_oracle, 128);
  const int n = 256;
  LevelCurve curve = alpha_level_curve(f, c, n);
  curve = detect_flat_pieces(std::move(curve), default_kappa_tol(curve), resonant_directions(f));
  bool family = !curve.flat_arcs.empty();
  for (const auto& a : curve.flat_arcs)
    family = family && std::abs(std::abs(a.normal.x) - 1.0) <= 1e-6 && a.matches_resonance;
  const ShearOracle oracle(PeriodicProfile::from_shear(f, c.quad_n));
  bool inside = true;
  double worst = -1e300;
  for (const auto& a : curve.flat_arcs)
    for (int idx : {a.start_index, a.end_index % n}) {
      const auto& s = curve.samples[static_cast<std::size_t>(idx)];
      const Vec2 p = unit_at(s.theta) * s.lambda;
      const double slack = 2.0 * (kTwoPi / n) * s.lambda;
      const double excess = std::abs(p.y) - oracle.plateau_width(p.x);
      worst = std::max(worst, excess / slack);
      inside = inside && excess <= slack;
    }
  return {family && inside,
          fmt("%zu arcs, all normals +-(1,0): %s; endpoint excess over plateau %.3f slacks (max 1)",
              curve.flat_arcs.size(), family ? "yes" : "no", worst)};
}

Outcome cellular_window() {
  const FlowField f = make_cellular(2.0);
  SolverConfig c = with(HbarMethod::time_marching, 256);
  c.tol = 1e-6;
  c.t_max = 8000.0;
  const double step = 0.002;
  auto scan = [&](const FlowField& flow, int max_steps) {
    const HbarEvaluator ev = make_hbar_evaluator(flow, c);
    std::vector<double> x;
    std::vector<HbarResult> r;
    for (int i = 0; i <= max_steps; ++i) {
      x.push_back(step * i);
      r.push_back(ev({1.0, step * i}));
      if (flat_window(x, r).steps < i) break;
    }
    return flat_window(x, r);
  };
  const FlatWindow w = scan(f, 25);
  const FlatWindow z = scan(make_zero(), 25);
  const bool pass = w.steps > 4 && w.steps > z.steps && w.variation <= w.allowance;
  return {pass, fmt("n=256 step %.3f: window %d steps (width %.3f, variation %.2e <= %.2e); zero-flow control %d "
                    "steps",
                    step, w.steps, w.width, w.variation, w.allowance, z.steps)};
}

Outcome front_geometry() {
  const auto circ = front_trace(AlphaModel::euclidean(), 1.0, 256);
  double dev = 0.0;
  for (const Vec2& q : circ.points) dev = std::max(dev, std::abs(norm(q) - 2.0));

  const AlphaModel m = AlphaModel::ell1();
  const auto s = front_trace(m, 1.0, 256);
  // fans: maximal runs of corner_fan points
  std::vector<double> fan_len;
  double arc_dev = 0.0;
  int regular = 0;
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    if (s.provenance[i] == Provenance::corner_fan) {
      if (i == 0 || s.provenance[i - 1] != Provenance::corner_fan) fan_len.push_back(0.0);
      else fan_len.back() += norm(s.points[i] - s.points[i - 1]);
    } else {
      ++regular;
      const Vec2 q = s.points[i];
      arc_dev = std::max(arc_dev, std::abs(norm(q - Vec2{q.x > 0 ? 1.0 : -1.0, q.y > 0 ? 1.0 : -1.0}) - 1.0));
    }
  }
  bool fans = fan_len.size() == 4;
  for (double l : fan_len) fans = fans && std::abs(l - 2.0) <= 1e-9;
  const double u = front_consistency(m, 1.0, s).max_abs_u;
  const bool pass = dev <= 1e-9 && fans && arc_dev <= 1e-9 && regular > 0 && u <= 1e-9;
  return {pass, fmt("circle radius dev %.1e; %zu fans of length 2: %s; quarter-arc dev %.1e; max |u| %.1e (tol 1e-9)",
                    dev, fan_len.size(), fans ? "yes" : "no", arc_dev, u)};
}

struct Suite {
  std::string name;
  int checks = 0;
  int failures = 0;
  void check(bool ok) {
    ++checks;
    failures += ok ? 0 : 1;
  }
};

Outcome property_suites() {
  std::mt19937_64 g(808);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const SolverConfig oc = with(HbarMethod::shear_oracle, 128);
  const SolverConfig pc = with(HbarMethod::time_marching, 32);
  const FlowField sh = make_shear_sin(1.0);
  std::vector<Suite> suites;

  Suite hom{"homogeneity"};
  for (int i = 0; i < 25; ++i) {
    const Vec2 p = sample_momentum(g, 0.25, 1.5);
    const double s = 0.2 + 3.8 * u(g);
    const auto a = burning_velocity(p, sh, oc), b = burning_velocity(p * s, sh, oc);
    hom.check(rel(b.alpha, s * a.alpha) <= 2.0 * oc.lambda_rel_tol);
    const FlowField ce = make_cats_eye(0.4);
    hom.check(rel(a2(p * s, ce).a2, a2(p, ce).a2) <= 1e-12);
  }
  suites.push_back(hom);

  Suite cvx{"convexity"};
  for (int i = 0; i < 40; ++i) {
    const Vec2 p = sample_momentum(g, 0.05, 2.0), q = sample_momentum(g, 0.05, 2.0);
    const auto hp = hbar(p, sh, oc), hq = hbar(q, sh, oc), hm = hbar((p + q) * 0.5, sh, oc);
    cvx.check(hm.value <= 0.5 * (hp.value + hq.value) + hp.error_estimate + hq.error_estimate + hm.error_estimate + 1e-12);
  }
  for (int i = 0; i < 10; ++i) {
    const Vec2 p = sample_momentum(g, 0.05, 1.0), q = sample_momentum(g, 0.05, 1.0);
    const auto ap = burning_velocity(p, sh, oc), aq = burning_velocity(q, sh, oc),
               am = burning_velocity((p + q) * 0.5, sh, oc);
    cvx.check(am.alpha <= 0.5 * (ap.alpha + aq.alpha) + ap.alpha_err + aq.alpha_err + am.alpha_err);
  }
  for (int i = 0; i < 3; ++i) {
    const Vec2 p = sample_momentum(g, 0.05, 1.5), q = sample_momentum(g, 0.05, 1.5);
    const FlowField ce = make_cellular();
    const auto hp = hbar(p, ce, pc), hq = hbar(q, ce, pc), hm = hbar((p + q) * 0.5, ce, pc);
    cvx.check(hm.value <= 0.5 * (hp.value + hq.value) + hp.error_estimate + hq.error_estimate + hm.error_estimate);
  }
  suites.push_back(cvx);

  Suite low{"lower bounds"};
  for (int i = 0; i < 15; ++i) {
    const Vec2 p = sample_momentum(g, 0.05, 2.0);
    const auto r = hbar(p, make_cellular(1.0 + u(g)), pc);
    low.check(r.value >= norm2(p) - 3.0 * r.error_estimate);
  }
  for (int i = 0; i < 20; ++i) {
    const Vec2 p = sample_momentum(g, 0.05, 2.0);
    const FlowField f = make_shear_sin(0.1 + 2.9 * u(g));
    const auto r = hbar(p, f, oc);
    low.check(r.value >= norm2(p) - r.error_estimate);
    const auto b = burning_velocity(p, f, oc);
    low.check(b.alpha >= 2.0 * norm(p) - 3.0 * b.alpha_err);
  }
  suites.push_back(low);

  Suite sc{"scaling identity"};
  for (int i = 0; i < 25; ++i) {
    const Vec2 p = sample_momentum(g, 0.05, 2.0);
    const double base = hbar(p, make_shear_sin(1.0), oc).value;
    for (double a : {2.0, 4.0}) sc.check(rel(hbar(p * a, make_shear_sin(a), oc).value / (a * a), base) <= 1e-9);
  }
  for (int i = 0; i < 2; ++i) {
    const Vec2 p = sample_momentum(g, 0.05, 1.0);
    const auto base = hbar(p, make_cellular(1.0), pc);
    for (double a : {2.0, 4.0}) {
      const auto r = hbar(p * a, make_cellular(a), pc);
      sc.check(std::abs(r.value / (a * a) - base.value) <= r.error_estimate / (a * a) + base.error_estimate + pc.tol);
    }
  }
  suites.push_back(sc);

  Suite gap{"optimality gap"};
  for (int i = 0; i < 50; ++i) {
    const auto r = burning_velocity(sample_momentum(g, 0.05, 2.0), make_shear_sin(0.2 + 2.8 * u(g)), oc);
    gap.check(std::abs(r.optimality_gap) <= r.gap_bound);
  }
  suites.push_back(gap);

  Suite li{"line integrals"};
  std::uniform_int_distribution<int> k(-5, 5);
  for (const FlowField& f : {make_cellular(1.7), make_cats_eye(0.35)})
    for (int i = 0; i < 20;) {
      const Wave d{k(g), k(g)};
      if ((d[0] == 0 && d[1] == 0) || std::gcd(d[0], d[1]) != 1) continue;
      ++i;
      const Vec2 x0{u(g), u(g)};
      const Vec2 a = line_integral_check(f, d, x0), b = line_integral_prediction(f, d, x0);
      li.check(std::abs(a.x - b.x) <= 1e-8);
      li.check(std::abs(a.y - b.y) <= 1e-8);
    }
  suites.push_back(li);

  bool pass = true;
  std::string detail;
  for (const auto& s : suites) {
    pass = pass && s.failures == 0 && s.checks >= 50;
    detail += fmt("%s%s %d/%d", detail.empty() ? "" : "; ", s.name.c_str(), s.checks - s.failures, s.checks);
  }
  return {pass, detail + " (each >= 50, all passing)"};
}

Outcome strong_flow() {
  const std::vector<double> amps{1.0, 2.0, 4.0, 8.0, 16.0};
  const SolverConfig c = with(HbarMethod::time_marching, 128);
  std::vector<double> lam, aniso;
  std::string detail;
  for (double a : amps) {
    const FlowField f = make_cellular(a);
    double lmax = 0.0;
    double a0 = 0.0, a45 = 0.0;
    for (double th : {0.0, kPi / 8.0, kPi / 4.0}) {
      const auto r = burning_velocity(unit_at(th), f, c);
      lmax = std::max(lmax, r.lambda_p);
      if (th == 0.0) a0 = r.alpha;
      if (th == kPi / 4.0) a45 = r.alpha;
    }
    lam.push_back(lmax / a);
    aniso.push_back(a45 / a0);
    detail += fmt("%sA=%g: %.5f %.5f", detail.empty() ? "" : "; ", a, lam.back(), aniso.back());
  }
  bool dec = true, inc = true;
  for (std::size_t i = 1; i < amps.size(); ++i) {
    dec = dec && lam[i] < lam[i - 1];
    inc = inc && aniso[i] > aniso[i - 1];
  }
  return {dec && inc, "max lambda/A, anisotropy: " + detail + fmt("; decreasing %s, increasing %s", dec ? "yes" : "no",
                                                                   inc ? "yes" : "no")};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
  double budget_s;  // 0: no runtime bound
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::vector<int> only, expect_fail;
  app.add_option("--only", only, "criteria to run")->delimiter(',');
  app.add_option("--expect-fail", expect_fail, "criteria known to fail")->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> all{
      {1, "zero-flow exactness", zero_flow, 60.0},
      {2, "shear oracle equivalence", shear_equivalence, 600.0},
      {3, "expansion order", expansion_order, 900.0},
      {4, "hand-value a2", hand_a2, 0.0},
      {5, "shear flat pieces", shear_flat_pieces, 0.0},
      {6, "cellular flat window", cellular_window, 0.0},
      {7, "front geometry", front_geometry, 0.0},
      {8, "property suites", property_suites, 0.0},
      {9, "strong-flow trends", strong_flow, 0.0},
  };

  std::set<int> failed, expected(expect_fail.begin(), expect_fail.end());
  for (const auto& c : all) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) {
      expected.erase(c.id);
      continue;
    }
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget_s > 0.0 && dt > c.budget_s) {
      o.pass = false;
      o.detail += fmt("; over runtime budget %.0f s", c.budget_s);
    }
    if (!o.pass) failed.insert(c.id);
    std::printf("%s criterion %d (%s): %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), dt);
    std::fflush(stdout);
  }
  if (failed != expected) {
    std::printf("failing set differs from the expected set\n");
    return 1;
  }
  return 0;
}
