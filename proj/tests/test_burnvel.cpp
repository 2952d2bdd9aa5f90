#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include "ebv/burnvel.hpp"

using namespace ebv;

namespace {

SolverConfig oracle_config() {
  SolverConfig c;
  c.method = HbarMethod::shear_oracle;
  return c;
}

// {norm = 1} sampled on the uniform angle grid, as an alpha level curve.
LevelCurve gauge_curve(const std::function<double(Vec2)>& alpha, int n) {
  LevelCurve c;
  c.meta.kind = "alpha";
  for (int i = 0; i < n; ++i) {
    const double th = kTwoPi * i / n;
    const double a = alpha(unit_at(th));
    c.samples.push_back({th, unit_at(th) / a, a, 1e-9 * a, 1.0 / a});
  }
  return c;
}

// int_0^T D(q.V)(x0 + q t) dt by a fine midpoint rule on eval_gradient.
Vec2 brute_line_integral(const FlowField& f, Wave d, Vec2 x0) {
  const double len = std::hypot(d[0], d[1]);
  const Vec2 q{d[0] / len, d[1] / len};
  const int m = 4096;
  Vec2 s;
  for (int i = 0; i < m; ++i) {
    const double t = (i + 0.5) / m * len;
    const Mat2 g = eval_gradient(f, x0 + q * t);
    s = s + Vec2{q.x * g.m[0][0] + q.y * g.m[1][0], q.x * g.m[0][1] + q.y * g.m[1][1]};
  }
  return s * (len / m);
}

}  // namespace

TEST_CASE("burning velocity closed forms") {
  SolverConfig c;
  c.n = 32;
  const auto z = burning_velocity({3.0, 4.0}, make_zero(), c);
  CHECK(z.alpha == doctest::Approx(10.0).epsilon(1e-6));
  CHECK(z.lambda_p == doctest::Approx(0.2).epsilon(1e-3));
  CHECK(z.lambda_lo <= z.lambda_p);
  CHECK(z.lambda_hi >= z.lambda_p);

  const auto s = burning_velocity({0.0, 1.0}, make_shear_sin(), oracle_config());
  CHECK(s.alpha == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(s.lambda_p == doctest::Approx(1.0).epsilon(1e-3));

  // On the plateau Hbar(lambda e1) = lambda^2 + lambda, so alpha(e1) = 3 at lambda = 1.
  const auto p = burning_velocity({1.0, 0.0}, make_shear_sin(), oracle_config());
  CHECK(p.alpha == doctest::Approx(3.0).epsilon(1e-6));
  CHECK(p.lambda_p == doctest::Approx(1.0).epsilon(1e-3));

  CHECK_THROWS_AS(burning_velocity({0.0, 0.0}, make_zero(), c), DomainError);
}

TEST_CASE("stored invariants of a burning-velocity result") {
  const FlowField f = make_shear_sin(1.5);
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  for (int i = 0; i < 8; ++i) {
    const Vec2 p = unit_at(u(gen)) * 0.8;
    const SolverConfig c = oracle_config();
    const auto r = burning_velocity(p, f, c);
    CHECK(r.alpha == (1.0 + r.hbar_at_min) / r.lambda_p);
    CHECK(std::abs(r.optimality_gap) <= r.gap_bound);
    CHECK(r.alpha >= 2.0 * norm(p) - 3.0 * r.alpha_err);
    auto h = [&](double lam) { return (1.0 + hbar(p * lam, f, c).value) / lam; };
    CHECK(h(r.lambda_p * 1.05) >= h(r.lambda_p) - c.tol);
    CHECK(h(r.lambda_p * 0.95) >= h(r.lambda_p) - c.tol);

    const auto r2 = burning_velocity(p * 2.0, f, c);
    CHECK(r2.alpha == doctest::Approx(2.0 * r.alpha).epsilon(c.lambda_rel_tol));
    CHECK(r2.lambda_p == doctest::Approx(0.5 * r.lambda_p).epsilon(c.lambda_rel_tol));
  }
}

TEST_CASE("alpha level curve of the zero flow is the circle of radius 1/2") {
  SolverConfig c;
  c.n = 32;
  const LevelCurve lc = alpha_level_curve(make_zero(), c, 64);
  REQUIRE(lc.samples.size() == 64);
  for (std::size_t i = 0; i < lc.samples.size(); ++i) {
    const auto& s = lc.samples[i];
    CHECK(s.theta == doctest::Approx(kTwoPi * i / 64));
    CHECK(norm(s.point) == doctest::Approx(0.5).epsilon(1e-6));
  }
  CHECK(lc.flat_arcs.empty());
  CHECK(lc.non_roundness() < 1e-6);
  CHECK(lc.meta.kind == "alpha");
  CHECK_THROWS_AS(alpha_level_curve(make_zero(), c, 32), DomainError);

  const LevelCurve two = alpha_level_curve(make_zero(), c, 64, 3);
  for (std::size_t i = 0; i < lc.samples.size(); ++i) CHECK(two.samples[i].point == lc.samples[i].point);
}

TEST_CASE("resonant directions") {
  CHECK(resonant_directions(make_zero()).empty());

  const auto s = resonant_directions(make_shear_sin());
  REQUIRE(s.size() == 1);
  CHECK(s[0].normal.x == doctest::Approx(1.0));
  CHECK(s[0].normal.y == doctest::Approx(0.0));
  CHECK(s[0].strength == doctest::Approx(0.5));

  const auto c = resonant_directions(make_cellular());
  REQUIRE(c.size() == 2);
  const double r = 1.0 / std::sqrt(2.0);
  bool has_plus = false, has_minus = false;
  for (const auto& d : c) {
    CHECK(std::abs(d.normal.x) == doctest::Approx(r));
    CHECK(std::abs(d.normal.y) == doctest::Approx(r));
    (d.normal.x * d.normal.y > 0 ? has_plus : has_minus) = true;
  }
  CHECK(has_plus);
  CHECK(has_minus);
}

TEST_CASE("flat-piece detection on synthetic curves") {
  const LevelCurve circle = gauge_curve([](Vec2 p) { return norm(p); }, 64);
  const double circle_rate = (kTwoPi / 64) / (2.0 * std::sin(kPi / 64));
  CHECK(detect_flat_pieces(circle, 0.5 * circle_rate).flat_arcs.empty());

  // Unit ball of the max norm: a square with axis normals.
  const LevelCurve square =
      detect_flat_pieces(gauge_curve([](Vec2 p) { return std::max(std::abs(p.x), std::abs(p.y)); }, 64), 1e-3);
  REQUIRE(square.flat_arcs.size() == 4);
  for (const auto& a : square.flat_arcs) {
    CHECK(std::abs(std::abs(a.normal.x) + std::abs(a.normal.y) - 1.0) < 1e-9);
    CHECK(a.chord_deviation < 1e-9);
    CHECK(a.sample_count(64) >= 3);
  }

  // Unit ball of the l1 norm: a diamond with diagonal normals.
  const std::vector<ResonantDirection> diag{{{1, -1}, Vec2{1.0, 1.0} / std::sqrt(2.0), 1.0},
                                            {{1, 1}, Vec2{1.0, -1.0} / std::sqrt(2.0), 1.0}};
  const LevelCurve diamond =
      detect_flat_pieces(gauge_curve([](Vec2 p) { return std::abs(p.x) + std::abs(p.y); }, 64), 1e-3, diag);
  REQUIRE(diamond.flat_arcs.size() == 4);
  for (const auto& a : diamond.flat_arcs) {
    CHECK(std::abs(a.normal.x) == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(a.matches_resonance);
  }
  const LevelCurve unmatched =
      detect_flat_pieces(gauge_curve([](Vec2 p) { return std::abs(p.x) + std::abs(p.y); }, 64), 1e-3,
                         resonant_directions(make_shear_sin()));
  for (const auto& a : unmatched.flat_arcs) CHECK_FALSE(a.matches_resonance);
}

TEST_CASE("default curvature threshold") {
  const LevelCurve circle = gauge_curve([](Vec2 p) { return 2.0 * norm(p); }, 64);
  const double k = default_kappa_tol(circle);
  const double chord = 2.0 * 0.5 * std::sin(kPi / 64);
  CHECK(k == doctest::Approx(4.0 * 1e-9 * 0.5 / (chord * chord)).epsilon(1e-6));
}

TEST_CASE("line integrals against hand values and the Fourier side") {
  CHECK(line_integral_check(make_zero(), Wave{1, 0}, {0.3, 0.1}) == Vec2{0.0, 0.0});

  const Vec2 a = line_integral_check(make_shear_sin(), Vec2{1.0, 0.0}, {0.0, 0.25});
  CHECK(std::abs(a.x) < 1e-12);
  CHECK(std::abs(a.y) < 1e-12);
  const Vec2 b = line_integral_check(make_shear_sin(), Vec2{1.0, 0.0}, {0.0, 0.0});
  CHECK(std::abs(b.x) < 1e-12);
  CHECK(b.y == doctest::Approx(kTwoPi).epsilon(1e-12));

  const FlowField c = make_cellular();
  const Vec2 x0{0.1, 0.3};
  const Vec2 li = line_integral_check(c, Wave{1, 1}, x0);
  const Vec2 pr = line_integral_prediction(c, Wave{1, 1}, x0);
  const Vec2 bf = brute_line_integral(c, Wave{1, 1}, x0);
  CHECK(norm(li) > 1.0);
  CHECK(std::abs(li.x - pr.x) < 1e-8);
  CHECK(std::abs(li.y - pr.y) < 1e-8);
  CHECK(std::abs(li.x - bf.x) < 1e-8);
  CHECK(std::abs(li.y - bf.y) < 1e-8);

  const Vec2 off = line_integral_check(c, Wave{1, 2}, x0);
  CHECK(norm(off) < 1e-10);
}

TEST_CASE("rational directions") {
  const Wave w = rational_direction(Vec2{3.0, 4.0} / 5.0);
  CHECK(w[0] == 3);
  CHECK(w[1] == 4);
  const Wave v = rational_direction({-0.6, 0.8});
  CHECK(v[0] == -3);
  CHECK(v[1] == 4);
  CHECK(rational_direction({0.0, 1.0}) == Wave{0, 1});
  CHECK_THROWS_AS(rational_direction(Vec2{1.0, (1.0 + std::sqrt(5.0)) / 2.0}), DomainError);
  CHECK_THROWS_AS(line_integral_check(make_cellular(), Vec2{1.0, std::sqrt(2.0)}, {0.0, 0.0}), DomainError);
}
