#include <doctest.h>

#include <cmath>
#include <random>

#include "ebv/flow.hpp"

using namespace ebv;

namespace {

// Hand-differentiated cellular and cat's eye velocities.
Vec2 cellular_velocity(Vec2 x) {
  const double sx = std::sin(kTwoPi * x.x), cx = std::cos(kTwoPi * x.x);
  const double sy = std::sin(kTwoPi * x.y), cy = std::cos(kTwoPi * x.y);
  return {-kTwoPi * sx * cy, kTwoPi * cx * sy};
}

Vec2 cats_eye_velocity(Vec2 x, double delta) {
  const double sx = std::sin(kTwoPi * x.x), cx = std::cos(kTwoPi * x.x);
  const double sy = std::sin(kTwoPi * x.y), cy = std::cos(kTwoPi * x.y);
  return {-kTwoPi * (sx * cy - delta * cx * sy), kTwoPi * (cx * sy - delta * sx * cy)};
}

}  // namespace

TEST_CASE("make_shear builds exactly the stated modes") {
  const FlowField s = make_shear_sin();
  REQUIRE(s.modes().size() == 2);
  const CVec2 v = s.modes().at({0, 1});
  CHECK(std::abs(v.x - cplx(0, -0.5)) < 1e-15);
  CHECK(std::abs(v.y) == 0.0);
  CHECK(std::abs(s.modes().at({0, -1}).x - cplx(0, 0.5)) < 1e-15);
  CHECK(s.is_shear());

  const FlowField c = make_shear({{1, 0.5}, {-1, 0.5}});
  CHECK(std::abs(c.modes().at({0, 1}).x - cplx(0.5, 0.0)) < 1e-15);
  CHECK(eval_velocity(c, {0.3, 0.0}).x == doctest::Approx(1.0).epsilon(1e-14));

  CHECK_THROWS_AS(make_shear({}), DomainError);
  CHECK_THROWS_AS(make_shear({{0, 1.0}, {1, 0.5}, {-1, 0.5}}), DomainError);
  CHECK_THROWS_AS(make_shear({{1, cplx(0, 1)}, {-1, cplx(0, 1)}}), DomainError);
}

TEST_CASE("cellular and cat's eye flows") {
  const FlowField c = make_cellular();
  CHECK(c.modes().size() == 4);
  for (const auto& [k, v] : c.modes()) CHECK((std::abs(k[0]) == 1 && std::abs(k[1]) == 1));
  const Vec2 v = eval_velocity(c, {0.25, 0.25});
  CHECK(std::abs(v.x) < 1e-12);
  CHECK(std::abs(v.y) < 1e-12);
  CHECK(sample_divergence(c, 64).max_abs() <= 1e-12);
  CHECK_FALSE(c.is_shear());

  const FlowField e = make_cats_eye(0.5);
  CHECK(e.modes().size() == 4);
  CHECK(eval_stream(e, {0.0, 0.0}) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(sample_divergence(e, 64).max_abs() <= 1e-12);
  CHECK_THROWS_AS(make_cats_eye(0.0), DomainError);
  CHECK_THROWS_AS(make_cats_eye(1.0), DomainError);

  const FlowField tiny = make_cats_eye(1e-14);
  for (const auto& [k, vk] : c.modes()) {
    const CVec2 w = tiny.modes().at(k);
    CHECK(std::abs(w.x - vk.x) < 1e-12);
    CHECK(std::abs(w.y - vk.y) < 1e-12);
  }

  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 20; ++i) {
    const Vec2 x{u(gen), u(gen)};
    const Vec2 a = eval_velocity(c, x), b = cellular_velocity(x);
    CHECK(std::abs(a.x - b.x) < 1e-12);
    CHECK(std::abs(a.y - b.y) < 1e-12);
    const Vec2 d = eval_velocity(make_cats_eye(0.3), x), g = cats_eye_velocity(x, 0.3);
    CHECK(std::abs(d.x - g.x) < 1e-12);
    CHECK(std::abs(d.y - g.y) < 1e-12);
  }
}

TEST_CASE("eval_velocity") {
  CHECK(eval_velocity(make_zero(), {0.3, 0.9}) == Vec2{0.0, 0.0});
  const Vec2 a = eval_velocity(make_shear_sin(1.0), {0.0, 0.25});
  CHECK(a.x == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(a.y == 0.0);
  const Vec2 b = eval_velocity(make_shear_sin(3.0), {0.7, 0.25});
  CHECK(b.x == doctest::Approx(3.0).epsilon(1e-15));

  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const FlowField c1 = make_cellular(1.3), c2 = make_cellular(2.6);
  for (int i = 0; i < 20; ++i) {
    const Vec2 x{u(gen), u(gen)};
    // Shifting a random point by an integer rounds it; dyadic points shift exactly.
    const Vec2 d{std::ldexp(std::floor(std::ldexp(x.x, 20)), -20), std::ldexp(std::floor(std::ldexp(x.y, 20)), -20)};
    const Vec2 pd = eval_velocity(c1, d), qd = eval_velocity(c1, d + Vec2{1.0, -3.0});
    CHECK(pd.x == qd.x);
    CHECK(pd.y == qd.y);
    const Vec2 p = eval_velocity(c1, x), q = eval_velocity(c1, x + Vec2{1.0, -3.0});
    CHECK(std::abs(p.x - q.x) < 1e-12);
    CHECK(std::abs(p.y - q.y) < 1e-12);
    const Vec2 r = eval_velocity(c2, x);
    CHECK(r.x == 2.0 * p.x);
    CHECK(r.y == 2.0 * p.y);
  }
}

TEST_CASE("eval_gradient") {
  const Mat2 z = eval_gradient(make_zero(), {0.1, 0.2});
  CHECK(z.m[0][0] == 0.0);
  CHECK(z.m[1][1] == 0.0);
  const Mat2 s = eval_gradient(make_shear_sin(), {0.4, 0.0});
  CHECK(s.m[0][1] == doctest::Approx(kTwoPi).epsilon(1e-14));

  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const FlowField& f : {make_cellular(), make_cats_eye(0.4), make_shear_sin(2.0)})
    for (int i = 0; i < 10; ++i) CHECK(std::abs(eval_gradient(f, {u(gen), u(gen)}).trace()) <= 1e-12);
}

TEST_CASE("central differences converge to the gradient at second order") {
  const FlowField f = make_cats_eye(0.3);
  auto fd_error = [&](int n) {
    const double h = 1.0 / n;
    double err = 0.0;
    for (int i = 0; i < n; i += n / 8)
      for (int j = 0; j < n; j += n / 8) {
        const Vec2 x{i * h, j * h};
        const Mat2 g = eval_gradient(f, x);
        const Vec2 dx = (eval_velocity(f, x + Vec2{h, 0}) - eval_velocity(f, x - Vec2{h, 0})) / (2 * h);
        const Vec2 dy = (eval_velocity(f, x + Vec2{0, h}) - eval_velocity(f, x - Vec2{0, h})) / (2 * h);
        err = std::max({err, std::abs(dx.x - g.m[0][0]), std::abs(dx.y - g.m[1][0]), std::abs(dy.x - g.m[0][1]),
                        std::abs(dy.y - g.m[1][1])});
      }
    return err;
  };
  for (int n : {32, 64, 128}) {
    const double ratio = fd_error(n) / fd_error(2 * n);
    CHECK(ratio >= 3.5);
    CHECK(ratio <= 4.5);
  }
}

TEST_CASE("grid sampling has zero mean and exact periodicity") {
  for (const FlowField& f : {make_shear_sin(), make_cellular(2.0), make_cats_eye(0.7)}) {
    const auto [vx, vy] = sample_velocity(f, 64);
    CHECK(std::abs(vx.mean()) <= 1e-10);
    CHECK(std::abs(vy.mean()) <= 1e-10);
    CHECK(vx(64 + 3, 5) == vx(3, 5));
    CHECK(vy(-1, 70) == vy(63, 6));
    const Vec2 direct = eval_velocity(f, {3.0 / 64, 5.0 / 64});
    CHECK(std::abs(vx(3, 5) - direct.x) < 1e-12);
    CHECK(std::abs(vy(3, 5) - direct.y) < 1e-12);
  }
  CHECK_THROWS_AS(GridFunction(6), DomainError);
  CHECK_THROWS_AS(GridFunction(33), DomainError);
}

TEST_CASE("user mode lists are validated, not projected") {
  FlowField::ModeMap good{{{1, 0}, {0.0, cplx(0, -0.5)}}, {{-1, 0}, {0.0, cplx(0, 0.5)}}};
  CHECK_NOTHROW(FlowField(good, 1.0, std::nullopt, "v"));

  FlowField::ModeMap div{{{1, 0}, {cplx(1e-9), cplx(0, -0.5)}}, {{-1, 0}, {cplx(1e-9), cplx(0, 0.5)}}};
  CHECK_THROWS_AS(FlowField(div, 1.0, std::nullopt, "v"), DomainError);

  FlowField::ModeMap unpaired{{{1, 0}, {0.0, cplx(0, -0.5)}}};
  CHECK_THROWS_AS(FlowField(unpaired, 1.0, std::nullopt, "v"), DomainError);

  FlowField::ModeMap mean{{{0, 0}, {1.0, 0.0}}};
  CHECK_THROWS_AS(FlowField(mean, 1.0, std::nullopt, "v"), DomainError);

  FlowField::ModeMap asym{{{1, 0}, {0.0, cplx(0.1, -0.5)}}, {{-1, 0}, {0.0, cplx(0.1, -0.5)}}};
  CHECK_THROWS_AS(FlowField(asym, 1.0, std::nullopt, "v"), DomainError);
}
