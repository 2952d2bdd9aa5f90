#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace ebv {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator-() const { return {-x, -y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
  constexpr bool operator==(const Vec2&) const = default;
};

constexpr Vec2 operator*(double s, Vec2 v) { return v * s; }
constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }
constexpr double norm2(Vec2 v) { return dot(v, v); }
constexpr Vec2 perp(Vec2 v) { return {-v.y, v.x}; }
inline Vec2 unit_at(double theta) { return {std::cos(theta), std::sin(theta)}; }

/// Row-major 2x2 matrix; m[i][j] = d V_i / d x_j for velocity gradients.
struct Mat2 {
  std::array<std::array<double, 2>, 2> m{};

  double trace() const { return m[0][0] + m[1][1]; }
};

/// Integer wave vector k in Z^2.
using Wave = std::array<int, 2>;

inline Wave neg(const Wave& k) { return {-k[0], -k[1]}; }

using cplx = std::complex<double>;

/// Complex 2-vector (Fourier coefficient of a planar vector field).
struct CVec2 {
  cplx x{};
  cplx y{};
};

inline cplx dot(Vec2 p, const CVec2& v) { return p.x * v.x + p.y * v.y; }

/// Invalid argument to a numerical routine (precondition violation).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed run configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An iterative method stopped before meeting its tolerance.
class NonConvergenceError : public std::runtime_error {
 public:
  NonConvergenceError(const std::string& what, double best_estimate, double defect)
      : std::runtime_error(what), best_estimate_(best_estimate), defect_(defect) {}

  double best_estimate() const { return best_estimate_; }
  /// Oscillation or residual at the moment the iteration gave up.
  double defect() const { return defect_; }

 private:
  double best_estimate_;
  double defect_;
};

/// The expansion or integral is undefined because a mode is exactly resonant.
class ResonanceError : public DomainError {
 public:
  ResonanceError(const std::string& what, Wave k) : DomainError(what), k_(k) {}
  Wave mode() const { return k_; }

 private:
  Wave k_;
};

}  // namespace ebv
