#include "ebv/flow.hpp"

#include <cmath>
#include <sstream>

namespace ebv {
namespace {

constexpr double kStructTol = 1e-12;

std::string wave_str(const Wave& k) {
  std::ostringstream os;
  os << "(" << k[0] << "," << k[1] << ")";
  return os.str();
}

double frac(double t) { return t - std::floor(t); }

// exp(2 pi i k.x) with x already reduced to [0,1)^2.
cplx phase(const Wave& k, Vec2 x) {
  const double arg = kTwoPi * (k[0] * x.x + k[1] * x.y);
  return {std::cos(arg), std::sin(arg)};
}

}  // namespace

FlowField::FlowField(ModeMap modes, double amplitude, std::optional<StreamMap> stream, std::string label)
    : modes_(std::move(modes)), amplitude_(amplitude), stream_(std::move(stream)), label_(std::move(label)) {
  if (!std::isfinite(amplitude_)) throw DomainError("flow amplitude must be finite");
  for (const auto& [k, v] : modes_) {
    if (k[0] == 0 && k[1] == 0) throw DomainError("flow has a zero (mean) mode");
    const double scale = std::max(1.0, std::abs(v.x) + std::abs(v.y));
    if (std::abs(static_cast<double>(k[0]) * v.x + static_cast<double>(k[1]) * v.y) > kStructTol * scale * (std::abs(k[0]) + std::abs(k[1])))
      throw DomainError("mode " + wave_str(k) + " violates k.v_k = 0 (not divergence free)");
    auto it = modes_.find(neg(k));
    if (it == modes_.end()) {
      if (std::abs(v.x) + std::abs(v.y) > kStructTol)
        throw DomainError("mode " + wave_str(k) + " has no conjugate partner (field not real)");
      continue;
    }
    if (std::abs(it->second.x - std::conj(v.x)) > kStructTol * scale || std::abs(it->second.y - std::conj(v.y)) > kStructTol * scale)
      throw DomainError("mode " + wave_str(k) + " is not conjugate symmetric");
  }
  if (stream_) {
    for (const auto& [k, c] : *stream_) {
      if (k[0] == 0 && k[1] == 0) continue;
      const CVec2 expect{kTwoPi * cplx(0, 1) * static_cast<double>(-k[1]) * c, kTwoPi * cplx(0, 1) * static_cast<double>(k[0]) * c};
      auto it = modes_.find(k);
      const CVec2 have = it == modes_.end() ? CVec2{} : it->second;
      const double scale = std::max(1.0, std::abs(expect.x) + std::abs(expect.y));
      if (std::abs(have.x - expect.x) > kStructTol * scale || std::abs(have.y - expect.y) > kStructTol * scale)
        throw DomainError("velocity mode " + wave_str(k) + " inconsistent with stream function");
    }
  }
}

bool FlowField::is_shear() const {
  for (const auto& [k, v] : modes_) {
    if (k[0] != 0) return false;
    if (std::abs(v.y) > kStructTol) return false;
  }
  return true;
}

FlowField FlowField::with_amplitude(double a) const {
  FlowField f = *this;
  if (!std::isfinite(a)) throw DomainError("flow amplitude must be finite");
  f.amplitude_ = a;
  return f;
}

FlowField FlowField::with_label(std::string label) const {
  FlowField f = *this;
  f.label_ = std::move(label);
  return f;
}

double FlowField::coefficient_bound() const {
  double s = 0.0;
  for (const auto& [k, v] : modes_) s += std::sqrt(std::norm(v.x) + std::norm(v.y));
  return s;
}

FlowField make_zero() { return FlowField({}, 0.0, std::nullopt, "zero"); }

FlowField make_shear(const std::map<int, cplx>& v_fourier, double amplitude, std::string label) {
  if (v_fourier.empty()) throw DomainError("shear profile has no modes; use make_zero for the zero field");
  FlowField::ModeMap modes;
  for (const auto& [m, c] : v_fourier) {
    if (m == 0) {
      if (std::abs(c) > 0.0) throw DomainError("shear profile has nonzero mean coefficient");
      continue;
    }
    modes[{0, m}] = CVec2{c, 0.0};
  }
  if (modes.empty()) throw DomainError("shear profile has no modes; use make_zero for the zero field");
  return FlowField(std::move(modes), amplitude, std::nullopt, std::move(label));
}

FlowField make_shear_sin(double amplitude) {
  // sin(2 pi y) = (e^{2 pi i y} - e^{-2 pi i y}) / (2i)
  return make_shear({{1, cplx(0, -0.5)}, {-1, cplx(0, 0.5)}}, amplitude, "shear:sin");
}

FlowField make_stream_flow(const FlowField::StreamMap& k_fourier, double amplitude, std::string label) {
  FlowField::ModeMap modes;
  for (const auto& [k, c] : k_fourier) {
    if (k[0] == 0 && k[1] == 0) continue;  // constant part of K carries no velocity
    const cplx ik = kTwoPi * cplx(0, 1) * c;
    modes[k] = CVec2{ik * static_cast<double>(-k[1]), ik * static_cast<double>(k[0])};
  }
  return FlowField(std::move(modes), amplitude, k_fourier, std::move(label));
}

FlowField make_cellular(double amplitude) {
  // sin a sin b = (cos(a-b) - cos(a+b)) / 2
  FlowField::StreamMap k{{{1, -1}, 0.25}, {{-1, 1}, 0.25}, {{1, 1}, -0.25}, {{-1, -1}, -0.25}};
  return make_stream_flow(k, amplitude, "cellular");
}

FlowField make_cats_eye(double delta, double amplitude) {
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("cat's eye delta must lie in (0,1)");
  // + delta cos a cos b = delta (cos(a-b) + cos(a+b)) / 2
  const double a = 0.25 * (1.0 + delta);
  const double b = 0.25 * (delta - 1.0);
  FlowField::StreamMap k{{{1, -1}, a}, {{-1, 1}, a}, {{1, 1}, b}, {{-1, -1}, b}};
  std::ostringstream label;
  label << "cats_eye:delta=" << delta;
  return make_stream_flow(k, amplitude, label.str());
}

Vec2 eval_velocity(const FlowField& f, Vec2 x) {
  const Vec2 r{frac(x.x), frac(x.y)};
  cplx sx = 0.0, sy = 0.0;
  for (const auto& [k, v] : f.modes()) {
    const cplx e = phase(k, r);
    sx += v.x * e;
    sy += v.y * e;
  }
  return Vec2{sx.real(), sy.real()} * f.amplitude();
}

Mat2 eval_gradient(const FlowField& f, Vec2 x) {
  const Vec2 r{frac(x.x), frac(x.y)};
  cplx g[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
  for (const auto& [k, v] : f.modes()) {
    const cplx e = phase(k, r) * cplx(0, kTwoPi);
    for (int j = 0; j < 2; ++j) {
      g[0][j] += v.x * e * static_cast<double>(k[j]);
      g[1][j] += v.y * e * static_cast<double>(k[j]);
    }
  }
  Mat2 out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out.m[i][j] = g[i][j].real() * f.amplitude();
  return out;
}

double eval_stream(const FlowField& f, Vec2 x) {
  if (!f.stream_coeffs()) throw DomainError("flow has no stream function");
  const Vec2 r{frac(x.x), frac(x.y)};
  cplx s = 0.0;
  for (const auto& [k, c] : *f.stream_coeffs()) s += c * phase(k, r);
  return s.real();
}

namespace {

// cos/sin(2 pi m / n) for m in [0, n).
struct PhaseTable {
  std::vector<cplx> e;
  explicit PhaseTable(int n) : e(static_cast<std::size_t>(n)) {
    for (int m = 0; m < n; ++m) {
      const double a = kTwoPi * m / n;
      e[static_cast<std::size_t>(m)] = {std::cos(a), std::sin(a)};
    }
  }
  cplx at(long m, int n) const { return e[static_cast<std::size_t>(((m % n) + n) % n)]; }
};

}  // namespace

std::pair<GridFunction, GridFunction> sample_velocity(const FlowField& f, int n) {
  GridFunction vx(n), vy(n);
  const PhaseTable table(n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      cplx sx = 0.0, sy = 0.0;
      for (const auto& [k, v] : f.modes()) {
        const cplx e = table.at(static_cast<long>(k[0]) * i + static_cast<long>(k[1]) * j, n);
        sx += v.x * e;
        sy += v.y * e;
      }
      vx(i, j) = sx.real() * f.amplitude();
      vy(i, j) = sy.real() * f.amplitude();
    }
  }
  return {std::move(vx), std::move(vy)};
}

GridFunction sample_divergence(const FlowField& f, int n) {
  GridFunction div(n);
  const PhaseTable table(n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      cplx s = 0.0;
      for (const auto& [k, v] : f.modes()) {
        const cplx e = table.at(static_cast<long>(k[0]) * i + static_cast<long>(k[1]) * j, n);
        s += cplx(0, kTwoPi) * (static_cast<double>(k[0]) * v.x + static_cast<double>(k[1]) * v.y) * e;
      }
      div(i, j) = s.real() * f.amplitude();
    }
  }
  return div;
}

}  // namespace ebv
