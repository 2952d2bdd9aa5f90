#include <algorithm>
#include <cmath>

#include "ebv/cell_solver.hpp"

namespace ebv {

namespace {

constexpr int kRefine = 16;      // refinement factor near the maximizer
constexpr int kWindowCells = 4;  // window width in base cells
constexpr double kBisectTol = 1e-12;

}  // namespace

PeriodicProfile::PeriodicProfile(std::vector<double> samples) : samples_(std::move(samples)) {
  const int n = size();
  if (n < 8 || n % 2 != 0) throw DomainError("periodic profile needs an even number (>= 8) of samples");
  coeffs_.resize(static_cast<std::size_t>(n / 2 + 1));
  for (int m = 0; m <= n / 2; ++m) {
    cplx s = 0.0;
    for (int j = 0; j < n; ++j) {
      const double a = -kTwoPi * static_cast<double>((static_cast<long>(m) * j) % n) / n;
      s += samples_[static_cast<std::size_t>(j)] * cplx(std::cos(a), std::sin(a));
    }
    coeffs_[static_cast<std::size_t>(m)] = s / static_cast<double>(n);
  }
}

PeriodicProfile PeriodicProfile::from_shear(const FlowField& f, int quad_n) {
  if (!f.is_shear()) throw DomainError("flow is not a shear flow V = (v(x2), 0)");
  std::vector<double> s(static_cast<std::size_t>(quad_n));
  for (int j = 0; j < quad_n; ++j) s[static_cast<std::size_t>(j)] = eval_velocity(f, {0.0, static_cast<double>(j) / quad_n}).x;
  return PeriodicProfile(std::move(s));
}

double PeriodicProfile::sample(int i) const {
  const int n = size();
  return samples_[static_cast<std::size_t>(((i % n) + n) % n)];
}

double PeriodicProfile::operator()(double y) const {
  const int n = size();
  double s = coeffs_[0].real();
  for (int m = 1; m < n / 2; ++m) {
    const double a = kTwoPi * m * y;
    s += 2.0 * (coeffs_[static_cast<std::size_t>(m)] * cplx(std::cos(a), std::sin(a))).real();
  }
  s += coeffs_[static_cast<std::size_t>(n / 2)].real() * std::cos(kPi * n * y);
  return s;
}

ShearOracle::ShearOracle(PeriodicProfile profile)
    : profile_(std::move(profile)), up_(make_peak(1.0)), down_(make_peak(-1.0)) {}

ShearOracle::Peak ShearOracle::make_peak(double sign) const {
  // best sample, then golden refinement of the interpolant on the two
  // neighbouring cells
  const int n = profile_.size();
  int best = 0;
  for (int i = 1; i < n; ++i)
    if (sign * profile_.sample(i) > sign * profile_.sample(best)) best = i;
  const double hb = 1.0 / n;
  double lo = (best - 1) * hb, hi = (best + 1) * hb;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = hi - g * (hi - lo), d = lo + g * (hi - lo);
  double fc = sign * profile_(c), fd = sign * profile_(d);
  while (hi - lo > 1e-13) {
    if (fc > fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - g * (hi - lo);
      fc = sign * profile_(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + g * (hi - lo);
      fd = sign * profile_(d);
    }
  }
  Peak pk;
  pk.y = 0.5 * (lo + hi);
  const double refined = profile_(pk.y);
  pk.a = sign * refined >= sign * profile_.sample(best) ? refined : profile_.sample(best);

  const int center = static_cast<int>(std::lround(pk.y * n));
  pk.i0 = center - kWindowCells / 2;
  pk.i1 = center + kWindowCells / 2;
  const double ya = pk.i0 * hb, yb = pk.i1 * hb;
  const double ym = std::clamp(pk.y, ya, yb);
  const int sub = kRefine * kWindowCells / 2;
  pk.dy_left = (ym - ya) / sub;
  pk.dy_right = (yb - ym) / sub;
  pk.left.resize(sub + 1);
  pk.right.resize(sub + 1);
  for (int q = 0; q <= sub; ++q) {
    pk.left[static_cast<std::size_t>(q)] = profile_(ya + q * pk.dy_left);
    pk.right[static_cast<std::size_t>(q)] = profile_(ym + q * pk.dy_right);
  }
  // pin the exact endpoints to the base samples
  pk.left.front() = profile_.sample(pk.i0);
  pk.right.back() = profile_.sample(pk.i1);
  return pk;
}

double ShearOracle::max_value(double p1) const {
  if (p1 == 0.0) return 0.0;
  return p1 * peak(p1).a;
}

// int_0^1 sqrt(max(h - p1 a(y), 0)) dy: composite Simpson on the base grid
// outside the kWindowCells cells around the maximizer, and on each half of
// that window refined kRefine / stride times and split at the maximizer.
// The integrand is smooth on every piece, so all pieces converge at fourth order.
double ShearOracle::integral(double h, double p1, const Peak& pk, int stride) const {
  const int n = profile_.size();
  const double hb = 1.0 / n;
  auto f = [&](double a) { return std::sqrt(std::max(h - p1 * a, 0.0)); };

  double outside = f(profile_.sample(pk.i1)) + f(profile_.sample(pk.i0 + n));
  for (int i = pk.i1 + 1; i < pk.i0 + n; ++i) outside += ((i - pk.i1) % 2 ? 4.0 : 2.0) * f(profile_.sample(i));
  outside *= hb / 3.0;

  auto half = [&](const std::vector<double>& a, double dy) {
    const std::size_t last = a.size() - 1;
    const std::size_t st = static_cast<std::size_t>(stride);
    double s = f(a.front()) + f(a.back());
    for (std::size_t q = st; q < last; q += st) s += ((q / st) % 2 ? 4.0 : 2.0) * f(a[q]);
    return s * dy * stride / 3.0;
  };
  return outside + half(pk.left, pk.dy_left) + half(pk.right, pk.dy_right);
}

double ShearOracle::plateau_width(double p1) const {
  if (p1 == 0.0) return 0.0;
  const Peak& pk = peak(p1);
  return integral(p1 * pk.a, p1, pk, 1);
}

double ShearOracle::solve_h(double p1, double p2_abs, int stride, long& iters) const {
  if (p1 == 0.0) return p2_abs * p2_abs;
  const Peak& pk = peak(p1);
  const double m = p1 * pk.a;
  if (p2_abs <= integral(m, p1, pk, stride)) return m;
  // the integral is increasing in h and reaches |p2| by h = M + p2^2
  double lo = m, hi = m + p2_abs * p2_abs;
  while (hi - lo > kBisectTol * std::max(1.0, std::abs(hi))) {
    const double mid = 0.5 * (lo + hi);
    (integral(mid, p1, pk, stride) < p2_abs ? lo : hi) = mid;
    ++iters;
  }
  return 0.5 * (lo + hi);
}

HbarResult ShearOracle::hbar(Vec2 p) const {
  long iters = 0;
  const double h_fine = solve_h(p.x, std::abs(p.y), 1, iters);
  const double h_coarse = solve_h(p.x, std::abs(p.y), 2, iters);
  HbarResult r;
  r.p = p;
  r.value = p.x * p.x + h_fine;
  r.method = HbarMethod::shear_oracle;
  r.residual = 0.0;
  r.error_estimate = std::abs(h_fine - h_coarse) + kBisectTol * std::max(1.0, std::abs(r.value));
  r.iterations = iters;
  return r;
}

HbarResult shear_oracle(Vec2 p, const PeriodicProfile& v_samples, int quad_n) {
  if (quad_n < 256) throw DomainError("quad_n must be >= 256");
  if (v_samples.size() != quad_n) {
    std::vector<double> s(static_cast<std::size_t>(quad_n));
    for (int j = 0; j < quad_n; ++j) s[static_cast<std::size_t>(j)] = v_samples(static_cast<double>(j) / quad_n);
    return ShearOracle(PeriodicProfile(std::move(s))).hbar(p);
  }
  return ShearOracle(v_samples).hbar(p);
}

}  // namespace ebv
