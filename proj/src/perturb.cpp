#include "ebv/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ebv/burnvel.hpp"
#include "ebv/parallel.hpp"

namespace ebv {

namespace {

Vec2 as_vec(const Wave& k) { return {static_cast<double>(k[0]), static_cast<double>(k[1])}; }

cplx phase(const Wave& k, Vec2 x) {
  const double a = kTwoPi * (k[0] * x.x + k[1] * x.y);
  return {std::cos(a), std::sin(a)};
}

// D of a scalar series: coefficient 2 pi i k c_k.
CVec2 grad_coeff(const Wave& k, cplx c) {
  const cplx f = cplx(0.0, kTwoPi) * c;
  return {f * static_cast<double>(k[0]), f * static_cast<double>(k[1])};
}

Vec2 eval_grad(const std::map<Wave, cplx>& s, Vec2 x) {
  cplx gx = 0.0, gy = 0.0;
  for (const auto& [k, c] : s) {
    const CVec2 d = grad_coeff(k, c);
    const cplx e = phase(k, x);
    gx += d.x * e;
    gy += d.y * e;
  }
  return {gx.real(), gy.real()};
}

Vec2 eval_unit_velocity(const FlowField& f, Vec2 x) {
  cplx vx = 0.0, vy = 0.0;
  for (const auto& [k, v] : f.modes()) {
    const cplx e = phase(k, x);
    vx += v.x * e;
    vy += v.y * e;
  }
  return {vx.real(), vy.real()};
}

// coefficient -(p.v_k) / (4 pi i p.k); throws on an exact resonance
std::map<Wave, cplx> phi1_series(Vec2 p, const FlowField& f) {
  std::map<Wave, cplx> out;
  for (const auto& [k, v] : f.modes()) {
    const double pk = dot(p, as_vec(k));
    if (pk == 0.0) throw ResonanceError("p.k = 0 with p.v_k != 0: phi1 is undefined", k);
    out[k] = -dot(p, v) / (cplx(0.0, 2.0 * kTwoPi) * pk);
  }
  return out;
}

void check_p(Vec2 p) {
  if (!(norm(p) > 0.0) || !std::isfinite(norm(p))) throw DomainError("expansion needs a finite p != 0");
}

}  // namespace

PerturbationResult a2(Vec2 p, const FlowField& f, double divisor_floor) {
  check_p(p);
  PerturbationResult r;
  r.p = p;
  r.min_divisor = std::numeric_limits<double>::infinity();
  const double pn = norm(p);
  for (const auto& [k, v] : f.modes()) {
    const Vec2 kv = as_vec(k);
    const double pk = dot(p, kv);
    const double pv = std::abs(dot(p, v));
    if (pk == 0.0) {
      if (pv != 0.0) throw ResonanceError("p.k = 0 with p.v_k != 0: the expansion is invalid at this p", k);
      continue;
    }
    const double rel = std::abs(pk) / (pn * norm(kv));
    if (rel < divisor_floor) {
      r.excluded_modes.push_back(k);
      continue;
    }
    r.min_divisor = std::min(r.min_divisor, rel);
    r.a2 += 0.25 * pv * pv * norm2(kv) / (pk * pk);
  }
  r.truncated = !r.excluded_modes.empty();
  if (!std::isfinite(r.min_divisor)) r.min_divisor = 0.0;
  return r;
}

CorrectorSeries corrector_series(Vec2 p, const FlowField& f, double divisor_floor) {
  const PerturbationResult base = a2(p, f, divisor_floor);
  if (base.truncated) throw ResonanceError("near-resonant mode below the divisor floor", base.excluded_modes.front());
  CorrectorSeries s;
  s.p = p;
  s.a2 = base.a2;
  s.phi1 = phi1_series(p, f);

  // g = -(|D phi1|^2 + V.D phi1) / 2 away from the zero mode, by convolution
  std::map<Wave, cplx> g;
  for (const auto& [k, ck] : s.phi1) {
    const CVec2 dk = grad_coeff(k, ck);
    for (const auto& [l, cl] : s.phi1) {
      const CVec2 dl = grad_coeff(l, cl);
      g[{k[0] + l[0], k[1] + l[1]}] += -0.5 * (dk.x * dl.x + dk.y * dl.y);
    }
    for (const auto& [l, vl] : f.modes()) g[{k[0] + l[0], k[1] + l[1]}] += -0.5 * (vl.x * dk.x + vl.y * dk.y);
  }
  const double pn = norm(p);
  for (const auto& [m, gm] : g) {
    if (m[0] == 0 && m[1] == 0) continue;
    if (std::abs(gm) == 0.0) continue;
    const double pm = dot(p, as_vec(m));
    if (std::abs(pm) < divisor_floor * pn * norm(as_vec(m)))
      throw ResonanceError("second corrector has a resonant mode", m);
    s.phi2[m] = gm / (cplx(0.0, kTwoPi) * pm);
  }
  return s;
}

GridFunction corrector_phi1(Vec2 p, const FlowField& f, int n) {
  check_p(p);
  GridFunction out(n);
  const auto series = phi1_series(p, f);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      cplx acc = 0.0;
      for (const auto& [k, c] : series) {
        const long q = ((static_cast<long>(k[0]) * i + static_cast<long>(k[1]) * j) % n + n) % n;
        const double a = kTwoPi * static_cast<double>(q) / n;
        acc += c * cplx(std::cos(a), std::sin(a));
      }
      out(i, j) = acc.real();
    }
  return out;
}

std::vector<CorrectorResidual> corrector_residual(Vec2 p, const FlowField& f, const std::vector<double>& eps_list,
                                                  int n) {
  const CorrectorSeries s = corrector_series(p, f);
  std::vector<CorrectorResidual> out;
  for (const double eps : eps_list) out.push_back({eps, 0.0, 0.0});
  const double p2 = norm2(p);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const Vec2 x{static_cast<double>(i) / n, static_cast<double>(j) / n};
      const Vec2 v = eval_unit_velocity(f, x);
      const Vec2 d1 = eval_grad(s.phi1, x);
      const Vec2 d2 = eval_grad(s.phi2, x);
      for (auto& row : out) {
        const double e = row.eps;
        auto defect = [&](Vec2 q) { return std::abs(norm2(q) + e * dot(v, q) - p2 - e * e * s.a2); };
        row.first_order = std::max(row.first_order, defect(p + d1 * e));
        row.second_order = std::max(row.second_order, defect(p + d1 * e + d2 * (e * e)));
      }
    }
  return out;
}

DiophantineQuality diophantine_quality(Vec2 p, int k_max) {
  check_p(p);
  if (k_max < 1) throw DomainError("k_max must be >= 1");
  const Vec2 u = p / norm(p);
  DiophantineQuality q;
  q.gamma1 = q.gamma2 = std::numeric_limits<double>::infinity();
  const long r2 = static_cast<long>(k_max) * k_max;
  for (int a = -k_max; a <= k_max; ++a)
    for (int b = -k_max; b <= k_max; ++b) {
      const long len2 = static_cast<long>(a) * a + static_cast<long>(b) * b;
      if (len2 == 0 || len2 > r2) continue;
      const double len = std::sqrt(static_cast<double>(len2));
      double d = std::abs(u.x * a + u.y * b);
      if (d < 1e-14 * len) d = 0.0;  // resonant up to rounding
      // ties go to the shorter wave vector
      auto better = [&](double v, double best, const Wave& at) {
        return v < best || (v == best && len2 < static_cast<long>(at[0]) * at[0] + static_cast<long>(at[1]) * at[1]);
      };
      if (better(d * len, q.gamma1, q.argmin1)) {
        q.gamma1 = d * len;
        q.argmin1 = {a, b};
      }
      if (better(d * len * len, q.gamma2, q.argmin2)) {
        q.gamma2 = d * len * len;
        q.argmin2 = {a, b};
      }
    }
  return q;
}

std::vector<ExpansionRow> expansion_residual(Vec2 p, const FlowField& f, const std::vector<double>& eps_list,
                                             const SolverConfig& cfg, int threads) {
  check_p(p);
  cfg.validate();
  for (std::size_t i = 1; i < eps_list.size(); ++i)
    if (!(eps_list[i] < eps_list[i - 1])) throw DomainError("eps_list must be decreasing");
  const double target = f.is_zero() ? 0.0 : a2(p, f).a2;
  const double pn = norm(p);
  std::vector<ExpansionRow> rows(eps_list.size());
  parallel_for(static_cast<int>(eps_list.size()), threads, [&](int i) {
    const double eps = eps_list[static_cast<std::size_t>(i)];
    const FlowField fe = f.with_amplitude(eps);
    const HbarResult h = make_hbar_evaluator(fe, cfg)(p);
    const BurningVelocityResult bv = burning_velocity(p, fe, cfg);
    ExpansionRow& r = rows[static_cast<std::size_t>(i)];
    r.eps = eps;
    r.hbar = h.value;
    r.hbar_err = h.error_estimate;
    r.ratio_h = (h.value - pn * pn) / (eps * eps);
    r.ratio_h_err = h.error_estimate / (eps * eps);
    r.alpha = bv.alpha;
    r.alpha_err = bv.alpha_err;
    r.ratio_alpha = (bv.alpha - 2.0 * pn) / (eps * eps * pn);
    r.ratio_alpha_err = bv.alpha_err / (eps * eps * pn);
    r.a2_target = target;
  });
  return rows;
}

}  // namespace ebv
