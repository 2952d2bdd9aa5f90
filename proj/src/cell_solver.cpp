#include "ebv/cell_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ebv/kernels.hpp"

namespace ebv {

const char* method_name(HbarMethod m) {
  switch (m) {
    case HbarMethod::time_marching:
      return "time_marching";
    case HbarMethod::discounted:
      return "discounted";
    case HbarMethod::shear_oracle:
      return "shear_oracle";
  }
  return "unknown";
}

HbarMethod parse_method(const std::string& s) {
  if (s == "time_marching") return HbarMethod::time_marching;
  if (s == "discounted") return HbarMethod::discounted;
  if (s == "shear_oracle") return HbarMethod::shear_oracle;
  throw DomainError("unknown Hbar method '" + s + "'");
}

const char* scheme_name(Scheme s) { return s == Scheme::godunov ? "godunov" : "lax_friedrichs"; }

Scheme parse_scheme(const std::string& s) {
  if (s == "godunov") return Scheme::godunov;
  if (s == "lax_friedrichs") return Scheme::lax_friedrichs;
  throw DomainError("unknown scheme '" + s + "'");
}

void SolverConfig::validate() const {
  if (n < 32 || n % 2 != 0) throw DomainError("solver grid n must be even and >= 32");
  if (!(dt_safety > 0.0 && dt_safety <= 1.0)) throw DomainError("dt_safety must lie in (0,1]");
  if (!(t_max > 0.0)) throw DomainError("t_max must be positive");
  if (!(tol > 0.0)) throw DomainError("tol must be positive");
  if (check_every < 1) throw DomainError("check_every must be >= 1");
  if (!(lambda_rel_tol > 0.0 && lambda_rel_tol < 0.1)) throw DomainError("lambda_rel_tol must lie in (0, 0.1)");
  if (quad_n < 256) throw DomainError("quad_n must be >= 256");
  if (discount_eps_list.size() < 2) throw DomainError("discount_eps_list needs at least two levels");
  for (std::size_t i = 0; i < discount_eps_list.size(); ++i) {
    if (!(discount_eps_list[i] > 0.0)) throw DomainError("discount levels must be positive");
    if (i > 0 && !(discount_eps_list[i] < discount_eps_list[i - 1]))
      throw DomainError("discount_eps_list must be strictly decreasing");
  }
}

void check_momentum(Vec2 p, const FlowField& f) {
  if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw DomainError("momentum p must be finite");
  if (norm(p) > 10.0 * std::max(1.0, std::abs(f.amplitude())))
    throw DomainError("|p| exceeds 10 max(1, A); outside the supported regime");
}

namespace {

constexpr double kSigmaFloor = 1e-2;

struct CellGrid {
  int n;
  double inv_h;
  GridFunction vx;
  GridFunction vy;

  CellGrid(const FlowField& f, int n_) : n(n_), inv_h(static_cast<double>(n_)) {
    auto [a, b] = sample_velocity(f, n_);
    vx = std::move(a);
    vy = std::move(b);
  }
  std::size_t cells() const { return static_cast<std::size_t>(n) * static_cast<std::size_t>(n); }
};

void set_sigma(kernels::StencilParams& prm, kernels::SpeedBound b) {
  prm.sigma_x = std::max(kDissipationSafety * b.x, kSigmaFloor);
  prm.sigma_y = std::max(kDissipationSafety * b.y, kSigmaFloor);
}

kernels::LfHamiltonianFn stencil(const kernels::KernelSet& k, Scheme s) {
  return s == Scheme::godunov ? k.godunov_hamiltonian : k.lf_hamiltonian;
}

// max |H_G(w) - value| with the Godunov Hamiltonian, whatever the scheme
double godunov_residual(const std::vector<double>& w, const CellGrid& grid, Vec2 p, double value) {
  std::vector<double> h(w.size());
  const kernels::StencilParams prm{grid.n, p.x, p.y, 0.0, 0.0, grid.inv_h};
  kernels::scalar::godunov_hamiltonian(w.data(), grid.vx.values().data(), grid.vy.values().data(), h.data(), prm);
  double res = 0.0;
  for (double x : h) res = std::max(res, std::abs(x - value));
  return res;
}

void subtract_mean(std::vector<double>& w) {
  double m = 0.0;
  for (double v : w) m += v;
  m /= static_cast<double>(w.size());
  for (double& v : w) v -= m;
}

std::vector<double> initial_state(const GridFunction* state, int n) {
  std::vector<double> w(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0.0);
  if (state != nullptr && state->n() == n) std::copy(state->values().begin(), state->values().end(), w.begin());
  return w;
}

void store_state(GridFunction* state, std::vector<double>& w, int n) {
  if (state == nullptr) return;
  subtract_mean(w);
  if (state->n() != n) *state = GridFunction(n);
  std::copy(w.begin(), w.end(), state->values().begin());
}

}  // namespace

HbarResult hbar_time_marching(Vec2 p, const FlowField& f, const SolverConfig& cfg, GridFunction* state) {
  cfg.validate();
  check_momentum(p, f);
  const CellGrid grid(f, cfg.n);
  const auto& k = kernels::active();
  const auto hamiltonian = stencil(k, cfg.scheme);
  const std::size_t cells = grid.cells();

  std::vector<double> w = initial_state(state, cfg.n);
  std::vector<double> h(cells);
  std::vector<double> w_ck(w);

  kernels::StencilParams prm{cfg.n, p.x, p.y, 0.0, 0.0, grid.inv_h};
  set_sigma(prm, hamiltonian(w.data(), grid.vx.values().data(), grid.vy.values().data(), h.data(), prm));

  double t = 0.0, t_ck = 0.0;
  double best = std::numeric_limits<double>::quiet_NaN();
  double osc = std::numeric_limits<double>::infinity();
  long steps = 0;
  for (;;) {
    const double dt = cfg.dt_safety / ((prm.sigma_x + prm.sigma_y) * grid.inv_h);
    const auto bound = hamiltonian(w.data(), grid.vx.values().data(), grid.vy.values().data(), h.data(), prm);
    k.relax(w.data(), h.data(), cells, dt, 0.0);
    t += dt;
    ++steps;
    set_sigma(prm, bound);

    if (steps % cfg.check_every != 0) continue;
    // slope s = -(w(t) - w(t_ck)) / (t - t_ck); its range brackets the
    // discrete ergodic constant
    const double span = t - t_ck;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo, sum = 0.0;
    for (std::size_t c = 0; c < cells; ++c) {
      const double s = (w_ck[c] - w[c]) / span;
      lo = std::min(lo, s);
      hi = std::max(hi, s);
      sum += s;
    }
    best = sum / static_cast<double>(cells);
    osc = hi - lo;
    if (!std::isfinite(best) || !std::isfinite(osc))
      throw NonConvergenceError("time marching diverged", best, osc);
    if (osc < cfg.tol) break;
    subtract_mean(w);
    w_ck = w;
    t_ck = t;
    if (t >= cfg.t_max) {
      std::ostringstream msg;
      msg << "time marching reached t_max=" << cfg.t_max << " with slope oscillation " << osc;
      throw NonConvergenceError(msg.str(), best, osc);
    }
  }

  HbarResult r;
  r.p = p;
  r.value = best;
  r.method = HbarMethod::time_marching;
  r.scheme = cfg.scheme;
  r.error_estimate = osc;
  r.iterations = steps;
  r.residual = godunov_residual(w, grid, p, best);
  store_state(state, w, cfg.n);
  return r;
}

HbarResult hbar_discounted(Vec2 p, const FlowField& f, const SolverConfig& cfg, GridFunction* state) {
  cfg.validate();
  check_momentum(p, f);
  const CellGrid grid(f, cfg.n);
  const auto& k = kernels::active();
  const auto hamiltonian = stencil(k, cfg.scheme);
  const std::size_t cells = grid.cells();
  const double inv_cells = 1.0 / static_cast<double>(cells);
  const double defect_tol = 0.5 * cfg.tol;

  std::vector<double> v = initial_state(state, cfg.n);
  std::vector<double> h(cells);
  kernels::StencilParams prm{cfg.n, p.x, p.y, 0.0, 0.0, grid.inv_h};
  set_sigma(prm, hamiltonian(v.data(), grid.vx.values().data(), grid.vy.values().data(), h.data(), prm));

  std::vector<double> levels;  // -eps * mean(v^eps)
  long steps = 0;
  for (const double eps : cfg.discount_eps_list) {
    double pseudo_t = 0.0;
    for (long it = 0;; ++it) {
      const auto bound = hamiltonian(v.data(), grid.vx.values().data(), grid.vy.values().data(), h.data(), prm);
      if (it % cfg.check_every == 0) {
        // a constant shift of v only moves the eps*v term; choose it so the
        // mean of the defect eps*v + H vanishes
        double sv = 0.0, sh = 0.0;
        for (std::size_t c = 0; c < cells; ++c) {
          sv += v[c];
          sh += h[c];
        }
        const double shift = -(eps * sv + sh) * inv_cells / eps;
        double defect = 0.0;
        for (std::size_t c = 0; c < cells; ++c) {
          v[c] += shift;
          defect = std::max(defect, std::abs(eps * v[c] + h[c]));
        }
        if (!std::isfinite(defect)) throw NonConvergenceError("discounted iteration diverged", 0.0, defect);
        if (defect <= defect_tol) {
          double mv = 0.0;
          for (double x : v) mv += x;
          levels.push_back(-eps * mv * inv_cells);
          break;
        }
        if (pseudo_t >= cfg.t_max) {
          double mv = 0.0;
          for (double x : v) mv += x;
          std::ostringstream msg;
          msg << "discounted value iteration (eps=" << eps << ") did not contract below " << defect_tol
              << "; defect " << defect;
          throw NonConvergenceError(msg.str(), -eps * mv * inv_cells, defect);
        }
      }
      const double tau = cfg.dt_safety / (eps + (prm.sigma_x + prm.sigma_y) * grid.inv_h);
      k.relax(v.data(), h.data(), cells, tau, eps);
      pseudo_t += tau;
      ++steps;
      set_sigma(prm, bound);
    }
  }

  // linear extrapolation in eps through consecutive levels
  const auto& e = cfg.discount_eps_list;
  const std::size_t m = levels.size();
  auto extrapolate = [&](std::size_t a, std::size_t b) { return (e[a] * levels[b] - e[b] * levels[a]) / (e[a] - e[b]); };
  const double value = extrapolate(m - 2, m - 1);
  const double spread = m >= 3 ? std::abs(value - extrapolate(m - 3, m - 2)) : std::abs(value - levels[m - 1]);

  HbarResult r;
  r.p = p;
  r.value = value;
  r.method = HbarMethod::discounted;
  r.scheme = cfg.scheme;
  r.error_estimate = spread + defect_tol;
  r.iterations = steps;
  r.residual = godunov_residual(v, grid, p, value);
  store_state(state, v, cfg.n);
  return r;
}

HbarEvaluator make_hbar_evaluator(const FlowField& f, const SolverConfig& cfg) {
  cfg.validate();
  if (cfg.method == HbarMethod::shear_oracle) {
    if (!f.is_shear()) throw DomainError("shear oracle requires a shear flow");
    auto oracle = std::make_shared<ShearOracle>(PeriodicProfile::from_shear(f, cfg.quad_n));
    return [oracle](Vec2 p) { return oracle->hbar(p); };
  }
  struct State {
    GridFunction tm;
    GridFunction disc;
  };
  auto st = std::make_shared<State>();
  return [st, f, cfg](Vec2 p) {
    const bool tm_primary = cfg.method == HbarMethod::time_marching;
    HbarResult r = tm_primary ? hbar_time_marching(p, f, cfg, &st->tm) : hbar_discounted(p, f, cfg, &st->disc);
    if (cfg.cross_check) {
      const HbarResult other = tm_primary ? hbar_discounted(p, f, cfg, &st->disc) : hbar_time_marching(p, f, cfg, &st->tm);
      r.cross_check_delta = std::abs(r.value - other.value);
    }
    return r;
  };
}

FlatWindow flat_window(const std::vector<double>& x, const std::vector<HbarResult>& values) {
  if (x.size() != values.size() || x.empty()) throw DomainError("scan positions and values must match and be nonempty");
  FlatWindow w;
  const HbarResult& h0 = values.front();
  for (std::size_t i = 1; i < x.size(); ++i) {
    const double d = std::abs(values[i].value - h0.value);
    const double allow = values[i].error_estimate + h0.error_estimate;
    if (d > allow) break;
    w.steps = static_cast<int>(i);
    w.width = x[i] - x.front();
    w.variation = std::max(w.variation, d);
    w.allowance = std::max(w.allowance, allow);
  }
  return w;
}

HbarResult hbar(Vec2 p, const FlowField& f, const SolverConfig& cfg) { return make_hbar_evaluator(f, cfg)(p); }

LevelCurve hbar_level_curve(double c, const FlowField& f, const SolverConfig& cfg, int n_angles, double r_max) {
  LevelCurve curve = hbar_level_curve(c, [&] { return make_hbar_evaluator(f, cfg); }, cfg.tol, n_angles, r_max);
  curve.meta.flow_label = f.label();
  curve.meta.amplitude = f.amplitude();
  return curve;
}

}  // namespace ebv
