#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "ebv/parallel.hpp"

namespace ebv::cli {

namespace {

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};

std::string color(std::size_t i) { return kPalette[i % (sizeof kPalette / sizeof kPalette[0])]; }

json solver_json(const SolverConfig& c) {
  json eps = json::array();
  for (double e : c.discount_eps_list) eps.push_back(e);
  return {{"n", c.n},
          {"dt_safety", c.dt_safety},
          {"t_max", c.t_max},
          {"tol", c.tol},
          {"discount_eps_list", eps},
          {"cross_check", c.cross_check},
          {"method", method_name(c.method)},
          {"scheme", scheme_name(c.scheme)},
          {"lambda_rel_tol", c.lambda_rel_tol},
          {"check_every", c.check_every},
          {"quad_n", c.quad_n}};
}

json header(const char* command, const RunConfig& rc, const CommandOptions& opt) {
  return {{"command", command},
          {"flow", rc.flow.label()},
          {"amplitude", rc.flow.amplitude()},
          {"seed", opt.seed},
          {"solver", solver_json(rc.solver)}};
}

std::vector<Vec2> require_momenta(const RunConfig& rc, const CommandOptions& opt) {
  auto ps = momenta(rc.experiment, opt.seed);
  if (ps.empty()) throw ConfigError("this command needs experiment.p_list or experiment.random_p");
  for (Vec2 p : ps) {
    try {
      check_momentum(p, rc.flow);
    } catch (const DomainError& e) {
      throw ConfigError(std::string("experiment.p_list: ") + e.what());
    }
  }
  return ps;
}

/// Outcome of one batch item; errors are recorded instead of thrown.
struct Attempt {
  HbarResult r;
  std::string status = "ok";
  std::string message;
};

Attempt attempt(Vec2 p, const std::function<HbarResult()>& fn) {
  Attempt a;
  a.r.p = p;
  a.r.value = std::nan("");
  a.r.error_estimate = std::nan("");
  try {
    a.r = fn();
  } catch (const NonConvergenceError& e) {
    a.status = "nonconverged";
    a.message = e.what();
    a.r.value = e.best_estimate();
    a.r.error_estimate = e.defect();
  } catch (const std::exception& e) {
    a.status = "error";
    a.message = e.what();
  }
  return a;
}

std::function<HbarEvaluator()> evaluator_factory(const FlowField& f, const SolverConfig& cfg) {
  return [f, cfg] { return make_hbar_evaluator(f, cfg); };
}

SolverConfig with_method(SolverConfig c, HbarMethod m) {
  c.method = m;
  c.cross_check = false;
  return c;
}

LevelCurve alpha_curve(const FlowField& f, const SolverConfig& cfg, int n_angles, int threads) {
  return alpha_level_curve(evaluator_factory(f, cfg), cfg.lambda_rel_tol, cfg.tol, n_angles, threads);
}

double kappa_for(const LevelCurve& c, const ExperimentSpec& e) {
  return e.kappa_tol ? *e.kappa_tol : default_kappa_tol(c);
}

SvgCurve stroke(std::vector<Vec2> pts, std::string colour = "#000000") {
  SvgCurve c;
  c.points = std::move(pts);
  c.stroke = std::move(colour);
  return c;
}

std::vector<Vec2> curve_points(const LevelCurve& c) {
  std::vector<Vec2> pts;
  pts.reserve(c.samples.size());
  for (const auto& s : c.samples) pts.push_back(s.point);
  return pts;
}

void add_flat_overlays(std::vector<SvgCurve>& out, const LevelCurve& c) {
  const int n = static_cast<int>(c.samples.size());
  for (const auto& a : c.flat_arcs) {
    SvgCurve seg;
    for (int k = 0; k < a.sample_count(n); ++k) seg.points.push_back(c.samples[(a.start_index + k) % n].point);
    seg.stroke = "#d62728";
    seg.stroke_width = 3.0;
    seg.closed = false;
    out.push_back(std::move(seg));
  }
}

void add_normal_overlays(std::vector<SvgCurve>& out, const std::vector<ResonantDirection>& dirs, double reach) {
  for (const auto& d : dirs) {
    SvgCurve line;
    line.points = {d.normal * (-reach), d.normal * reach};
    line.stroke = "#7f7f7f";
    line.closed = false;
    line.dash = "4 3";
    out.push_back(std::move(line));
  }
}

Table resonance_table(const std::vector<ResonantDirection>& dirs) {
  Table t({"k1", "k2", "normal_x", "normal_y", "strength"});
  for (const auto& d : dirs) t.add({long{d.k[0]}, long{d.k[1]}, d.normal.x, d.normal.y, d.strength});
  return t;
}

Table flat_arc_table(const LevelCurve& c) {
  Table t({"start_index", "end_index", "samples", "normal_x", "normal_y", "chord_deviation", "matches_resonance",
           "matched_x", "matched_y", "kappa_tol"});
  const int n = static_cast<int>(c.samples.size());
  for (const auto& a : c.flat_arcs)
    t.add({long{a.start_index}, long{a.end_index}, long{a.sample_count(n)}, a.normal.x, a.normal.y,
           a.chord_deviation, long{a.matches_resonance ? 1 : 0}, a.matched_normal.x, a.matched_normal.y,
           c.meta.kappa_tol});
  return t;
}

json resonances_json(const std::vector<ResonantDirection>& dirs) {
  json a = json::array();
  for (const auto& d : dirs) a.push_back(to_json(d));
  return a;
}

int matched_arcs(const LevelCurve& c) {
  return static_cast<int>(std::count_if(c.flat_arcs.begin(), c.flat_arcs.end(),
                                        [](const auto& a) { return a.matches_resonance; }));
}

bool has_normal(const LevelCurve& c, Vec2 n, double angle_tol) {
  for (const auto& a : c.flat_arcs)
    if (std::abs(cross(a.normal, n)) <= std::sin(angle_tol)) return true;
  return false;
}

/// Hbar on a batch of momenta, one fresh evaluator per item.
std::vector<Attempt> hbar_batch(const std::vector<Vec2>& ps, const FlowField& f, const SolverConfig& cfg,
                                int threads) {
  std::vector<Attempt> out(ps.size());
  parallel_for(static_cast<int>(ps.size()), threads, [&](int i) {
    out[i] = attempt(ps[i], [&] { return make_hbar_evaluator(f, cfg)(ps[i]); });
  });
  return out;
}

Table hbar_table(const std::vector<Attempt>& rows, const SolverConfig& cfg) {
  Table t({"p1", "p2", "method", "hbar", "hbar_err", "residual", "iterations", "cross_check_delta", "tol", "status",
           "message"});
  for (const auto& a : rows)
    t.add({a.r.p.x, a.r.p.y, std::string(method_name(cfg.method)), a.r.value, a.r.error_estimate, a.r.residual,
           a.r.iterations, a.r.cross_check_delta.value_or(std::nan("")), cfg.tol, a.status, a.message});
  return t;
}

double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

/// Time marching, discounted and the shear oracle side by side.
Table shear_comparison(const std::vector<Vec2>& ps, const FlowField& f, const SolverConfig& cfg, int threads,
                       double* worst = nullptr) {
  const SolverConfig tm_cfg = with_method(cfg, HbarMethod::time_marching);
  const SolverConfig di_cfg = with_method(cfg, HbarMethod::discounted);
  const SolverConfig or_cfg = with_method(cfg, HbarMethod::shear_oracle);
  const auto tm = hbar_batch(ps, f, tm_cfg, threads);
  const auto di = hbar_batch(ps, f, di_cfg, threads);
  const auto orc = hbar_batch(ps, f, or_cfg, threads);
  Table t({"p1", "p2", "time_marching", "time_marching_err", "discounted", "discounted_err", "oracle", "oracle_err",
           "rel_diff_time_marching", "rel_diff_discounted", "tol", "status", "message"});
  double w = 0.0;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    std::string status = "ok", message;
    for (const Attempt* a : {&tm[i], &di[i], &orc[i]})
      if (a->status != "ok") {
        status = a->status;
        message += (message.empty() ? "" : "; ") + a->message;
      }
    const double r1 = rel_diff(tm[i].r.value, orc[i].r.value);
    const double r2 = rel_diff(di[i].r.value, orc[i].r.value);
    if (status == "ok") w = std::max({w, r1, r2});
    t.add({ps[i].x, ps[i].y, tm[i].r.value, tm[i].r.error_estimate, di[i].r.value, di[i].r.error_estimate,
           orc[i].r.value, orc[i].r.error_estimate, r1, r2, cfg.tol, status, message});
  }
  if (worst) *worst = w;
  return t;
}

}  // namespace

// ---- commands -------------------------------------------------------------------

Outputs cmd_hbar(const RunConfig& rc, const CommandOptions& opt) {
  const auto ps = require_momenta(rc, opt);
  Outputs out;
  out.document = header("hbar", rc, opt);
  if (rc.flow.is_shear() && !rc.flow.is_zero() && rc.solver.method != HbarMethod::shear_oracle) {
    double worst = 0.0;
    out.results = shear_comparison(ps, rc.flow, rc.solver, opt.threads, &worst);
    out.document["max_rel_diff_vs_oracle"] = worst;
  } else {
    out.results = hbar_table(hbar_batch(ps, rc.flow, rc.solver, opt.threads), rc.solver);
  }
  return out;
}

Outputs cmd_alpha(const RunConfig& rc, const CommandOptions& opt) {
  const auto ps = require_momenta(rc, opt);
  std::vector<BurningVelocityResult> res(ps.size());
  parallel_for(static_cast<int>(ps.size()), opt.threads, [&](int i) {
    res[i] = burning_velocity(ps[i], make_hbar_evaluator(rc.flow, rc.solver), rc.solver.lambda_rel_tol, rc.solver.tol);
  });
  Outputs out;
  out.document = header("alpha", rc, opt);
  Table t({"p1", "p2", "alpha", "alpha_err", "lambda", "lambda_lo", "lambda_hi", "optimality_gap", "gap_bound",
           "fd_step", "hbar_at_min", "evaluations", "lambda_rel_tol", "hbar_tol"});
  for (const auto& r : res)
    t.add({r.p.x, r.p.y, r.alpha, r.alpha_err, r.lambda_p, r.lambda_lo, r.lambda_hi, r.optimality_gap, r.gap_bound,
           r.fd_step, r.hbar_at_min, r.evaluations, rc.solver.lambda_rel_tol, rc.solver.tol});
  out.results = std::move(t);
  return out;
}

Outputs cmd_level_curve(const RunConfig& rc, const CommandOptions& opt) {
  const auto& e = rc.experiment;
  LevelCurve c = e.level ? hbar_level_curve(*e.level, evaluator_factory(rc.flow, rc.solver), rc.solver.tol,
                                            e.n_angles, 1e3, opt.threads)
                         : alpha_curve(rc.flow, rc.solver, e.n_angles, opt.threads);
  const auto dirs = resonant_directions(rc.flow);
  c = detect_flat_pieces(std::move(c), kappa_for(c, e), dirs);

  Outputs out;
  out.document = header("level-curve", rc, opt);
  out.document["curve"] = to_json(c);
  out.document["non_roundness"] = c.non_roundness();
  out.document["resonant_directions"] = resonances_json(dirs);
  out.results = level_curve_table(c);
  out.tables.emplace_back("flat_arcs", flat_arc_table(c));

  std::vector<SvgCurve> svg{stroke(curve_points(c))};
  add_flat_overlays(svg, c);
  out.plots.emplace_back("level_curve", render_svg(svg, {480, c.meta.kind + " level curve: " + rc.flow.label()}));
  return out;
}

Outputs cmd_flat_pieces(const RunConfig& rc, const CommandOptions& opt) {
  const auto& e = rc.experiment;
  LevelCurve c = alpha_curve(rc.flow, rc.solver, e.n_angles, opt.threads);
  const auto dirs = resonant_directions(rc.flow);
  c = detect_flat_pieces(std::move(c), kappa_for(c, e), dirs);

  Outputs out;
  out.document = header("flat-pieces", rc, opt);
  out.document["curve"] = to_json(c);
  out.document["resonant_directions"] = resonances_json(dirs);
  out.document["matched_arcs"] = matched_arcs(c);
  out.results = flat_arc_table(c);
  out.tables.emplace_back("level_curve", level_curve_table(c));
  out.tables.emplace_back("resonances", resonance_table(dirs));

  std::vector<SvgCurve> svg{stroke(curve_points(c))};
  add_flat_overlays(svg, c);
  add_normal_overlays(svg, dirs, 1.1 * c.max_radius());
  out.plots.emplace_back("flat_pieces", render_svg(svg, {480, "flat pieces: " + rc.flow.label()}));
  return out;
}

Outputs cmd_perturb(const RunConfig& rc, const CommandOptions& opt) {
  const auto ps = require_momenta(rc, opt);
  const auto& e = rc.experiment;
  Outputs out;
  out.document = header("perturb", rc, opt);

  Table t({"p1", "p2", "a2", "min_divisor", "truncated", "excluded_modes", "gamma1", "gamma2", "divisor_floor",
           "status", "message"});
  for (Vec2 p : ps) {
    const auto dq = diophantine_quality(p, 32);
    try {
      const auto r = a2(p, rc.flow);
      t.add({p.x, p.y, r.a2, r.min_divisor, long{r.truncated ? 1 : 0}, static_cast<long>(r.excluded_modes.size()),
             dq.gamma1, dq.gamma2, kDefaultDivisorFloor, std::string("ok"), std::string()});
    } catch (const std::exception& ex) {
      t.add({p.x, p.y, std::nan(""), std::nan(""), 0L, 0L, dq.gamma1, dq.gamma2, kDefaultDivisorFloor,
             std::string("error"), std::string(ex.what())});
    }
  }
  out.results = std::move(t);

  if (!e.eps_list.empty()) {
    Table ex({"p1", "p2", "eps", "hbar", "hbar_err", "ratio_h", "ratio_h_err", "alpha", "alpha_err", "ratio_alpha",
              "ratio_alpha_err", "a2", "tol", "status", "message"});
    Table cr({"p1", "p2", "eps", "first_order", "second_order", "ratio_first", "ratio_second", "grid_n", "status",
              "message"});
    for (Vec2 p : ps) {
      try {
        for (const auto& r : expansion_residual(p, rc.flow, e.eps_list, rc.solver, opt.threads))
          ex.add({p.x, p.y, r.eps, r.hbar, r.hbar_err, r.ratio_h, r.ratio_h_err, r.alpha, r.alpha_err, r.ratio_alpha,
                  r.ratio_alpha_err, r.a2_target, rc.solver.tol, std::string("ok"), std::string()});
      } catch (const std::exception& err) {
        ex.add({p.x, p.y, std::nan(""), std::nan(""), std::nan(""), std::nan(""), std::nan(""), std::nan(""),
                std::nan(""), std::nan(""), std::nan(""), std::nan(""), rc.solver.tol, std::string("error"),
                std::string(err.what())});
      }
      try {
        const auto res = corrector_residual(p, rc.flow, e.eps_list);
        for (std::size_t i = 0; i < res.size(); ++i) {
          const double r1 = i ? res[i - 1].first_order / res[i].first_order : std::nan("");
          const double r2 = i ? res[i - 1].second_order / res[i].second_order : std::nan("");
          cr.add({p.x, p.y, res[i].eps, res[i].first_order, res[i].second_order, r1, r2, 64L, std::string("ok"),
                  std::string()});
        }
      } catch (const std::exception& err) {
        cr.add({p.x, p.y, std::nan(""), std::nan(""), std::nan(""), std::nan(""), std::nan(""), 64L,
                std::string("error"), std::string(err.what())});
      }
    }
    out.tables.emplace_back("expansion", std::move(ex));
    out.tables.emplace_back("corrector_residual", std::move(cr));
  }
  return out;
}

Outputs cmd_front(const RunConfig& rc, const CommandOptions& opt) {
  const auto& e = rc.experiment;
  Outputs out;
  out.document = header("front", rc, opt);

  AlphaModel m = AlphaModel::euclidean(e.model_scale);
  int n_trace = e.n_angles;
  if (e.model == "ell1") {
    m = AlphaModel::ell1(e.model_scale);
  } else if (e.model == "sampled") {
    LevelCurve c = alpha_curve(rc.flow, rc.solver, e.n_angles, opt.threads);
    c = detect_flat_pieces(std::move(c), kappa_for(c, e), resonant_directions(rc.flow));
    m = AlphaModel::from_level_curve(c);
    n_trace = 0;
    out.document["curve"] = to_json(c);
    out.tables.emplace_back("level_curve", level_curve_table(c));
  }
  out.document["model"] = alpha_kind_name(m.kind());
  out.document["corner_warning"] = m.corner_warning();

  Table pts({"t", "x", "y", "provenance", "u"});
  Table cons({"t", "points", "max_abs_u", "convexity_defect", "min_turning", "corners"});
  std::vector<SvgCurve> svg;
  for (std::size_t i = 0; i < e.t_list.size(); ++i) {
    const double t = e.t_list[i];
    const FrontSnapshot s = front_trace(m, t, n_trace);
    const FrontConsistency fc = front_consistency(m, t, s);
    for (std::size_t k = 0; k < s.points.size(); ++k)
      pts.add({t, s.points[k].x, s.points[k].y, std::string(provenance_name(s.provenance[k])),
               hopf_lax_value(s.points[k], t, m)});
    cons.add({t, static_cast<long>(s.points.size()), fc.max_abs_u, fc.convexity_defect, fc.min_turning,
              static_cast<long>(m.corners().size())});
    svg.push_back(stroke(s.points, color(i)));
  }
  out.results = std::move(pts);
  out.tables.emplace_back("consistency", std::move(cons));
  out.plots.emplace_back("front", render_svg(svg, {480, std::string("front: ") + alpha_kind_name(m.kind())}));
  return out;
}

Outputs cmd_experiment_weak_flow(const RunConfig& rc, const CommandOptions& opt) {
  const auto& e = rc.experiment;
  if (e.eps_list.empty()) throw ConfigError("experiment weak-flow needs experiment.eps_list");
  const auto dirs = resonant_directions(rc.flow);
  Outputs out;
  out.document = header("experiment weak-flow", rc, opt);
  out.document["resonant_directions"] = resonances_json(dirs);

  Table summary({"eps", "non_roundness", "min_radius", "max_radius", "flat_arcs", "matched_arcs",
                 "predicted_normals", "kappa_tol", "tol", "status", "message"});
  Table curves({"eps", "theta", "x", "y", "alpha", "alpha_err", "lambda"});
  Table arcs({"eps", "start_index", "end_index", "normal_x", "normal_y", "matches_resonance"});
  json per_eps = json::array();
  std::vector<SvgCurve> svg;
  double reach = 0.0;
  for (std::size_t i = 0; i < e.eps_list.size(); ++i) {
    const double eps = e.eps_list[i];
    const FlowField f = rc.flow.with_amplitude(eps * rc.flow.amplitude());
    try {
      LevelCurve c = alpha_curve(f, rc.solver, e.n_angles, opt.threads);
      c = detect_flat_pieces(std::move(c), kappa_for(c, e), dirs);
      summary.add({eps, c.non_roundness(), c.min_radius(), c.max_radius(), static_cast<long>(c.flat_arcs.size()),
                    long{matched_arcs(c)}, static_cast<long>(dirs.size()), c.meta.kappa_tol, rc.solver.tol,
                    std::string("ok"), std::string()});
      for (const auto& s : c.samples)
        curves.add({eps, s.theta, s.point.x, s.point.y, s.value_used, s.value_err, s.lambda});
      for (const auto& a : c.flat_arcs)
        arcs.add({eps, long{a.start_index}, long{a.end_index}, a.normal.x, a.normal.y,
                  long{a.matches_resonance ? 1 : 0}});
      json cj = to_json(c);
      cj["eps"] = eps;
      per_eps.push_back(std::move(cj));
      svg.push_back(stroke(curve_points(c), color(i)));
      add_flat_overlays(svg, c);
      reach = std::max(reach, c.max_radius());
    } catch (const std::exception& err) {
      summary.add({eps, std::nan(""), std::nan(""), std::nan(""), 0L, 0L, static_cast<long>(dirs.size()),
                    std::nan(""), rc.solver.tol, std::string("error"), std::string(err.what())});
    }
  }
  out.document["curves"] = std::move(per_eps);
  out.results = std::move(summary);
  out.tables.emplace_back("level_curves", std::move(curves));
  out.tables.emplace_back("flat_arcs", std::move(arcs));

  // Expansion at the configured momenta, else at two Diophantine directions.
  std::vector<Vec2> ps = momenta(e, opt.seed);
  if (ps.empty()) {
    const double phi = 0.5 * (1.0 + std::sqrt(5.0));
    ps = {Vec2{1.0, phi} / norm({1.0, phi}), Vec2{1.0, std::sqrt(2.0)} / std::sqrt(3.0)};
  }
  Table ex({"p1", "p2", "eps", "hbar", "hbar_err", "ratio_h", "ratio_h_err", "alpha", "alpha_err", "ratio_alpha",
            "ratio_alpha_err", "a2", "tol", "status", "message"});
  for (Vec2 p : ps) {
    try {
      for (const auto& r : expansion_residual(p, rc.flow, e.eps_list, rc.solver, opt.threads))
        ex.add({p.x, p.y, r.eps, r.hbar, r.hbar_err, r.ratio_h, r.ratio_h_err, r.alpha, r.alpha_err, r.ratio_alpha,
                r.ratio_alpha_err, r.a2_target, rc.solver.tol, std::string("ok"), std::string()});
    } catch (const std::exception& err) {
      ex.add({p.x, p.y, std::nan(""), std::nan(""), std::nan(""), std::nan(""), std::nan(""), std::nan(""),
              std::nan(""), std::nan(""), std::nan(""), std::nan(""), rc.solver.tol, std::string("error"),
              std::string(err.what())});
    }
  }
  out.tables.emplace_back("expansion", std::move(ex));

  add_normal_overlays(svg, dirs, 1.1 * (reach > 0.0 ? reach : 1.0));
  out.plots.emplace_back("weak_flow", render_svg(svg, {480, "weak flow level curves: " + rc.flow.label()}));
  return out;
}

Outputs cmd_experiment_strong_flow(const RunConfig& rc, const CommandOptions& opt) {
  const auto& e = rc.experiment;
  if (e.a_list.empty()) throw ConfigError("experiment strong-flow needs experiment.A_list");
  Outputs out;
  out.document = header("experiment strong-flow", rc, opt);

  Table summary({"A", "max_lambda_over_A", "anisotropy", "alpha_e0", "alpha_e0_err", "alpha_diag", "alpha_diag_err",
                 "non_roundness", "flat_arcs", "flat_normal_e1", "kappa_tol", "tol", "status", "message"});
  Table shape({"A", "theta", "p1", "p2", "ell1_norm", "log_scaled_alpha", "alpha_err"});
  std::vector<SvgCurve> svg;
  json per_a = json::array();
  for (std::size_t i = 0; i < e.a_list.size(); ++i) {
    const double amp = e.a_list[i];
    const FlowField f = rc.flow.with_amplitude(amp);
    try {
      LevelCurve c = alpha_curve(f, rc.solver, e.n_angles, opt.threads);
      c = detect_flat_pieces(std::move(c), kappa_for(c, e), resonant_directions(f));
      double lam = 0.0;
      for (const auto& s : c.samples) lam = std::max(lam, s.lambda / amp);
      // e_0 and e_{pi/4} are on the grid when n_angles is a multiple of 8.
      auto alpha_at = [&](double theta) {
        const int n = static_cast<int>(c.samples.size());
        const double idx = theta / kTwoPi * n;
        if (std::abs(idx - std::round(idx)) < 1e-9) {
          const auto& s = c.samples[static_cast<int>(std::round(idx)) % n];
          return std::pair{s.value_used, s.value_err};
        }
        const auto r = burning_velocity(unit_at(theta), make_hbar_evaluator(f, rc.solver), rc.solver.lambda_rel_tol,
                                        rc.solver.tol);
        return std::pair{r.alpha, r.alpha_err};
      };
      const auto [a0, a0_err] = alpha_at(0.0);
      const auto [a1, a1_err] = alpha_at(kPi / 4);
      summary.add({amp, lam, a1 / a0, a0, a0_err, a1, a1_err, c.non_roundness(),
                    static_cast<long>(c.flat_arcs.size()), long{has_normal(c, {1.0, 0.0}, kTwoPi / e.n_angles) ? 1 : 0},
                    c.meta.kappa_tol, rc.solver.tol, std::string("ok"), std::string()});
      for (const auto& s : c.samples) {
        const Vec2 p = unit_at(s.theta);
        shape.add({amp, s.theta, p.x, p.y, std::abs(p.x) + std::abs(p.y), std::log(amp) * s.value_used / amp,
                std::abs(std::log(amp)) * s.value_err / amp});
      }
      json cj = to_json(c);
      cj["A"] = amp;
      per_a.push_back(std::move(cj));
      // Scaled by 1/A so all amplitudes share one plot.
      std::vector<Vec2> pts = curve_points(c);
      for (Vec2& p : pts) p = p * amp;
      svg.push_back(stroke(std::move(pts), color(i)));
    } catch (const std::exception& err) {
      summary.add({amp, std::nan(""), std::nan(""), std::nan(""), std::nan(""), std::nan(""), std::nan(""),
                    std::nan(""), 0L, 0L, std::nan(""), rc.solver.tol, std::string("error"),
                    std::string(err.what())});
    }
  }
  out.document["curves"] = std::move(per_a);
  out.results = std::move(summary);
  out.tables.emplace_back("limit_shape", std::move(shape));
  out.plots.emplace_back("strong_flow", render_svg(svg, {480, "A {alpha_A = 1}: " + rc.flow.label()}));
  return out;
}

Outputs cmd_experiment_shear(const RunConfig& rc, const CommandOptions& opt) {
  if (!rc.flow.is_shear() || rc.flow.is_zero()) throw ConfigError("experiment shear needs a nonzero shear flow");
  const auto& e = rc.experiment;
  Outputs out;
  out.document = header("experiment shear", rc, opt);

  std::vector<Vec2> ps = momenta(e, opt.seed);
  if (ps.empty()) ps = {{1.0, 0.0}};
  double worst = 0.0;
  out.results = shear_comparison(ps, rc.flow, rc.solver, opt.threads, &worst);
  out.document["max_rel_diff_vs_oracle"] = worst;

  const SolverConfig or_cfg = with_method(rc.solver, HbarMethod::shear_oracle);
  const auto dirs = resonant_directions(rc.flow);
  LevelCurve c = alpha_curve(rc.flow, or_cfg, e.n_angles, opt.threads);
  c = detect_flat_pieces(std::move(c), kappa_for(c, e), dirs);
  out.document["curve"] = to_json(c);
  out.document["resonant_directions"] = resonances_json(dirs);

  // Arc endpoints e / alpha map to lambda e on {Hbar = Hbar(lambda e)}.
  const ShearOracle oracle(PeriodicProfile::from_shear(rc.flow, rc.solver.quad_n));
  const int n = static_cast<int>(c.samples.size());
  Table plateau({"arc", "endpoint", "theta", "lambda", "p1", "p2", "plateau_width", "inside", "slack"});
  for (std::size_t a = 0; a < c.flat_arcs.size(); ++a) {
    const auto& arc = c.flat_arcs[a];
    const int idx[2] = {arc.start_index, arc.end_index % n};
    for (int k = 0; k < 2; ++k) {
      const auto& s = c.samples[idx[k]];
      const Vec2 p = unit_at(s.theta) * s.lambda;
      const double w = oracle.plateau_width(p.x);
      const double slack = 2.0 * (kTwoPi / n) * s.lambda;
      plateau.add({static_cast<long>(a), long{k}, s.theta, s.lambda, p.x, p.y, w,
                   long{std::abs(p.y) <= w + slack ? 1 : 0}, slack});
    }
  }
  out.tables.emplace_back("oracle_curve", level_curve_table(c));
  out.tables.emplace_back("flat_arcs", flat_arc_table(c));
  out.tables.emplace_back("plateau", std::move(plateau));

  std::vector<SvgCurve> svg{stroke(curve_points(c))};
  add_flat_overlays(svg, c);
  add_normal_overlays(svg, dirs, 1.1 * c.max_radius());
  out.plots.emplace_back("shear", render_svg(svg, {480, "shear oracle {alpha = 1}: " + rc.flow.label()}));
  return out;
}

Outputs cmd_experiment_cellular(const RunConfig& rc, const CommandOptions& opt) {
  const auto& e = rc.experiment;
  Outputs out;
  out.document = header("experiment cellular", rc, opt);

  // Hbar(1, p2) scan against the zero-flow control Hbar = 1 + p2^2.
  std::vector<double> xs;
  for (int i = 0; i * e.p2_step <= e.p2_max + 1e-12; ++i) xs.push_back(i * e.p2_step);
  std::vector<Vec2> scan_p;
  for (double x : xs) scan_p.push_back({1.0, x});
  const auto scan = hbar_batch(scan_p, rc.flow, rc.solver, opt.threads);
  const auto control = hbar_batch(scan_p, make_zero(), rc.solver, opt.threads);
  Table window({"p2", "hbar", "hbar_err", "delta", "control", "control_err", "control_delta", "tol", "status",
                "message"});
  std::vector<HbarResult> sv, cv;
  bool scan_ok = true;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    window.add({xs[i], scan[i].r.value, scan[i].r.error_estimate, scan[i].r.value - scan[0].r.value,
                control[i].r.value, control[i].r.error_estimate, control[i].r.value - control[0].r.value,
                rc.solver.tol, scan[i].status, scan[i].message});
    scan_ok = scan_ok && scan[i].status == "ok" && control[i].status == "ok";
    sv.push_back(scan[i].r);
    cv.push_back(control[i].r);
  }
  out.tables.emplace_back("window_scan", std::move(window));

  Table checks({"check", "p1", "p2", "A", "value", "reference", "abs_diff", "err", "tol", "status", "message"});
  if (scan_ok) {
    const FlatWindow w = flat_window(xs, sv);
    const FlatWindow wc = flat_window(xs, cv);
    const bool pass = w.steps > 4 && w.steps > wc.steps;
    checks.add({std::string("flat_window_width"), 1.0, 0.0, rc.flow.amplitude(), w.width, wc.width,
                w.width - wc.width, w.allowance, 4.0 * e.p2_step, std::string(pass ? "ok" : "not_resolved"),
                "steps " + std::to_string(w.steps) + ", control steps " + std::to_string(wc.steps)});
    out.document["flat_window"] = {{"steps", w.steps},
                                   {"width", w.width},
                                   {"variation", w.variation},
                                   {"allowance", w.allowance},
                                   {"control_steps", wc.steps},
                                   {"control_width", wc.width},
                                   {"p2_step", e.p2_step}};
  } else {
    checks.add({std::string("flat_window_width"), 1.0, 0.0, rc.flow.amplitude(), std::nan(""), std::nan(""),
                std::nan(""), std::nan(""), 4.0 * e.p2_step, std::string("error"),
                std::string("window scan has failed rows")});
  }

  // Scaling identity Hbar_1(p) = Hbar_A(A p) / A^2 and method agreement.
  std::vector<Vec2> ps = momenta(e, opt.seed);
  if (ps.empty()) ps = {{1.0, 0.0}};
  const std::vector<double> amps = e.a_list.empty() ? std::vector<double>{1.0, 2.0, 4.0} : e.a_list;
  const FlowField unit = rc.flow.with_amplitude(1.0);
  const auto base = hbar_batch(ps, unit, rc.solver, opt.threads);
  for (double amp : amps) {
    std::vector<Vec2> scaled;
    for (Vec2 p : ps) scaled.push_back(p * amp);
    const auto r = hbar_batch(scaled, unit.with_amplitude(amp), rc.solver, opt.threads);
    for (std::size_t i = 0; i < ps.size(); ++i) {
      const double v = r[i].r.value / (amp * amp);
      const double err = r[i].r.error_estimate / (amp * amp) + base[i].r.error_estimate;
      const bool ok = r[i].status == "ok" && base[i].status == "ok";
      checks.add({std::string("scaling_identity"), ps[i].x, ps[i].y, amp, v, base[i].r.value,
                  std::abs(v - base[i].r.value), err, rc.solver.tol, std::string(ok ? "ok" : "error"),
                  r[i].message + base[i].message});
    }
  }
  const SolverConfig di_cfg = with_method(rc.solver, HbarMethod::discounted);
  const SolverConfig tm_cfg = with_method(rc.solver, HbarMethod::time_marching);
  const auto tm = hbar_batch(ps, rc.flow, tm_cfg, opt.threads);
  const auto di = hbar_batch(ps, rc.flow, di_cfg, opt.threads);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const bool ok = tm[i].status == "ok" && di[i].status == "ok";
    checks.add({std::string("method_agreement"), ps[i].x, ps[i].y, rc.flow.amplitude(), di[i].r.value,
                tm[i].r.value, std::abs(di[i].r.value - tm[i].r.value),
                di[i].r.error_estimate + tm[i].r.error_estimate, rc.solver.tol, std::string(ok ? "ok" : "error"),
                tm[i].message + di[i].message});
  }
  out.results = std::move(checks);

  std::vector<SvgCurve> svg;
  SvgCurve sc, cc;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sc.points.push_back({xs[i], sv[i].value - sv[0].value});
    cc.points.push_back({xs[i], cv[i].value - cv[0].value});
  }
  sc.closed = cc.closed = false;
  cc.stroke = "#7f7f7f";
  cc.dash = "4 3";
  svg.push_back(std::move(cc));
  svg.push_back(std::move(sc));
  out.plots.emplace_back("window_scan", render_svg(svg, {480, "Hbar(1, p2) - Hbar(1, 0): " + rc.flow.label()}));
  return out;
}

// ---- emission and entry point ------------------------------------------------------

void emit(const Outputs& out, const OutputSpec& spec, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  if (spec.csv) {
    if (out.results) write_text(dir / "results.csv", out.results->to_csv());
    for (const auto& [name, t] : out.tables) write_text(dir / (name + ".csv"), t.to_csv());
  }
  if (spec.json) {
    json doc = out.document;
    if (out.results) doc["results"] = out.results->to_json();
    if (!out.tables.empty()) {
      json tables = json::object();
      for (const auto& [name, t] : out.tables) tables[name] = t.to_json();
      doc["tables"] = std::move(tables);
    }
    write_text(dir / "results.json", doc.dump(2) + "\n");
  }
  if (spec.svg && !out.plots.empty()) {
    std::filesystem::create_directories(dir / "plots");
    for (const auto& [name, svg] : out.plots) write_text(dir / "plots" / (name + ".svg"), svg);
  }
}

int run(int argc, char** argv) {
  CLI::App app{"Effective Hamiltonians and burning velocities of |p|^2 + A V(x).p on the 2-torus"};
  app.require_subcommand(1);
  std::string config_path, out_dir;
  int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::uint64_t seed = 0;
  app.add_option("--config", config_path, "JSON run configuration")->required();
  app.add_option("--out", out_dir, "output directory (overrides output.dir)");
  app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "seed for randomized momentum sampling");

  using Command = Outputs (*)(const RunConfig&, const CommandOptions&);
  std::vector<std::pair<CLI::App*, Command>> commands;
  auto add = [&](CLI::App* parent, const char* name, const char* help, Command fn) {
    CLI::App* sub = parent->add_subcommand(name, help);
    sub->fallthrough();
    commands.emplace_back(sub, fn);
  };
  add(&app, "hbar", "effective Hamiltonian over p_list", cmd_hbar);
  add(&app, "alpha", "burning velocity over p_list", cmd_alpha);
  add(&app, "level-curve", "level curve {alpha = 1} or {Hbar = level}", cmd_level_curve);
  add(&app, "flat-pieces", "flat arcs of {alpha = 1} against resonant directions", cmd_flat_pieces);
  add(&app, "perturb", "weak-flow coefficient a2 and expansion residuals", cmd_perturb);
  add(&app, "front", "front snapshots under an alpha model", cmd_front);
  CLI::App* exp = app.add_subcommand("experiment", "experiment drivers");
  exp->fallthrough();
  exp->require_subcommand(1);
  add(exp, "weak-flow", "level curves and expansion for eps V", cmd_experiment_weak_flow);
  add(exp, "strong-flow", "amplitude sweep trends", cmd_experiment_strong_flow);
  add(exp, "shear", "PDE solvers against the shear oracle", cmd_experiment_shear);
  add(exp, "cellular", "flat window, scaling identity, method agreement", cmd_experiment_cellular);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  Command fn = nullptr;
  for (const auto& [sub, f] : commands)
    if (sub->parsed()) fn = f;

  RunConfig rc;
  try {
    rc = load_run_config(config_path);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  if (!out_dir.empty()) rc.output.dir = out_dir;

  const CommandOptions opt{seed, threads};
  Outputs out;
  try {
    out = fn(rc, opt);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NonConvergenceError& e) {
    std::cerr << "non-convergence: " << e.what() << " (best estimate " << e.best_estimate() << ", defect "
              << e.defect() << ")\n";
    return kExitNonConvergence;
  } catch (const DomainError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitConfig;
  }
  try {
    emit(out, rc.output, rc.output.dir);
  } catch (const std::exception& e) {
    std::cerr << "output error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitOk;
}

}  // namespace ebv::cli
