#pragma once

#include <functional>
#include <vector>

#include "ebv/cell_solver.hpp"
#include "ebv/flow.hpp"
#include "ebv/level_curve.hpp"

namespace ebv {

/// alpha(p) = inf_{lambda > 0} (1 + Hbar(lambda p)) / lambda.
struct BurningVelocityResult {
  Vec2 p;
  double alpha = 0.0;
  double lambda_p = 0.0;
  double lambda_lo = 0.0;  // final golden-section bracket
  double lambda_hi = 0.0;
  /// lambda Hbar'(lambda) - (1 + Hbar) at lambda_p, Hbar' by central differences.
  double optimality_gap = 0.0;
  /// 5 * fd_step * lambda^2 |h''(lambda_p)|.
  double gap_bound = 0.0;
  double fd_step = 0.0;
  double hbar_at_min = 0.0;
  /// Error estimate of alpha: Hbar error / lambda plus the spread of the last
  /// two golden-section values.
  double alpha_err = 0.0;
  long evaluations = 0;
};

/// Golden-section search on h(lambda) = (1 + Hbar(lambda p)) / lambda over a
/// bracket grown by doubling / halving from lambda = 1/|p|. Stops when the
/// bracket is narrower than lambda_rel_tol * lambda. `hbar_tol` sets the
/// finite-difference step of the optimality check.
BurningVelocityResult burning_velocity(Vec2 p, const HbarEvaluator& eval, double lambda_rel_tol, double hbar_tol);
BurningVelocityResult burning_velocity(Vec2 p, const FlowField& f, const SolverConfig& cfg);

/// {alpha = 1} sampled at e_theta / alpha(e_theta) on a uniform theta grid.
/// Each angle gets a fresh evaluator from `make_eval`.
LevelCurve alpha_level_curve(const std::function<HbarEvaluator()>& make_eval, double lambda_rel_tol, double hbar_tol,
                             int n_angles, int threads = 1);
LevelCurve alpha_level_curve(const FlowField& f, const SolverConfig& cfg, int n_angles, int threads = 1);

struct ResonantDirection {
  Wave k;       // primitive wave vector of the mode family
  Vec2 normal;  // k-perp / |k|, first nonzero component positive
  double strength = 0.0;  // A * max |v_{m k}|
};

/// Rational directions along which some Fourier mode obstructs the vanishing
/// of every line integral of D(q.V); sorted by strength, then by normal.
std::vector<ResonantDirection> resonant_directions(const FlowField& f);

/// 4 * delta / ell^2 with delta = (max relative alpha error) * mean radius
/// and ell the mean chord: the turning per unit chord that a radial error
/// delta can produce.
double default_kappa_tol(const LevelCurve& curve);

/// Maximal runs of samples whose discrete curvature (turning angle over mean
/// adjacent chord) stays below kappa_tol. A run of m flat vertices gives an
/// arc of m + 2 samples. Normals within two angular sample spacings of a
/// predicted direction (either sign) are flagged as matches.
LevelCurve detect_flat_pieces(LevelCurve curve, double kappa_tol, const std::vector<ResonantDirection>& predicted = {});

/// Reduces a rational direction to a primitive integer vector, or throws
/// DomainError when no (a, b) with |a|, |b| <= 10^4 matches to 1e-12.
Wave rational_direction(Vec2 q);

/// int_0^T D(q.V)(x0 + q t) dt with q = (a,b)/|(a,b)| and T = |(a,b)|, by
/// the trapezoid rule (exact for the finite Fourier series).
Vec2 line_integral_check(const FlowField& f, Wave dir, Vec2 x0);
Vec2 line_integral_check(const FlowField& f, Vec2 q, Vec2 x0);
/// T * 2 pi i sum_{k.(a,b) = 0} (q.v_k) k exp(2 pi i k.x0), real part.
Vec2 line_integral_prediction(const FlowField& f, Wave dir, Vec2 x0);

}  // namespace ebv
