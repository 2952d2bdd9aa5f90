#pragma once

#include <map>
#include <optional>
#include <vector>

#include "ebv/cell_solver.hpp"
#include "ebv/flow.hpp"

namespace ebv {

// Weak-flow expansion Hbar_eps(p) = |p|^2 + eps^2 a2(p) + O(eps^3) for the
// field eps * V. Every quantity here uses the unit-amplitude field; the
// amplitude stored in the FlowField is ignored.

struct PerturbationResult {
  Vec2 p;
  double a2 = 0.0;
  /// Modes dropped because |p.k| < divisor_floor |p| |k|.
  std::vector<Wave> excluded_modes;
  /// min |p.k| / (|p| |k|) over the modes that were kept.
  double min_divisor = 0.0;
  /// True when excluded_modes is nonempty: a2 is then a truncated sum.
  bool truncated = false;
  std::optional<GridFunction> corrector;
};

inline constexpr double kDefaultDivisorFloor = 1e-6;

/// a2(p) = 1/4 sum_k |p.v_k|^2 |k|^2 / |p.k|^2 over the stored modes.
PerturbationResult a2(Vec2 p, const FlowField& f, double divisor_floor = kDefaultDivisorFloor);

/// Fourier coefficients of the first two correctors:
///   p.D phi1 = -V.p / 2,   p.D phi2 = (a2 - |D phi1|^2 - V.D phi1) / 2.
struct CorrectorSeries {
  Vec2 p;
  double a2 = 0.0;
  std::map<Wave, cplx> phi1;
  std::map<Wave, cplx> phi2;
};

CorrectorSeries corrector_series(Vec2 p, const FlowField& f, double divisor_floor = kDefaultDivisorFloor);

/// phi1 sampled on the n x n grid (mean zero).
GridFunction corrector_phi1(Vec2 p, const FlowField& f, int n);

/// max over an n x n grid of
///   | |p + Dw|^2 + eps V.(p + Dw) - |p|^2 - eps^2 a2 |
/// for w = eps phi1 (first) and w = eps phi1 + eps^2 phi2 (second).
struct CorrectorResidual {
  double eps = 0.0;
  double first_order = 0.0;
  double second_order = 0.0;
};

std::vector<CorrectorResidual> corrector_residual(Vec2 p, const FlowField& f, const std::vector<double>& eps_list,
                                                  int n = 64);

struct DiophantineQuality {
  /// min over 0 < |k| <= k_max of |p.k| |k|^gamma, p normalized.
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  Wave argmin1{};
  Wave argmin2{};
};

DiophantineQuality diophantine_quality(Vec2 p, int k_max);

struct ExpansionRow {
  double eps = 0.0;
  double hbar = 0.0;
  double hbar_err = 0.0;
  double ratio_h = 0.0;
  double ratio_h_err = 0.0;
  double alpha = 0.0;
  double alpha_err = 0.0;
  double ratio_alpha = 0.0;
  double ratio_alpha_err = 0.0;
  double a2_target = 0.0;
};

/// r_H = (Hbar_eps(p) - |p|^2) / eps^2 and r_alpha = (alpha_eps(p) - 2|p|) / (eps^2 |p|)
/// for the field eps * V, one row per eps (evaluated in parallel).
std::vector<ExpansionRow> expansion_residual(Vec2 p, const FlowField& f, const std::vector<double>& eps_list,
                                             const SolverConfig& cfg, int threads = 1);

}  // namespace ebv
