#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ebv/flow.hpp"
#include "ebv/grid.hpp"
#include "ebv/level_curve.hpp"

namespace ebv {

enum class HbarMethod { time_marching, discounted, shear_oracle };

const char* method_name(HbarMethod m);
HbarMethod parse_method(const std::string& s);

/// Monotone numerical Hamiltonian used by both PDE methods.
enum class Scheme { godunov, lax_friedrichs };

const char* scheme_name(Scheme s);
Scheme parse_scheme(const std::string& s);

struct SolverConfig {
  int n = 128;
  double dt_safety = 0.9;
  /// Pseudo-time budget per solve (per discount level for the discounted method).
  double t_max = 400.0;
  /// Target accuracy of the Hbar estimate.
  double tol = 1e-5;
  std::vector<double> discount_eps_list{0.4, 0.2, 0.1};
  bool cross_check = false;
  HbarMethod method = HbarMethod::time_marching;
  Scheme scheme = Scheme::godunov;
  /// Golden-section stopping rule on the burning-velocity minimizer.
  double lambda_rel_tol = 1e-4;
  /// Steps between slope checkpoints of the time-marching method.
  int check_every = 50;
  /// Base resolution of the shear oracle quadrature.
  int quad_n = 1024;

  void validate() const;
};

struct HbarResult {
  Vec2 p;
  double value = 0.0;
  HbarMethod method = HbarMethod::time_marching;
  Scheme scheme = Scheme::godunov;
  double residual = 0.0;
  double error_estimate = 0.0;
  long iterations = 0;
  /// |time_marching - discounted| when a cross check ran.
  std::optional<double> cross_check_delta;
};

/// Lax-Friedrichs dissipation safety factor over the sampled max |dH/dp_i|.
inline constexpr double kDissipationSafety = 1.2;

/// Large-time limit of w_t + H(p + Dw, x) = 0: Hbar = -lim w / t.
///
/// `state`, when given, is used as initial data if its resolution matches
/// and receives the final (mean-free) corrector.
HbarResult hbar_time_marching(Vec2 p, const FlowField& f, const SolverConfig& cfg, GridFunction* state = nullptr);

/// Discounted approximation eps v + H(p + Dv, x) = 0 for each eps in the
/// configured list, Richardson-extrapolated to eps = 0.
HbarResult hbar_discounted(Vec2 p, const FlowField& f, const SolverConfig& cfg, GridFunction* state = nullptr);

/// One periodic profile y -> a(y) on [0,1), given by samples and evaluated
/// between samples by trigonometric interpolation (exact for band-limited
/// data such as a finite Fourier shear profile).
class PeriodicProfile {
 public:
  explicit PeriodicProfile(std::vector<double> samples);
  /// Samples A*v(y) of a shear flow V = (v(x2), 0).
  static PeriodicProfile from_shear(const FlowField& f, int quad_n);

  int size() const { return static_cast<int>(samples_.size()); }
  double sample(int i) const;
  double operator()(double y) const;

 private:
  std::vector<double> samples_;
  std::vector<cplx> coeffs_;  // DFT coefficients for |m| <= size/2
};

/// Closed-form effective Hamiltonian of a shear flow:
/// Hbar(p) = p1^2 + h(p), h = M(p1) = max p1 a(y) on the plateau
/// |p2| <= W(p1) = int sqrt(M - p1 a), else |p2| = int sqrt(h - p1 a).
class ShearOracle {
 public:
  explicit ShearOracle(PeriodicProfile profile);

  double max_value(double p1) const;  // M(p1)
  double plateau_width(double p1) const;  // W(p1)
  HbarResult hbar(Vec2 p) const;

 private:
  // Maximizer of sign * a(y) with the profile cached on the refined window
  // around it; M(p1) and W(p1) only depend on p1 through its sign.
  struct Peak {
    double y = 0.0;
    double a = 0.0;  // a(y) at the maximizer
    int i0 = 0;      // window = base cells [i0, i1]
    int i1 = 0;
    std::vector<double> left;   // a on the refined left half window
    std::vector<double> right;  // a on the refined right half window
    double dy_left = 0.0;
    double dy_right = 0.0;
  };
  Peak make_peak(double sign) const;
  const Peak& peak(double p1) const { return p1 > 0.0 ? up_ : down_; }
  double integral(double h, double p1, const Peak& pk, int stride) const;
  double solve_h(double p1, double p2_abs, int stride, long& iters) const;

  PeriodicProfile profile_;
  Peak up_;
  Peak down_;
};

HbarResult shear_oracle(Vec2 p, const PeriodicProfile& v_samples, int quad_n);

/// Stateful Hbar evaluator; each instance carries its own warm-start state,
/// so results do not depend on how work is distributed over instances.
using HbarEvaluator = std::function<HbarResult(Vec2)>;

/// Evaluator for cfg.method (shear_oracle requires a shear flow). With
/// cfg.cross_check the other PDE method also runs and the delta is recorded.
HbarEvaluator make_hbar_evaluator(const FlowField& f, const SolverConfig& cfg);

HbarResult hbar(Vec2 p, const FlowField& f, const SolverConfig& cfg);

/// Points of {Hbar = c} along n_angles uniformly spaced rays, located by
/// bisection in r on [0, sqrt(c)] (Hbar >= |p|^2 bounds the root).
LevelCurve hbar_level_curve(double c, const FlowField& f, const SolverConfig& cfg, int n_angles, double r_max = 1e3);
LevelCurve hbar_level_curve(double c, const std::function<HbarEvaluator()>& make_eval, double tol, int n_angles,
                            double r_max = 1e3, int threads = 1);

/// Window of a scan x_0 < x_1 < ... on which Hbar stays within the combined
/// error estimates of its first value: the largest k with
/// |H_i - H_0| <= err_i + err_0 for all i <= k.
struct FlatWindow {
  int steps = 0;            // k
  double width = 0.0;       // x_k - x_0
  double variation = 0.0;   // max |H_i - H_0| over the window
  double allowance = 0.0;   // max err_i + err_0 over the window
};

FlatWindow flat_window(const std::vector<double>& x, const std::vector<HbarResult>& values);

/// Rejects |p| > 10 max(1, A).
void check_momentum(Vec2 p, const FlowField& f);

}  // namespace ebv
