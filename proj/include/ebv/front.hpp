#pragma once

#include <vector>

#include "ebv/level_curve.hpp"
#include "ebv/types.hpp"

namespace ebv {

enum class AlphaKind { euclidean, ell1, sampled };

const char* alpha_kind_name(AlphaKind k);

/// Convex, positive, degree-1 homogeneous burning velocity used to move the
/// unit circle.
///
/// euclidean: alpha(p) = scale |p|.
/// ell1: alpha(p) = scale (|p1| + |p2|).
/// sampled: alpha(e_theta_i) on a uniform angle grid, extended between
/// samples as the gauge of the polygon through e_theta_i / alpha_i (exact
/// on flat arcs).
class AlphaModel {
 public:
  struct Corner {
    int index = 0;
    Vec2 grad_minus;  // one-sided gradients bounding the subdifferential
    Vec2 grad_plus;
  };

  static AlphaModel euclidean(double scale = 1.0);
  static AlphaModel ell1(double scale = 1.0);
  /// Flat arcs of {alpha = 1} are detected with `kappa_tol`; corners are
  /// samples whose one-sided derivative jump exceeds 5x the median jump.
  static AlphaModel sampled(std::vector<double> alpha, double kappa_tol);
  /// Uses the curve's values and its flat arcs; the samples must sit on the
  /// uniform grid theta_i = 2 pi i / n.
  static AlphaModel from_level_curve(const LevelCurve& curve);

  AlphaKind kind() const { return kind_; }
  double scale() const { return scale_; }
  const std::vector<double>& table() const { return alpha_; }
  const std::vector<Corner>& corners() const { return corners_; }
  const std::vector<LevelCurve::FlatArc>& flat_arcs() const { return flats_; }
  /// Set when a sampled model shows corners; in 2-D these indicate solver noise.
  bool corner_warning() const { return !corners_.empty(); }

  double operator()(Vec2 p) const;
  /// Gradient at sample i (sampled kind): alpha_i e + d_i e-perp with the
  /// angular derivative d_i = (alpha_{i+1} - alpha_{i-1}) / (2 sin dtheta).
  Vec2 sample_gradient(int i) const;
  /// Polygon gauge coefficients: alpha(e) = e . cone_gradient(i) for e
  /// between samples i and i + 1.
  Vec2 cone_gradient(int i) const;
  bool in_flat_interior(int i) const;

 private:
  AlphaModel() = default;
  void detect_corners();

  AlphaKind kind_ = AlphaKind::euclidean;
  double scale_ = 1.0;
  std::vector<double> alpha_;
  std::vector<Vec2> cone_grad_;
  std::vector<Corner> corners_;
  std::vector<LevelCurve::FlatArc> flats_;
};

enum class Provenance { regular, corner_fan, flat_translate };

const char* provenance_name(Provenance p);

struct FrontSnapshot {
  double t = 0.0;
  std::vector<Vec2> points;
  std::vector<Provenance> provenance;
};

/// u(x, t) = max(0, max_theta (x.e_theta - t alpha(e_theta))) - 1, evaluated
/// exactly for every kind (per quadrant for ell1, per polygon cone for
/// sampled models).
double hopf_lax_value(Vec2 x, double t, const AlphaModel& m);

/// Points p + t D alpha(p) for p on the unit circle, with corner fans
/// {p + t q : q in the subdifferential segment} at corners. Sampled models
/// trace at their own angles (n_angles must equal the table size or be 0).
FrontSnapshot front_trace(const AlphaModel& m, double t, int n_angles);

struct FrontConsistency {
  double max_abs_u = 0.0;
  /// max over vertices of the negative part of sin(turning angle).
  double convexity_defect = 0.0;
  /// min turning angle over vertices with two nondegenerate edges.
  double min_turning = 0.0;
};

FrontConsistency front_consistency(const AlphaModel& m, double t, const FrontSnapshot& snapshot);

/// Point-in-polygon for a counterclockwise convex polygon, with slack.
bool convex_polygon_contains(const std::vector<Vec2>& polygon, Vec2 x, double slack = 0.0);

}  // namespace ebv
