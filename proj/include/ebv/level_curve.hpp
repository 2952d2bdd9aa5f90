#pragma once

#include <string>
#include <vector>

#include "ebv/types.hpp"

namespace ebv {

/// Angle-parametrized samples of a convex level curve ({alpha = 1} or
/// {Hbar = c}) together with the flat arcs found on it.
struct LevelCurve {
  struct Sample {
    double theta = 0.0;
    Vec2 point;
    /// alpha(e_theta) for burning-velocity curves, Hbar(point) for Hbar curves.
    double value_used = 0.0;
    /// Error estimate carried by value_used.
    double value_err = 0.0;
    /// Minimizer lambda of the burning-velocity problem (0 for Hbar curves).
    double lambda = 0.0;
  };

  struct FlatArc {
    int start_index = 0;  // first sample of the run
    int end_index = 0;    // last sample of the run (may wrap past the end)
    Vec2 normal;          // outward unit normal of the fitted chord line
    double chord_deviation = 0.0;
    bool matches_resonance = false;
    Vec2 matched_normal;  // nearest predicted normal, when one matches

    int sample_count(int n_samples) const {
      return ((end_index - start_index) % n_samples + n_samples) % n_samples + 1;
    }
  };

  struct Meta {
    std::string kind;  // "alpha" or "hbar"
    std::string flow_label;
    double amplitude = 0.0;
    double level = 1.0;
    double tol = 0.0;
    double kappa_tol = 0.0;
  };

  std::vector<Sample> samples;
  std::vector<FlatArc> flat_arcs;
  Meta meta;

  double min_radius() const;
  double max_radius() const;
  /// max radius / min radius - 1.
  double non_roundness() const;
};

}  // namespace ebv
