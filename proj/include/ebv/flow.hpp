#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ebv/grid.hpp"
#include "ebv/types.hpp"

namespace ebv {

/// Smooth, Z^2-periodic, mean-zero, divergence-free velocity field A*V stored
/// as a finite Fourier series V(x) = sum_k v_k exp(2 pi i k.x).
///
/// Construction validates every structural invariant (no zero mode,
/// k.v_k = 0, v_{-k} = conj(v_k), stream-function consistency) to 1e-12 and
/// throws DomainError rather than projecting. The object is immutable.
class FlowField {
 public:
  using ModeMap = std::map<Wave, CVec2>;
  using StreamMap = std::map<Wave, cplx>;

  FlowField(ModeMap modes, double amplitude, std::optional<StreamMap> stream, std::string label);

  const ModeMap& modes() const { return modes_; }
  double amplitude() const { return amplitude_; }
  const std::optional<StreamMap>& stream_coeffs() const { return stream_; }
  const std::string& label() const { return label_; }

  bool is_zero() const { return modes_.empty() || amplitude_ == 0.0; }
  /// True when every mode has k1 = 0 and a vanishing second component,
  /// i.e. V(x) = (v(x2), 0).
  bool is_shear() const;

  FlowField with_amplitude(double a) const;
  FlowField with_label(std::string label) const;

  /// sum_k |v_k|, an upper bound for max |V| at unit amplitude.
  double coefficient_bound() const;

 private:
  ModeMap modes_;
  double amplitude_;
  std::optional<StreamMap> stream_;
  std::string label_;
};

FlowField make_zero();
/// Shear flow V = (v(x2), 0) from the Fourier coefficients of v.
FlowField make_shear(const std::map<int, cplx>& v_fourier, double amplitude = 1.0, std::string label = "shear");
/// v(y) = sin(2 pi y).
FlowField make_shear_sin(double amplitude = 1.0);
/// V = (-K_{x2}, K_{x1}) for K = sin(2 pi x1) sin(2 pi x2).
FlowField make_cellular(double amplitude = 1.0);
/// K = sin(2 pi x1) sin(2 pi x2) + delta cos(2 pi x1) cos(2 pi x2), 0 < delta < 1.
FlowField make_cats_eye(double delta, double amplitude = 1.0);
/// Builds V from Fourier coefficients of a real stream function K.
FlowField make_stream_flow(const FlowField::StreamMap& k_fourier, double amplitude, std::string label);

/// A * V(x) by direct Fourier summation; coordinates are reduced mod 1 first.
Vec2 eval_velocity(const FlowField& f, Vec2 x);
/// A * DV(x); entry (i, j) = d V_i / d x_j.
Mat2 eval_gradient(const FlowField& f, Vec2 x);
/// Stream function value (unit amplitude); requires stream coefficients.
double eval_stream(const FlowField& f, Vec2 x);

/// Samples of A*V on the n x n grid, phases taken from an exact table so the
/// samples are exactly periodic.
std::pair<GridFunction, GridFunction> sample_velocity(const FlowField& f, int n);
/// Spectral divergence of A*V sampled on the grid.
GridFunction sample_divergence(const FlowField& f, int n);

}  // namespace ebv
