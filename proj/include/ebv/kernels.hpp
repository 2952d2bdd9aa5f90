#pragma once

// Data-parallel inner loops of the cell-problem solvers.
//
// Every kernel has a scalar reference implementation and an AVX2 variant with
// the same operation order (no FMA), so the two agree bit for bit. The active
// set is chosen once at runtime from CPUID; EBV_SIMD=scalar forces the
// reference path.

#include <cstddef>

namespace ebv::kernels {

struct StencilParams {
  int n = 0;
  double p1 = 0.0;
  double p2 = 0.0;
  double sigma_x = 0.0;  // Lax-Friedrichs dissipation per axis (unused by Godunov)
  double sigma_y = 0.0;
  double inv_h = 0.0;
};

/// max over the grid of |dH/dp_i| at both one-sided gradients.
struct SpeedBound {
  double x = 0.0;
  double y = 0.0;
};

/// H_out[c] = Lax-Friedrichs numerical Hamiltonian of |P|^2 + v.P at every
/// cell, with P = p + central gradient of w.
using LfHamiltonianFn = SpeedBound (*)(const double* w, const double* vx, const double* vy, double* h_out,
                                       const StencilParams& prm);
/// H_out[c] = Godunov numerical Hamiltonian: per axis, the min of
/// q^2 + v q over [a-, a+] when a- <= a+, else its max over [a+, a-].
using GodunovHamiltonianFn = LfHamiltonianFn;
/// w[i] -= dt * (discount * w[i] + h[i])
using RelaxFn = void (*)(double* w, const double* h, std::size_t count, double dt, double discount);

enum class Isa { scalar, avx2 };

struct KernelSet {
  LfHamiltonianFn lf_hamiltonian;
  GodunovHamiltonianFn godunov_hamiltonian;
  RelaxFn relax;
  Isa isa;
};

const char* isa_name(Isa isa);
bool avx2_supported();
/// Kernels for a specific instruction set; throws if the CPU lacks it.
const KernelSet& kernels_for(Isa isa);
/// Runtime-selected kernels.
const KernelSet& active();

namespace scalar {
SpeedBound lf_hamiltonian(const double* w, const double* vx, const double* vy, double* h_out, const StencilParams& prm);
SpeedBound godunov_hamiltonian(const double* w, const double* vx, const double* vy, double* h_out, const StencilParams& prm);
void relax(double* w, const double* h, std::size_t count, double dt, double discount);
}  // namespace scalar

namespace avx2 {
SpeedBound lf_hamiltonian(const double* w, const double* vx, const double* vy, double* h_out, const StencilParams& prm);
SpeedBound godunov_hamiltonian(const double* w, const double* vx, const double* vy, double* h_out, const StencilParams& prm);
void relax(double* w, const double* h, std::size_t count, double dt, double discount);
}  // namespace avx2

}  // namespace ebv::kernels
