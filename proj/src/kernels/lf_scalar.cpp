#include "lf_cell.hpp"

namespace ebv::kernels::scalar {

SpeedBound lf_hamiltonian(const double* w, const double* vx, const double* vy, double* h_out, const StencilParams& prm) {
  const int n = prm.n;
  double bx = 0.0, by = 0.0;
  for (int j = 0; j < n; ++j) {
    const double* row = w + static_cast<std::ptrdiff_t>(j) * n;
    const double* down = w + static_cast<std::ptrdiff_t>((j + n - 1) % n) * n;
    const double* up = w + static_cast<std::ptrdiff_t>((j + 1) % n) * n;
    const std::ptrdiff_t base = static_cast<std::ptrdiff_t>(j) * n;
    for (int i = 0; i < n; ++i) {
      const int il = i == 0 ? n - 1 : i - 1;
      const int ir = i == n - 1 ? 0 : i + 1;
      h_out[base + i] = detail::lf_cell(row[i], row[il], row[ir], down[i], up[i], vx[base + i], vy[base + i], prm, bx, by);
    }
  }
  return {bx, by};
}

SpeedBound godunov_hamiltonian(const double* w, const double* vx, const double* vy, double* h_out,
                               const StencilParams& prm) {
  const int n = prm.n;
  double bx = 0.0, by = 0.0;
  for (int j = 0; j < n; ++j) {
    const double* row = w + static_cast<std::ptrdiff_t>(j) * n;
    const double* down = w + static_cast<std::ptrdiff_t>((j + n - 1) % n) * n;
    const double* up = w + static_cast<std::ptrdiff_t>((j + 1) % n) * n;
    const std::ptrdiff_t base = static_cast<std::ptrdiff_t>(j) * n;
    for (int i = 0; i < n; ++i) {
      const int il = i == 0 ? n - 1 : i - 1;
      const int ir = i == n - 1 ? 0 : i + 1;
      h_out[base + i] =
          detail::godunov_cell(row[i], row[il], row[ir], down[i], up[i], vx[base + i], vy[base + i], prm, bx, by);
    }
  }
  return {bx, by};
}

void relax(double* w, const double* h, std::size_t count, double dt, double discount) {
  for (std::size_t i = 0; i < count; ++i) w[i] -= dt * (discount * w[i] + h[i]);
}

}  // namespace ebv::kernels::scalar
