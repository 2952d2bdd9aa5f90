// Compiled with -mavx2 (and without -mfma) so products and sums round
// exactly like the scalar reference.

#include "lf_cell.hpp"

#if defined(__AVX2__)
#include <immintrin.h>
#endif

namespace ebv::kernels::avx2 {

#if defined(__AVX2__)

namespace {

inline __m256d vabs(__m256d v) { return _mm256_andnot_pd(_mm256_set1_pd(-0.0), v); }

double hmax(__m256d v) {
  alignas(32) double t[4];
  _mm256_store_pd(t, v);
  return std::fmax(std::fmax(t[0], t[1]), std::fmax(t[2], t[3]));
}

// Vector form of detail::godunov_axis.
inline __m256d godunov_axis(__m256d a, __m256d b, __m256d v) {
  const __m256d mhalf = _mm256_set1_pd(-0.5);
  const __m256d q = _mm256_min_pd(_mm256_max_pd(_mm256_mul_pd(mhalf, v), a), b);
  const __m256d gq = _mm256_add_pd(_mm256_mul_pd(q, q), _mm256_mul_pd(v, q));
  const __m256d ga = _mm256_add_pd(_mm256_mul_pd(a, a), _mm256_mul_pd(v, a));
  const __m256d gb = _mm256_add_pd(_mm256_mul_pd(b, b), _mm256_mul_pd(v, b));
  const __m256d gmax = _mm256_max_pd(ga, gb);
  const __m256d ordered = _mm256_cmp_pd(a, b, _CMP_LE_OQ);
  return _mm256_blendv_pd(gmax, gq, ordered);
}

}  // namespace

SpeedBound lf_hamiltonian(const double* w, const double* vx, const double* vy, double* h_out, const StencilParams& prm) {
  const int n = prm.n;
  const __m256d ih = _mm256_set1_pd(prm.inv_h);
  const __m256d half = _mm256_set1_pd(0.5);
  const __m256d two = _mm256_set1_pd(2.0);
  const __m256d p1 = _mm256_set1_pd(prm.p1);
  const __m256d p2 = _mm256_set1_pd(prm.p2);
  const __m256d hsx = _mm256_set1_pd(0.5 * prm.sigma_x);
  const __m256d hsy = _mm256_set1_pd(0.5 * prm.sigma_y);
  __m256d vbx = _mm256_setzero_pd();
  __m256d vby = _mm256_setzero_pd();
  double bx = 0.0, by = 0.0;

  for (int j = 0; j < n; ++j) {
    const double* row = w + static_cast<std::ptrdiff_t>(j) * n;
    const double* down = w + static_cast<std::ptrdiff_t>((j + n - 1) % n) * n;
    const double* up = w + static_cast<std::ptrdiff_t>((j + 1) % n) * n;
    const std::ptrdiff_t base = static_cast<std::ptrdiff_t>(j) * n;

    // i = 0 wraps to the row end
    h_out[base] = detail::lf_cell(row[0], row[n - 1], row[1], down[0], up[0], vx[base], vy[base], prm, bx, by);

    int i = 1;
    for (; i + 4 <= n - 1; i += 4) {
      const __m256d c = _mm256_loadu_pd(row + i);
      const __m256d l = _mm256_loadu_pd(row + i - 1);
      const __m256d r = _mm256_loadu_pd(row + i + 1);
      const __m256d d = _mm256_loadu_pd(down + i);
      const __m256d u = _mm256_loadu_pd(up + i);
      const __m256d ux = _mm256_loadu_pd(vx + base + i);
      const __m256d uy = _mm256_loadu_pd(vy + base + i);

      const __m256d dxm = _mm256_mul_pd(_mm256_sub_pd(c, l), ih);
      const __m256d dxp = _mm256_mul_pd(_mm256_sub_pd(r, c), ih);
      const __m256d dym = _mm256_mul_pd(_mm256_sub_pd(c, d), ih);
      const __m256d dyp = _mm256_mul_pd(_mm256_sub_pd(u, c), ih);
      const __m256d px = _mm256_add_pd(p1, _mm256_mul_pd(half, _mm256_add_pd(dxm, dxp)));
      const __m256d py = _mm256_add_pd(p2, _mm256_mul_pd(half, _mm256_add_pd(dym, dyp)));

      __m256d h = _mm256_add_pd(_mm256_mul_pd(px, px), _mm256_mul_pd(py, py));
      h = _mm256_add_pd(h, _mm256_mul_pd(ux, px));
      h = _mm256_add_pd(h, _mm256_mul_pd(uy, py));
      h = _mm256_sub_pd(h, _mm256_mul_pd(hsx, _mm256_sub_pd(dxp, dxm)));
      h = _mm256_sub_pd(h, _mm256_mul_pd(hsy, _mm256_sub_pd(dyp, dym)));
      _mm256_storeu_pd(h_out + base + i, h);

      const __m256d ax = _mm256_max_pd(vabs(_mm256_add_pd(_mm256_mul_pd(two, _mm256_add_pd(p1, dxm)), ux)),
                                       vabs(_mm256_add_pd(_mm256_mul_pd(two, _mm256_add_pd(p1, dxp)), ux)));
      const __m256d ay = _mm256_max_pd(vabs(_mm256_add_pd(_mm256_mul_pd(two, _mm256_add_pd(p2, dym)), uy)),
                                       vabs(_mm256_add_pd(_mm256_mul_pd(two, _mm256_add_pd(p2, dyp)), uy)));
      vbx = _mm256_max_pd(vbx, ax);
      vby = _mm256_max_pd(vby, ay);
    }
    for (; i < n; ++i) {
      const int ir = i == n - 1 ? 0 : i + 1;
      h_out[base + i] = detail::lf_cell(row[i], row[i - 1], row[ir], down[i], up[i], vx[base + i], vy[base + i], prm, bx, by);
    }
  }
  return {std::fmax(bx, hmax(vbx)), std::fmax(by, hmax(vby))};
}

SpeedBound godunov_hamiltonian(const double* w, const double* vx, const double* vy, double* h_out,
                               const StencilParams& prm) {
  const int n = prm.n;
  const __m256d ih = _mm256_set1_pd(prm.inv_h);
  const __m256d two = _mm256_set1_pd(2.0);
  const __m256d p1 = _mm256_set1_pd(prm.p1);
  const __m256d p2 = _mm256_set1_pd(prm.p2);
  __m256d vbx = _mm256_setzero_pd();
  __m256d vby = _mm256_setzero_pd();
  double bx = 0.0, by = 0.0;

  for (int j = 0; j < n; ++j) {
    const double* row = w + static_cast<std::ptrdiff_t>(j) * n;
    const double* down = w + static_cast<std::ptrdiff_t>((j + n - 1) % n) * n;
    const double* up = w + static_cast<std::ptrdiff_t>((j + 1) % n) * n;
    const std::ptrdiff_t base = static_cast<std::ptrdiff_t>(j) * n;

    h_out[base] = detail::godunov_cell(row[0], row[n - 1], row[1], down[0], up[0], vx[base], vy[base], prm, bx, by);

    int i = 1;
    for (; i + 4 <= n - 1; i += 4) {
      const __m256d c = _mm256_loadu_pd(row + i);
      const __m256d ux = _mm256_loadu_pd(vx + base + i);
      const __m256d uy = _mm256_loadu_pd(vy + base + i);
      const __m256d axm = _mm256_add_pd(p1, _mm256_mul_pd(_mm256_sub_pd(c, _mm256_loadu_pd(row + i - 1)), ih));
      const __m256d axp = _mm256_add_pd(p1, _mm256_mul_pd(_mm256_sub_pd(_mm256_loadu_pd(row + i + 1), c), ih));
      const __m256d aym = _mm256_add_pd(p2, _mm256_mul_pd(_mm256_sub_pd(c, _mm256_loadu_pd(down + i)), ih));
      const __m256d ayp = _mm256_add_pd(p2, _mm256_mul_pd(_mm256_sub_pd(_mm256_loadu_pd(up + i), c), ih));
      _mm256_storeu_pd(h_out + base + i, _mm256_add_pd(godunov_axis(axm, axp, ux), godunov_axis(aym, ayp, uy)));
      vbx = _mm256_max_pd(vbx, _mm256_max_pd(vabs(_mm256_add_pd(_mm256_mul_pd(two, axm), ux)),
                                             vabs(_mm256_add_pd(_mm256_mul_pd(two, axp), ux))));
      vby = _mm256_max_pd(vby, _mm256_max_pd(vabs(_mm256_add_pd(_mm256_mul_pd(two, aym), uy)),
                                             vabs(_mm256_add_pd(_mm256_mul_pd(two, ayp), uy))));
    }
    for (; i < n; ++i) {
      const int ir = i == n - 1 ? 0 : i + 1;
      h_out[base + i] =
          detail::godunov_cell(row[i], row[i - 1], row[ir], down[i], up[i], vx[base + i], vy[base + i], prm, bx, by);
    }
  }
  return {std::fmax(bx, hmax(vbx)), std::fmax(by, hmax(vby))};
}

void relax(double* w, const double* h, std::size_t count, double dt, double discount) {
  const __m256d vdt = _mm256_set1_pd(dt);
  const __m256d vdisc = _mm256_set1_pd(discount);
  std::size_t i = 0;
  for (; i + 4 <= count; i += 4) {
    const __m256d x = _mm256_loadu_pd(w + i);
    const __m256d g = _mm256_add_pd(_mm256_mul_pd(vdisc, x), _mm256_loadu_pd(h + i));
    _mm256_storeu_pd(w + i, _mm256_sub_pd(x, _mm256_mul_pd(vdt, g)));
  }
  for (; i < count; ++i) w[i] -= dt * (discount * w[i] + h[i]);
}

#else

SpeedBound lf_hamiltonian(const double* w, const double* vx, const double* vy, double* h_out, const StencilParams& prm) {
  return scalar::lf_hamiltonian(w, vx, vy, h_out, prm);
}

SpeedBound godunov_hamiltonian(const double* w, const double* vx, const double* vy, double* h_out,
                               const StencilParams& prm) {
  return scalar::godunov_hamiltonian(w, vx, vy, h_out, prm);
}

void relax(double* w, const double* h, std::size_t count, double dt, double discount) {
  scalar::relax(w, h, count, dt, discount);
}

#endif

}  // namespace ebv::kernels::avx2
