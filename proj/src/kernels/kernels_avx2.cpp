// Compiled with -mavx2 -ffp-contract=off. No FMA: elementwise results must match the scalar
// reference bit for bit.
#include <immintrin.h>

#include "kernels_impl.hpp"

namespace minpart::kernels::detail {

void periodic_stencil_avx2(const StencilShape& s, const double* potential, const double* x,
                           double* y) {
  const int nx = s.nx;
  const int ny = s.ny;
  const __m256d vcx = _mm256_set1_pd(s.cx);
  const __m256d vcy = _mm256_set1_pd(s.cy);
  for (int i = 0; i < nx; ++i) {
    const double* row = x + static_cast<std::size_t>(i) * ny;
    const double* east = x + static_cast<std::size_t>(i + 1 == nx ? 0 : i + 1) * ny;
    const double* west = x + static_cast<std::size_t>(i == 0 ? nx - 1 : i - 1) * ny;
    double* out = y + static_cast<std::size_t>(i) * ny;
    const double* pot = potential ? potential + static_cast<std::size_t>(i) * ny : nullptr;

    auto scalar_at = [&](int j) {
      const double north = row[j + 1 == ny ? 0 : j + 1];
      const double south = row[j == 0 ? ny - 1 : j - 1];
      const double c = row[j];
      double v = s.cx * ((c + c) - east[j] - west[j]) + s.cy * ((c + c) - north - south);
      if (pot) v = v + pot[j] * c;
      out[j] = v;
    };

    scalar_at(0);
    int j = 1;
    for (; j + 4 <= ny - 1; j += 4) {
      const __m256d c = _mm256_loadu_pd(row + j);
      const __m256d cc = _mm256_add_pd(c, c);
      const __m256d e = _mm256_loadu_pd(east + j);
      const __m256d w = _mm256_loadu_pd(west + j);
      const __m256d n = _mm256_loadu_pd(row + j + 1);
      const __m256d so = _mm256_loadu_pd(row + j - 1);
      const __m256d tx = _mm256_sub_pd(_mm256_sub_pd(cc, e), w);
      const __m256d ty = _mm256_sub_pd(_mm256_sub_pd(cc, n), so);
      __m256d v = _mm256_add_pd(_mm256_mul_pd(vcx, tx), _mm256_mul_pd(vcy, ty));
      if (pot) v = _mm256_add_pd(v, _mm256_mul_pd(_mm256_loadu_pd(pot + j), c));
      _mm256_storeu_pd(out + j, v);
    }
    for (; j < ny; ++j) scalar_at(j);
  }
}

double dot_avx2(std::size_t n, const double* x, const double* y) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double tail = 0.0;
  for (; i < n; ++i) tail += x[i] * y[i];
  return ((lanes[0] + lanes[1]) + (lanes[2] + lanes[3])) + tail;
}

void axpy_avx2(std::size_t n, double alpha, const double* x, double* y) {
  const __m256d a = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_add_pd(_mm256_loadu_pd(y + i),
                                    _mm256_mul_pd(a, _mm256_loadu_pd(x + i)));
    _mm256_storeu_pd(y + i, v);
  }
  for (; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

void scaled_square_avx2(std::size_t n, double alpha, const double* u, double* out) {
  const __m256d a = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(u + i);
    _mm256_storeu_pd(out + i, _mm256_mul_pd(a, _mm256_mul_pd(v, v)));
  }
  for (; i < n; ++i) out[i] = alpha * (u[i] * u[i]);
}

void penalty_potential_avx2(std::size_t n, double c, const double* phi, double* out) {
  const __m256d vc = _mm256_set1_pd(c);
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_mul_pd(vc, _mm256_sub_pd(one, _mm256_loadu_pd(phi + i))));
  }
  for (; i < n; ++i) out[i] = c * (1.0 - phi[i]);
}

}  // namespace minpart::kernels::detail
