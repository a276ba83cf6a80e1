#include "kernels_impl.hpp"

namespace minpart::kernels::detail {

void periodic_stencil_scalar(const StencilShape& s, const double* potential, const double* x,
                             double* y) {
  const int nx = s.nx;
  const int ny = s.ny;
  for (int i = 0; i < nx; ++i) {
    const double* row = x + static_cast<std::size_t>(i) * ny;
    const double* east = x + static_cast<std::size_t>(i + 1 == nx ? 0 : i + 1) * ny;
    const double* west = x + static_cast<std::size_t>(i == 0 ? nx - 1 : i - 1) * ny;
    double* out = y + static_cast<std::size_t>(i) * ny;
    const double* pot = potential ? potential + static_cast<std::size_t>(i) * ny : nullptr;
    for (int j = 0; j < ny; ++j) {
      const double north = row[j + 1 == ny ? 0 : j + 1];
      const double south = row[j == 0 ? ny - 1 : j - 1];
      const double c = row[j];
      double v = s.cx * ((c + c) - east[j] - west[j]) + s.cy * ((c + c) - north - south);
      if (pot) v = v + pot[j] * c;
      out[j] = v;
    }
  }
}

double dot_scalar(std::size_t n, const double* x, const double* y) {
  // Four partial sums, same association as the vector variant's lanes.
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc[0] += x[i] * y[i];
    acc[1] += x[i + 1] * y[i + 1];
    acc[2] += x[i + 2] * y[i + 2];
    acc[3] += x[i + 3] * y[i + 3];
  }
  double tail = 0.0;
  for (; i < n; ++i) tail += x[i] * y[i];
  return ((acc[0] + acc[1]) + (acc[2] + acc[3])) + tail;
}

void axpy_scalar(std::size_t n, double alpha, const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

void scaled_square_scalar(std::size_t n, double alpha, const double* u, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = alpha * (u[i] * u[i]);
}

void penalty_potential_scalar(std::size_t n, double c, const double* phi, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = c * (1.0 - phi[i]);
}

}  // namespace minpart::kernels::detail
