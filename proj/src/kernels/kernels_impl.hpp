#pragma once

#include "minpart/kernels.hpp"

namespace minpart::kernels::detail {

void periodic_stencil_scalar(const StencilShape& s, const double* potential, const double* x,
                             double* y);
double dot_scalar(std::size_t n, const double* x, const double* y);
void axpy_scalar(std::size_t n, double alpha, const double* x, double* y);
void scaled_square_scalar(std::size_t n, double alpha, const double* u, double* out);
void penalty_potential_scalar(std::size_t n, double c, const double* phi, double* out);

#if MINPART_HAVE_AVX2
void periodic_stencil_avx2(const StencilShape& s, const double* potential, const double* x,
                           double* y);
double dot_avx2(std::size_t n, const double* x, const double* y);
void axpy_avx2(std::size_t n, double alpha, const double* x, double* y);
void scaled_square_avx2(std::size_t n, double alpha, const double* u, double* out);
void penalty_potential_avx2(std::size_t n, double c, const double* phi, double* out);
#endif

}  // namespace minpart::kernels::detail
