#pragma once
// Data-parallel inner loops used by the relaxed solver and the eigensolver.
//
// Every kernel has a portable scalar reference and an AVX2 variant. The variant is picked once at
// startup from CPUID; MINPART_SIMD=scalar in the environment forces the reference path.
// Elementwise kernels are bitwise identical across variants; reductions differ only by
// summation order.

#include <cstddef>
#include <span>
#include <string_view>

namespace minpart::kernels {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);

/// Periodic five-point stencil on an nx*ny grid stored row-major (index i*ny + j).
struct StencilShape {
  int nx = 0;
  int ny = 0;
  double cx = 0.0;  // 1/hx^2
  double cy = 0.0;  // 1/hy^2
};

struct KernelTable {
  Isa isa;
  // y = L x + potential .* x, where L is the periodic 5-point Laplacian. potential may be null.
  void (*periodic_stencil)(const StencilShape& shape, const double* potential, const double* x,
                           double* y);
  double (*dot)(std::size_t n, const double* x, const double* y);
  // y += alpha * x
  void (*axpy)(std::size_t n, double alpha, const double* x, double* y);
  // out = alpha * u .* u
  void (*scaled_square)(std::size_t n, double alpha, const double* u, double* out);
  // out = c * (1 - phi)
  void (*penalty_potential)(std::size_t n, double c, const double* phi, double* out);
};

const KernelTable& scalar_table();
const KernelTable* avx2_table();  // null when not compiled in
bool cpu_supports(Isa isa);

/// The table selected for this process.
const KernelTable& active();

/// Overrides the selection (tests and benchmarks). Throws if the ISA is unavailable.
void force(Isa isa);

// Convenience wrappers over the active table.
void periodic_stencil(const StencilShape& shape, std::span<const double> potential,
                      std::span<const double> x, std::span<double> y);
double dot(std::span<const double> x, std::span<const double> y);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void scaled_square(double alpha, std::span<const double> u, std::span<double> out);
void penalty_potential(double c, std::span<const double> phi, std::span<double> out);

}  // namespace minpart::kernels
