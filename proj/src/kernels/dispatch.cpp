#include <atomic>
#include <cstdlib>
#include <string>

#include "kernels_impl.hpp"
#include "minpart/errors.hpp"

namespace minpart::kernels {

namespace {

const KernelTable kScalar{Isa::scalar,
                          &detail::periodic_stencil_scalar,
                          &detail::dot_scalar,
                          &detail::axpy_scalar,
                          &detail::scaled_square_scalar,
                          &detail::penalty_potential_scalar};

#if MINPART_HAVE_AVX2
const KernelTable kAvx2{Isa::avx2,
                        &detail::periodic_stencil_avx2,
                        &detail::dot_avx2,
                        &detail::axpy_avx2,
                        &detail::scaled_square_avx2,
                        &detail::penalty_potential_avx2};
#endif

const KernelTable* select_default() {
  if (const char* env = std::getenv("MINPART_SIMD"); env && std::string(env) == "scalar") {
    return &kScalar;
  }
  if (cpu_supports(Isa::avx2)) return avx2_table();
  return &kScalar;
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{select_default()};
  return table;
}

}  // namespace

std::string_view isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

const KernelTable& scalar_table() { return kScalar; }

const KernelTable* avx2_table() {
#if MINPART_HAVE_AVX2
  return &kAvx2;
#else
  return nullptr;
#endif
}

bool cpu_supports(Isa isa) {
  if (isa == Isa::scalar) return true;
#if MINPART_HAVE_AVX2 && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const KernelTable& active() { return *current().load(std::memory_order_relaxed); }

void force(Isa isa) {
  if (!cpu_supports(isa) || (isa == Isa::avx2 && !avx2_table())) {
    throw PreconditionError("kernel ISA not available: " + std::string(isa_name(isa)));
  }
  current().store(isa == Isa::avx2 ? avx2_table() : &kScalar, std::memory_order_relaxed);
}

void periodic_stencil(const StencilShape& shape, std::span<const double> potential,
                      std::span<const double> x, std::span<double> y) {
  active().periodic_stencil(shape, potential.empty() ? nullptr : potential.data(), x.data(),
                            y.data());
}

double dot(std::span<const double> x, std::span<const double> y) {
  return active().dot(x.size(), x.data(), y.data());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(x.size(), alpha, x.data(), y.data());
}

void scaled_square(double alpha, std::span<const double> u, std::span<double> out) {
  active().scaled_square(u.size(), alpha, u.data(), out.data());
}

void penalty_potential(double c, std::span<const double> phi, std::span<double> out) {
  active().penalty_potential(phi.size(), c, phi.data(), out.data());
}

}  // namespace minpart::kernels
