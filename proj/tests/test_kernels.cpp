#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "minpart/kernels.hpp"

using namespace minpart::kernels;

namespace {

std::vector<double> random_vector(std::size_t n, unsigned seed, double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = dist(rng);
  return v;
}

// Direct double loop over the periodic five-point stencil.
std::vector<double> stencil_oracle(const StencilShape& s, const double* pot, const std::vector<double>& x) {
  std::vector<double> y(x.size());
  for (int i = 0; i < s.nx; ++i) {
    for (int j = 0; j < s.ny; ++j) {
      auto at = [&](int ii, int jj) {
        ii = (ii + s.nx) % s.nx;
        jj = (jj + s.ny) % s.ny;
        return x[static_cast<std::size_t>(ii) * s.ny + jj];
      };
      const double c = at(i, j);
      double v = s.cx * (2 * c - at(i - 1, j) - at(i + 1, j)) + s.cy * (2 * c - at(i, j - 1) - at(i, j + 1));
      if (pot) v += pot[static_cast<std::size_t>(i) * s.ny + j] * c;
      y[static_cast<std::size_t>(i) * s.ny + j] = v;
    }
  }
  return y;
}

}  // namespace

TEST_CASE("scalar stencil matches the direct loop") {
  for (auto [nx, ny] : {std::pair{8, 8}, std::pair{9, 13}, std::pair{16, 5}}) {
    StencilShape s{nx, ny, 3.0, 7.0};
    const auto x = random_vector(static_cast<std::size_t>(nx) * ny, 1);
    const auto pot = random_vector(x.size(), 2, 0.0, 5.0);
    std::vector<double> y(x.size());
    scalar_table().periodic_stencil(s, pot.data(), x.data(), y.data());
    const auto ref = stencil_oracle(s, pot.data(), x);
    for (std::size_t p = 0; p < y.size(); ++p) CHECK(y[p] == doctest::Approx(ref[p]).epsilon(1e-14));
    scalar_table().periodic_stencil(s, nullptr, x.data(), y.data());
    const auto ref0 = stencil_oracle(s, nullptr, x);
    for (std::size_t p = 0; p < y.size(); ++p) CHECK(y[p] == doctest::Approx(ref0[p]).epsilon(1e-14));
  }
}

TEST_CASE("avx2 kernels agree with the scalar reference") {
  const KernelTable* v = avx2_table();
  if (!v || !cpu_supports(Isa::avx2)) {
    MESSAGE("AVX2 not available; equivalence not exercised");
    return;
  }
  const KernelTable& s = scalar_table();
  for (std::size_t n : {1u, 3u, 4u, 7u, 64u, 1001u}) {
    const auto x = random_vector(n, 10 + static_cast<unsigned>(n));
    const auto y0 = random_vector(n, 20 + static_cast<unsigned>(n));

    auto ys = y0, yv = y0;
    s.axpy(n, 0.37, x.data(), ys.data());
    v->axpy(n, 0.37, x.data(), yv.data());
    CHECK(ys == yv);

    std::vector<double> os(n), ov(n);
    s.scaled_square(n, -2.5, x.data(), os.data());
    v->scaled_square(n, -2.5, x.data(), ov.data());
    CHECK(os == ov);

    s.penalty_potential(n, 1e4, x.data(), os.data());
    v->penalty_potential(n, 1e4, x.data(), ov.data());
    CHECK(os == ov);

    const double ds = s.dot(n, x.data(), y0.data());
    const double dv = v->dot(n, x.data(), y0.data());
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) scale += std::abs(x[i] * y0[i]);
    CHECK(std::abs(ds - dv) <= 1e-14 * scale + 1e-300);
  }
  for (auto [nx, ny] : {std::pair{8, 8}, std::pair{9, 13}, std::pair{32, 21}, std::pair{128, 77}}) {
    StencilShape shape{nx, ny, 1.0 * nx * nx, 1.0 * ny * ny};
    const auto x = random_vector(static_cast<std::size_t>(nx) * ny, 3);
    const auto pot = random_vector(x.size(), 4, 0.0, 1e4);
    std::vector<double> ys(x.size()), yv(x.size());
    s.periodic_stencil(shape, pot.data(), x.data(), ys.data());
    v->periodic_stencil(shape, pot.data(), x.data(), yv.data());
    CHECK(ys == yv);
    s.periodic_stencil(shape, nullptr, x.data(), ys.data());
    v->periodic_stencil(shape, nullptr, x.data(), yv.data());
    CHECK(ys == yv);
  }
}

TEST_CASE("force selects the table and rejects unavailable variants") {
  const Isa before = active().isa;
  force(Isa::scalar);
  CHECK(active().isa == Isa::scalar);
  if (avx2_table() && cpu_supports(Isa::avx2)) {
    force(Isa::avx2);
    CHECK(active().isa == Isa::avx2);
  } else {
    CHECK_THROWS(force(Isa::avx2));
  }
  force(before);
  CHECK(isa_name(Isa::scalar) == "scalar");
}
