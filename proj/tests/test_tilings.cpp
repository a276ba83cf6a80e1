#include <doctest.h>

#include <json.hpp>

#include <cmath>
#include <numbers>
#include <sstream>

#include "minpart/errors.hpp"
#include "minpart/tilings.hpp"

using namespace minpart;
using std::numbers::pi;
using std::numbers::sqrt3;

namespace {
constexpr double pi2 = pi * pi;
}

TEST_CASE("hexagon thresholds") {
  CHECK(b_H(3) == doctest::Approx((std::sqrt(11.0) - sqrt3) / 4).epsilon(1e-14));
  CHECK(b_H(4) == doctest::Approx(1 / (2 * sqrt3)).epsilon(1e-14));
  CHECK(b_H(5) == doctest::Approx((std::sqrt(291.0) - 5 * sqrt3) / 36).epsilon(1e-14));
  CHECK_THROWS_AS(b_H(6), PreconditionError);
}

TEST_CASE("hexagonal tilings satisfy the 120-degree invariants") {
  for (int k : {3, 4, 5}) {
    for (double frac : {0.02, 0.3, 0.7, 1.0}) {
      const double b = b_H(k) + frac * (1.0 - b_H(k));
      CAPTURE(k);
      CAPTURE(b);
      const TilingSpec t = hexagonal_tiling(k, b);
      CHECK(t.cells.size() == static_cast<std::size_t>(k));
      CHECK(t.free_parameters.empty());
      for (const auto& c : t.cells) {
        CHECK(c.size() == 6);
        CHECK(polygon_area(c) == doctest::Approx(b / k).epsilon(1e-12));
      }
      const TilingCheck chk = check_tiling(t, 64);
      CHECK(chk.max_angle_error <= 1e-9);
      CHECK(chk.max_area_error <= 1e-12);
      CHECK(chk.min_vertex_degree == 3);
      CHECK(chk.max_vertex_degree == 3);
      CHECK(chk.coverage == doctest::Approx(1.0));
      CHECK(chk.overlap == 0.0);
    }
    CHECK_THROWS_AS(hexagonal_tiling(k, b_H(k) - 1e-3), PreconditionError);
  }
}

TEST_CASE("hexagon cells are centrally symmetric translates") {
  for (double b : {0.72, 1.0}) {
    const TilingSpec t = hexagonal_tiling(3, b);
    const auto& c = t.cells[0];
    for (std::size_t i = 0; i < 3; ++i) {
      const Point d = c[(i + 1) % 6] - c[i];
      const Point e = c[(i + 4) % 6] - c[i + 3];
      CHECK(d.x == doctest::Approx(-e.x));
      CHECK(d.y == doctest::Approx(-e.y));
    }
    for (std::size_t m = 1; m < 3; ++m) {
      const Point shift = t.cells[m][0] - c[0];
      for (std::size_t i = 0; i < 6; ++i) {
        const Point d = t.cells[m][i] - c[i];
        CHECK(d.x == doctest::Approx(shift.x));
        CHECK(d.y == doctest::Approx(shift.y));
      }
    }
  }
}

TEST_CASE("strips and five squares") {
  const TilingSpec s = strips(3, {1.0, 0.6});
  REQUIRE(s.exact_cell_lambda);
  CHECK(*s.exact_cell_lambda == doctest::Approx(9 * pi2));
  CHECK(tiling_cell_lambda1(s, 64) == doctest::Approx(9 * pi2).epsilon(0.01));
  const TilingSpec f = five_squares();
  REQUIRE(f.exact_cell_lambda);
  CHECK(*f.exact_cell_lambda == doctest::Approx(10 * pi2));
  CHECK(f.cells.size() == 5);
  const TilingCheck chk = check_tiling(f, 64);
  CHECK(chk.max_area_error <= 1e-12);
  CHECK(chk.coverage == doctest::Approx(1.0));
  CHECK(tiling_cell_lambda1(f, 64) == doctest::Approx(10 * pi2).epsilon(0.01));
}

TEST_CASE("double cover eigenfunction") {
  // u(x + 1, y) = -u(x, y) and -Lap u = 9 pi^2 u.
  for (Point p : {Point{0.1, 0.2}, Point{0.77, 0.5}, Point{1.3, 0.05}}) {
    CHECK(double_cover_eigenfunction(0.5, {p.x + 1, p.y}) == doctest::Approx(-double_cover_eigenfunction(0.5, p)));
    const double h = 1e-4;
    const double u = double_cover_eigenfunction(0.5, p);
    const double lap = (double_cover_eigenfunction(0.5, {p.x + h, p.y}) + double_cover_eigenfunction(0.5, {p.x - h, p.y}) +
                        double_cover_eigenfunction(0.5, {p.x, p.y + h}) + double_cover_eigenfunction(0.5, {p.x, p.y - h}) - 4 * u) /
                       (h * h);
    CHECK(-lap == doctest::Approx(9 * pi2 * u).epsilon(1e-5).scale(1.0));
  }
  CHECK(double_cover_nodal_count(0.5, 64) == 6);
  const double alpha = double_cover_alpha_default(64);
  CHECK(alpha > 0.0);
  const TilingSpec t = double_cover_3partition(alpha);
  CHECK(t.k == 3);
  CHECK(t.geom.b == doctest::Approx(1 / std::sqrt(2.0)));
  const auto part = tiling_partition(t, 64);
  CHECK(part.lambdas.size() == 3);
  for (double l : part.lambdas) CHECK(l == doctest::Approx(9 * pi2).epsilon(0.02));
}

TEST_CASE("pair compatibility") {
  const auto strip = pair_compatibility(strips(2, {1.0, 0.5}), 64);
  CHECK(strip.max_gap < 0.01);
  CHECK(strip.lambda1_cell == doctest::Approx(4 * pi2).epsilon(0.01));
  const auto hex = pair_compatibility(hexagonal_tiling(3, 1.0), 64);
  CHECK(hex.sides.size() == hex.lambda2_glued.size());
  CHECK(hex.max_gap < 0.01);
  CHECK_THROWS_AS(pair_compatibility(hexagonal_tiling(3, 0.72), 10), PreconditionError);
}

TEST_CASE("tiling JSON") {
  std::ostringstream out;
  write_tiling_json(out, hexagonal_tiling(4, 0.8));
  const auto j = nlohmann::json::parse(out.str());
  CHECK(j["kind"] == "hexagons");
  CHECK(j["k"] == 4);
  CHECK(j["cells"].size() == 4);
  for (const auto& c : j["cells"]) {
    CHECK(c["vertices"].size() == 6);
    CHECK(c["lifts"].size() == 6);
    for (const auto& v : c["vertices"]) {
      CHECK(v[0].get<double>() >= 0.0);
      CHECK(v[0].get<double>() < 1.0);
    }
  }
}
