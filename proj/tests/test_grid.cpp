#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "minpart/eigensolve.hpp"
#include "minpart/errors.hpp"
#include "minpart/grid.hpp"

using namespace minpart;
using std::numbers::pi;

namespace {
Polygon rectangle(double x0, double y0, double x1, double y1) {
  return {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
}
}  // namespace

TEST_CASE("grid geometry and indexing") {
  const Grid g = Grid::with_resolution({1.0, 0.65}, 128);
  CHECK(g.nx() == 128);
  CHECK(g.ny() == 84);
  CHECK(Grid::with_resolution({1.0, 0.5}, 96).ny() == 48);
  CHECK(g.index(-1, 0) == g.index(127, 0));
  CHECK(g.index(0, 84) == g.index(0, 0));
  const std::size_t p = g.index(5, 7);
  CHECK(g.i_of(p) == 5);
  CHECK(g.j_of(p) == 7);
  CHECK(neighbor(g, g.index(127, 3), kEast) == g.index(0, 3));
  CHECK(neighbor(g, g.index(4, 0), kSouth) == g.index(4, 83));
  CHECK_THROWS_AS(Grid({1.0, 1.0}, 4, 16), PreconditionError);
  CHECK_THROWS_AS(Grid::with_resolution({1.0, -1.0}, 32), PreconditionError);
}

TEST_CASE("periodic Laplacian reproduces the discrete torus spectrum") {
  const Grid g({1.0, 0.5}, 32, 16);
  const auto op = assemble_periodic_laplacian(g);
  const auto pairs = smallest_eigenpairs(op, 4);
  const double h = 1.0 / 32;
  // Discrete symbol of the 5-point stencil at frequency (1, 0) and (0, 1).
  const double l10 = 4.0 / (h * h) * std::pow(std::sin(pi * h), 2);
  const double l01 = 4.0 / (h * h) * std::pow(std::sin(2 * pi * h), 2);
  CHECK(std::abs(pairs[0].value) < 1e-8);
  CHECK(pairs[1].value == doctest::Approx(l10).epsilon(1e-8));
  CHECK(pairs[2].value == doctest::Approx(l10).epsilon(1e-8));
  CHECK(pairs[3].value == doctest::Approx(std::min(l01, 4 * l10)).epsilon(1e-8));
}

TEST_CASE("periodic Laplacian with a constant potential shifts the spectrum") {
  const Grid g({1.0, 1.0}, 16, 16);
  GridField pot(g, 3.5);
  const auto pairs = smallest_eigenpairs(assemble_periodic_laplacian(g, &pot), 1);
  CHECK(pairs[0].value == doctest::Approx(3.5).epsilon(1e-9));
}

TEST_CASE("node-aligned rectangle gives the exact discrete Dirichlet eigenvalue") {
  const Grid g({1.0, 1.0}, 64, 64);
  const double h = 1.0 / 64;
  // Walls on grid lines: the nodes on them are outside and the fraction is 1.
  const DomainMask m = mask_from_polygon(g, rectangle(0.25, 0.125, 0.75, 0.625));
  CHECK(m.count() == 31 * 31);
  const double lx = 2.0 / (h * h) * (1 - std::cos(pi * h / 0.5));
  CHECK(dirichlet_lambda1(m) == doctest::Approx(2 * lx).epsilon(1e-9));
}

TEST_CASE("exact wall distances converge for an off-grid rectangle") {
  const double exact = pi * pi * (1 / (0.41 * 0.41) + 1 / (0.33 * 0.33));
  double prev_err = 1.0;
  for (int n : {32, 64, 128}) {
    const Grid g({1.0, 1.0}, n, n);
    const DomainMask m = mask_from_polygon(g, rectangle(0.213, 0.301, 0.623, 0.631));
    const double err = std::abs(dirichlet_lambda1(m) - exact) / exact;
    CAPTURE(n);
    CHECK(err < prev_err);
    prev_err = err;
  }
  CHECK(prev_err < 2e-3);
}

TEST_CASE("polygons") {
  const Polygon sq = rectangle(0, 0, 1, 1);
  CHECK(polygon_area(sq) == doctest::Approx(1.0));
  Polygon cw(sq.rbegin(), sq.rend());
  CHECK(polygon_area(cw) == doctest::Approx(-1.0));
  CHECK(polygon_is_simple(sq));
  CHECK_FALSE(polygon_is_simple({{0, 0}, {1, 1}, {1, 0}, {0, 1}}));
  CHECK(point_in_polygon(sq, {0.5, 0.5}));
  CHECK_FALSE(point_in_polygon(sq, {1.5, 0.5}));
  const Polygon glued = glue_double(sq, 1, GlueMode::mirror);
  CHECK(polygon_area(glued) == doctest::Approx(2.0));
  const Polygon turned = glue_double(sq, 1, GlueMode::point_reflection);
  CHECK(std::abs(polygon_area(turned)) == doctest::Approx(2.0));
  CHECK_THROWS_AS(mask_from_polygon(Grid({1, 1}, 16, 16), {{0, 0}, {1, 1}, {1, 0}, {0, 1}}),
                  PreconditionError);
}

TEST_CASE("connected components wrap around the torus") {
  const Grid g({1.0, 1.0}, 16, 16);
  DomainMask m(g);
  // A vertical band crossing x = 0 and a small separate block.
  for (int j = 0; j < 16; ++j) {
    for (int i : {14, 15, 0, 1}) m.set_inside(g.index(i, j), true);
  }
  for (int i = 6; i < 8; ++i)
    for (int j = 3; j < 5; ++j) m.set_inside(g.index(i, j), true);
  const auto comps = connected_components(m);
  REQUIRE(comps.size() == 2);
  CHECK(comps[0].count() == 64);
  CHECK(comps[1].count() == 4);
  int n = 0;
  const auto ids = label_components(g, [&](std::size_t p) { return m.inside(p); }, n);
  CHECK(n == 2);
  CHECK(ids[g.index(15, 3)] == ids[g.index(0, 3)]);
  CHECK(ids[g.index(3, 3)] == -1);
}

TEST_CASE("pgm output") {
  const Grid g({1.0, 1.0}, 8, 8);
  std::vector<int> v(g.size(), 2);
  std::ostringstream out;
  write_pgm(out, g, v, 3);
  std::istringstream in(out.str());
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  in >> magic >> w >> h >> maxval;
  CHECK(magic == "P2");
  CHECK(w == 8);
  CHECK(h == 8);
  CHECK(maxval == 3);
}
