#include <doctest.h>

#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "minpart/eigensolve.hpp"
#include "minpart/relax.hpp"

using namespace minpart;
using std::numbers::pi;

namespace {

// Strictly interior densities: a softmax of smooth random Fourier modes.
DensitySet smooth_densities(const Grid& g, int k, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  DensitySet d(g, k);
  std::vector<std::array<double, 4>> coef(static_cast<std::size_t>(k));
  for (auto& c : coef) c = {u(rng), u(rng), u(rng), u(rng)};
  for (std::size_t p = 0; p < g.size(); ++p) {
    const Point x = g.point(p);
    std::vector<double> e(static_cast<std::size_t>(k));
    double sum = 0.0;
    for (int i = 0; i < k; ++i) {
      const auto& c = coef[static_cast<std::size_t>(i)];
      e[static_cast<std::size_t>(i)] = std::exp(1.5 * (c[0] * std::cos(2 * pi * x.x) + c[1] * std::sin(2 * pi * x.x) +
                                                     c[2] * std::cos(2 * pi * x.y / g.geom().b) +
                                                     c[3] * std::sin(2 * pi * x.y / g.geom().b)));
      sum += e[static_cast<std::size_t>(i)];
    }
    for (int i = 0; i < k; ++i) d.fields[static_cast<std::size_t>(i)][p] = e[static_cast<std::size_t>(i)] / sum;
  }
  return d;
}

double relaxed_energy(const DensitySet& d, const RelaxParams& params, double p) {
  return gradient(d, params, p).energy;
}

}  // namespace

TEST_CASE("l^p aggregate") {
  CHECK(energy_lp({3.0, 4.0}, 2.0) == doctest::Approx(5.0));
  CHECK(energy_lp({1.0, 2.0, 3.0}, 1.0) == doctest::Approx(6.0));
  CHECK(energy_lp({1.0, 7.0, 3.0}, kInfinityNorm) == 7.0);
  CHECK(energy_lp({2.0, 5.0, 1.0}, 8.0) == energy_lp({5.0, 1.0, 2.0}, 8.0));
  CHECK(energy_lp({0.0, 0.0}, 4.0) == 0.0);
  // The aggregate decreases towards the maximum as p grows.
  CHECK(energy_lp({1.0, 2.0, 3.0}, 16.0) < energy_lp({1.0, 2.0, 3.0}, 4.0));
  CHECK(energy_lp({1.0, 2.0, 3.0}, 16.0) > 3.0);
  CHECK_THROWS_AS(energy_lp({}, 2.0), PreconditionError);
  CHECK_THROWS_AS(energy_lp({1.0}, 0.5), PreconditionError);
}

TEST_CASE("simplex projection") {
  const Grid g({1.0, 1.0}, 8, 8);
  DensitySet d(g, 3);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2.0, 3.0);
  for (auto& f : d.fields)
    for (auto& v : f.values) v = u(rng);
  const DensitySet p = project_simplex(d);
  CHECK(p.feasibility_error() <= 1e-12);
  // Projection onto the simplex is max(x - tau, 0) with a common tau per node.
  for (std::size_t q = 0; q < g.size(); ++q) {
    double tau = 0.0;
    int active = 0;
    for (int i = 0; i < 3; ++i) {
      if (p.fields[static_cast<std::size_t>(i)][q] > 0.0) {
        tau += d.fields[static_cast<std::size_t>(i)][q] - p.fields[static_cast<std::size_t>(i)][q];
        ++active;
      }
    }
    REQUIRE(active > 0);
    tau /= active;
    for (int i = 0; i < 3; ++i) {
      CHECK(p.fields[static_cast<std::size_t>(i)][q] ==
            doctest::Approx(std::max(d.fields[static_cast<std::size_t>(i)][q] - tau, 0.0)).epsilon(1e-12));
    }
  }
  const DensitySet again = project_simplex(p);
  for (int i = 0; i < 3; ++i) CHECK(again.fields[static_cast<std::size_t>(i)].values == p.fields[static_cast<std::size_t>(i)].values);
}

TEST_CASE("Voronoi initialization") {
  const Grid g({1.0, 0.7}, 32, 23);
  const DensitySet a = random_voronoi_init(g, 4, 11);
  const DensitySet b = random_voronoi_init(g, 4, 11);
  CHECK(a.feasibility_error() == 0.0);
  for (int i = 0; i < 4; ++i) {
    CHECK(a.fields[static_cast<std::size_t>(i)].values == b.fields[static_cast<std::size_t>(i)].values);
    double mass = 0.0;
    for (double v : a.fields[static_cast<std::size_t>(i)].values) mass += v;
    CHECK(mass > 0.0);
  }
}

TEST_CASE("relaxed operator on constant densities") {
  const Grid g({1.0, 1.0}, 16, 16);
  CHECK(std::abs(relaxed_lambda1(GridField(g, 1.0), 1e4).value) < 1e-6);
  CHECK(relaxed_lambda1(GridField(g, 0.5), 1e4).value == doctest::Approx(5e3).epsilon(1e-9));
}

TEST_CASE("relaxed solver agrees with the assembled operator") {
  const Grid g({1.0, 0.75}, 32, 24);
  const DensitySet d = smooth_densities(g, 3, 2);
  RelaxedSolver solver(g, 1e3, 1e-10);
  for (int i = 0; i < 3; ++i) {
    const auto& phi = d.fields[static_cast<std::size_t>(i)];
    GridField pot(g);
    for (std::size_t p = 0; p < g.size(); ++p) pot[p] = 1e3 * (1.0 - phi[p]);
    const auto ref = smallest_eigenpairs(assemble_periodic_laplacian(g, &pot), 2, 1e-10);
    const auto r = solver.solve(phi, i);
    CHECK(r.ground.value == doctest::Approx(ref[0].value).epsilon(1e-8));
    CHECK(r.second == doctest::Approx(ref[1].value).epsilon(1e-6));
    // A second solve of the same slot starts from the stored vectors.
    CHECK(solver.solve(phi, i).ground.value == doctest::Approx(ref[0].value).epsilon(1e-8));
  }
}

TEST_CASE("gradient matches central differences") {
  const Grid g({1.0, 1.0}, 32, 32);
  RelaxParams params;
  params.C = 1e3;
  params.eig_tol = 1e-12;
  for (double p : {1.0, 4.0}) {
    CAPTURE(p);
    const DensitySet d = smooth_densities(g, 3, 9);
    const GradientResult gr = gradient(d, params, p);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n01;
    DensitySet dir(g, 3);
    double predicted = 0.0;
    for (int i = 0; i < 3; ++i) {
      for (std::size_t q = 0; q < g.size(); ++q) {
        const double v = n01(rng);
        dir.fields[static_cast<std::size_t>(i)][q] = v;
        predicted += gr.fields[static_cast<std::size_t>(i)][q] * v;
      }
    }
    predicted *= g.cell_area();
    const double eps = 1e-5;
    DensitySet plus = d, minus = d;
    for (int i = 0; i < 3; ++i) {
      for (std::size_t q = 0; q < g.size(); ++q) {
        plus.fields[static_cast<std::size_t>(i)][q] += eps * dir.fields[static_cast<std::size_t>(i)][q];
        minus.fields[static_cast<std::size_t>(i)][q] -= eps * dir.fields[static_cast<std::size_t>(i)][q];
      }
    }
    const double fd = (relaxed_energy(plus, params, p) - relaxed_energy(minus, params, p)) / (2 * eps);
    CHECK(std::abs(fd - predicted) <= 1e-4 * std::abs(predicted));
  }
}

TEST_CASE("penalty continuation stages") {
  RelaxParams params;
  CHECK(params.C_stages() == std::vector<double>{1e3, 1e4});
  params.C_start = 1e4;
  CHECK(params.C_stages() == std::vector<double>{1e4});
  params.C_start = 100.0;
  const auto s = params.C_stages();
  REQUIRE(s.size() == 3);
  CHECK(s[1] == doctest::Approx(1e3));
  CHECK(s[2] == 1e4);
  params.C_start = 3e3;
  CHECK(params.C_stages() == std::vector<double>{3e3, 1e4});
}

TEST_CASE("parameter validation") {
  auto bad = [](auto mutate) {
    RelaxParams p;
    mutate(p);
    CHECK_THROWS_AS(p.validate(), PreconditionError);
  };
  bad([](RelaxParams& p) { p.C = 0.0; });
  bad([](RelaxParams& p) { p.C_start = 2e4; });
  bad([](RelaxParams& p) { p.C_factor = 1.0; });
  bad([](RelaxParams& p) { p.p_schedule = {}; });
  bad([](RelaxParams& p) { p.p_schedule = {2.0, 1.0}; });
  bad([](RelaxParams& p) { p.p_schedule = {0.5}; });
  bad([](RelaxParams& p) { p.backtrack = 1.0; });
  bad([](RelaxParams& p) { p.eig_tol = 0.0; });
  CHECK_NOTHROW(RelaxParams{}.validate());
}

TEST_CASE("optimize decreases the energy within every phase") {
  const Grid g({1.0, 0.5}, 32, 16);
  RelaxParams params;
  params.p_schedule = {1.0, 2.0, 4.0};
  const auto run = optimize(g, 2, params, random_voronoi_init(g, 2, 1));
  CHECK(run.densities.feasibility_error() <= 1e-9);
  const auto& e = run.trace.entries;
  REQUIRE(e.size() > 3);
  for (std::size_t i = 1; i < e.size(); ++i) {
    if (e[i].iteration > 0) CHECK(e[i].energy < e[i - 1].energy);
    else CHECK((e[i].p != e[i - 1].p || e[i].C != e[i - 1].C));
  }
  CHECK(run.trace.lambdas.size() == 2);
  CHECK(run.trace.relaxed_energy == doctest::Approx(std::max(run.trace.lambdas[0], run.trace.lambdas[1])));
}

TEST_CASE("optimize rejects mismatched inputs") {
  const Grid g({1.0, 0.5}, 32, 16);
  const Grid other({1.0, 0.5}, 16, 8);
  CHECK_THROWS_AS(optimize(g, 3, RelaxParams{}, random_voronoi_init(g, 2, 1)), PreconditionError);
  CHECK_THROWS_AS(optimize(g, 2, RelaxParams{}, random_voronoi_init(other, 2, 1)), PreconditionError);
  DensitySet infeasible(g, 2);
  CHECK_THROWS_AS(optimize(g, 2, RelaxParams{}, infeasible), PreconditionError);
}

TEST_CASE("multistart result does not depend on the thread count") {
  const Grid g({1.0, 0.5}, 24, 12);
  RelaxParams params;
  params.p_schedule = {1.0, 4.0};
  params.seed = 3;
  const auto one = multistart(g, 2, params, 3, 1);
  const auto three = multistart(g, 2, params, 3, 3);
  CHECK(one.best_start == three.best_start);
  CHECK(one.partition.energy == three.partition.energy);
  CHECK(one.partition.labels == three.partition.labels);
  REQUIRE(one.starts.size() == 3);
  for (int s = 0; s < 3; ++s) {
    CHECK(one.starts[static_cast<std::size_t>(s)].index == s);
    if (one.starts[static_cast<std::size_t>(s)].ok) {
      CHECK(one.starts[static_cast<std::size_t>(one.best_start)].exact_energy <=
            one.starts[static_cast<std::size_t>(s)].exact_energy);
    }
  }
}
