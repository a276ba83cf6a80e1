#include "minpart/relax.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "minpart/kernels.hpp"

namespace minpart {

void RelaxParams::validate() const {
  require(C > 0.0 && std::isfinite(C), "relax: penalty C must be positive");
  require(!p_schedule.empty(), "relax: p_schedule must not be empty");
  for (std::size_t i = 0; i < p_schedule.size(); ++i) {
    require(p_schedule[i] >= 1.0 && std::isfinite(p_schedule[i]), "relax: p values must be finite and >= 1");
    if (i > 0) require(p_schedule[i] >= p_schedule[i - 1], "relax: p_schedule must be nondecreasing");
  }
  require(C_start >= 0.0 && C_start <= C, "relax: C_start must lie in [0, C]");
  require(C_factor > 1.0 && std::isfinite(C_factor), "relax: C_factor must be > 1");
  require(step0 >= 0.0 && std::isfinite(step0), "relax: step0 must be positive (or 0 for auto)");
  require(backtrack > 0.0 && backtrack < 1.0, "relax: backtrack factor must lie in (0, 1)");
  require(max_iters >= 0, "relax: max_iters must be >= 0");
  require(window >= 1, "relax: window must be >= 1");
  require(rel_tol >= 0.0 && grad_tol >= 0.0, "relax: tolerances must be nonnegative");
  require(eig_tol > 0.0, "relax: eig_tol must be positive");
}

double RelaxParams::initial_step(const TorusGeometry& geom) const {
  return step0 > 0.0 ? step0 : 1e-2 * geom.area() / C;
}

std::vector<double> RelaxParams::C_stages() const {
  std::vector<double> stages;
  for (double c = C_start > 0.0 ? C_start : C / 10.0; c < C * (1.0 - 1e-12); c *= C_factor) {
    stages.push_back(c);
  }
  stages.push_back(C);
  return stages;
}

double energy_lp(std::vector<double> values, double p) {
  require(!values.empty(), "energy_lp: no values");
  require(p >= 1.0, "energy_lp: p must be >= 1");
  for (double v : values) require(v >= 0.0, "energy_lp: values must be nonnegative");
  std::sort(values.begin(), values.end());
  const double top = values.back();
  if (std::isinf(p)) return top;
  if (top == 0.0) return 0.0;
  double sum = 0.0;
  for (double v : values) sum += std::pow(v / top, p);
  return top * std::pow(sum, 1.0 / p);
}

namespace {

struct Evaluation {
  std::vector<double> lambdas;
  std::vector<std::vector<double>> vectors;
  double energy = 0.0;
  bool degenerate = false;
};

Evaluation evaluate(const DensitySet& dens, double p, RelaxedSolver& solver) {
  Evaluation ev;
  for (int i = 0; i < dens.k; ++i) {
    auto res = solver.solve(dens.fields[static_cast<std::size_t>(i)], i);
    const double lam = std::max(0.0, res.ground.value);
    if (res.second - lam <= 1e-6 * std::max(std::abs(lam), 1e-300)) ev.degenerate = true;
    ev.lambdas.push_back(lam);
    ev.vectors.push_back(std::move(res.ground.vector));
  }
  ev.energy = energy_lp(ev.lambdas, p);
  return ev;
}

GradientResult gradient_from(const DensitySet& dens, const RelaxParams& params, double p,
                             Evaluation ev) {
  GradientResult g;
  const double area = dens.grid.cell_area();
  for (int i = 0; i < dens.k; ++i) {
    const double lam = ev.lambdas[static_cast<std::size_t>(i)];
    const double weight = ev.energy > 0.0 ? std::pow(lam / ev.energy, p - 1.0) : 1.0;
    GridField f(dens.grid);
    // v has unit Euclidean norm, so u = v / sqrt(dA) has unit L2 norm.
    kernels::scaled_square(-params.C * weight / area, ev.vectors[static_cast<std::size_t>(i)],
                           f.values);
    g.fields.push_back(std::move(f));
  }
  g.lambdas = std::move(ev.lambdas);
  g.energy = ev.energy;
  g.degenerate = ev.degenerate;
  return g;
}

void project_node(std::vector<double>& v, std::vector<double>& sorted) {
  sorted = v;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const std::size_t k = v.size();
  // Already on the simplex: leave bitwise untouched so that projection is idempotent.
  bool inside = true;
  double total = 0.0;
  for (std::size_t i = k; i-- > 0;) {
    if (!(sorted[i] >= 0.0 && sorted[i] <= 1.0)) inside = false;
    total += sorted[i];
  }
  if (inside && std::abs(total - 1.0) <= 4.0 * k * std::numeric_limits<double>::epsilon()) return;
  double cumulative = 0.0;
  double tau = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    cumulative += sorted[j];
    const double t = (cumulative - 1.0) / static_cast<double>(j + 1);
    if (sorted[j] - t > 0.0) tau = t;
  }
  for (auto& x : v) x = std::max(x - tau, 0.0);
}

}  // namespace

GradientResult gradient(const DensitySet& dens, const RelaxParams& params, double p,
                        RelaxedSolver& solver) {
  params.validate();
  require(std::isfinite(p) && p >= 1.0, "gradient: p must be finite and >= 1");
  return gradient_from(dens, params, p, evaluate(dens, p, solver));
}

GradientResult gradient(const DensitySet& dens, const RelaxParams& params, double p) {
  RelaxedSolver solver(dens.grid, params.C, params.eig_tol);
  return gradient(dens, params, p, solver);
}

DensitySet project_simplex(const DensitySet& dens) {
  DensitySet out = dens;
  std::vector<double> v(static_cast<std::size_t>(dens.k));
  std::vector<double> scratch;
  for (std::size_t p = 0; p < dens.grid.size(); ++p) {
    for (int i = 0; i < dens.k; ++i) {
      v[static_cast<std::size_t>(i)] = dens.fields[static_cast<std::size_t>(i)][p];
      require(std::isfinite(v[static_cast<std::size_t>(i)]), "project_simplex: non-finite density");
    }
    project_node(v, scratch);
    for (int i = 0; i < dens.k; ++i) out.fields[static_cast<std::size_t>(i)][p] = v[static_cast<std::size_t>(i)];
  }
  return out;
}

DensitySet random_voronoi_init(const Grid& grid, int k, std::uint64_t seed) {
  require(k >= 1, "random_voronoi_init: k must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(0.0, grid.geom().a);
  std::uniform_real_distribution<double> uy(0.0, grid.geom().b);
  std::vector<Point> sites;
  for (int i = 0; i < k; ++i) {
    const double x = ux(rng);
    sites.push_back({x, uy(rng)});
  }
  const double a = grid.geom().a;
  const double b = grid.geom().b;
  std::vector<int> labels(grid.size());
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const Point x = grid.point(p);
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < k; ++i) {
      double dx = std::abs(x.x - sites[static_cast<std::size_t>(i)].x);
      double dy = std::abs(x.y - sites[static_cast<std::size_t>(i)].y);
      dx = std::min(dx, a - dx);
      dy = std::min(dy, b - dy);
      const double d = dx * dx + dy * dy;
      if (d < best) {
        best = d;
        labels[p] = i;
      }
    }
  }
  return DensitySet::from_labels(grid, k, labels);
}

OptimizeResult optimize(const Grid& grid, int k, const RelaxParams& params, const DensitySet& init) {
  params.validate();
  require(k >= 1, "optimize: k must be >= 1");
  require(init.k == k, "optimize: initial densities have the wrong k");
  require(init.grid == grid, "optimize: initial densities live on another grid");
  init.require_feasible();

  DensitySet dens = init;
  OptimizeTrace trace;
  const double step_floor = 1e-12;
  const std::size_t n = grid.size();
  const double area = grid.cell_area();
  std::unique_ptr<RelaxedSolver> final_solver;

  Evaluation ev;
  try {
    for (double c : params.C_stages()) {
      RelaxParams stage = params;
      stage.C = c;
      auto solver_ptr = std::make_unique<RelaxedSolver>(grid, c, params.eig_tol);
      RelaxedSolver& solver = *solver_ptr;
      const double step_init = stage.initial_step(grid.geom());
      double step = step_init;
      for (double p : params.p_schedule) {
        ev = evaluate(dens, p, solver);
        GradientResult g = gradient_from(dens, stage, p, ev);
        trace.degenerate_seen = trace.degenerate_seen || g.degenerate;
        trace.entries.push_back({c, p, 0, g.energy, 0.0, g.degenerate});
        std::vector<double> history{g.energy};
        for (int it = 1; it <= params.max_iters; ++it) {
          // Try a larger step than the last accepted one, then halve until the energy drops.
          double s = std::max(step, step_init) * 2.0;
          bool accepted = false;
          DensitySet cand = dens;
          Evaluation cand_ev;
          double moved = 0.0;
          while (s >= step_floor) {
            for (int i = 0; i < k; ++i) {
              auto& f = cand.fields[static_cast<std::size_t>(i)].values;
              const auto& d = dens.fields[static_cast<std::size_t>(i)].values;
              const auto& gi = g.fields[static_cast<std::size_t>(i)].values;
              for (std::size_t q = 0; q < n; ++q) f[q] = d[q] - s * gi[q];
            }
            cand = project_simplex(cand);
            moved = 0.0;
            for (int i = 0; i < k; ++i) {
              const auto& f = cand.fields[static_cast<std::size_t>(i)].values;
              const auto& d = dens.fields[static_cast<std::size_t>(i)].values;
              for (std::size_t q = 0; q < n; ++q) moved += (f[q] - d[q]) * (f[q] - d[q]);
            }
            if (moved == 0.0) {
              // Every node is already at a vertex the step cannot leave; only smaller steps move.
              s *= params.backtrack;
              continue;
            }
            cand_ev = evaluate(cand, p, solver);
            if (cand_ev.energy < g.energy) {
              accepted = true;
              break;
            }
            s *= params.backtrack;
          }
          if (!accepted) break;
          step = s;
          dens = std::move(cand);
          g = gradient_from(dens, stage, p, std::move(cand_ev));
          trace.degenerate_seen = trace.degenerate_seen || g.degenerate;
          trace.entries.push_back({c, p, it, g.energy, s, g.degenerate});
          history.push_back(g.energy);

          double gnorm = 0.0;
          for (const auto& f : g.fields) gnorm += kernels::dot(f.values, f.values);
          const double displacement = std::sqrt(moved * area) / s;
          if (displacement <= params.grad_tol * std::sqrt(gnorm * area)) break;
          if (static_cast<int>(history.size()) > params.window) {
            const double old = history[history.size() - 1 - static_cast<std::size_t>(params.window)];
            if (old - g.energy <= params.rel_tol * g.energy) break;
          }
        }
      }
      final_solver = std::move(solver_ptr);
    }
    ev = evaluate(dens, kInfinityNorm, *final_solver);
  } catch (const NumericalError& e) {
    throw OptimizeFailure(std::string("optimize: ") + e.what(), std::move(trace));
  }
  trace.lambdas = ev.lambdas;
  trace.relaxed_energy = ev.energy;
  return {std::move(dens), std::move(trace)};
}

MultistartResult multistart(const Grid& grid, int k, const RelaxParams& params, int n_starts,
                            int jobs) {
  params.validate();
  require(n_starts >= 1, "multistart: n_starts must be >= 1");
  require(jobs >= 1, "multistart: jobs must be >= 1");

  struct Slot {
    StartOutcome outcome;
    std::optional<DensitySet> densities;
    std::optional<StrongPartition> partition;
    OptimizeTrace trace;
  };
  std::vector<Slot> slots(static_cast<std::size_t>(n_starts));
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (int s = next++; s < n_starts; s = next++) {
      Slot& slot = slots[static_cast<std::size_t>(s)];
      slot.outcome.index = s;
      try {
        const auto init = random_voronoi_init(grid, k, params.seed + static_cast<std::uint64_t>(s));
        auto run = optimize(grid, k, params, init);
        auto part = extract_strong(run.densities);
        slot.outcome.relaxed_energy = run.trace.relaxed_energy;
        slot.outcome.exact_energy = part.energy;
        slot.outcome.ok = true;
        slot.densities.emplace(std::move(run.densities));
        slot.partition.emplace(std::move(part));
        slot.trace = std::move(run.trace);
      } catch (const std::exception& e) {
        slot.outcome.ok = false;
        slot.outcome.error = e.what();
      }
    }
  };
  const int threads = std::min(jobs, n_starts);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  int best = -1;
  for (int s = 0; s < n_starts; ++s) {
    const auto& o = slots[static_cast<std::size_t>(s)].outcome;
    if (o.ok && (best < 0 || o.exact_energy < slots[static_cast<std::size_t>(best)].outcome.exact_energy)) {
      best = s;
    }
  }
  std::vector<StartOutcome> outcomes;
  for (const auto& slot : slots) outcomes.push_back(slot.outcome);
  if (best < 0) {
    std::ostringstream msg;
    msg << "multistart: all " << n_starts << " starts failed (first error: " << outcomes.front().error
        << ")";
    throw NumericalError(msg.str());
  }
  Slot& win = slots[static_cast<std::size_t>(best)];
  return {std::move(*win.densities), std::move(*win.partition), std::move(win.trace), best,
          std::move(outcomes)};
}

}  // namespace minpart
