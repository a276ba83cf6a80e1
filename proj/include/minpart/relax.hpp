#pragma once
// Relaxed spectral partition problem on the torus: each cell is a density phi_i and its energy is
// the ground state of -Lap + C (1 - phi_i). The l^p aggregate of the k ground states is minimized
// by projected gradient with backtracking over an increasing schedule of p, repeated for an
// increasing sequence of C.

#include <cstdint>
#include <limits>
#include <memory>
#include <vector>

#include "minpart/density.hpp"
#include "minpart/eigensolve.hpp"
#include "minpart/extract.hpp"

namespace minpart {

/// Sentinel for the max-norm in energy_lp.
inline constexpr double kInfinityNorm = std::numeric_limits<double>::infinity();

struct RelaxParams {
  double C = 1e4;
  /// Penalty continuation: full p schedules at C_start, C_start * C_factor, ... and finally C.
  /// C_start = 0 selects C / 10; C_start = C runs a single stage.
  double C_start = 0.0;
  double C_factor = 10.0;
  std::vector<double> p_schedule = {1.0, 2.0, 4.0, 8.0, 16.0};
  double step0 = 0.0;     // 0 selects 1e-2 |T| / C
  double backtrack = 0.5;
  int max_iters = 5000;   // per p
  /// Phase ends when the energy changed by less than rel_tol (relative) over `window` iterations.
  double rel_tol = 1e-8;
  int window = 20;
  /// Phase also ends when the projected-gradient displacement, in units of the step, drops below
  /// grad_tol times the energy.
  double grad_tol = 1e-9;
  /// Residual tolerance of the inner eigensolves.
  double eig_tol = 1e-9;
  std::uint64_t seed = 0;

  void validate() const;
  double initial_step(const TorusGeometry& geom) const;
  std::vector<double> C_stages() const;
};

struct TraceEntry {
  double C = 0.0;
  double p = 1.0;
  int iteration = 0;
  double energy = 0.0;
  double step = 0.0;
  bool degenerate = false;
};

struct OptimizeTrace {
  std::vector<TraceEntry> entries;
  /// Relaxed ground states at the final iterate and their l^inf aggregate.
  std::vector<double> lambdas;
  double relaxed_energy = 0.0;
  bool degenerate_seen = false;
};

/// Smallest eigenpairs of -Lap + C(1 - phi) on the periodic grid. Products use the stencil
/// kernels; the preconditioner is a sparse Cholesky factor of an earlier operator of the same
/// slot, refreshed when convergence slows. Eigenvectors are kept per slot as warm starts.
class RelaxedSolver {
 public:
  RelaxedSolver(const Grid& grid, double C, double tol = 1e-9);
  ~RelaxedSolver();
  RelaxedSolver(const RelaxedSolver&) = delete;
  RelaxedSolver& operator=(const RelaxedSolver&) = delete;

  /// Ground state (and the next Ritz value, for degeneracy checks) for one density. `slot`
  /// selects the warm-start memory.
  struct Result {
    EigenPair ground;
    double second = 0.0;
  };
  Result solve(const GridField& phi, int slot = 0);
  void reset_warm_starts() { warm_.clear(); }
  std::size_t applications() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::vector<std::vector<std::vector<double>>> warm_;
};

/// First eigenpair of -Lap + C(1 - phi). The vector has unit Euclidean norm.
EigenPair relaxed_lambda1(const GridField& phi, double C);

/// (sum values^p)^(1/p); p = kInfinityNorm gives the maximum. Values are summed in sorted order so
/// the result does not depend on their order.
double energy_lp(std::vector<double> values, double p);

struct GradientResult {
  std::vector<GridField> fields;  // dE/dphi_i as L2 densities (directional derivative = dA sum g d)
  std::vector<double> lambdas;
  double energy = 0.0;
  bool degenerate = false;  // some lambda_i within 1e-6 relative of the next Ritz value
};

GradientResult gradient(const DensitySet& dens, const RelaxParams& params, double p);
GradientResult gradient(const DensitySet& dens, const RelaxParams& params, double p,
                        RelaxedSolver& solver);

/// Euclidean projection of each node's k-vector onto the probability simplex.
DensitySet project_simplex(const DensitySet& dens);

/// Indicator densities of the torus-distance Voronoi cells of k random sites.
DensitySet random_voronoi_init(const Grid& grid, int k, std::uint64_t seed);

struct OptimizeResult {
  DensitySet densities;
  OptimizeTrace trace;
};

/// Throws NumericalError on solver failure; the partial trace is attached to OptimizeFailure.
OptimizeResult optimize(const Grid& grid, int k, const RelaxParams& params, const DensitySet& init);

class OptimizeFailure : public NumericalError {
 public:
  OptimizeFailure(const std::string& what, OptimizeTrace trace)
      : NumericalError(what), trace_(std::move(trace)) {}
  const OptimizeTrace& trace() const { return trace_; }

 private:
  OptimizeTrace trace_;
};

struct StartOutcome {
  int index = 0;
  bool ok = false;
  std::string error;
  double relaxed_energy = 0.0;
  double exact_energy = 0.0;
};

struct MultistartResult {
  DensitySet densities;
  StrongPartition partition;
  OptimizeTrace trace;
  int best_start = 0;
  std::vector<StartOutcome> starts;
};

/// Runs optimize from n_starts Voronoi initializations seeded with params.seed + s, extracts
/// each, and keeps the lowest exact energy (ties to the lowest start index). Starts run on up to
/// `jobs` threads; the result does not depend on `jobs`.
MultistartResult multistart(const Grid& grid, int k, const RelaxParams& params, int n_starts,
                            int jobs = 1);

}  // namespace minpart
