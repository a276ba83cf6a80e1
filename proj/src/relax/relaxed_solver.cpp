#include <Eigen/SparseCholesky>
#include <cmath>

#include "minpart/kernels.hpp"
#include "minpart/relax.hpp"

namespace minpart {

namespace {

constexpr int kRefactorIterations = 6;

class StencilOperator final : public LinearOperator {
 public:
  StencilOperator(const kernels::StencilShape& shape, const std::vector<double>& potential)
      : shape_(shape), potential_(potential) {}
  std::size_t dimension() const override { return potential_.size(); }
  void apply(std::span<const double> x, std::span<double> y) const override {
    ++applications;
    kernels::periodic_stencil(shape_, potential_, x, y);
  }
  mutable std::size_t applications = 0;

 private:
  kernels::StencilShape shape_;
  const std::vector<double>& potential_;
};

// Exact inverse of an earlier relaxed operator. Densities move little between optimizer steps,
// so a factorization stays a good preconditioner for many solves.
class LaggedCholesky final : public Preconditioner {
 public:
  explicit LaggedCholesky(const Eigen::SparseMatrix<double>& pattern) { llt_.analyzePattern(pattern); }
  void refactor(const Eigen::SparseMatrix<double>& m) {
    llt_.factorize(m);
    if (llt_.info() != Eigen::Success) throw NumericalError("relaxed operator factorization failed");
    ready_ = true;
  }
  bool ready() const { return ready_; }
  void apply(std::span<const double> r, std::span<double> z) const override {
    Eigen::Map<const Eigen::VectorXd> rv(r.data(), static_cast<Eigen::Index>(r.size()));
    Eigen::Map<Eigen::VectorXd> zv(z.data(), static_cast<Eigen::Index>(z.size()));
    zv = llt_.solve(rv);
  }

 private:
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt_;
  bool ready_ = false;
};

}  // namespace

struct RelaxedSolver::Impl {
  Grid grid;
  double C;
  double tol;
  kernels::StencilShape shape;
  std::vector<double> potential;
  Eigen::SparseMatrix<double> matrix;  // periodic Laplacian; the diagonal is rewritten per solve
  std::vector<double> laplacian_diagonal;
  std::vector<double*> diagonal;
  std::vector<std::unique_ptr<LaggedCholesky>> factors;
  std::vector<int> last_iterations;
  std::size_t applications = 0;

  Impl(const Grid& g, double c, double t) : grid(g), C(c), tol(t), potential(g.size()) {
    shape.nx = g.nx();
    shape.ny = g.ny();
    shape.cx = 1.0 / (g.hx() * g.hx());
    shape.cy = 1.0 / (g.hy() * g.hy());
    matrix = assemble_periodic_laplacian(g).matrix;
    matrix.makeCompressed();
    diagonal.resize(g.size());
    laplacian_diagonal.resize(g.size());
    for (Eigen::Index col = 0; col < matrix.outerSize(); ++col) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(matrix, col); it; ++it) {
        if (it.row() == it.col()) {
          diagonal[static_cast<std::size_t>(col)] = &it.valueRef();
          laplacian_diagonal[static_cast<std::size_t>(col)] = it.value();
        }
      }
    }
  }

  LaggedCholesky& factor(int slot) {
    if (factors.size() <= static_cast<std::size_t>(slot)) {
      factors.resize(static_cast<std::size_t>(slot) + 1);
      last_iterations.resize(static_cast<std::size_t>(slot) + 1, 0);
    }
    auto& f = factors[static_cast<std::size_t>(slot)];
    if (!f) f = std::make_unique<LaggedCholesky>(matrix);
    return *f;
  }

  // The small shift keeps the factor defined when the potential vanishes (phi = 1 everywhere).
  void refactor(int slot) {
    const double shift = 1e-8 * 2.0 * (shape.cx + shape.cy);
    for (std::size_t p = 0; p < potential.size(); ++p) {
      *diagonal[p] = laplacian_diagonal[p] + potential[p] + shift;
    }
    factor(slot).refactor(matrix);
  }
};

RelaxedSolver::RelaxedSolver(const Grid& grid, double C, double tol) {
  require(C > 0.0 && std::isfinite(C), "relaxed solver: C must be positive");
  require(tol > 0.0, "relaxed solver: tol must be positive");
  impl_ = std::make_unique<Impl>(grid, C, tol);
}

RelaxedSolver::~RelaxedSolver() = default;

std::size_t RelaxedSolver::applications() const { return impl_->applications; }

RelaxedSolver::Result RelaxedSolver::solve(const GridField& phi, int slot) {
  require(phi.grid == impl_->grid, "relaxed solver: density lives on another grid");
  require(slot >= 0, "relaxed solver: slot must be nonnegative");
  kernels::penalty_potential(impl_->C, phi.values, impl_->potential);
  StencilOperator op(impl_->shape, impl_->potential);
  LaggedCholesky& factor = impl_->factor(slot);
  int& last = impl_->last_iterations[static_cast<std::size_t>(slot)];
  if (!factor.ready() || last > kRefactorIterations) impl_->refactor(slot);

  if (warm_.size() <= static_cast<std::size_t>(slot)) warm_.resize(static_cast<std::size_t>(slot) + 1);
  EigenOptions options;
  options.count = 1;
  options.guard = 1;
  options.tol = impl_->tol;
  options.seed = 0x5eed + static_cast<std::uint64_t>(slot);
  auto& warm = warm_[static_cast<std::size_t>(slot)];
  if (warm.empty()) {
    options.initial.push_back(phi.values);
  } else {
    options.initial = warm;
  }
  LobpcgDetails details;
  auto pairs = lobpcg(op, &factor, options, &details);
  impl_->applications += op.applications;
  last = details.iterations;
  warm = std::move(details.block);
  Result out;
  out.ground = std::move(pairs.front());
  out.second = details.ritz_values.size() > 1 ? details.ritz_values[1]
                                              : std::numeric_limits<double>::infinity();
  return out;
}

EigenPair relaxed_lambda1(const GridField& phi, double C) {
  for (double v : phi.values) {
    require(v >= 0.0 && v <= 1.0, "relaxed_lambda1: phi must lie in [0, 1]");
  }
  RelaxedSolver solver(phi.grid, C);
  return solver.solve(phi).ground;
}

}  // namespace minpart
