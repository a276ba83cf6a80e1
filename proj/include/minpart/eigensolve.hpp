#pragma once
// Smallest eigenpairs of symmetric positive (semi)definite operators: block LOBPCG with a
// caller-supplied preconditioner, plus a sparse-Cholesky front end for assembled operators.

#include <Eigen/SparseCholesky>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "minpart/errors.hpp"
#include "minpart/grid.hpp"

namespace minpart {

class LinearOperator {
 public:
  virtual ~LinearOperator() = default;
  virtual std::size_t dimension() const = 0;
  virtual void apply(std::span<const double> x, std::span<double> y) const = 0;
};

/// Approximates the inverse of the operator; must be symmetric positive definite.
class Preconditioner {
 public:
  virtual ~Preconditioner() = default;
  virtual void apply(std::span<const double> r, std::span<double> z) const = 0;
};

struct EigenPair {
  double value = 0.0;
  std::vector<double> vector;  // unit Euclidean norm
  double residual = 0.0;       // ||A v - value v||
};

struct EigenOptions {
  int count = 1;
  /// Converged when residual <= tol * max(1, |value|).
  double tol = 1e-8;
  int max_iters = 10000;
  std::uint64_t seed = 0;
  /// Extra block columns carried along to speed up convergence of the wanted ones. -1 = auto.
  int guard = -1;
  /// Starting vectors; missing columns are filled with seeded random vectors.
  std::vector<std::vector<double>> initial;
};

class EigenConvergenceError : public NumericalError {
 public:
  EigenConvergenceError(const std::string& what, double best_residual)
      : NumericalError(what), best_residual_(best_residual) {}
  double best_residual() const { return best_residual_; }

 private:
  double best_residual_;
};

/// Everything the iteration ends with, including the guard columns (useful as warm starts).
struct LobpcgDetails {
  std::vector<double> ritz_values;
  std::vector<std::vector<double>> block;
  int iterations = 0;
};

/// Block LOBPCG. Returns `count` eigenpairs in nondecreasing order with orthonormal vectors.
/// Throws EigenConvergenceError after max_iters.
std::vector<EigenPair> lobpcg(const LinearOperator& op, const Preconditioner* precond,
                              const EigenOptions& options, LobpcgDetails* details = nullptr);

class SparseMatrixOperator final : public LinearOperator {
 public:
  explicit SparseMatrixOperator(const Eigen::SparseMatrix<double>& m) : m_(m) {}
  std::size_t dimension() const override { return static_cast<std::size_t>(m_.rows()); }
  void apply(std::span<const double> x, std::span<double> y) const override;

 private:
  const Eigen::SparseMatrix<double>& m_;
};

/// (A + shift I)^{-1} through a sparse Cholesky factorization. The shift keeps semidefinite
/// operators such as the periodic Laplacian factorizable.
class CholeskyPreconditioner final : public Preconditioner {
 public:
  CholeskyPreconditioner(const Eigen::SparseMatrix<double>& m, double relative_shift = 1e-8);
  void apply(std::span<const double> r, std::span<double> z) const override;

 private:
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt_;
};

/// Lowest `count` eigenpairs of an assembled operator (default tol 1e-8).
std::vector<EigenPair> smallest_eigenpairs(const SparseOperator& op, int count, double tol = 1e-8,
                                           std::uint64_t seed = 0);
std::vector<EigenPair> smallest_eigenpairs(const SparseOperator& op, const EigenOptions& options);

/// Convenience: first Dirichlet eigenvalue of a mask.
double dirichlet_lambda1(const DomainMask& mask);

}  // namespace minpart
