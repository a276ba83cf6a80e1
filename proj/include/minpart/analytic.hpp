#pragma once
// Closed-form torus spectra, strip energies, transition-value bounds and the one-dimensional
// operators that certify the lower bound on the auxiliary strip transition.

#include <optional>
#include <vector>

namespace minpart {

/// Flat rectangular torus (R / aZ) x (R / bZ).
struct TorusGeometry {
  double a = 1.0;
  double b = 1.0;

  /// Throws PreconditionError unless a > 0 and b > 0.
  void validate() const;
  double area() const { return a * b; }
  /// Rescaled copy with a = 1 and b in (0, 1] (axes swapped if needed).
  TorusGeometry normalized() const;
};

struct ModeIndex {
  int m = 0;
  int n = 0;
};

struct SpectrumEntry {
  double value = 0.0;
  int multiplicity = 0;
};

/// 4 pi^2 (m^2/a^2 + n^2/b^2).
double torus_eigenvalue(ModeIndex mode, const TorusGeometry& geom);

/// The first `count` distinct eigenvalues with their total multiplicities, ascending. Values closer
/// than 1e-9 relative are merged.
std::vector<SpectrumEntry> torus_spectrum(const TorusGeometry& geom, int count);

/// Energy k^2 pi^2 / a^2 of the partition into k equal strips of length a / k.
double strip_energy(int k, double a);

struct CertificateReport {
  int k = 0;
  double bS_lower = 0.0;
  double bS_upper = 0.0;        // strict upper bound
  bool bS_upper_strict = true;
  std::optional<double> bk_even;         // proven value 2/k for even k
  std::optional<double> bk_conjectured;  // 2/sqrt(k^2-1) for odd k, unproven
  bool bk_conjectured_proven = false;
  // The strip bounds bound the transition value from below only for odd k.
  bool bS_bounds_transition = false;
  // Certificate chain at the rescaled volume V = 1/b evaluated at b = bS_lower.
  double V_used = 0.0;
  double mu1_lower_closed = 0.0;  // pi^2 h^2 / 32 with h = 2/V
  double xi1 = 0.0;
  double rho1 = 0.0;
};

/// Lower/upper bounds on the auxiliary transition value and the known or conjectured transition.
CertificateReport transition_bounds(int k);

struct Bounds {
  double lower = 0.0;
  double upper = 0.0;
  bool upper_strict = true;
};

/// pi^2 (1 + 1/(8V^2)) <= J(V) < pi^2 (1 + 1/V^2), valid for V >= 1/2 only.
Bounds J_bounds(double V);

/// Smallest positive root of rho tan(rho) = sqrt(2 pi^2 / h^2 - rho^2).
double rho1(double h);

/// First eigenvalue of the square-well comparison operator: h^2 rho1(h)^2 / 2.
double xi1(double h);

enum class OneDimKind { P_h, Q_V };

struct OneDimOperatorSpec {
  OneDimKind kind = OneDimKind::P_h;
  double parameter = 1.0;    // h for P_h, V for Q_V
  double truncation = 10.0;  // half-width of the computational interval
  int points = 4000;         // interior grid points

  void validate() const;
};

/// Smallest eigenvalue of -h^2 d^2/dt^2 + pi^2 (t^2 - 1)_+ by 3-point finite differences with
/// Dirichlet ends at +-truncation. Throws NumericalError("truncation too small") when the
/// potential at the ends is below ten times the returned value.
double mu1_fd(const OneDimOperatorSpec& spec);

/// Smallest eigenvalue of -d^2/dx^2 + pi^2 / (4 g(x)^2), g(x) = min(1/2, V / (4|x|)).
double nu1_fd(const OneDimOperatorSpec& spec);

/// Symmetric tridiagonal smallest eigenvalue by Sturm-sequence bisection.
double tridiagonal_smallest_eigenvalue(const std::vector<double>& diag, double offdiag);

/// Finite-difference first Dirichlet eigenvalue of the region {|x2 - 1/2| < g(x1), |x1| < T}.
/// nx, ny count grid cells on (-T, T) x (0, 1). Throws PreconditionError when the tail width
/// V / (4T) is not below two cells.
double cont_lambda1(double V, double truncation, int nx, int ny);

}  // namespace minpart
