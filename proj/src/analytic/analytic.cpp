#include "minpart/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "minpart/eigensolve.hpp"
#include "minpart/errors.hpp"
#include "minpart/grid.hpp"

namespace minpart {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kPi2 = kPi * kPi;
}  // namespace

void TorusGeometry::validate() const {
  require(a > 0.0 && std::isfinite(a), "torus length a must be positive");
  require(b > 0.0 && std::isfinite(b), "torus width b must be positive");
}

TorusGeometry TorusGeometry::normalized() const {
  validate();
  const double longest = std::max(a, b);
  return {1.0, std::min(a, b) / longest};
}

double torus_eigenvalue(ModeIndex mode, const TorusGeometry& geom) {
  geom.validate();
  require(mode.m >= 0 && mode.n >= 0, "mode indices must be nonnegative");
  const double m = mode.m;
  const double n = mode.n;
  return 4.0 * kPi2 * (m * m / (geom.a * geom.a) + n * n / (geom.b * geom.b));
}

std::vector<SpectrumEntry> torus_spectrum(const TorusGeometry& geom, int count) {
  geom.validate();
  require(count >= 1, "torus_spectrum: count must be >= 1");
  double bound = 4.0 * kPi2 * std::max(1.0 / (geom.a * geom.a), 1.0 / (geom.b * geom.b));
  for (;;) {
    struct Raw {
      double value;
      int mult;
    };
    std::vector<Raw> raw;
    const int mmax = static_cast<int>(std::floor(geom.a * std::sqrt(bound) / (2.0 * kPi)));
    const int nmax = static_cast<int>(std::floor(geom.b * std::sqrt(bound) / (2.0 * kPi)));
    for (int m = 0; m <= mmax; ++m) {
      for (int n = 0; n <= nmax; ++n) {
        const double v = torus_eigenvalue({m, n}, geom);
        if (v > bound) continue;
        // cos/sin in each nonzero direction.
        const int mult = (m > 0 ? 2 : 1) * (n > 0 ? 2 : 1);
        raw.push_back({v, mult});
      }
    }
    std::sort(raw.begin(), raw.end(), [](const Raw& x, const Raw& y) { return x.value < y.value; });
    std::vector<SpectrumEntry> out;
    for (const auto& r : raw) {
      if (!out.empty() &&
          std::abs(r.value - out.back().value) <= 1e-9 * std::max(1.0, std::abs(r.value))) {
        out.back().multiplicity += r.mult;
      } else {
        out.push_back({r.value, r.mult});
      }
    }
    // Everything up to `bound` has been enumerated, so the list is complete below it.
    if (static_cast<int>(out.size()) >= count) {
      out.resize(static_cast<std::size_t>(count));
      return out;
    }
    bound *= 2.0;
  }
}

double strip_energy(int k, double a) {
  require(k >= 1, "strip_energy: k must be >= 1");
  require(a > 0.0, "strip_energy: a must be positive");
  return static_cast<double>(k) * k * kPi2 / (a * a);
}

CertificateReport transition_bounds(int k) {
  require(k >= 2, "transition_bounds: k must be >= 2");
  const double kk = static_cast<double>(k) * k;
  CertificateReport rep;
  rep.k = k;
  rep.bS_lower = 1.0 / std::sqrt(kk - 1.0 / 8.0);
  rep.bS_upper = 1.0 / std::sqrt(kk - 1.0);
  rep.bS_upper_strict = true;
  if (k % 2 == 0) {
    rep.bk_even = 2.0 / k;
  } else {
    rep.bk_conjectured = 2.0 / std::sqrt(kk - 1.0);
    rep.bk_conjectured_proven = false;
    rep.bS_bounds_transition = true;
  }
  // j(b) = J(1/b) / b^2, so the lower bound at b is driven by the volume V = 1/b.
  rep.V_used = 1.0 / rep.bS_lower;
  const double h = 2.0 / rep.V_used;
  rep.mu1_lower_closed = kPi2 * h * h / 32.0;
  rep.rho1 = rho1(h);
  rep.xi1 = xi1(h);
  return rep;
}

Bounds J_bounds(double V) {
  require(V >= 0.5, "J_bounds: only proven for V >= 1/2");
  return {kPi2 * (1.0 + 1.0 / (8.0 * V * V)), kPi2 * (1.0 + 1.0 / (V * V)), true};
}

double rho1(double h) {
  require(h > 0.0 && std::isfinite(h), "rho1: h must be positive");
  const double r2 = 2.0 * kPi2 / (h * h);
  const double r = std::sqrt(r2);
  // rho tan(rho) increases and sqrt(r2 - rho^2) decreases on (0, min(pi/2, r)).
  double lo = 1e-8;
  double hi = std::min(kPi / 2.0, r) - 1e-8;
  // Same root, better conditioned near pi/2: rho sin(rho) - sqrt(r2 - rho^2) cos(rho).
  auto f = [&](double rho) {
    return rho * std::sin(rho) - std::sqrt(std::max(0.0, r2 - rho * rho)) * std::cos(rho);
  };
  if (f(lo) > 0.0) return lo;
  if (f(hi) < 0.0) return hi;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double xi1(double h) {
  const double rho = rho1(h);
  return 0.5 * h * h * rho * rho;
}

void OneDimOperatorSpec::validate() const {
  require(parameter > 0.0 && std::isfinite(parameter), "1-D operator parameter must be positive");
  require(truncation > 1.0, "1-D operator truncation must exceed 1");
  require(points >= 3, "1-D operator needs at least 3 points");
}

double tridiagonal_smallest_eigenvalue(const std::vector<double>& diag, double offdiag) {
  require(!diag.empty(), "tridiagonal matrix is empty");
  const double e2 = offdiag * offdiag;
  const double ae = std::abs(offdiag);
  double lo = std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  for (double d : diag) {
    lo = std::min(lo, d - 2.0 * ae);
    hi = std::min(hi, d);  // Rayleigh quotient of a unit vector
  }
  // Number of eigenvalues below x (Sturm sequence of the LDL^T pivots).
  auto count_below = [&](double x) {
    int neg = 0;
    double q = diag[0] - x;
    for (std::size_t i = 0;;) {
      if (q < 0.0) ++neg;
      if (++i == diag.size()) break;
      if (q == 0.0) q = std::numeric_limits<double>::epsilon() * (ae + std::abs(x) + 1.0);
      q = (diag[i] - x) - e2 / q;
    }
    return neg;
  };
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (count_below(mid) >= 1 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

namespace {

double solve_1d(const OneDimOperatorSpec& spec, double kinetic,
                const std::function<double(double)>& potential) {
  const double step = 2.0 * spec.truncation / (spec.points + 1);
  const double off = -kinetic / (step * step);
  std::vector<double> diag(static_cast<std::size_t>(spec.points));
  for (int i = 0; i < spec.points; ++i) {
    const double t = -spec.truncation + (i + 1) * step;
    diag[static_cast<std::size_t>(i)] = 2.0 * kinetic / (step * step) + potential(t);
  }
  const double value = tridiagonal_smallest_eigenvalue(diag, off);
  if (potential(spec.truncation) < 10.0 * value) {
    std::ostringstream msg;
    msg << "truncation too small: potential " << potential(spec.truncation)
        << " at the end is below ten times the eigenvalue " << value;
    throw NumericalError(msg.str());
  }
  return value;
}

}  // namespace

double mu1_fd(const OneDimOperatorSpec& spec) {
  spec.validate();
  require(spec.kind == OneDimKind::P_h, "mu1_fd expects a P_h operator");
  const double h = spec.parameter;
  return solve_1d(spec, h * h, [](double t) { return kPi2 * std::max(0.0, t * t - 1.0); });
}

double nu1_fd(const OneDimOperatorSpec& spec) {
  spec.validate();
  require(spec.kind == OneDimKind::Q_V, "nu1_fd expects a Q_V operator");
  const double V = spec.parameter;
  // pi^2 / (4 g^2) with g = min(1/2, V / (4|x|)).
  return solve_1d(spec, 1.0, [V](double x) {
    const double s = 2.0 * x / V;
    return kPi2 * std::max(1.0, s * s);
  });
}

double cont_lambda1(double V, double truncation, int nx, int ny) {
  require(V > 0.0, "cont_lambda1: V must be positive");
  require(truncation > V / 2.0, "cont_lambda1: truncation must exceed V/2");
  require(V / (4.0 * truncation) < 2.0 / ny,
          "cont_lambda1: tail condition violated (V / (4 truncation) must be below 2 cells)");
  // The torus (-T, T) x (0, 1) is shifted to (0, 2T) x (0, 1); the region never touches the seam
  // in a way that couples across it because nodes on x = 0 and y = 0 are outside.
  const Grid grid({2.0 * truncation, 1.0}, nx, ny);
  auto g = [V](double x1) {
    const double ax = std::abs(x1);
    return ax <= V / 2.0 ? 0.5 : V / (4.0 * ax);
  };
  auto contains = [&](Point p) {
    const double x1 = p.x - truncation;
    if (std::abs(x1) >= truncation) return false;
    return std::abs(p.y - 0.5) < g(x1);
  };
  auto crossing = [&](Point p, Point q) {
    // Grid lines are axis aligned: solve the wall position exactly along the moving coordinate.
    const double x1 = p.x - truncation;
    if (p.y == q.y) {
      const double dy = std::abs(p.y - 0.5);
      double wall = dy <= 0.0 ? truncation : std::min(truncation, V / (4.0 * dy));
      if (dy >= 0.5) wall = 0.0;
      const double dir = q.x > p.x ? 1.0 : -1.0;
      const double target = dir * wall;  // wall at x1 = +-wall on the side we move towards
      return std::clamp((target - x1) / (q.x - p.x), 0.0, 1.0);
    }
    const double half = g(x1);
    const double target = q.y > p.y ? 0.5 + half : 0.5 - half;
    return std::clamp((target - p.y) / (q.y - p.y), 0.0, 1.0);
  };
  const DomainMask mask = mask_from_region(grid, {contains, crossing});
  return dirichlet_lambda1(mask);
}

}  // namespace minpart
