#pragma once
// Periodic grids on T(a,b), five-point Laplacians (periodic and Dirichlet-masked), polygon
// rasterization, periodic connected components, and P2 raster output.

#include <Eigen/Sparse>
#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "minpart/analytic.hpp"
#include "minpart/errors.hpp"

namespace minpart {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline Point operator+(Point p, Point q) { return {p.x + q.x, p.y + q.y}; }
inline Point operator-(Point p, Point q) { return {p.x - q.x, p.y - q.y}; }
inline Point operator*(double s, Point p) { return {s * p.x, s * p.y}; }

/// Planar vertex loop. Consecutive vertices are joined by straight segments in the plane; a cell
/// crossing the periodic seam simply has coordinates outside the fundamental domain.
using Polygon = std::vector<Point>;

double polygon_area(const Polygon& poly);  // signed, positive for counter-clockwise loops
bool polygon_is_simple(const Polygon& poly);
/// Even-odd test; points on an edge are reported as outside.
bool point_in_polygon(const Polygon& poly, Point p);

/// Node (i, j) sits at (i*hx, j*hy); indices wrap modulo (nx, ny). Storage is row-major in i.
class Grid {
 public:
  Grid(TorusGeometry geom, int nx, int ny);

  /// nx = resolution, ny = ceil(resolution * b / a).
  static Grid with_resolution(TorusGeometry geom, int resolution);

  const TorusGeometry& geom() const { return geom_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  std::size_t size() const { return static_cast<std::size_t>(nx_) * ny_; }
  double hx() const { return geom_.a / nx_; }
  double hy() const { return geom_.b / ny_; }
  double cell_area() const { return hx() * hy(); }

  std::size_t index(int i, int j) const {
    i %= nx_;
    j %= ny_;
    if (i < 0) i += nx_;
    if (j < 0) j += ny_;
    return static_cast<std::size_t>(i) * ny_ + j;
  }
  int i_of(std::size_t p) const { return static_cast<int>(p / ny_); }
  int j_of(std::size_t p) const { return static_cast<int>(p % ny_); }
  Point point(int i, int j) const { return {i * hx(), j * hy()}; }
  Point point(std::size_t p) const { return point(i_of(p), j_of(p)); }

  bool operator==(const Grid& o) const {
    return nx_ == o.nx_ && ny_ == o.ny_ && geom_.a == o.geom_.a && geom_.b == o.geom_.b;
  }

 private:
  TorusGeometry geom_;
  int nx_;
  int ny_;
};

/// Neighbor directions in the order used by DomainMask::fraction.
enum Direction : int { kEast = 0, kWest = 1, kNorth = 2, kSouth = 3 };
std::size_t neighbor(const Grid& grid, std::size_t p, int dir);

struct GridField {
  Grid grid;
  std::vector<double> values;

  explicit GridField(Grid g, double fill = 0.0) : grid(g), values(g.size(), fill) {}
  GridField(Grid g, std::vector<double> v);

  static GridField from_function(const Grid& g, const std::function<double(Point)>& f);
  double& operator[](std::size_t p) { return values[p]; }
  double operator[](std::size_t p) const { return values[p]; }
};

/// Discretized open set. For an inside node whose neighbor in direction d is outside,
/// fraction(p, d) in (0, 1] is the distance to the boundary along that grid line in units of
/// the mesh step. 1 is plain node deletion; 1/2 puts the wall midway between nodes.
class DomainMask {
 public:
  explicit DomainMask(Grid grid, double default_fraction = 1.0);
  DomainMask(Grid grid, std::vector<std::uint8_t> inside, double default_fraction = 1.0);

  const Grid& grid() const { return grid_; }
  bool inside(std::size_t p) const { return inside_[p] != 0; }
  void set_inside(std::size_t p, bool v) { inside_[p] = v ? 1 : 0; }
  double fraction(std::size_t p, int dir) const { return fraction_[4 * p + dir]; }
  void set_fraction(std::size_t p, int dir, double f) { fraction_[4 * p + dir] = f; }
  std::size_t count() const;
  bool empty() const { return count() == 0; }
  double area() const { return static_cast<double>(count()) * grid_.cell_area(); }
  const std::vector<std::uint8_t>& flags() const { return inside_; }

 private:
  Grid grid_;
  std::vector<std::uint8_t> inside_;
  std::vector<double> fraction_;
};

/// Assembled symmetric operator on a subset of grid nodes (all of them for periodic operators).
struct SparseOperator {
  Grid grid;
  Eigen::SparseMatrix<double> matrix;
  std::vector<std::size_t> nodes;  // row r corresponds to grid node nodes[r]

  std::size_t dimension() const { return nodes.size(); }
  void apply(std::span<const double> x, std::span<double> y) const;
  /// Scatters a restricted vector onto the grid (zero outside).
  GridField to_field(std::span<const double> v) const;
};

/// Periodic five-point Laplacian. Symmetric positive semidefinite, kernel = constants.
SparseOperator assemble_periodic_laplacian(const Grid& grid,
                                           const GridField* potential = nullptr);

/// Five-point Laplacian restricted to the mask's inside nodes with homogeneous Dirichlet
/// conditions at the distances recorded in the mask; optional potential on the diagonal.
SparseOperator assemble_dirichlet_laplacian(const DomainMask& mask,
                                            const GridField* potential = nullptr);

/// Region test plus boundary distance along grid lines: the building block for masks with exact
/// geometry. crossing(p, q) returns the fraction t in (0, 1] at which the segment p->q first
/// leaves the region.
struct RegionDescription {
  std::function<bool(Point)> contains;
  std::function<double(Point, Point)> crossing;
};
DomainMask mask_from_region(const Grid& grid, const RegionDescription& region);

/// Rasterizes a cell polygon on the torus. A node is inside when a small disc around it lies in
/// the union of the polygon's periodic lifts, so edges glued to another edge of the same cell are
/// interior. Boundary distances are exact. Throws PreconditionError for self-intersecting loops.
DomainMask mask_from_polygon(const Grid& grid, const Polygon& polygon);

/// 4-neighbor components with periodic wraparound, largest first.
std::vector<DomainMask> connected_components(const DomainMask& mask);

/// Component id per node (-1 outside) for the nodes where `member` holds.
std::vector<int> label_components(const Grid& grid, const std::function<bool(std::size_t)>& member,
                                  int& component_count);

enum class GlueMode {
  mirror,           // reflection across the line of the chosen edge
  point_reflection  // half-turn about the edge midpoint: the neighbor of a centrally symmetric cell
};

/// The cell united with its copy across edge side_index (edge from vertex s to s+1).
Polygon glue_double(const Polygon& polygon, int side_index, GlueMode mode = GlueMode::mirror);

/// Plain-text portable graymap of an integer field (0..maxval), x to the right, y upward.
void write_pgm(std::ostream& out, const Grid& grid, std::span<const int> values, int maxval);
void write_pgm(std::ostream& out, const DomainMask& mask);

}  // namespace minpart
