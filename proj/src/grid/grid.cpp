#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <ostream>
#include <string>

#include "minpart/grid.hpp"

namespace minpart {

Grid::Grid(TorusGeometry geom, int nx, int ny) : geom_(geom), nx_(nx), ny_(ny) {
  geom.validate();
  require(nx >= 8 && ny >= 8, "grid needs at least 8 nodes per direction");
}

Grid Grid::with_resolution(TorusGeometry geom, int resolution) {
  geom.validate();
  const int ny = std::max(8, static_cast<int>(std::ceil(resolution * geom.b / geom.a - 1e-9)));
  return Grid(geom, resolution, ny);
}

std::size_t neighbor(const Grid& grid, std::size_t p, int dir) {
  const int i = grid.i_of(p);
  const int j = grid.j_of(p);
  switch (dir) {
    case kEast: return grid.index(i + 1, j);
    case kWest: return grid.index(i - 1, j);
    case kNorth: return grid.index(i, j + 1);
    default: return grid.index(i, j - 1);
  }
}

GridField::GridField(Grid g, std::vector<double> v) : grid(g), values(std::move(v)) {
  require(values.size() == grid.size(), "GridField: value count does not match the grid");
}

GridField GridField::from_function(const Grid& g, const std::function<double(Point)>& f) {
  GridField out(g);
  for (std::size_t p = 0; p < g.size(); ++p) out.values[p] = f(g.point(p));
  return out;
}

DomainMask::DomainMask(Grid grid, double default_fraction)
    : grid_(grid), inside_(grid.size(), 0), fraction_(4 * grid.size(), default_fraction) {}

DomainMask::DomainMask(Grid grid, std::vector<std::uint8_t> inside, double default_fraction)
    : grid_(grid), inside_(std::move(inside)), fraction_(4 * grid.size(), default_fraction) {
  require(inside_.size() == grid_.size(), "DomainMask: flag count does not match the grid");
}

std::size_t DomainMask::count() const {
  return static_cast<std::size_t>(std::count(inside_.begin(), inside_.end(), std::uint8_t{1}));
}

void SparseOperator::apply(std::span<const double> x, std::span<double> y) const {
  Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
  Eigen::Map<Eigen::VectorXd> yv(y.data(), static_cast<Eigen::Index>(y.size()));
  yv.noalias() = matrix * xv;
}

GridField SparseOperator::to_field(std::span<const double> v) const {
  GridField f(grid);
  for (std::size_t r = 0; r < nodes.size(); ++r) f.values[nodes[r]] = v[r];
  return f;
}

SparseOperator assemble_periodic_laplacian(const Grid& grid, const GridField* potential) {
  const double cx = 1.0 / (grid.hx() * grid.hx());
  const double cy = 1.0 / (grid.hy() * grid.hy());
  const auto n = static_cast<Eigen::Index>(grid.size());
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(5 * grid.size());
  for (std::size_t p = 0; p < grid.size(); ++p) {
    double diag = 2.0 * cx + 2.0 * cy;
    if (potential) diag += potential->values[p];
    const auto r = static_cast<Eigen::Index>(p);
    triplets.emplace_back(r, r, diag);
    for (int d = 0; d < 4; ++d) {
      const double c = d < 2 ? cx : cy;
      triplets.emplace_back(r, static_cast<Eigen::Index>(neighbor(grid, p, d)), -c);
    }
  }
  SparseOperator op{grid, Eigen::SparseMatrix<double>(n, n), {}};
  // Duplicates (nx or ny == 2 style wraps) are summed, as they should be.
  op.matrix.setFromTriplets(triplets.begin(), triplets.end());
  op.nodes.resize(grid.size());
  for (std::size_t p = 0; p < grid.size(); ++p) op.nodes[p] = p;
  return op;
}

SparseOperator assemble_dirichlet_laplacian(const DomainMask& mask, const GridField* potential) {
  const Grid& grid = mask.grid();
  require(!mask.empty(), "assemble_dirichlet_laplacian: empty mask");
  const double cx = 1.0 / (grid.hx() * grid.hx());
  const double cy = 1.0 / (grid.hy() * grid.hy());
  std::vector<long> row_of(grid.size(), -1);
  SparseOperator op{grid, {}, {}};
  for (std::size_t p = 0; p < grid.size(); ++p) {
    if (mask.inside(p)) {
      row_of[p] = static_cast<long>(op.nodes.size());
      op.nodes.push_back(p);
    }
  }
  const auto n = static_cast<Eigen::Index>(op.nodes.size());
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(5 * op.nodes.size());
  for (std::size_t r = 0; r < op.nodes.size(); ++r) {
    const std::size_t p = op.nodes[r];
    double diag = potential ? potential->values[p] : 0.0;
    for (int d = 0; d < 4; ++d) {
      const double c = d < 2 ? cx : cy;
      const std::size_t q = neighbor(grid, p, d);
      if (row_of[q] >= 0) {
        diag += c;
        triplets.emplace_back(static_cast<Eigen::Index>(r), row_of[q], -c);
      } else {
        // Ghost value from linear extrapolation to the wall: u_ghost = -(1-f)/f u_p.
        diag += c / mask.fraction(p, d);
      }
    }
    triplets.emplace_back(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(r), diag);
  }
  op.matrix.resize(n, n);
  op.matrix.setFromTriplets(triplets.begin(), triplets.end());
  return op;
}

DomainMask mask_from_region(const Grid& grid, const RegionDescription& region) {
  DomainMask mask(grid);
  for (std::size_t p = 0; p < grid.size(); ++p) mask.set_inside(p, region.contains(grid.point(p)));
  const double hx = grid.hx();
  const double hy = grid.hy();
  const Point steps[4] = {{hx, 0.0}, {-hx, 0.0}, {0.0, hy}, {0.0, -hy}};
  for (std::size_t p = 0; p < grid.size(); ++p) {
    if (!mask.inside(p)) continue;
    const Point x = grid.point(p);
    for (int d = 0; d < 4; ++d) {
      if (mask.inside(neighbor(grid, p, d))) continue;
      const double t = region.crossing(x, x + steps[d]);
      mask.set_fraction(p, d, std::clamp(t, 1e-3, 1.0));
    }
  }
  return mask;
}

namespace {

struct LiftedPolygon {
  const Polygon* poly;
  const TorusGeometry* geom;
  double xmin, xmax, ymin, ymax;

  template <class F>
  void for_each_lift(Point p, F&& f) const {
    // Translate p by periods so that it can fall in the polygon's bounding box.
    const double a = geom->a;
    const double b = geom->b;
    const int m0 = static_cast<int>(std::floor((xmin - p.x) / a)) - 1;
    const int m1 = static_cast<int>(std::ceil((xmax - p.x) / a)) + 1;
    const int n0 = static_cast<int>(std::floor((ymin - p.y) / b)) - 1;
    const int n1 = static_cast<int>(std::ceil((ymax - p.y) / b)) + 1;
    for (int m = m0; m <= m1; ++m) {
      for (int n = n0; n <= n1; ++n) {
        if (f(Point{p.x + m * a, p.y + n * b})) return;
      }
    }
  }

  bool strictly_inside(Point p) const {
    bool in = false;
    for_each_lift(p, [&](Point q) {
      if (q.x <= xmin || q.x >= xmax || q.y <= ymin || q.y >= ymax) return false;
      in = point_in_polygon(*poly, q);
      return in;
    });
    return in;
  }

  double distance_to_boundary(Point p) const {
    double best = std::numeric_limits<double>::infinity();
    const std::size_t n = poly->size();
    for_each_lift(p, [&](Point q) {
      for (std::size_t i = 0; i < n; ++i) {
        const Point a = (*poly)[i];
        const Point b = (*poly)[(i + 1) % n];
        const Point d = b - a;
        const double len2 = d.x * d.x + d.y * d.y;
        double t = ((q.x - a.x) * d.x + (q.y - a.y) * d.y) / len2;
        t = std::clamp(t, 0.0, 1.0);
        best = std::min(best, std::hypot(q.x - a.x - t * d.x, q.y - a.y - t * d.y));
      }
      return false;
    });
    return best;
  }

  bool contains(Point p, double eps) const {
    if (distance_to_boundary(p) > 4.0 * eps) return strictly_inside(p);
    // On or next to an edge: inside only if a small disc around p is covered by the lifts, which
    // makes edges glued to the cell's own translates interior.
    constexpr int kDirections = 16;
    for (int k = 0; k < kDirections; ++k) {
      const double ang = 0.3141 + 2.0 * std::numbers::pi * k / kDirections;
      if (!strictly_inside(Point{p.x + eps * std::cos(ang), p.y + eps * std::sin(ang)})) {
        return false;
      }
    }
    return true;
  }

  double crossing(Point p, Point q, double eps) const {
    std::vector<double> ts;
    const std::size_t n = poly->size();
    const Point dseg = q - p;
    for_each_lift(p, [&](Point lp) {
      const Point shift = lp - p;
      for (std::size_t i = 0; i < n; ++i) {
        const Point a = (*poly)[i] - shift;
        const Point b = (*poly)[(i + 1) % n] - shift;
        const Point e = b - a;
        const double den = dseg.x * e.y - dseg.y * e.x;
        if (std::abs(den) < 1e-300) continue;
        const Point w = a - p;
        const double t = (w.x * e.y - w.y * e.x) / den;
        const double s = (w.x * dseg.y - w.y * dseg.x) / den;
        if (t > 0.0 && t <= 1.0 + 1e-12 && s >= -1e-12 && s <= 1.0 + 1e-12) ts.push_back(t);
      }
      return false;
    });
    std::sort(ts.begin(), ts.end());
    const double len = std::hypot(dseg.x, dseg.y);
    for (double t : ts) {
      const double probe = std::min(t + 1e3 * eps / len, 1.0);
      if (!contains(p + probe * dseg, eps)) return std::min(t, 1.0);
    }
    return 1.0;
  }
};

}  // namespace

DomainMask mask_from_polygon(const Grid& grid, const Polygon& polygon) {
  if (!polygon_is_simple(polygon)) {
    throw PreconditionError("mask_from_polygon: polygon lift is self-intersecting");
  }
  LiftedPolygon lp{&polygon, &grid.geom(), 0, 0, 0, 0};
  lp.xmin = lp.xmax = polygon.front().x;
  lp.ymin = lp.ymax = polygon.front().y;
  for (const auto& v : polygon) {
    lp.xmin = std::min(lp.xmin, v.x);
    lp.xmax = std::max(lp.xmax, v.x);
    lp.ymin = std::min(lp.ymin, v.y);
    lp.ymax = std::max(lp.ymax, v.y);
  }
  const double eps = 1e-9 * std::min(grid.hx(), grid.hy());
  RegionDescription region{[&](Point p) { return lp.contains(p, eps); },
                           [&](Point p, Point q) { return lp.crossing(p, q, eps); }};
  return mask_from_region(grid, region);
}

std::vector<int> label_components(const Grid& grid,
                                  const std::function<bool(std::size_t)>& member,
                                  int& component_count) {
  std::vector<int> label(grid.size(), -1);
  component_count = 0;
  std::deque<std::size_t> queue;
  for (std::size_t s = 0; s < grid.size(); ++s) {
    if (label[s] >= 0 || !member(s)) continue;
    label[s] = component_count;
    queue.push_back(s);
    while (!queue.empty()) {
      const std::size_t p = queue.front();
      queue.pop_front();
      for (int d = 0; d < 4; ++d) {
        const std::size_t q = neighbor(grid, p, d);
        if (label[q] < 0 && member(q)) {
          label[q] = component_count;
          queue.push_back(q);
        }
      }
    }
    ++component_count;
  }
  return label;
}

std::vector<DomainMask> connected_components(const DomainMask& mask) {
  const Grid& grid = mask.grid();
  int count = 0;
  const auto label = label_components(grid, [&](std::size_t p) { return mask.inside(p); }, count);
  std::vector<DomainMask> out;
  out.reserve(count);
  for (int c = 0; c < count; ++c) out.emplace_back(grid);
  for (std::size_t p = 0; p < grid.size(); ++p) {
    if (label[p] < 0) continue;
    DomainMask& m = out[label[p]];
    m.set_inside(p, true);
    for (int d = 0; d < 4; ++d) m.set_fraction(p, d, mask.fraction(p, d));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const DomainMask& x, const DomainMask& y) { return x.count() > y.count(); });
  return out;
}

void write_pgm(std::ostream& out, const Grid& grid, std::span<const int> values, int maxval) {
  out << "P2\n" << grid.nx() << ' ' << grid.ny() << '\n' << maxval << '\n';
  for (int j = grid.ny() - 1; j >= 0; --j) {
    for (int i = 0; i < grid.nx(); ++i) {
      out << values[grid.index(i, j)] << (i + 1 == grid.nx() ? '\n' : ' ');
    }
  }
}

void write_pgm(std::ostream& out, const DomainMask& mask) {
  std::vector<int> v(mask.grid().size());
  for (std::size_t p = 0; p < v.size(); ++p) v[p] = mask.inside(p) ? 1 : 0;
  write_pgm(out, mask.grid(), v, 1);
}

}  // namespace minpart
