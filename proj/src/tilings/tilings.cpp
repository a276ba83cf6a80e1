#include "minpart/tilings.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "minpart/eigensolve.hpp"
#include "minpart/format.hpp"

namespace minpart {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kPi2 = kPi * kPi;
const double kSqrt3 = std::sqrt(3.0);

Polygon translated(const Polygon& poly, Point d) {
  Polygon out = poly;
  for (auto& p : out) p = p + d;
  return out;
}

Polygon rectangle(double x0, double y0, double x1, double y1) {
  return {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
}

// Lattice Z(1/k, j b/k) + Z(0, b) of hexagon centers.
int hexagon_shear(int k) { return k == 3 ? 1 : 2; }

}  // namespace

std::string tiling_kind_name(TilingKind kind) {
  switch (kind) {
    case TilingKind::strips:
      return "strips";
    case TilingKind::hexagons:
      return "hexagons";
    case TilingKind::squares5:
      return "squares5";
    case TilingKind::double_cover3:
      return "double_cover3";
  }
  return "unknown";
}

TilingSpec strips(int k, const TorusGeometry& geom) {
  require(k >= 2, "strips: k must be >= 2");
  geom.validate();
  TilingSpec spec;
  spec.kind = TilingKind::strips;
  spec.k = k;
  spec.geom = geom;
  const double w = geom.a / k;
  for (int i = 0; i < k; ++i) spec.cells.push_back(rectangle(i * w, 0.0, (i + 1) * w, geom.b));
  spec.exact_cell_lambda = strip_energy(k, geom.a);
  return spec;
}

double b_H(int k) {
  switch (k) {
    case 3:
      return (std::sqrt(11.0) - kSqrt3) / 4.0;
    case 4:
      return 1.0 / (2.0 * kSqrt3);
    case 5:
      return (std::sqrt(291.0) - 5.0 * kSqrt3) / 36.0;
    default:
      throw PreconditionError("b_H: k must be 3, 4 or 5");
  }
}

TilingSpec hexagonal_tiling(int k, double b) {
  require(k >= 3 && k <= 5, "hexagonal_tiling: k must be 3, 4 or 5");
  require(b > 0.0 && b <= 1.0, "hexagonal_tiling: b must lie in (0, 1]");
  if (b <= b_H(k)) {
    std::ostringstream msg;
    msg << "hexagonal_tiling: construction degenerate below threshold (b = " << b
        << " <= b_H = " << b_H(k) << ")";
    throw PreconditionError(msg.str());
  }
  const int j = hexagon_shear(k);
  using C = std::complex<double>;
  const C w1(1.0 / k, j * b / k);
  const C w2(-1.0 / k, (1.0 - static_cast<double>(j) / k) * b);
  // Sides A, B, C point at angles t, t + 60, t + 120 with lengths p, q, r; the neighbors across
  // the sides sit at w1 = A + B, w2 = B + C and w1 - w2. Writing w e^{-it} in the basis 1, omega,
  // omega^2 gives p, q, r; the one consistency condition is linear in (cos t, sin t).
  const double A = w2.real() + w2.imag() / kSqrt3 - 2.0 * w1.imag() / kSqrt3;
  const double B = w2.imag() - w2.real() / kSqrt3 + 2.0 * w1.real() / kSqrt3;
  double t = std::atan2(-A, B);
  double p = 0.0;
  double q = 0.0;
  double r = 0.0;
  for (int attempt = 0; attempt < 2; ++attempt) {
    const C z1 = w1 * std::polar(1.0, -t);
    const C z2 = w2 * std::polar(1.0, -t);
    q = 2.0 / kSqrt3 * z1.imag();
    p = z1.real() - q / 2.0;
    r = 2.0 / kSqrt3 * z2.imag() - q;
    if (p > 0.0) break;
    t += kPi;
  }
  const double scale = std::abs(w1) + std::abs(w2);
  if (!(p > 1e-12 * scale && q > 1e-12 * scale && r > 1e-12 * scale)) {
    throw NumericalError("hexagonal_tiling: no 120-degree hexagon for these lattice vectors");
  }
  const C sa = p * std::polar(1.0, t);
  const C sb = q * std::polar(1.0, t + kPi / 3.0);
  const C sc = r * std::polar(1.0, t + 2.0 * kPi / 3.0);
  const C center(0.5 / k, 0.5 * b);
  std::vector<C> v(6);
  v[0] = center - (sa + sb + sc) / 2.0;
  v[1] = v[0] + sa;
  v[2] = v[1] + sb;
  v[3] = v[2] + sc;
  v[4] = v[3] - sa;
  v[5] = v[4] - sb;
  Polygon cell;
  for (const auto& z : v) cell.push_back({z.real(), z.imag()});

  TilingSpec spec;
  spec.kind = TilingKind::hexagons;
  spec.k = k;
  spec.geom = {1.0, b};
  for (int i = 0; i < k; ++i) spec.cells.push_back(translated(cell, {i * w1.real(), i * w1.imag()}));
  return spec;
}

TilingSpec five_squares() {
  TilingSpec spec;
  spec.kind = TilingKind::squares5;
  spec.k = 5;
  spec.geom = {1.0, 1.0};
  const Point v1{0.4, 0.2};
  const Point v2{-0.2, 0.4};
  const Polygon square{{0.0, 0.0}, v1, v1 + v2, v2};
  for (int i = 0; i < 5; ++i) spec.cells.push_back(translated(square, static_cast<double>(i) * v1));
  // Side 1/sqrt5: 2 pi^2 / (1/5).
  spec.exact_cell_lambda = 10.0 * kPi2;
  return spec;
}

double double_cover_eigenfunction(double alpha, Point p) {
  return std::cos(3.0 * kPi * p.x) +
         alpha * std::cos(kPi * p.x) * std::cos(2.0 * std::numbers::sqrt2 * kPi * p.y);
}

namespace {

const double kCoverWidth = 1.0 / std::numbers::sqrt2;

struct CoverLabels {
  std::vector<int> labels;  // downstairs, 0..2 (or -1 when count != 6)
  int nodal_count = 0;
};

CoverLabels cover_labels(double alpha, const Grid& down) {
  const Grid up({2.0, down.geom().b}, 2 * down.nx(), down.ny());
  const GridField u = GridField::from_function(up, [&](Point p) { return double_cover_eigenfunction(alpha, p); });
  double top = 0.0;
  for (double x : u.values) top = std::max(top, std::abs(x));
  const double threshold = 1e-9 * top;
  int npos = 0;
  int nneg = 0;
  const auto pos = label_components(up, [&](std::size_t p) { return u[p] > threshold; }, npos);
  const auto neg = label_components(up, [&](std::size_t p) { return u[p] < -threshold; }, nneg);
  CoverLabels out;
  out.nodal_count = npos + nneg;
  if (out.nodal_count != 6) return out;
  auto comp = [&](std::size_t p) { return pos[p] >= 0 ? pos[p] : (neg[p] >= 0 ? npos + neg[p] : -1); };
  // Pair each upstairs domain with its image under x -> x + 1.
  std::vector<int> partner(6, -1);
  std::vector<int> pair_label(6, -1);
  int next = 0;
  out.labels.assign(down.size(), -1);
  for (std::size_t p = 0; p < down.size(); ++p) {
    const int i = down.i_of(p);
    const int jj = down.j_of(p);
    const int c = comp(up.index(i, jj));
    const int d = comp(up.index(i + down.nx(), jj));
    if (c < 0 || d < 0) continue;
    if (partner[static_cast<std::size_t>(c)] < 0) {
      partner[static_cast<std::size_t>(c)] = d;
      partner[static_cast<std::size_t>(d)] = c;
    }
    if (partner[static_cast<std::size_t>(c)] != d) {
      throw NumericalError("double cover: nodal domains are not exchanged by x -> x + 1");
    }
    if (pair_label[static_cast<std::size_t>(c)] < 0) {
      pair_label[static_cast<std::size_t>(c)] = pair_label[static_cast<std::size_t>(d)] = next++;
    }
    out.labels[p] = pair_label[static_cast<std::size_t>(c)];
  }
  if (next != 3) throw NumericalError("double cover: projection does not give 3 domains");
  // Nodes on the zero set take a labeled neighbor's label.
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t p = 0; p < down.size(); ++p) {
      if (out.labels[p] >= 0) continue;
      for (int dir = 0; dir < 4; ++dir) {
        const int l = out.labels[neighbor(down, p, dir)];
        if (l >= 0) {
          out.labels[p] = l;
          changed = true;
          break;
        }
      }
    }
  }
  return out;
}

}  // namespace

int double_cover_nodal_count(double alpha, int resolution) {
  require(resolution >= 8, "double cover: resolution too small");
  const Grid up({2.0, kCoverWidth}, 2 * resolution,
                std::max(8, static_cast<int>(std::lround(resolution * kCoverWidth))));
  const GridField u = GridField::from_function(up, [&](Point p) { return double_cover_eigenfunction(alpha, p); });
  return count_nodal_domains(u);
}

double double_cover_alpha_default(int resolution) {
  const double step = 0.01;
  double hi = 0.0;
  require(double_cover_nodal_count(0.0, resolution) == 6, "double cover: alpha = 0 must give 6 domains");
  while (hi + step <= 4.0 && double_cover_nodal_count(hi + step, resolution) == 6) hi += step;
  return round12(0.5 * hi);
}

TilingSpec double_cover_3partition(double alpha) {
  require(std::isfinite(alpha), "double_cover_3partition: alpha must be finite");
  const int count = double_cover_nodal_count(alpha);
  if (count != 6) {
    std::ostringstream msg;
    msg << "double_cover_3partition: alpha = " << alpha << " gives " << count
        << " nodal domains, 6 required";
    throw PreconditionError(msg.str());
  }
  TilingSpec spec;
  spec.kind = TilingKind::double_cover3;
  spec.k = 3;
  spec.geom = {1.0, kCoverWidth};
  spec.alpha = alpha;
  spec.exact_cell_lambda = 9.0 * kPi2;
  return spec;
}

namespace {

Grid tiling_grid(const TilingSpec& spec, int resolution) {
  require(resolution >= 8, "tiling: resolution too small");
  return Grid(spec.geom, std::max(8, static_cast<int>(std::lround(resolution * spec.geom.a))),
              std::max(8, static_cast<int>(std::lround(resolution * spec.geom.b))));
}

// Edge (a, b) of a cell is glued to another edge of the same cell by a torus period, so it is
// interior rather than a wall.
bool self_glued(const Polygon& poly, int s, const TorusGeometry& geom) {
  const int n = static_cast<int>(poly.size());
  const Point a = poly[static_cast<std::size_t>(s)];
  const Point b = poly[static_cast<std::size_t>((s + 1) % n)];
  const double eps = 1e-9 * std::max(geom.a, geom.b);
  for (int t = 0; t < n; ++t) {
    if (t == s) continue;
    const Point c = poly[static_cast<std::size_t>(t)];
    const Point d = poly[static_cast<std::size_t>((t + 1) % n)];
    const Point shift = c - b;
    const double mx = shift.x / geom.a;
    const double ny = shift.y / geom.b;
    if (std::abs(mx - std::round(mx)) * geom.a > eps || std::abs(ny - std::round(ny)) * geom.b > eps) continue;
    if (std::abs(std::round(mx)) + std::abs(std::round(ny)) == 0.0) continue;
    const Point e = a + shift;
    if (std::hypot(e.x - d.x, e.y - d.y) <= eps) return true;
  }
  return false;
}

}  // namespace

TilingCheck check_tiling(const TilingSpec& spec, int resolution) {
  require(!spec.cells.empty(), "check_tiling: tiling has no polygon cells");
  TilingCheck check;
  const double target = spec.geom.area() / spec.k;
  for (const auto& cell : spec.cells) {
    check.max_area_error = std::max(check.max_area_error, std::abs(std::abs(polygon_area(cell)) - target));
  }

  // Vertex stars: collect outgoing edge directions from every lifted cell at each vertex.
  const double a = spec.geom.a;
  const double b = spec.geom.b;
  const double eps = 1e-9 * std::max(a, b);
  check.min_vertex_degree = std::numeric_limits<int>::max();
  for (const auto& base : spec.cells) {
    for (const Point v : base) {
      std::vector<double> dirs;
      for (const auto& cell : spec.cells) {
        const int n = static_cast<int>(cell.size());
        for (int m = -3; m <= 3; ++m) {
          for (int l = -3; l <= 3; ++l) {
            const Point shift{m * a, l * b};
            for (int s = 0; s < n; ++s) {
              const Point p = cell[static_cast<std::size_t>(s)] + shift;
              if (std::hypot(p.x - v.x, p.y - v.y) > eps) continue;
              for (int t : {(s + 1) % n, (s + n - 1) % n}) {
                const Point q = cell[static_cast<std::size_t>(t)] + shift;
                const double ang = std::atan2(q.y - p.y, q.x - p.x);
                const bool seen = std::any_of(dirs.begin(), dirs.end(), [&](double x) {
                  const double d = std::remainder(x - ang, 2.0 * kPi);
                  return std::abs(d) <= 1e-9;
                });
                if (!seen) dirs.push_back(ang);
              }
            }
          }
        }
      }
      const int degree = static_cast<int>(dirs.size());
      check.min_vertex_degree = std::min(check.min_vertex_degree, degree);
      check.max_vertex_degree = std::max(check.max_vertex_degree, degree);
      std::sort(dirs.begin(), dirs.end());
      for (std::size_t i = 0; i < dirs.size(); ++i) {
        const double next = i + 1 < dirs.size() ? dirs[i + 1] : dirs.front() + 2.0 * kPi;
        const double gap = next - dirs[i];
        if (spec.kind == TilingKind::hexagons) {
          check.max_angle_error = std::max(check.max_angle_error, std::abs(gap - 2.0 * kPi / 3.0));
        }
      }
    }
  }

  const Grid grid = tiling_grid(spec, resolution);
  std::vector<int> hits(grid.size(), 0);
  for (const auto& cell : spec.cells) {
    const DomainMask mask = mask_from_polygon(grid, cell);
    for (std::size_t p = 0; p < grid.size(); ++p) hits[p] += mask.inside(p) ? 1 : 0;
  }
  const double n = static_cast<double>(grid.size());
  // A node in no cell but next to one sits on a wall.
  std::size_t covered = 0;
  for (std::size_t p = 0; p < grid.size(); ++p) {
    bool ok = hits[p] == 1;
    for (int d = 0; d < 4 && hits[p] == 0; ++d) ok = ok || hits[neighbor(grid, p, d)] > 0;
    covered += ok ? 1 : 0;
  }
  check.coverage = static_cast<double>(covered) / n;
  check.overlap = static_cast<double>(std::count_if(hits.begin(), hits.end(), [](int h) { return h > 1; })) / n;
  return check;
}

StrongPartition tiling_partition(const TilingSpec& spec, int resolution) {
  const Grid grid = tiling_grid(spec, resolution);
  StrongPartition part{grid, spec.k, std::vector<int>(grid.size(), -1), {}, {}, {}, 0.0};

  if (spec.kind == TilingKind::double_cover3) {
    const CoverLabels cover = cover_labels(spec.alpha, grid);
    if (cover.nodal_count != 6) {
      throw PreconditionError("tiling_partition: double cover has " + std::to_string(cover.nodal_count) +
                              " nodal domains, 6 required");
    }
    part.labels = cover.labels;
    // |u| is 1-periodic in x, so the zero set can be located by interpolation downstairs.
    const GridField absu = GridField::from_function(grid, [&](Point p) {
      return std::abs(double_cover_eigenfunction(spec.alpha, p));
    });
    for (int c = 0; c < spec.k; ++c) {
      DomainMask mask(grid);
      for (std::size_t p = 0; p < grid.size(); ++p) mask.set_inside(p, part.labels[p] == c);
      for (std::size_t p = 0; p < grid.size(); ++p) {
        if (!mask.inside(p)) continue;
        for (int d = 0; d < 4; ++d) {
          const std::size_t q = neighbor(grid, p, d);
          if (mask.inside(q)) continue;
          const double den = absu[p] + absu[q];
          const double theta = den > 0.0 ? absu[p] / den : 0.5;
          mask.set_fraction(p, d, std::clamp(theta, 1e-3, 1.0));
        }
      }
      part.masks.push_back(std::move(mask));
    }
  } else {
    for (int c = 0; c < spec.k; ++c) {
      DomainMask mask = mask_from_polygon(grid, spec.cells[static_cast<std::size_t>(c)]);
      for (std::size_t p = 0; p < grid.size(); ++p) {
        if (mask.inside(p) && part.labels[p] < 0) part.labels[p] = c;
      }
      part.masks.push_back(std::move(mask));
    }
    // Nodes exactly on a wall take a neighbor's label so that the raster is complete.
    for (bool changed = true; changed;) {
      changed = false;
      for (std::size_t p = 0; p < grid.size(); ++p) {
        if (part.labels[p] >= 0) continue;
        for (int d = 0; d < 4; ++d) {
          const int l = part.labels[neighbor(grid, p, d)];
          if (l >= 0) {
            part.labels[p] = l;
            changed = true;
            break;
          }
        }
      }
    }
  }
  for (const auto& mask : part.masks) {
    require(!mask.empty(), "tiling_partition: a cell has no grid nodes at this resolution");
    part.areas.push_back(mask.area());
    part.lambdas.push_back(dirichlet_lambda1(mask));
  }
  part.energy = *std::max_element(part.lambdas.begin(), part.lambdas.end());
  return part;
}

double tiling_cell_lambda1(const TilingSpec& spec, int resolution) {
  if (spec.kind == TilingKind::double_cover3) return tiling_partition(spec, resolution).lambdas.front();
  const Grid grid = tiling_grid(spec, resolution);
  return dirichlet_lambda1(mask_from_polygon(grid, spec.cells.front()));
}

PairCompatibility pair_compatibility(const TilingSpec& spec, int resolution, GlueMode mode) {
  require(!spec.cells.empty(), "pair_compatibility: needs a polygonal tiling");
  require(resolution >= 8, "pair_compatibility: resolution too small");
  const Polygon& cell = spec.cells.front();
  const double h = 1.0 / resolution;
  const bool periodic_y = spec.kind == TilingKind::strips;

  double xmin = cell[0].x, xmax = cell[0].x, ymin = cell[0].y, ymax = cell[0].y;
  for (const auto& p : cell) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  const double across = periodic_y ? xmax - xmin : std::min(xmax - xmin, ymax - ymin);
  if (across / h < 20.0) {
    std::ostringstream msg;
    msg << "pair_compatibility: raster too coarse (" << across / h
        << " grid steps across the cell, at least 20 required)";
    throw PreconditionError(msg.str());
  }

  // Planar (or, for strips, y-periodic) region: a torus with a margin around the domain.
  auto solve = [&](const Polygon& poly, int count) {
    double x0 = poly[0].x, x1 = poly[0].x, y0 = poly[0].y, y1 = poly[0].y;
    for (const auto& p : poly) {
      x0 = std::min(x0, p.x);
      x1 = std::max(x1, p.x);
      y0 = std::min(y0, p.y);
      y1 = std::max(y1, p.y);
    }
    const int margin = 6;
    const int nx = static_cast<int>(std::ceil((x1 - x0) / h)) + 2 * margin;
    int ny;
    double height;
    Point offset;
    if (periodic_y) {
      ny = std::max(8, static_cast<int>(std::lround(spec.geom.b / h)));
      height = spec.geom.b;
      offset = {margin * h - x0, 0.0};
    } else {
      ny = static_cast<int>(std::ceil((y1 - y0) / h)) + 2 * margin;
      height = ny * h;
      offset = {margin * h - x0, margin * h - y0};
    }
    const Grid grid({nx * h, height}, nx, ny);
    const DomainMask mask = mask_from_polygon(grid, translated(poly, offset));
    const SparseOperator op = assemble_dirichlet_laplacian(mask);
    const auto pairs = smallest_eigenpairs(op, count);
    return pairs.back().value;
  };

  PairCompatibility out;
  out.mode = mode;
  out.lambda1_cell = solve(cell, 1);
  const int n = static_cast<int>(cell.size());
  for (int s = 0; s < n; ++s) {
    if (self_glued(cell, s, spec.geom)) continue;
    out.sides.push_back(s);
    const double l2 = solve(glue_double(cell, s, mode), 2);
    out.lambda2_glued.push_back(l2);
    out.max_gap = std::max(out.max_gap, std::abs(out.lambda1_cell - l2) / out.lambda1_cell);
  }
  return out;
}

void write_tiling_json(std::ostream& out, const TilingSpec& spec) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["kind"] = tiling_kind_name(spec.kind);
  j["k"] = spec.k;
  j["a"] = round12(spec.geom.a);
  j["b"] = round12(spec.geom.b);
  if (spec.kind == TilingKind::double_cover3) j["alpha"] = round12(spec.alpha);
  ordered_json params = ordered_json::object();
  for (const auto& [name, value] : spec.free_parameters) params[name] = round12(value);
  j["free_parameters"] = params;
  if (spec.exact_cell_lambda) j["exact_cell_lambda"] = round12(*spec.exact_cell_lambda);
  ordered_json cells = ordered_json::array();
  for (const auto& cell : spec.cells) {
    ordered_json verts = ordered_json::array();
    ordered_json lifts = ordered_json::array();
    for (const auto& p : cell) {
      const double m = std::floor(p.x / spec.geom.a + 1e-12);
      const double l = std::floor(p.y / spec.geom.b + 1e-12);
      verts.push_back({round12(p.x - m * spec.geom.a), round12(p.y - l * spec.geom.b)});
      lifts.push_back({static_cast<int>(m), static_cast<int>(l)});
    }
    cells.push_back({{"vertices", verts}, {"lifts", lifts}});
  }
  j["cells"] = cells;
  out << j.dump(2) << '\n';
}

}  // namespace minpart
