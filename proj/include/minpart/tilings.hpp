#pragma once
// Explicit candidate partitions of T(1,b): strips, 120-degree hexagonal tilings for k = 3, 4, 5,
// five squares of T(1,1), the projected nodal partition of the double cover T(2, 1/sqrt 2), and
// the pair-compatibility test.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "minpart/extract.hpp"
#include "minpart/grid.hpp"

namespace minpart {

enum class TilingKind { strips, hexagons, squares5, double_cover3 };

std::string tiling_kind_name(TilingKind kind);

struct TilingSpec {
  TilingKind kind = TilingKind::strips;
  int k = 0;
  TorusGeometry geom;
  /// Planar vertex loops, counter-clockwise; empty for the double cover (curved cells).
  std::vector<Polygon> cells;
  /// Shape parameters of the family that were left free (none for the families built here).
  std::vector<std::pair<std::string, double>> free_parameters;
  /// Mixing coefficient of the double-cover eigenfunction.
  double alpha = 0.0;
  /// Closed-form Dirichlet lambda1 of every cell, when known.
  std::optional<double> exact_cell_lambda;
};

/// k vertical strips of width a/k.
TilingSpec strips(int k, const TorusGeometry& geom);

/// Lower end of the hexagon family: (sqrt11 - sqrt3)/4, 1/(2 sqrt3), (sqrt291 - 5 sqrt3)/36.
double b_H(int k);

/// k translates of one centrally symmetric hexagon with all angles 2pi/3, tiling T(1,b) with
/// lattice Z(1/k, j b/k) + Z(0, b) (j = 1 for k = 3, j = 2 for k = 4, 5). For a given (k, b) the
/// angle conditions fix the hexagon completely. Throws PreconditionError for b <= b_H(k).
TilingSpec hexagonal_tiling(int k, double b);

/// Five squares of side 1/sqrt5 tiling T(1,1), translates by (2/5, 1/5).
TilingSpec five_squares();

/// u = cos(3 pi x) + alpha cos(pi x) cos(2 sqrt2 pi y) on T(2, 1/sqrt2); u(x+1) = -u(x).
double double_cover_eigenfunction(double alpha, Point p);

/// Nodal-domain count of the double-cover eigenfunction on a grid of `resolution` per unit.
int double_cover_nodal_count(double alpha, int resolution = 128);

/// Midpoint of the alpha interval, scanned from 0, on which the eigenfunction has 6 nodal
/// domains.
double double_cover_alpha_default(int resolution = 128);

/// Throws PreconditionError with the observed count unless u has 6 nodal domains.
TilingSpec double_cover_3partition(double alpha);

struct TilingCheck {
  double max_area_error = 0.0;     // max |area_i - ab/k|
  double max_angle_error = 0.0;    // hexagons: max deviation of incident angles from 2pi/3
  int min_vertex_degree = 0;       // hexagons
  int max_vertex_degree = 0;
  double coverage = 0.0;           // fraction of nodes inside exactly one cell or on a wall
  double overlap = 0.0;            // fraction inside more than one
};

/// Geometric audit of a polygonal tiling; coverage on a grid of `resolution` per unit.
TilingCheck check_tiling(const TilingSpec& spec, int resolution = 128);

/// Rasterized partition of the tiling with per-cell Dirichlet lambda1. Polygon cells use exact
/// wall distances; double-cover cells use linear interpolation of the eigenfunction's zero set.
StrongPartition tiling_partition(const TilingSpec& spec, int resolution = 128);

/// Dirichlet lambda1 of cell 0 at `resolution` nodes per unit length.
double tiling_cell_lambda1(const TilingSpec& spec, int resolution = 128);

struct PairCompatibility {
  double lambda1_cell = 0.0;
  std::vector<int> sides;              // polygon side indices that border a neighbor
  std::vector<double> lambda2_glued;   // one per entry of `sides`
  double max_gap = 0.0;                // max |lambda1 - lambda2| / lambda1
  GlueMode mode = GlueMode::point_reflection;
};

/// Compares lambda1 of one cell with lambda2 of the cell glued to a copy across each side.
/// The computation runs on a torus large enough that only the intended identifications occur
/// (strips keep their own periodic direction). Throws PreconditionError when the cell is less
/// than 20 grid steps across.
PairCompatibility pair_compatibility(const TilingSpec& spec, int resolution,
                                     GlueMode mode = GlueMode::point_reflection);

/// JSON object with kind, k, geometry, parameters and cells as vertices reduced to the
/// fundamental domain plus integer lift offsets.
void write_tiling_json(std::ostream& out, const TilingSpec& spec);

}  // namespace minpart
