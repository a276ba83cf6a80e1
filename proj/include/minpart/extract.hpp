#pragma once
// Strong partitions built from densities or label rasters, their exact (Dirichlet) energies, and
// partition topology: neighbor graphs, bipartiteness, nodal domains.

#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include "minpart/density.hpp"
#include "minpart/grid.hpp"

namespace minpart {

struct StrongPartition {
  Grid grid;
  int k = 0;
  std::vector<int> labels;  // 0..k-1 per node; exported as 1..k
  std::vector<DomainMask> masks;
  std::vector<double> lambdas;  // Dirichlet lambda1 per domain
  std::vector<double> areas;
  double energy = 0.0;          // max of lambdas
};

struct ExtractOptions {
  /// Components smaller than this fraction of all nodes are merged into a neighbor.
  double min_fraction = 0.005;
  /// Wall position between differently labeled nodes, in mesh steps (1/2 = midway).
  double wall_fraction = 0.5;
};

/// Argmax labeling (ties to the lowest index), cleanup, per-domain Dirichlet lambda1.
/// Throws NumericalError("degenerate partition") when a label disappears.
StrongPartition extract_strong(const DensitySet& dens, const ExtractOptions& options = {});

/// Same cleanup and evaluation starting from a label raster with values 0..k-1.
StrongPartition partition_from_labels(const Grid& grid, int k, std::vector<int> labels,
                                      const ExtractOptions& options = {});

/// energy_lp over the per-domain eigenvalues.
double partition_energy(const StrongPartition& part, double p);

struct NeighborGraph {
  int k = 0;
  std::vector<std::pair<int, int>> edges;  // i < j, sorted
  std::vector<std::vector<int>> adjacency;
  std::vector<std::vector<int>> contact;   // shared node pairs per label pair
};

/// Labels i and j are neighbors when more than `min_contact` grid edges join them.
NeighborGraph neighbor_graph(const StrongPartition& part, int min_contact = 2);

struct BipartiteResult {
  bool bipartite = false;
  std::vector<int> coloring;   // 0/1 per vertex when bipartite
  std::vector<int> odd_cycle;  // vertex loop otherwise
};

BipartiteResult is_bipartite(const NeighborGraph& graph);

/// Sign components of u (nodes with |u| <= 1e-9 max|u| are skipped), periodic connectivity,
/// optionally restricted to a mask.
int count_nodal_domains(const GridField& u, const DomainMask* mask = nullptr);

/// Labels as CSV rows "i,j,label" (1-based labels) and as a P2 raster.
void write_labels_csv(std::ostream& out, const StrongPartition& part);
void write_labels_pgm(std::ostream& out, const StrongPartition& part);

}  // namespace minpart
