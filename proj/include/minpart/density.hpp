#pragma once
// Relaxed partitions: k density fields on a grid, pointwise on the probability simplex.

#include <vector>

#include "minpart/grid.hpp"

namespace minpart {

struct DensitySet {
  Grid grid;
  int k = 0;
  std::vector<GridField> fields;

  DensitySet(Grid g, int count);

  /// Max violation of phi_i in [0,1] and sum_i phi_i = 1 over all nodes.
  double feasibility_error() const;
  /// Throws PreconditionError when feasibility_error() > tol.
  void require_feasible(double tol = 1e-9) const;

  /// Indicator densities of a labeling with values in 0..k-1.
  static DensitySet from_labels(const Grid& g, int count, const std::vector<int>& labels);
};

}  // namespace minpart
