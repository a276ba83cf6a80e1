#include "minpart/density.hpp"

#include <algorithm>
#include <cmath>

namespace minpart {

DensitySet::DensitySet(Grid g, int count) : grid(g), k(count) {
  require(count >= 1, "DensitySet: k must be >= 1");
  fields.assign(static_cast<std::size_t>(count), GridField(g, 0.0));
}

double DensitySet::feasibility_error() const {
  double worst = 0.0;
  std::vector<double> v(static_cast<std::size_t>(k));
  for (std::size_t p = 0; p < grid.size(); ++p) {
    for (int i = 0; i < k; ++i) {
      const double x = fields[static_cast<std::size_t>(i)][p];
      if (!std::isfinite(x)) return std::numeric_limits<double>::infinity();
      worst = std::max({worst, -x, x - 1.0});
      v[static_cast<std::size_t>(i)] = x;
    }
    std::sort(v.begin(), v.end());
    double sum = 0.0;
    for (double x : v) sum += x;
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  return worst;
}

void DensitySet::require_feasible(double tol) const {
  require(static_cast<int>(fields.size()) == k, "DensitySet: field count differs from k");
  for (const auto& f : fields) require(f.grid == grid, "DensitySet: fields live on different grids");
  require(feasibility_error() <= tol, "DensitySet: densities are not on the simplex");
}

DensitySet DensitySet::from_labels(const Grid& g, int count, const std::vector<int>& labels) {
  require(labels.size() == g.size(), "from_labels: label count does not match the grid");
  DensitySet d(g, count);
  for (std::size_t p = 0; p < g.size(); ++p) {
    require(labels[p] >= 0 && labels[p] < count, "from_labels: label out of range");
    d.fields[static_cast<std::size_t>(labels[p])][p] = 1.0;
  }
  return d;
}

}  // namespace minpart
