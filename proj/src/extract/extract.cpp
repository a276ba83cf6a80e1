#include "minpart/extract.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <ostream>

#include "minpart/eigensolve.hpp"
#include "minpart/relax.hpp"

namespace minpart {

namespace {

struct Components {
  std::vector<int> id;      // per node
  std::vector<int> label;   // per component
  std::vector<std::size_t> size;
};

Components label_regions(const Grid& grid, const std::vector<int>& labels) {
  Components c;
  c.id.assign(grid.size(), -1);
  std::deque<std::size_t> queue;
  for (std::size_t s = 0; s < grid.size(); ++s) {
    if (c.id[s] >= 0) continue;
    const int comp = static_cast<int>(c.label.size());
    c.label.push_back(labels[s]);
    c.size.push_back(0);
    c.id[s] = comp;
    queue.push_back(s);
    while (!queue.empty()) {
      const std::size_t p = queue.front();
      queue.pop_front();
      ++c.size.back();
      for (int d = 0; d < 4; ++d) {
        const std::size_t q = neighbor(grid, p, d);
        if (c.id[q] < 0 && labels[q] == labels[s]) {
          c.id[q] = comp;
          queue.push_back(q);
        }
      }
    }
  }
  return c;
}

// Merges small and secondary components into the neighboring label they touch most.
void clean_labels(const Grid& grid, int k, std::vector<int>& labels, double min_fraction) {
  const double threshold = min_fraction * static_cast<double>(grid.size());
  for (;;) {
    const Components comps = label_regions(grid, labels);
    const std::size_t nc = comps.label.size();
    std::vector<int> largest(static_cast<std::size_t>(k), -1);
    for (std::size_t c = 0; c < nc; ++c) {
      int& best = largest[static_cast<std::size_t>(comps.label[c])];
      if (best < 0 || comps.size[c] > comps.size[static_cast<std::size_t>(best)]) best = static_cast<int>(c);
    }
    std::vector<std::size_t> candidates;
    for (std::size_t c = 0; c < nc; ++c) {
      const bool small = static_cast<double>(comps.size[c]) < threshold;
      const bool secondary = largest[static_cast<std::size_t>(comps.label[c])] != static_cast<int>(c);
      if (small || secondary) candidates.push_back(c);
    }
    if (candidates.empty()) return;
    std::stable_sort(candidates.begin(), candidates.end(),
                     [&](std::size_t x, std::size_t y) { return comps.size[x] < comps.size[y]; });
    // Contacts of every candidate with the labels around it.
    std::map<std::size_t, std::vector<std::size_t>> touch;
    for (std::size_t c : candidates) touch[c].assign(static_cast<std::size_t>(k), 0);
    std::vector<std::vector<std::size_t>> members(nc);
    for (std::size_t p = 0; p < grid.size(); ++p) {
      const auto c = static_cast<std::size_t>(comps.id[p]);
      auto it = touch.find(c);
      if (it == touch.end()) continue;
      members[c].push_back(p);
    }
    bool changed = false;
    for (std::size_t c : candidates) {
      std::vector<std::size_t> count(static_cast<std::size_t>(k), 0);
      const int own = labels[members[c].front()];
      for (std::size_t p : members[c]) {
        for (int d = 0; d < 4; ++d) {
          const int l = labels[neighbor(grid, p, d)];
          if (l != own) ++count[static_cast<std::size_t>(l)];
        }
      }
      int target = -1;
      for (int l = 0; l < k; ++l) {
        if (count[static_cast<std::size_t>(l)] > 0 &&
            (target < 0 || count[static_cast<std::size_t>(l)] > count[static_cast<std::size_t>(target)])) {
          target = l;
        }
      }
      if (target < 0) continue;
      for (std::size_t p : members[c]) labels[p] = target;
      changed = true;
    }
    if (!changed) return;
  }
}

}  // namespace

StrongPartition partition_from_labels(const Grid& grid, int k, std::vector<int> labels,
                                      const ExtractOptions& options) {
  require(k >= 1, "partition: k must be >= 1");
  require(labels.size() == grid.size(), "partition: label count does not match the grid");
  require(options.min_fraction >= 0.0 && options.min_fraction < 1.0,
          "partition: min_fraction must lie in [0, 1)");
  require(options.wall_fraction > 0.0 && options.wall_fraction <= 1.0,
          "partition: wall_fraction must lie in (0, 1]");
  for (int l : labels) require(l >= 0 && l < k, "partition: label out of range");

  clean_labels(grid, k, labels, options.min_fraction);

  StrongPartition part{grid, k, std::move(labels), {}, {}, {}, 0.0};
  for (int i = 0; i < k; ++i) {
    DomainMask mask(grid, options.wall_fraction);
    for (std::size_t p = 0; p < grid.size(); ++p) mask.set_inside(p, part.labels[p] == i);
    if (mask.empty()) {
      throw NumericalError("degenerate partition: label " + std::to_string(i + 1) + " vanished");
    }
    part.areas.push_back(mask.area());
    part.lambdas.push_back(dirichlet_lambda1(mask));
    part.masks.push_back(std::move(mask));
  }
  part.energy = *std::max_element(part.lambdas.begin(), part.lambdas.end());
  return part;
}

StrongPartition extract_strong(const DensitySet& dens, const ExtractOptions& options) {
  dens.require_feasible(1e-6);
  std::vector<int> labels(dens.grid.size(), 0);
  for (std::size_t p = 0; p < dens.grid.size(); ++p) {
    double best = dens.fields[0][p];
    for (int i = 1; i < dens.k; ++i) {
      const double v = dens.fields[static_cast<std::size_t>(i)][p];
      if (v > best) {
        best = v;
        labels[p] = i;
      }
    }
  }
  return partition_from_labels(dens.grid, dens.k, std::move(labels), options);
}

double partition_energy(const StrongPartition& part, double p) {
  return energy_lp(part.lambdas, p);
}

NeighborGraph neighbor_graph(const StrongPartition& part, int min_contact) {
  const Grid& grid = part.grid;
  NeighborGraph g;
  g.k = part.k;
  g.contact.assign(static_cast<std::size_t>(part.k), std::vector<int>(static_cast<std::size_t>(part.k), 0));
  g.adjacency.assign(static_cast<std::size_t>(part.k), {});
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const int a = part.labels[p];
    for (int d : {kEast, kNorth}) {
      const int b = part.labels[neighbor(grid, p, d)];
      if (a == b) continue;
      ++g.contact[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
      ++g.contact[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)];
    }
  }
  for (int i = 0; i < part.k; ++i) {
    for (int j = i + 1; j < part.k; ++j) {
      if (g.contact[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] > min_contact) {
        g.edges.emplace_back(i, j);
        g.adjacency[static_cast<std::size_t>(i)].push_back(j);
        g.adjacency[static_cast<std::size_t>(j)].push_back(i);
      }
    }
  }
  return g;
}

BipartiteResult is_bipartite(const NeighborGraph& graph) {
  const auto n = static_cast<std::size_t>(graph.k);
  std::vector<int> color(n, -1);
  std::vector<int> parent(n, -1);
  std::vector<int> depth(n, 0);
  BipartiteResult out;
  for (std::size_t s = 0; s < n; ++s) {
    if (color[s] >= 0) continue;
    color[s] = 0;
    std::deque<int> queue{static_cast<int>(s)};
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      for (int v : graph.adjacency[static_cast<std::size_t>(u)]) {
        if (color[static_cast<std::size_t>(v)] < 0) {
          color[static_cast<std::size_t>(v)] = 1 - color[static_cast<std::size_t>(u)];
          parent[static_cast<std::size_t>(v)] = u;
          depth[static_cast<std::size_t>(v)] = depth[static_cast<std::size_t>(u)] + 1;
          queue.push_back(v);
        } else if (color[static_cast<std::size_t>(v)] == color[static_cast<std::size_t>(u)]) {
          // Walk both tree paths up to their common ancestor.
          std::vector<int> left{u};
          std::vector<int> right{v};
          int x = u;
          int y = v;
          while (x != y) {
            if (depth[static_cast<std::size_t>(x)] >= depth[static_cast<std::size_t>(y)]) {
              x = parent[static_cast<std::size_t>(x)];
              left.push_back(x);
            } else {
              y = parent[static_cast<std::size_t>(y)];
              right.push_back(y);
            }
          }
          right.pop_back();
          out.odd_cycle = left;
          out.odd_cycle.insert(out.odd_cycle.end(), right.rbegin(), right.rend());
          out.bipartite = false;
          return out;
        }
      }
    }
  }
  out.bipartite = true;
  out.coloring = color;
  return out;
}

int count_nodal_domains(const GridField& u, const DomainMask* mask) {
  const Grid& grid = u.grid;
  if (mask) require(mask->grid() == grid, "count_nodal_domains: mask lives on another grid");
  double top = 0.0;
  for (std::size_t p = 0; p < grid.size(); ++p) {
    if (!mask || mask->inside(p)) top = std::max(top, std::abs(u[p]));
  }
  if (top == 0.0) return 0;
  const double threshold = 1e-9 * top;
  auto in = [&](std::size_t p) { return !mask || mask->inside(p); };
  int positive = 0;
  int negative = 0;
  label_components(grid, [&](std::size_t p) { return in(p) && u[p] > threshold; }, positive);
  label_components(grid, [&](std::size_t p) { return in(p) && u[p] < -threshold; }, negative);
  return positive + negative;
}

void write_labels_csv(std::ostream& out, const StrongPartition& part) {
  out << "i,j,label\n";
  for (std::size_t p = 0; p < part.grid.size(); ++p) {
    out << part.grid.i_of(p) << ',' << part.grid.j_of(p) << ',' << part.labels[p] + 1 << '\n';
  }
}

void write_labels_pgm(std::ostream& out, const StrongPartition& part) {
  std::vector<int> shifted(part.labels);
  for (int& l : shifted) ++l;
  write_pgm(out, part.grid, shifted, part.k);
}

}  // namespace minpart
