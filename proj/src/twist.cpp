#include "mmot/twist.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "mmot/errors.hpp"

namespace mmot {

namespace {

struct UnionFind {
  explicit UnionFind(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), std::size_t{0});
  }
  std::size_t find(std::size_t a) {
    while (parent[a] != a) {
      parent[a] = parent[parent[a]];
      a = parent[a];
    }
    return a;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b) parent[b] = a; else parent[a] = b;
  }
  std::vector<std::size_t> parent;
};

double gradient_distance(const Gradient1& a, const Gradient1& b) {
  double d2 = 0.0;
  for (std::size_t k = 0; k < a.vec.size(); ++k) {
    const double diff = a.vec[k] - b.vec[k];
    d2 += diff * diff;
  }
  return std::sqrt(d2);
}

double gradient_norm(const Gradient1& g) {
  double n2 = 0.0;
  for (double v : g.vec) n2 += v * v;
  return std::sqrt(n2);
}

// Euclidean distance between the tail coordinates (axes 2..n) of two set
// points.
double tail_distance(const SplittingSet& set, const ProductIndex& a,
                     const ProductIndex& b) {
  double d2 = 0.0;
  for (std::size_t axis = 1; axis < set.spaces.size(); ++axis) {
    const auto& ca = set.spaces[axis]->coords(a[axis]);
    const auto& cb = set.spaces[axis]->coords(b[axis]);
    for (std::size_t k = 0; k < ca.size(); ++k) {
      const double diff = ca[k] - cb[k];
      d2 += diff * diff;
    }
  }
  return std::sqrt(d2);
}

struct GradientTable {
  std::vector<Gradient1> grads;            // for classed points
  std::vector<std::size_t> classed;        // set indices with a gradient
  std::vector<std::size_t> excluded;       // set indices without one
  std::vector<std::ptrdiff_t> slot;        // set index -> position in grads, -1 if excluded
  double max_norm = 0.0;
};

// Points without a usable gradient are excluded from classing and reported
// separately; the level sets are defined only inside the differentiability
// set.
GradientTable evaluate_gradients(const SplittingSet& set, const CostOracle& cost) {
  GradientEvaluator ge(cost, set.spaces);
  GradientTable table;
  table.slot.assign(set.points.size(), -1);
  for (std::size_t i = 0; i < set.points.size(); ++i) {
    try {
      Gradient1 g = ge.at(set.points[i].point);
      table.max_norm = std::max(table.max_norm, gradient_norm(g));
      table.slot[i] = static_cast<std::ptrdiff_t>(table.grads.size());
      table.grads.push_back(std::move(g));
      table.classed.push_back(i);
    } catch (const GradientUnavailable&) {
      table.excluded.push_back(i);
    }
  }
  return table;
}

std::map<std::uint32_t, std::vector<std::size_t>> group_by_x1(
    const SplittingSet& set, const std::vector<std::size_t>& classed) {
  std::map<std::uint32_t, std::vector<std::size_t>> fibers;
  for (std::size_t i : classed) fibers[set.points[i].point[0]].push_back(i);
  return fibers;
}

std::vector<TwistClass> collect_classes(const SplittingSet& set, UnionFind& uf,
                                        const std::vector<std::size_t>& classed,
                                        std::size_t min_size) {
  std::map<std::size_t, std::vector<std::size_t>> by_root;
  for (std::size_t i : classed) by_root[uf.find(i)].push_back(i);
  std::vector<TwistClass> classes;
  for (auto& [root, members] : by_root) {
    if (members.size() < min_size) continue;
    std::sort(members.begin(), members.end());
    classes.push_back(TwistClass{set.points[members.front()].point[0], std::move(members)});
  }
  std::sort(classes.begin(), classes.end(), [](const TwistClass& a, const TwistClass& b) {
    if (a.x1_index != b.x1_index) return a.x1_index < b.x1_index;
    return a.members.front() < b.members.front();
  });
  return classes;
}

}  // namespace

TwistReport twist_cardinality(const SplittingSet& set, const CostOracle& cost,
                              const TwistOptions& options) {
  GradientTable table = evaluate_gradients(set, cost);
  const double radius = options.grouping_radius > 0.0
                            ? options.grouping_radius
                            : options.grouping_scale * (1.0 + table.max_norm);

  UnionFind uf(set.points.size());
  for (const auto& [x1, members] : group_by_x1(set, table.classed)) {
    (void)x1;
    for (std::size_t a = 0; a < members.size(); ++a) {
      for (std::size_t b = a + 1; b < members.size(); ++b) {
        const auto& ga = table.grads[table.slot[members[a]]];
        const auto& gb = table.grads[table.slot[members[b]]];
        if (gradient_distance(ga, gb) <= radius) uf.unite(members[a], members[b]);
      }
    }
  }

  TwistReport report;
  report.grouping_radius = radius;
  report.x1_radius = options.x1_radius;
  report.classes = collect_classes(set, uf, table.classed, 1);
  report.excluded_nondifferentiable = table.excluded;
  report.per_point.assign(set.points.size(), 0);
  for (const auto& cls : report.classes) {
    for (std::size_t i : cls.members) report.per_point[i] = cls.members.size();
    report.m_observed = std::max(report.m_observed, cls.members.size());
  }
  return report;
}

bool check_generalized_twist(const TwistReport& report) {
  (void)report;
  // Classes of a finite set are finite by construction. The refinement
  // sweep (m_observed across resolutions) is the informative check.
  return true;
}

AccumulationReport accumulation_scan(const SplittingSet& set,
                                     const CostOracle& cost,
                                     double proximity_radius,
                                     const TwistOptions& options) {
  if (!(proximity_radius >= 0.0)) {
    throw InvalidInput("proximity radius must be non-negative");
  }
  GradientTable table = evaluate_gradients(set, cost);
  const double radius = options.grouping_radius > 0.0
                            ? options.grouping_radius
                            : options.grouping_scale * (1.0 + table.max_norm);

  AccumulationReport report;
  report.proximity_radius = proximity_radius;
  report.grouping_radius = radius;

  UnionFind uf(set.points.size());
  for (const auto& [x1, members] : group_by_x1(set, table.classed)) {
    (void)x1;
    for (std::size_t a = 0; a < members.size(); ++a) {
      for (std::size_t b = a + 1; b < members.size(); ++b) {
        const std::size_t ia = members[a];
        const std::size_t ib = members[b];
        const auto& ga = table.grads[table.slot[ia]];
        const auto& gb = table.grads[table.slot[ib]];
        if (gradient_distance(ga, gb) > radius) continue;
        if (tail_distance(set, set.points[ia].point, set.points[ib].point) > proximity_radius) {
          continue;
        }
        uf.unite(ia, ib);
        if (!report.witness) report.witness = std::make_pair(ia, ib);
        report.locally_one_twisted = false;
      }
    }
  }
  report.clusters = collect_classes(set, uf, table.classed, 2);
  return report;
}

}  // namespace mmot
