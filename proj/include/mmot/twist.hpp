#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "mmot/splitting.hpp"

namespace mmot {

struct TwistOptions {
  // Absolute gradient grouping radius; 0 selects the scale-aware default
  // grouping_scale * (1 + max ||D1 c|| over the set). Gradient proximity is
  // not transitive, so classes are connected components of the proximity
  // graph (union-find closure): deterministic and order-independent.
  double grouping_radius = 0.0;
  double grouping_scale = 1e-6;
  // "Same x1" means identical atom index; the coordinate tolerance is kept
  // in the report for provenance and is always 0 here.
  double x1_radius = 0.0;
};

struct TwistClass {
  std::uint32_t x1_index = 0;
  std::vector<std::size_t> members;  // indices into SplittingSet::points
};

struct TwistReport {
  // Class cardinality per set point (aligned with SplittingSet::points);
  // 0 marks points excluded for lack of a gradient.
  std::vector<std::size_t> per_point;
  std::size_t m_observed = 0;  // max class cardinality
  double grouping_radius = 0.0;
  double x1_radius = 0.0;
  std::vector<TwistClass> classes;  // sorted by (x1, first member)
  std::vector<std::size_t> excluded_nondifferentiable;
};

// Cardinality of the gradient-equivalence classes {points of S with the
// same x1 and the same D1 c}, grouped exactly on the x1 index and within
// grouping_radius on gradients.
TwistReport twist_cardinality(const SplittingSet& set, const CostOracle& cost,
                              const TwistOptions& options = {});

// Every class of a finite set is finite, so this is always true for a
// single report; the informative reading is whether m_observed stabilizes
// across grid refinements (see the sweep front-end).
bool check_generalized_twist(const TwistReport& report);

struct AccumulationReport {
  // Groups of set points sharing x1, gradient-equal within the grouping
  // radius, and with tail coordinates within proximity_radius of each other.
  std::vector<TwistClass> clusters;
  bool locally_one_twisted = true;
  // First witness pair when the verdict is "violation".
  std::optional<std::pair<std::size_t, std::size_t>> witness;
  double proximity_radius = 0.0;
  double grouping_radius = 0.0;
};

// Discrete analogue of the accumulation-point argument: a violation of
// local 1-twistedness at scale proximity_radius is a pair of distinct set
// points with the same x1, equal gradients, and nearby tails.
AccumulationReport accumulation_scan(const SplittingSet& set,
                                     const CostOracle& cost,
                                     double proximity_radius,
                                     const TwistOptions& options = {});

}  // namespace mmot
