#pragma once

#include <cstddef>
#include <vector>

#include "mmot/cost.hpp"
#include "mmot/plan.hpp"
#include "mmot/solver.hpp"

namespace mmot {

struct TupleCheck {
  bool feasible = false;
  double worst_violation = 0.0;  // max over product points of sum u_i - c
  ProductIndex worst_point;
  double feastol = 0.0;
  double cost_scale = 0.0;
};

// True iff sum_i u_i(x_i) <= c(x) + feastol at every product point; the
// most violated point is reported either way.
TupleCheck verify_tuple(const PotentialTuple& tuple, const CostOracle& cost,
                        const std::vector<MeasurePtr>& marginals,
                        double feastol_scale = 1e-9,
                        std::size_t cap = kDefaultSizeCap);

enum class SplitMode { Support, Full };

struct SplitPoint {
  ProductIndex point;
  double slack = 0.0;  // sum u_i - c, within eqtol of zero for members
};

// Set of product points where the tuple attains equality with the cost.
// Support mode scans the plan support only; full mode enumerates the whole
// product (the set S itself, which may strictly contain the support).
struct SplittingSet {
  std::vector<SplitPoint> points;
  PotentialTuple tuple;
  std::vector<MeasurePtr> spaces;
  double eqtol = 0.0;
  double cost_scale = 0.0;
};

SplittingSet extract_splitting_set(const TransportPlan& plan,
                                   const PotentialTuple& tuple,
                                   const CostOracle& cost, SplitMode mode,
                                   double eqtol_scale = 1e-8,
                                   double feastol_scale = 1e-9,
                                   std::size_t cap = kDefaultSizeCap);

// All set points over one first-axis atom, with the spread of their
// first-variable gradients. In the continuum every fiber over one x1 shares
// a single gradient; the spread measures how far a discrete instance is
// from that identity, and bounds the grouping radius seen by the twist
// analysis.
struct FiberReport {
  std::uint32_t x1_index = 0;
  std::vector<std::size_t> members;  // indices into SplittingSet::points
  double gradient_spread = 0.0;      // max pairwise Euclidean distance
};

std::vector<FiberReport> fiber_reports(const SplittingSet& set,
                                       const CostOracle& cost);

}  // namespace mmot
