#include "mmot/splitting.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "mmot/errors.hpp"
#include "mmot/util.hpp"

namespace mmot {

namespace {

std::string point_string(const ProductIndex& p) {
  std::ostringstream out;
  out << '(';
  for (std::size_t a = 0; a < p.size(); ++a) {
    if (a) out << ',';
    out << p[a];
  }
  out << ')';
  return out.str();
}

double tuple_sum(const PotentialTuple& tuple, const ProductIndex& point) {
  double s = 0.0;
  for (std::size_t axis = 0; axis < point.size(); ++axis) {
    s += tuple.values[axis][point[axis]];
  }
  return s;
}

void check_shapes(const PotentialTuple& tuple,
                  const std::vector<MeasurePtr>& marginals) {
  if (tuple.values.size() != marginals.size()) {
    throw InvalidInput("potential tuple has " + std::to_string(tuple.values.size()) +
                       " components for " + std::to_string(marginals.size()) + " marginals");
  }
  for (std::size_t axis = 0; axis < marginals.size(); ++axis) {
    if (tuple.values[axis].size() != marginals[axis]->size()) {
      throw InvalidInput("potential component " + std::to_string(axis) +
                         " does not match its marginal support size");
    }
  }
}

}  // namespace

TupleCheck verify_tuple(const PotentialTuple& tuple, const CostOracle& cost,
                        const std::vector<MeasurePtr>& marginals,
                        double feastol_scale, std::size_t cap) {
  check_shapes(tuple, marginals);
  std::vector<std::size_t> shape;
  for (const auto& m : marginals) shape.push_back(m->size());
  checked_product_size(shape, cap);

  TupleCheck check;
  check.worst_violation = -std::numeric_limits<double>::infinity();
  ProductIndex idx(marginals.size(), 0);
  do {
    const double c = cost.evaluate(idx, marginals);
    check.cost_scale = std::max(check.cost_scale, std::abs(c));
    const double violation = tuple_sum(tuple, idx) - c;
    if (violation > check.worst_violation) {
      check.worst_violation = violation;
      check.worst_point = idx;
    }
  } while (next_index(idx, shape));

  check.feastol = feastol_scale * (1.0 + check.cost_scale);
  check.feasible = check.worst_violation <= check.feastol;
  return check;
}

SplittingSet extract_splitting_set(const TransportPlan& plan,
                                   const PotentialTuple& tuple,
                                   const CostOracle& cost, SplitMode mode,
                                   double eqtol_scale, double feastol_scale,
                                   std::size_t cap) {
  const TupleCheck check = verify_tuple(tuple, cost, plan.spaces(), feastol_scale, cap);
  if (!check.feasible) {
    throw CertificateInvalid("potential tuple infeasible at product point " +
                             point_string(check.worst_point) + " (violation " +
                             format_double(check.worst_violation) + " > feastol " +
                             format_double(check.feastol) + ")");
  }

  SplittingSet set;
  set.tuple = tuple;
  set.spaces = plan.spaces();
  set.cost_scale = check.cost_scale;
  set.eqtol = eqtol_scale * (1.0 + check.cost_scale);

  if (mode == SplitMode::Support) {
    for (const auto& e : plan.entries()) {
      const double slack = tuple_sum(tuple, e.point) - cost.evaluate(e.point, plan.spaces());
      if (std::abs(slack) <= set.eqtol) {
        set.points.push_back(SplitPoint{e.point, slack});
      }
    }
    return set;
  }

  const auto shape = plan.shape();
  ProductIndex idx(shape.size(), 0);
  do {
    const double slack = tuple_sum(tuple, idx) - cost.evaluate(idx, plan.spaces());
    if (std::abs(slack) <= set.eqtol) {
      set.points.push_back(SplitPoint{idx, slack});
    }
  } while (next_index(idx, shape));
  return set;
}

std::vector<FiberReport> fiber_reports(const SplittingSet& set,
                                       const CostOracle& cost) {
  GradientEvaluator ge(cost, set.spaces);

  std::map<std::uint32_t, std::vector<std::size_t>> fibers;
  for (std::size_t i = 0; i < set.points.size(); ++i) {
    fibers[set.points[i].point[0]].push_back(i);
  }

  std::vector<FiberReport> reports;
  reports.reserve(fibers.size());
  for (const auto& [x1, members] : fibers) {
    std::vector<Gradient1> grads;
    grads.reserve(members.size());
    for (std::size_t i : members) grads.push_back(ge.at(set.points[i].point));

    double spread = 0.0;
    for (std::size_t a = 0; a < grads.size(); ++a) {
      for (std::size_t b = a + 1; b < grads.size(); ++b) {
        double d2 = 0.0;
        for (std::size_t k = 0; k < grads[a].vec.size(); ++k) {
          const double diff = grads[a].vec[k] - grads[b].vec[k];
          d2 += diff * diff;
        }
        spread = std::max(spread, std::sqrt(d2));
      }
    }
    reports.push_back(FiberReport{x1, members, spread});
  }
  return reports;
}

double duality_gap(const TransportPlan& plan, const PotentialTuple& potentials,
                   const CostOracle& cost) {
  const TupleCheck check = verify_tuple(potentials, cost, plan.spaces());
  if (!check.feasible) {
    throw CertificateInvalid("potential tuple infeasible at product point " +
                             point_string(check.worst_point) + " (violation " +
                             format_double(check.worst_violation) + " > feastol " +
                             format_double(check.feastol) + ")");
  }
  NeumaierSum primal;
  for (const auto& e : plan.entries()) {
    primal.add(e.mass * cost.evaluate(e.point, plan.spaces()));
  }
  NeumaierSum dual;
  for (std::size_t axis = 0; axis < plan.axes(); ++axis) {
    const auto& space = plan.spaces()[axis];
    for (std::size_t a = 0; a < space->size(); ++a) {
      dual.add(potentials.values[axis][a] * space->weight(a));
    }
  }
  return primal.value() - dual.value();
}

}  // namespace mmot
