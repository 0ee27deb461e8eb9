#pragma once

#include <cstddef>
#include <vector>

#include "mmot/cost.hpp"
#include "mmot/plan.hpp"

namespace mmot {

// One scalar potential per marginal, indexed by atom. Feasible when
// u_1(x_1) + ... + u_n(x_n) <= c(x_1,...,x_n) holds on the whole product
// support (within feastol).
struct PotentialTuple {
  std::vector<std::vector<double>> values;
};

struct SolveCertificate {
  double primal_value = 0.0;
  double dual_value = 0.0;
  double gap = 0.0;  // primal - dual, >= -1e-9
  std::size_t iterations = 0;
  bool vertex = false;  // true when the plan is a basic solution
};

struct Solution {
  TransportPlan plan;
  PotentialTuple potentials;
  SolveCertificate certificate;
};

struct SolverOptions {
  std::size_t size_cap = kDefaultSizeCap;
  // Consecutive degenerate pivots tolerated before Bland's rule engages.
  // Transport polytopes are highly degenerate; Bland's rule guarantees
  // escape from a stalled vertex, and a non-degenerate pivot resets it.
  int bland_threshold = 50;
  std::size_t max_iterations = 0;  // 0: derived from the instance size
  int refactor_period = 100;
};

// Exact primal-dual solve of
//   min  sum c(P) pi(P)   s.t.  axis marginals fixed, pi >= 0
// by revised simplex on the flattened tensor LP. Returns an optimal basic
// plan (support <= sum |supp mu_i| - n + 1), optimal dual potentials, and a
// gap certificate. Deterministic: fixed pivot rule and tie-breaking.
Solution solve_exact(const CostOracle& cost, std::vector<MeasurePtr> marginals,
                     const SolverOptions& options = {});

struct EntropicResult {
  TransportPlan plan;
  bool converged = false;        // false: max_iter hit; plan still feasible
  std::size_t iterations = 0;    // full axis sweeps performed
  double marginal_error = 0.0;   // max-axis TV error before rounding
  double objective = 0.0;
};

// Multi-marginal Sinkhorn in the log domain followed by a rounding step
// that restores exact marginals (axis-wise capping plus a product-measure
// correction of the residual). Non-convergence is reported via the flag,
// never silently.
EntropicResult solve_entropic(const CostOracle& cost,
                              std::vector<MeasurePtr> marginals,
                              double epsilon, std::size_t max_iter,
                              std::size_t size_cap = kDefaultSizeCap);

// I_c(plan) - sum_i <u_i, mu_i>. Throws CertificateInvalid (naming the
// worst product point) when the potentials are infeasible.
double duality_gap(const TransportPlan& plan, const PotentialTuple& potentials,
                   const CostOracle& cost);

// Scale-aware tolerances used across the toolkit.
inline double feastol_for(double cost_scale) { return 1e-9 * (1.0 + cost_scale); }
inline double eqtol_for(double cost_scale) { return 1e-8 * (1.0 + cost_scale); }

}  // namespace mmot
