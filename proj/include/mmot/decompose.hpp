#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "mmot/plan.hpp"
#include "mmot/twist.hpp"

namespace mmot {

// Decomposition of a plan into k maps G_i with weight functions alpha_i:
// the plan equals sum_i alpha_i(x) mu_1(x) placed at (x, G_i(x)). Atoms with
// fewer than k fibers are padded with G_1 and alpha = 0, so every map is
// total on supp mu_1 and the alphas sum to 1 at every atom.
struct MongeDecomposition {
  std::size_t k = 0;
  std::vector<std::vector<ProductIndex>> maps;  // maps[i][a] = tail of atom a
  std::vector<std::vector<double>> alphas;      // alphas[i][a] in [0,1]
  std::vector<MeasurePtr> spaces;               // all n spaces of the source plan
};

// Nested first-axis supports B_1 >= B_2 >= ... >= B_k: B_i holds the atoms
// with at least i distinct fibers, so k is the largest i with B_i nonempty.
struct PeelingTrace {
  std::vector<std::vector<std::uint32_t>> b_sets;
  std::vector<double> masses;  // mu_1(B_i)
};

struct PeelResult {
  MongeDecomposition decomposition;
  PeelingTrace trace;
};

struct PeelOptions {
  // Guards degenerate dense plans (product measures land in the k = infinity
  // regime); exceeding the cap aborts with a diagnostic.
  std::size_t k_cap = 64;
};

// Fiber peeling. Fibers at each first-axis atom are ordered by descending
// mass, ties broken by lexicographic tail index, which makes the result
// independent of entry storage order. Works on any feasible plan, optimal
// or not.
PeelResult peel(const TransportPlan& plan, const PeelOptions& options = {});

// Reassembles the plan sum_i alpha_i (Id x G_i)#mu1, summing masses at
// coinciding product points.
TransportPlan reconstruct(const MongeDecomposition& dec, const MeasurePtr& mu1);

struct KBoundWitness {
  std::uint32_t x1_index = 0;
  std::size_t fiber_count = 0;
  std::size_t max_class_size = 0;
};

struct KBoundVerdict {
  bool consistent = false;  // k <= m_observed
  std::size_t k = 0;
  std::size_t m_observed = 0;
  std::optional<KBoundWitness> witness;  // set when inconsistent
};

// Checks the decomposition cardinality against the twist report computed on
// the same instance. Finite instances with non-generic weights can fail the
// bound (vertex plans may split mass at degenerate ties), so the verdict is
// per-instance, never a global claim.
KBoundVerdict verify_k_bound(const MongeDecomposition& dec,
                             const TwistReport& twist);

}  // namespace mmot
