#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "mmot/plan.hpp"

namespace mmot {

// First-variable gradient D1 c at a product point; one entry per coordinate
// of the first space.
struct Gradient1 {
  std::vector<double> vec;
};

// Builtin analytic families, all with closed-form D1 c:
//   Quadratic: sum_{i<j} |x_i - x_j|^2       (any arity, equal dims)
//   Product:   -x_1 * x_2 * ... * x_n        (1-d factors)
//   TwoLevel:  (x_2^2 - x_1)^2               (n = 2, 1-d)
//   Cosine:    cos(2 pi (x_1 - x_2))         (n = 2, 1-d, periodic)
//   Zero:      0
enum class BuiltinCost { Quadratic, Product, TwoLevel, Cosine, Zero };

// Evaluates c(x_1,...,x_n) and D1 c on product supports. Builtin costs use
// closed forms; tabulated costs are exact lookups and differentiate by
// finite differences on a grid detected from the first space's support.
class CostOracle {
public:
  static CostOracle builtin(BuiltinCost id, std::size_t arity, double scale = 1.0);
  static CostOracle tabulated(std::vector<std::size_t> shape,
                              std::vector<double> values);

  // { "kind": "builtin", "id": "...", "params": { "scale": s } } or
  // { "kind": "tabulated", "shape": [...], "values": [row-major flat] }.
  static CostOracle from_json(const std::string& text);
  std::string to_json() const;

  bool is_tabulated() const { return tabulated_; }
  std::size_t arity() const;
  BuiltinCost builtin_id() const;
  double scale() const { return scale_; }
  // Cosine family: the twist class is finite on [0,1) but not on the line.
  bool periodic() const;

  double evaluate(const ProductIndex& point,
                  const std::vector<MeasurePtr>& spaces) const;
  Gradient1 gradient_d1(const ProductIndex& point,
                        const std::vector<MeasurePtr>& spaces) const;

  // Largest |c| over the whole product support; feeds every scale-aware
  // tolerance in the toolkit.
  double max_abs(const std::vector<MeasurePtr>& spaces,
                 std::size_t cap = kDefaultSizeCap) const;

  const std::vector<std::size_t>& table_shape() const { return shape_; }
  const std::vector<double>& table_values() const { return values_; }

private:
  CostOracle() = default;
  void check_spaces(const std::vector<MeasurePtr>& spaces) const;

  bool tabulated_ = false;
  BuiltinCost id_ = BuiltinCost::Zero;
  std::size_t arity_ = 0;
  double scale_ = 1.0;
  std::vector<std::size_t> shape_;
  std::vector<double> values_;

  friend class GradientEvaluator;
};

// Batch gradient evaluation. For tabulated oracles the first space must be
// an axis-aligned grid; detection runs once in the constructor and throws
// GradientUnavailable otherwise. Central differences in the grid interior,
// one-sided (three-point where possible) at the boundary, step equal to the
// grid spacing.
class GradientEvaluator {
public:
  GradientEvaluator(const CostOracle& oracle, std::vector<MeasurePtr> spaces);
  Gradient1 at(const ProductIndex& point) const;
  int dim1() const { return dim1_; }

private:
  const CostOracle& oracle_;
  std::vector<MeasurePtr> spaces_;
  int dim1_ = 0;
  // grid data (tabulated only)
  std::vector<std::size_t> extent_;          // lattice points per x1 axis
  std::vector<double> step_;                 // spacing per x1 axis
  std::vector<std::size_t> lattice_of_atom_; // flattened lattice id per atom
  std::vector<std::uint32_t> atom_of_lattice_;
  std::vector<std::size_t> lattice_strides_;
  double table_at(std::uint32_t x1_atom, const ProductIndex& point) const;
};

}  // namespace mmot
