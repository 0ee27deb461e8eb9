#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "mmot/measure.hpp"

namespace mmot {

// Enumeration cap shared by every routine that walks a full product support.
inline constexpr std::size_t kDefaultSizeCap = 1'000'000;

struct PlanEntry {
  ProductIndex point;
  double mass = 0.0;
};

// Sparse probability measure on the product of its spaces' supports.
// Entries are kept sorted by flattened (row-major) index. The spaces give
// every axis its coordinates; whether the plan actually couples the spaces'
// own weights is a property checked where it matters (marginal_deviation).
class TransportPlan {
public:
  // Rejects out-of-range indices, non-positive masses, duplicate points,
  // and total mass off 1 by more than 1e-12.
  TransportPlan(std::vector<MeasurePtr> spaces, std::vector<PlanEntry> entries);

  std::size_t axes() const { return spaces_.size(); }
  const std::vector<MeasurePtr>& spaces() const { return spaces_; }
  const MeasurePtr& space(std::size_t axis) const;
  const std::vector<PlanEntry>& entries() const { return entries_; }
  std::vector<std::size_t> shape() const;
  std::size_t support_size() const { return entries_.size(); }
  double total_mass() const { return total_mass_; }

  // Max over axes of the total-variation distance between the axis
  // projection and that axis space's own weights.
  double marginal_deviation() const;

  // Columns i1,...,in,mass; rows ascending in flattened index order.
  std::string to_csv() const;

private:
  std::vector<MeasurePtr> spaces_;
  std::vector<PlanEntry> entries_;
  double total_mass_ = 0.0;
};

// Axis marginal of a plan; atoms inherit coordinates from the axis space.
DiscreteMeasure project(const TransportPlan& plan, std::size_t axis);

// The plan (Id x map)#source: the mass of source atom j lands at
// (j, tails[j]). tails must assign one tail per source atom.
TransportPlan pushforward(const MeasurePtr& source,
                          const std::vector<ProductIndex>& tails,
                          std::vector<MeasurePtr> tail_spaces);

// Row-major strides (last axis fastest).
std::vector<std::size_t> strides_for(const std::vector<std::size_t>& shape);

// Product of the shape entries; throws TooLarge beyond cap.
std::size_t checked_product_size(const std::vector<std::size_t>& shape,
                                 std::size_t cap);

std::size_t flatten_index(const ProductIndex& idx,
                          const std::vector<std::size_t>& strides);

ProductIndex unflatten_index(std::size_t flat,
                             const std::vector<std::size_t>& shape);

// Odometer step over a product shape; returns false after the last tuple.
bool next_index(ProductIndex& idx, const std::vector<std::size_t>& shape);

}  // namespace mmot
