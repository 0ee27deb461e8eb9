#include "mmot/plan.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mmot/errors.hpp"
#include "mmot/util.hpp"

namespace mmot {

namespace {
constexpr double kMassSumTol = 1e-12;
}

std::vector<std::size_t> strides_for(const std::vector<std::size_t>& shape) {
  std::vector<std::size_t> strides(shape.size(), 1);
  for (std::size_t a = shape.size(); a-- > 1;) {
    strides[a - 1] = strides[a] * shape[a];
  }
  return strides;
}

std::size_t checked_product_size(const std::vector<std::size_t>& shape,
                                 std::size_t cap) {
  std::size_t total = 1;
  for (std::size_t s : shape) {
    if (s == 0) throw InvalidInput("empty axis in product shape");
    if (total > cap / s) {
      throw TooLarge("product support exceeds the enumeration cap of " +
                     std::to_string(cap) + " points");
    }
    total *= s;
  }
  return total;
}

std::size_t flatten_index(const ProductIndex& idx,
                          const std::vector<std::size_t>& strides) {
  std::size_t flat = 0;
  for (std::size_t a = 0; a < idx.size(); ++a) flat += idx[a] * strides[a];
  return flat;
}

ProductIndex unflatten_index(std::size_t flat,
                             const std::vector<std::size_t>& shape) {
  ProductIndex idx(shape.size(), 0);
  for (std::size_t a = shape.size(); a-- > 0;) {
    idx[a] = static_cast<std::uint32_t>(flat % shape[a]);
    flat /= shape[a];
  }
  return idx;
}

bool next_index(ProductIndex& idx, const std::vector<std::size_t>& shape) {
  for (std::size_t a = shape.size(); a-- > 0;) {
    if (++idx[a] < shape[a]) return true;
    idx[a] = 0;
  }
  return false;
}

TransportPlan::TransportPlan(std::vector<MeasurePtr> spaces,
                             std::vector<PlanEntry> entries)
    : spaces_(std::move(spaces)), entries_(std::move(entries)) {
  if (spaces_.size() < 2) throw InvalidInput("a transport plan needs at least two axes");
  for (const auto& s : spaces_) {
    if (!s) throw InvalidInput("null space handed to a transport plan");
  }
  const auto shp = shape();
  const auto strides = strides_for(shp);

  NeumaierSum total;
  for (const auto& e : entries_) {
    if (e.point.size() != spaces_.size()) {
      throw InvalidInput("plan entry index arity does not match the axis count");
    }
    for (std::size_t a = 0; a < e.point.size(); ++a) {
      if (e.point[a] >= shp[a]) {
        throw InvalidInput("plan entry index out of range on axis " + std::to_string(a));
      }
    }
    if (!std::isfinite(e.mass) || e.mass <= 0.0) {
      throw InvalidInput("plan masses must be positive and finite");
    }
    total.add(e.mass);
  }
  total_mass_ = total.value();
  if (std::abs(total_mass_ - 1.0) > kMassSumTol) {
    throw InvalidInput("plan masses must sum to 1 within 1e-12 (got " +
                       format_double(total_mass_) + ")");
  }

  std::sort(entries_.begin(), entries_.end(),
            [&](const PlanEntry& a, const PlanEntry& b) {
              return flatten_index(a.point, strides) < flatten_index(b.point, strides);
            });
  for (std::size_t i = 1; i < entries_.size(); ++i) {
    if (entries_[i].point == entries_[i - 1].point) {
      throw InvalidInput("duplicate plan entry at a product point");
    }
  }
}

const MeasurePtr& TransportPlan::space(std::size_t axis) const {
  if (axis >= spaces_.size()) {
    throw InvalidInput("marginal axis " + std::to_string(axis) + " out of range");
  }
  return spaces_[axis];
}

std::vector<std::size_t> TransportPlan::shape() const {
  std::vector<std::size_t> shp;
  shp.reserve(spaces_.size());
  for (const auto& s : spaces_) shp.push_back(s->size());
  return shp;
}

double TransportPlan::marginal_deviation() const {
  double worst = 0.0;
  for (std::size_t axis = 0; axis < spaces_.size(); ++axis) {
    std::vector<NeumaierSum> acc(spaces_[axis]->size());
    for (const auto& e : entries_) acc[e.point[axis]].add(e.mass);
    NeumaierSum tv;
    for (std::size_t a = 0; a < acc.size(); ++a) {
      tv.add(std::abs(acc[a].value() - spaces_[axis]->weight(a)));
    }
    worst = std::max(worst, 0.5 * tv.value());
  }
  return worst;
}

std::string TransportPlan::to_csv() const {
  std::ostringstream out;
  for (std::size_t a = 0; a < spaces_.size(); ++a) {
    out << 'i' << (a + 1) << ',';
  }
  out << "mass\n";
  for (const auto& e : entries_) {
    for (std::uint32_t i : e.point) out << i << ',';
    out << format_double(e.mass) << '\n';
  }
  return out.str();
}

DiscreteMeasure project(const TransportPlan& plan, std::size_t axis) {
  const auto& space = plan.space(axis);  // throws on bad axis
  std::vector<NeumaierSum> acc(space->size());
  for (const auto& e : plan.entries()) acc[e.point[axis]].add(e.mass);

  std::vector<Atom> atoms;
  for (std::size_t a = 0; a < acc.size(); ++a) {
    const double w = acc[a].value();
    if (w <= 0.0) continue;
    atoms.push_back(Atom{space->coords(a), w});
  }
  // Direct construction keeps the summed weights bit-exact.
  return DiscreteMeasure(std::move(atoms), space->dim());
}

TransportPlan pushforward(const MeasurePtr& source,
                          const std::vector<ProductIndex>& tails,
                          std::vector<MeasurePtr> tail_spaces) {
  if (!source) throw InvalidInput("null source measure");
  if (tail_spaces.empty()) throw InvalidInput("pushforward needs at least one tail space");
  if (tails.size() != source->size()) {
    throw InvalidInput("pushforward map must assign a tail to every source atom (" +
                       std::to_string(tails.size()) + " assignments for " +
                       std::to_string(source->size()) + " atoms)");
  }
  std::vector<PlanEntry> entries;
  entries.reserve(source->size());
  for (std::size_t j = 0; j < source->size(); ++j) {
    const auto& tail = tails[j];
    if (tail.size() != tail_spaces.size()) {
      throw InvalidInput("tail arity mismatch at source atom " + std::to_string(j));
    }
    ProductIndex point;
    point.reserve(1 + tail.size());
    point.push_back(static_cast<std::uint32_t>(j));
    for (std::size_t a = 0; a < tail.size(); ++a) {
      if (tail[a] >= tail_spaces[a]->size()) {
        throw InvalidInput("tail index out of range at source atom " + std::to_string(j));
      }
      point.push_back(tail[a]);
    }
    entries.push_back(PlanEntry{std::move(point), source->weight(j)});
  }
  std::vector<MeasurePtr> spaces;
  spaces.reserve(1 + tail_spaces.size());
  spaces.push_back(source);
  for (auto& s : tail_spaces) spaces.push_back(std::move(s));
  return TransportPlan(std::move(spaces), std::move(entries));
}

}  // namespace mmot
