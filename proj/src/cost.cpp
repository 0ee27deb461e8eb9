#include "mmot/cost.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <json.hpp>

#include "mmot/errors.hpp"
#include "mmot/util.hpp"

using json = nlohmann::json;

namespace mmot {

namespace {

constexpr double kGridMatchTol = 1e-12;

const char* builtin_name(BuiltinCost id) {
  switch (id) {
    case BuiltinCost::Quadratic: return "quadratic";
    case BuiltinCost::Product: return "product";
    case BuiltinCost::TwoLevel: return "two_level";
    case BuiltinCost::Cosine: return "cosine";
    case BuiltinCost::Zero: return "zero";
  }
  return "?";
}

BuiltinCost builtin_from_name(const std::string& s) {
  if (s == "quadratic") return BuiltinCost::Quadratic;
  if (s == "product") return BuiltinCost::Product;
  if (s == "two_level") return BuiltinCost::TwoLevel;
  if (s == "cosine") return BuiltinCost::Cosine;
  if (s == "zero") return BuiltinCost::Zero;
  throw InvalidInput("unknown builtin cost id \"" + s + "\"");
}

}  // namespace

CostOracle CostOracle::builtin(BuiltinCost id, std::size_t arity, double scale) {
  if (arity < 2) throw InvalidInput("cost arity must be at least 2");
  if (!std::isfinite(scale) || scale <= 0.0) {
    throw InvalidInput("cost scale must be positive and finite");
  }
  if ((id == BuiltinCost::TwoLevel || id == BuiltinCost::Cosine) && arity != 2) {
    throw InvalidInput(std::string(builtin_name(id)) + " cost is defined for two marginals");
  }
  CostOracle c;
  c.tabulated_ = false;
  c.id_ = id;
  c.arity_ = arity;
  c.scale_ = scale;
  return c;
}

CostOracle CostOracle::tabulated(std::vector<std::size_t> shape,
                                 std::vector<double> values) {
  if (shape.size() < 2) throw InvalidInput("tabulated cost needs at least two axes");
  const std::size_t total = checked_product_size(shape, kDefaultSizeCap);
  if (values.size() != total) {
    throw InvalidInput("tabulated cost has " + std::to_string(values.size()) +
                       " values for a shape of " + std::to_string(total));
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw InvalidInput("tabulated cost entries must be finite");
  }
  CostOracle c;
  c.tabulated_ = true;
  c.arity_ = shape.size();
  c.shape_ = std::move(shape);
  c.values_ = std::move(values);
  return c;
}

CostOracle CostOracle::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("cost JSON parse failure: ") + e.what());
  }
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "builtin") {
    const BuiltinCost id = builtin_from_name(j.at("id").get<std::string>());
    double scale = 1.0;
    std::size_t arity = 2;
    if (j.contains("params") && j["params"].contains("scale")) {
      scale = j["params"]["scale"].get<double>();
    }
    if (j.contains("arity")) arity = j.at("arity").get<std::size_t>();
    return builtin(id, arity, scale);
  }
  if (kind == "tabulated") {
    return tabulated(j.at("shape").get<std::vector<std::size_t>>(),
                     j.at("values").get<std::vector<double>>());
  }
  throw InvalidInput("cost kind must be \"builtin\" or \"tabulated\"");
}

std::string CostOracle::to_json() const {
  json j;
  if (tabulated_) {
    j["kind"] = "tabulated";
    j["shape"] = shape_;
    j["values"] = values_;
  } else {
    j["kind"] = "builtin";
    j["id"] = builtin_name(id_);
    j["arity"] = arity_;
    j["params"] = {{"scale", scale_}};
    if (periodic()) j["periodic"] = true;
  }
  return j.dump();
}

std::size_t CostOracle::arity() const { return arity_; }

BuiltinCost CostOracle::builtin_id() const {
  if (tabulated_) throw InvalidInput("tabulated cost has no builtin id");
  return id_;
}

bool CostOracle::periodic() const {
  return !tabulated_ && id_ == BuiltinCost::Cosine;
}

void CostOracle::check_spaces(const std::vector<MeasurePtr>& spaces) const {
  if (spaces.size() != arity_) {
    throw InvalidInput("cost arity " + std::to_string(arity_) + " does not match " +
                       std::to_string(spaces.size()) + " spaces");
  }
  for (const auto& s : spaces) {
    if (!s) throw InvalidInput("null space");
  }
  if (tabulated_) {
    for (std::size_t a = 0; a < spaces.size(); ++a) {
      if (spaces[a]->size() != shape_[a]) {
        throw InvalidInput("tabulated cost shape does not match the support sizes");
      }
    }
    return;
  }
  switch (id_) {
    case BuiltinCost::Quadratic:
      for (const auto& s : spaces) {
        if (s->dim() != spaces[0]->dim()) {
          throw InvalidInput("quadratic cost needs equal dimensions on every space");
        }
      }
      break;
    case BuiltinCost::Product:
    case BuiltinCost::TwoLevel:
    case BuiltinCost::Cosine:
      for (const auto& s : spaces) {
        if (s->dim() != 1) {
          throw InvalidInput(std::string(builtin_name(id_)) +
                             " cost is defined for 1-dimensional factors");
        }
      }
      break;
    case BuiltinCost::Zero:
      break;
  }
}

double CostOracle::evaluate(const ProductIndex& point,
                            const std::vector<MeasurePtr>& spaces) const {
  check_spaces(spaces);
  if (point.size() != arity_) throw InvalidInput("product index arity mismatch");
  for (std::size_t a = 0; a < point.size(); ++a) {
    if (point[a] >= spaces[a]->size()) {
      throw InvalidInput("product index out of range on axis " + std::to_string(a));
    }
  }

  if (tabulated_) {
    return values_[flatten_index(point, strides_for(shape_))];
  }

  double v = 0.0;
  switch (id_) {
    case BuiltinCost::Quadratic: {
      for (std::size_t i = 0; i < arity_; ++i) {
        const auto& xi = spaces[i]->coords(point[i]);
        for (std::size_t j = i + 1; j < arity_; ++j) {
          const auto& xj = spaces[j]->coords(point[j]);
          for (std::size_t d = 0; d < xi.size(); ++d) {
            const double diff = xi[d] - xj[d];
            v += diff * diff;
          }
        }
      }
      break;
    }
    case BuiltinCost::Product: {
      double prod = 1.0;
      for (std::size_t i = 0; i < arity_; ++i) prod *= spaces[i]->coords(point[i])[0];
      v = -prod;
      break;
    }
    case BuiltinCost::TwoLevel: {
      const double x = spaces[0]->coords(point[0])[0];
      const double y = spaces[1]->coords(point[1])[0];
      const double r = y * y - x;
      v = r * r;
      break;
    }
    case BuiltinCost::Cosine: {
      const double x = spaces[0]->coords(point[0])[0];
      const double y = spaces[1]->coords(point[1])[0];
      v = std::cos(2.0 * std::numbers::pi * (x - y));
      break;
    }
    case BuiltinCost::Zero:
      v = 0.0;
      break;
  }
  v *= scale_;
  if (!std::isfinite(v)) throw InvalidInput("builtin cost evaluated to a non-finite value");
  return v;
}

Gradient1 CostOracle::gradient_d1(const ProductIndex& point,
                                  const std::vector<MeasurePtr>& spaces) const {
  GradientEvaluator ge(*this, spaces);
  return ge.at(point);
}

double CostOracle::max_abs(const std::vector<MeasurePtr>& spaces,
                           std::size_t cap) const {
  check_spaces(spaces);
  std::vector<std::size_t> shp;
  for (const auto& s : spaces) shp.push_back(s->size());
  checked_product_size(shp, cap);
  double m = 0.0;
  ProductIndex idx(spaces.size(), 0);
  do {
    m = std::max(m, std::abs(evaluate(idx, spaces)));
  } while (next_index(idx, shp));
  return m;
}

// ---- gradient evaluation ---------------------------------------------

GradientEvaluator::GradientEvaluator(const CostOracle& oracle,
                                     std::vector<MeasurePtr> spaces)
    : oracle_(oracle), spaces_(std::move(spaces)) {
  oracle_.check_spaces(spaces_);
  dim1_ = spaces_[0]->dim();
  if (!oracle_.tabulated_) return;

  // Tabulated costs differentiate on the lattice of the first support:
  // per axis the distinct coordinate values must be uniformly spaced and the
  // atoms must cover the full product of those values.
  const auto& x1 = *spaces_[0];
  const int d = dim1_;
  std::vector<std::vector<double>> levels(d);
  for (int a = 0; a < d; ++a) {
    std::vector<double> vals;
    vals.reserve(x1.size());
    for (std::size_t i = 0; i < x1.size(); ++i) vals.push_back(x1.coords(i)[a]);
    std::sort(vals.begin(), vals.end());
    for (double v : vals) {
      if (levels[a].empty() || v - levels[a].back() > kGridMatchTol) {
        levels[a].push_back(v);
      }
    }
    if (levels[a].size() < 2) {
      throw GradientUnavailable(
          "tabulated gradient needs at least two grid levels on every axis of the first support");
    }
    const double h = levels[a][1] - levels[a][0];
    const double span = levels[a].back() - levels[a].front();
    for (std::size_t k = 1; k < levels[a].size(); ++k) {
      if (std::abs((levels[a][k] - levels[a][k - 1]) - h) > 1e-9 * (1.0 + span)) {
        throw GradientUnavailable(
            "first support is not a uniform axis-aligned grid; no finite-difference gradient");
      }
    }
    step_.push_back(h);
    extent_.push_back(levels[a].size());
  }

  std::size_t lattice_total = 1;
  for (std::size_t e : extent_) lattice_total *= e;
  if (lattice_total != x1.size()) {
    throw GradientUnavailable(
        "first support does not cover a full axis-aligned grid; no finite-difference gradient");
  }

  lattice_strides_ = strides_for(extent_);
  lattice_of_atom_.assign(x1.size(), 0);
  atom_of_lattice_.assign(lattice_total, 0);
  std::vector<char> seen(lattice_total, 0);
  for (std::size_t i = 0; i < x1.size(); ++i) {
    std::size_t flat = 0;
    for (int a = 0; a < d; ++a) {
      const double v = x1.coords(i)[a];
      const auto& lv = levels[a];
      auto it = std::lower_bound(lv.begin(), lv.end(), v - kGridMatchTol);
      if (it == lv.end() || std::abs(*it - v) > kGridMatchTol) {
        throw GradientUnavailable("grid detection lost an atom coordinate");
      }
      flat += static_cast<std::size_t>(it - lv.begin()) * lattice_strides_[a];
    }
    if (seen[flat]) throw GradientUnavailable("two atoms map to one grid node");
    seen[flat] = 1;
    lattice_of_atom_[i] = flat;
    atom_of_lattice_[flat] = static_cast<std::uint32_t>(i);
  }
}

double GradientEvaluator::table_at(std::uint32_t x1_atom,
                                   const ProductIndex& point) const {
  ProductIndex p = point;
  p[0] = x1_atom;
  return oracle_.values_[flatten_index(p, strides_for(oracle_.shape_))];
}

Gradient1 GradientEvaluator::at(const ProductIndex& point) const {
  if (point.size() != spaces_.size()) throw InvalidInput("product index arity mismatch");
  for (std::size_t a = 0; a < point.size(); ++a) {
    if (point[a] >= spaces_[a]->size()) {
      throw InvalidInput("product index out of range on axis " + std::to_string(a));
    }
  }

  Gradient1 g;
  if (!oracle_.tabulated_) {
    switch (oracle_.id_) {
      case BuiltinCost::Quadratic: {
        const auto& x0 = spaces_[0]->coords(point[0]);
        g.vec.assign(x0.size(), 0.0);
        for (std::size_t j = 1; j < spaces_.size(); ++j) {
          const auto& xj = spaces_[j]->coords(point[j]);
          for (std::size_t dd = 0; dd < x0.size(); ++dd) {
            g.vec[dd] += 2.0 * (x0[dd] - xj[dd]);
          }
        }
        break;
      }
      case BuiltinCost::Product: {
        double prod = 1.0;
        for (std::size_t j = 1; j < spaces_.size(); ++j) {
          prod *= spaces_[j]->coords(point[j])[0];
        }
        g.vec.assign(1, -prod);
        break;
      }
      case BuiltinCost::TwoLevel: {
        const double x = spaces_[0]->coords(point[0])[0];
        const double y = spaces_[1]->coords(point[1])[0];
        g.vec.assign(1, -2.0 * (y * y - x));
        break;
      }
      case BuiltinCost::Cosine: {
        const double x = spaces_[0]->coords(point[0])[0];
        const double y = spaces_[1]->coords(point[1])[0];
        g.vec.assign(1, -2.0 * std::numbers::pi *
                            std::sin(2.0 * std::numbers::pi * (x - y)));
        break;
      }
      case BuiltinCost::Zero:
        g.vec.assign(dim1_, 0.0);
        break;
    }
    for (double& v : g.vec) v *= oracle_.scale_;
    return g;
  }

  // Finite differences on the detected lattice, one axis at a time. The
  // step is the native grid spacing; the table carries no sub-grid
  // information, so there is nothing to extrapolate.
  const std::size_t lat = lattice_of_atom_[point[0]];
  g.vec.assign(dim1_, 0.0);
  for (int a = 0; a < dim1_; ++a) {
    const std::size_t pos = (lat / lattice_strides_[a]) % extent_[a];
    const double h = step_[a];
    auto neighbor = [&](std::ptrdiff_t off) {
      const std::size_t nl = lat + static_cast<std::size_t>(off) * lattice_strides_[a];
      return table_at(atom_of_lattice_[nl], point);
    };
    double deriv;
    if (pos > 0 && pos + 1 < extent_[a]) {
      deriv = (neighbor(+1) - neighbor(-1)) / (2.0 * h);
    } else if (pos == 0) {
      if (extent_[a] >= 3) {
        deriv = (-3.0 * neighbor(0) + 4.0 * neighbor(+1) - neighbor(+2)) / (2.0 * h);
      } else {
        deriv = (neighbor(+1) - neighbor(0)) / h;
      }
    } else {
      if (extent_[a] >= 3) {
        deriv = (3.0 * neighbor(0) - 4.0 * neighbor(-1) + neighbor(-2)) / (2.0 * h);
      } else {
        deriv = (neighbor(0) - neighbor(-1)) / h;
      }
    }
    g.vec[a] = deriv;
  }
  for (double v : g.vec) {
    if (!std::isfinite(v)) throw GradientUnavailable("non-finite finite-difference gradient");
  }
  return g;
}

}  // namespace mmot
