#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace mmot {

// One support point of a discrete measure.
struct Atom {
  std::vector<double> coords;
  double weight = 0.0;
};

// Address of a point in a product support: one atom index per marginal.
using ProductIndex = std::vector<std::uint32_t>;

enum class WeightMode { Uniform, Random };

// Finitely supported probability measure. Immutable after construction.
// Atom identity is positional: plans and maps reference indices, never
// coordinates, so no floating-point matching happens downstream.
class DiscreteMeasure {
public:
  // Requires weights already summing to 1 within 1e-12. Atoms with exactly
  // zero weight are dropped; negative or non-finite weights are rejected,
  // as are coincident atoms (all coordinates within 1e-12).
  DiscreteMeasure(std::vector<Atom> atoms, int dim);

  // Normalizes arbitrary positive weights. Weights below 1e-15 after
  // normalization are culled and the remaining mass renormalized.
  static DiscreteMeasure normalized(std::vector<Atom> atoms, int dim);

  // Seeded sampler over [0,1]^dim. Same seed, same measure, bit for bit.
  static DiscreteMeasure random(std::size_t size, int dim, std::uint64_t seed,
                                WeightMode mode);

  // JSON form: { "dim": d, "atoms": [ { "coords": [...], "weight": w } ] }.
  // Weights must sum to 1 within 1e-9 on load, else the file is rejected.
  static DiscreteMeasure from_json(const std::string& text);
  std::string to_json() const;

  int dim() const { return dim_; }
  std::size_t size() const { return atoms_.size(); }
  const std::vector<Atom>& atoms() const { return atoms_; }
  const Atom& atom(std::size_t i) const;
  double weight(std::size_t i) const { return atoms_[i].weight; }
  const std::vector<double>& coords(std::size_t i) const { return atoms_[i].coords; }

private:
  std::vector<Atom> atoms_;
  int dim_ = 0;
};

using MeasurePtr = std::shared_ptr<const DiscreteMeasure>;

}  // namespace mmot
