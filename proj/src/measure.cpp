#include "mmot/measure.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <json.hpp>

#include "mmot/errors.hpp"
#include "mmot/util.hpp"

using json = nlohmann::json;

namespace mmot {

namespace {

constexpr double kWeightSumTol = 1e-12;
constexpr double kLoadSumTol = 1e-9;
constexpr double kCoordTol = 1e-12;
constexpr double kCullThreshold = 1e-15;

bool coincident(const std::vector<double>& a, const std::vector<double>& b) {
  for (std::size_t d = 0; d < a.size(); ++d) {
    if (std::abs(a[d] - b[d]) > kCoordTol) return false;
  }
  return true;
}

}  // namespace

DiscreteMeasure::DiscreteMeasure(std::vector<Atom> atoms, int dim) : dim_(dim) {
  if (dim < 1) throw InvalidInput("measure dimension must be at least 1");
  atoms_.reserve(atoms.size());
  for (auto& a : atoms) {
    if (!std::isfinite(a.weight) || a.weight < 0.0) {
      throw InvalidInput("atom weights must be finite and non-negative");
    }
    if (a.weight == 0.0) continue;  // zero-weight atoms are dropped
    if (a.coords.size() != static_cast<std::size_t>(dim)) {
      throw InvalidInput("atom coordinate count does not match the measure dimension");
    }
    for (double c : a.coords) {
      if (!std::isfinite(c)) throw InvalidInput("atom coordinates must be finite");
    }
    atoms_.push_back(std::move(a));
  }
  if (atoms_.empty()) throw InvalidInput("measure has no atoms with positive weight");

  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    for (std::size_t j = i + 1; j < atoms_.size(); ++j) {
      if (coincident(atoms_[i].coords, atoms_[j].coords)) {
        throw InvalidInput("atoms " + std::to_string(i) + " and " + std::to_string(j) +
                           " coincide within 1e-12 in every coordinate");
      }
    }
  }

  NeumaierSum total;
  for (const auto& a : atoms_) total.add(a.weight);
  if (std::abs(total.value() - 1.0) > kWeightSumTol) {
    throw InvalidInput("atom weights must sum to 1 within 1e-12 (got " +
                       format_double(total.value()) + ")");
  }
}

DiscreteMeasure DiscreteMeasure::normalized(std::vector<Atom> atoms, int dim) {
  NeumaierSum total;
  for (const auto& a : atoms) {
    if (!std::isfinite(a.weight) || a.weight < 0.0) {
      throw InvalidInput("atom weights must be finite and non-negative");
    }
    total.add(a.weight);
  }
  const double t = total.value();
  if (!(t > 0.0)) throw InvalidInput("total weight must be positive");
  for (auto& a : atoms) a.weight /= t;

  // Cull dust below 1e-15 and renormalize the survivors.
  std::vector<Atom> kept;
  kept.reserve(atoms.size());
  NeumaierSum kept_total;
  for (auto& a : atoms) {
    if (a.weight < kCullThreshold) continue;
    kept_total.add(a.weight);
    kept.push_back(std::move(a));
  }
  const double kt = kept_total.value();
  if (!(kt > 0.0)) throw InvalidInput("all atoms culled during normalization");
  for (auto& a : kept) a.weight /= kt;
  return DiscreteMeasure(std::move(kept), dim);
}

DiscreteMeasure DiscreteMeasure::random(std::size_t size, int dim,
                                        std::uint64_t seed, WeightMode mode) {
  if (size == 0) throw InvalidInput("random measure needs at least one atom");
  if (dim < 1) throw InvalidInput("measure dimension must be at least 1");

  std::mt19937_64 coord_rng(derive_seed(seed, 0x636f6f7264ull));   // "coord"
  std::mt19937_64 weight_rng(derive_seed(seed, 0x776569676874ull)); // "weight"

  std::vector<Atom> atoms(size);
  for (std::size_t i = 0; i < size; ++i) {
    auto& atom = atoms[i];
    for (int attempt = 0;; ++attempt) {
      atom.coords.clear();
      for (int d = 0; d < dim; ++d) atom.coords.push_back(unit_double(coord_rng()));
      bool clash = false;
      for (std::size_t j = 0; j < i && !clash; ++j) {
        clash = coincident(atom.coords, atoms[j].coords);
      }
      if (!clash) break;
      if (attempt > 256) throw InvalidInput("could not sample distinct atom coordinates");
    }
  }
  if (mode == WeightMode::Uniform) {
    for (auto& a : atoms) a.weight = 1.0 / static_cast<double>(size);
  } else {
    // Bounded away from zero so normalization never culls an atom.
    for (auto& a : atoms) a.weight = 0.25 + unit_double(weight_rng());
  }
  return normalized(std::move(atoms), dim);
}

DiscreteMeasure DiscreteMeasure::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("measure JSON parse failure: ") + e.what());
  }
  if (!j.is_object() || !j.contains("dim") || !j.contains("atoms")) {
    throw InvalidInput("measure JSON must carry \"dim\" and \"atoms\"");
  }
  const int dim = j.at("dim").get<int>();
  std::vector<Atom> atoms;
  NeumaierSum total;
  for (const auto& ja : j.at("atoms")) {
    Atom a;
    a.coords = ja.at("coords").get<std::vector<double>>();
    a.weight = ja.at("weight").get<double>();
    total.add(a.weight);
    atoms.push_back(std::move(a));
  }
  if (std::abs(total.value() - 1.0) > kLoadSumTol) {
    throw InvalidInput("measure rejected: weights sum to " +
                       format_double(total.value()) + ", expected 1 within 1e-9");
  }
  return normalized(std::move(atoms), dim);
}

std::string DiscreteMeasure::to_json() const {
  json atoms = json::array();
  for (const auto& a : atoms_) {
    atoms.push_back({{"coords", a.coords}, {"weight", a.weight}});
  }
  json j{{"dim", dim_}, {"atoms", atoms}};
  return j.dump(2) + "\n";
}

const Atom& DiscreteMeasure::atom(std::size_t i) const {
  if (i >= atoms_.size()) {
    throw InvalidInput("atom index " + std::to_string(i) + " out of range");
  }
  return atoms_[i];
}

}  // namespace mmot
