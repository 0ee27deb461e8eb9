#include "mmot/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mmot/errors.hpp"
#include "mmot/util.hpp"

namespace mmot {

namespace {

// Flattened tensor LP: one column per product point, one equality row per
// (axis, atom). Every axis total equals 1, so one row per axis beyond the
// first is redundant; we drop the last atom's row of each later axis and
// reconstruct its dual as 0.
struct FlatProblem {
  std::vector<MeasurePtr> marginals;
  std::vector<std::size_t> shape;
  std::vector<std::size_t> strides;
  std::size_t ncols = 0;
  std::size_t nrows = 0;
  std::vector<double> cost;
  double cost_scale = 0.0;
  std::vector<int> row_base;  // first row id per axis
  std::vector<double> rhs;

  int row_of(std::size_t axis, std::uint32_t atom) const {
    if (axis > 0 && atom + 1 == shape[axis]) return -1;
    return row_base[axis] + static_cast<int>(atom);
  }
};

void materialize_cost(const CostOracle& cost,
                      const std::vector<MeasurePtr>& marginals,
                      std::size_t cap, std::vector<std::size_t>& shape,
                      std::vector<std::size_t>& strides,
                      std::vector<double>& values, double& scale) {
  shape.clear();
  for (const auto& m : marginals) shape.push_back(m->size());
  const std::size_t ncols = checked_product_size(shape, cap);
  strides = strides_for(shape);
  values.resize(ncols);
  scale = 0.0;
  ProductIndex idx(marginals.size(), 0);
  std::size_t flat = 0;
  do {
    const double c = cost.evaluate(idx, marginals);
    values[flat++] = c;
    scale = std::max(scale, std::abs(c));
  } while (next_index(idx, shape));
}

FlatProblem flatten(const CostOracle& cost, std::vector<MeasurePtr> marginals,
                    std::size_t cap) {
  if (marginals.size() < 2) throw InvalidInput("the solver needs at least two marginals");
  if (cost.arity() != marginals.size()) {
    throw InvalidInput("cost arity does not match the marginal count");
  }
  FlatProblem p;
  p.marginals = std::move(marginals);
  materialize_cost(cost, p.marginals, cap, p.shape, p.strides, p.cost, p.cost_scale);
  p.ncols = p.cost.size();

  p.row_base.resize(p.shape.size());
  int next_row = 0;
  for (std::size_t axis = 0; axis < p.shape.size(); ++axis) {
    p.row_base[axis] = next_row;
    next_row += static_cast<int>(p.shape[axis]) - (axis > 0 ? 1 : 0);
  }
  p.nrows = static_cast<std::size_t>(next_row);
  p.rhs.assign(p.nrows, 0.0);
  for (std::size_t axis = 0; axis < p.shape.size(); ++axis) {
    for (std::uint32_t a = 0; a < p.shape[axis]; ++a) {
      const int r = p.row_of(axis, a);
      if (r >= 0) p.rhs[static_cast<std::size_t>(r)] = p.marginals[axis]->weight(a);
    }
  }
  return p;
}

// North-west-corner start generalized to n marginals: one product point per
// step, exactly sum(shape) - n + 1 steps, advancing a single exhausted axis
// each time (lowest index first). Ties leave zero-mass basic entries, which
// is exactly the degenerate basis the simplex expects.
std::vector<std::size_t> initial_basis(const FlatProblem& p) {
  const std::size_t n = p.shape.size();
  std::vector<std::vector<double>> residual(n);
  for (std::size_t axis = 0; axis < n; ++axis) {
    residual[axis].resize(p.shape[axis]);
    for (std::uint32_t a = 0; a < p.shape[axis]; ++a) {
      residual[axis][a] = p.marginals[axis]->weight(a);
    }
  }
  ProductIndex ptr(n, 0);
  std::size_t steps = 1;
  for (std::size_t axis = 0; axis < n; ++axis) steps += p.shape[axis] - 1;

  std::vector<std::size_t> basis;
  basis.reserve(steps);
  for (std::size_t s = 0; s < steps; ++s) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t axis = 0; axis < n; ++axis) {
      m = std::min(m, residual[axis][ptr[axis]]);
    }
    m = std::max(m, 0.0);
    basis.push_back(flatten_index(ptr, p.strides));
    for (std::size_t axis = 0; axis < n; ++axis) residual[axis][ptr[axis]] -= m;

    if (s + 1 == steps) break;
    std::size_t advance = n;
    for (std::size_t axis = 0; axis < n; ++axis) {
      if (ptr[axis] + 1 < p.shape[axis] && residual[axis][ptr[axis]] <= 1e-13) {
        advance = axis;
        break;
      }
    }
    if (advance == n) {
      // Residual dust only; advance the axis with the smallest leftover.
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t axis = 0; axis < n; ++axis) {
        if (ptr[axis] + 1 < p.shape[axis] && residual[axis][ptr[axis]] < best) {
          best = residual[axis][ptr[axis]];
          advance = axis;
        }
      }
      if (advance == n) throw SolverFailure("north-west initialization ran out of axes");
    }
    ++ptr[advance];
  }
  if (basis.size() != p.nrows) {
    throw SolverFailure("initial basis size mismatch: " + std::to_string(basis.size()) +
                        " columns for " + std::to_string(p.nrows) + " rows");
  }
  return basis;
}

class RevisedSimplex {
public:
  RevisedSimplex(const FlatProblem& p, const SolverOptions& opt)
      : p_(p), opt_(opt), R_(p.nrows) {
    basic_ = initial_basis(p_);
    in_basis_.assign(p_.ncols, 0);
    for (std::size_t c : basic_) in_basis_[c] = 1;
    binv_.assign(R_ * R_, 0.0);
    xb_.assign(R_, 0.0);
    y_.assign(R_, 0.0);
    opt_tol_ = 1e-10 * (1.0 + p_.cost_scale);
    max_iter_ = opt_.max_iterations ? opt_.max_iterations
                                    : 20000 + 200 * R_;
    refactor();
  }

  Solution run(const CostOracle& cost) {
    int degenerate_streak = 0;
    bool bland = false;
    std::size_t since_refactor = 0;

    while (true) {
      compute_duals();
      const std::size_t enter = price(bland);
      if (enter == kNone) break;  // optimal

      std::vector<double> d(R_, 0.0);
      direction(enter, d);
      const std::size_t leave = ratio_test(d);
      if (leave == kNone) {
        throw SolverFailure("unbounded simplex direction on a transport polytope (column " +
                            std::to_string(enter) + ")");
      }
      const double theta = std::max(xb_[leave], 0.0) / d[leave];
      pivot(enter, leave, d, theta);
      ++iterations_;
      ++since_refactor;

      if (theta <= 1e-13) {
        if (++degenerate_streak >= opt_.bland_threshold) bland = true;
      } else {
        degenerate_streak = 0;
        bland = false;
      }
      if (since_refactor >= static_cast<std::size_t>(opt_.refactor_period)) {
        refactor();
        since_refactor = 0;
      }
      if (iterations_ > max_iter_) {
        throw SolverFailure("simplex stalled: cycling guard tripped after " +
                            std::to_string(iterations_) + " pivots\n" + iterate_dump());
      }
    }

    refactor();  // tighten the final factorization before extraction
    compute_duals();
    return extract(cost);
  }

private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  void refactor() {
    // Dense Gauss-Jordan inverse of the basis matrix.
    std::vector<double> m(R_ * R_, 0.0);
    std::vector<double>& inv = binv_;
    std::fill(inv.begin(), inv.end(), 0.0);
    for (std::size_t t = 0; t < R_; ++t) {
      inv[t * R_ + t] = 1.0;
      const ProductIndex idx = unflatten_index(basic_[t], p_.shape);
      for (std::size_t axis = 0; axis < p_.shape.size(); ++axis) {
        const int r = p_.row_of(axis, idx[axis]);
        if (r >= 0) m[static_cast<std::size_t>(r) * R_ + t] = 1.0;
      }
    }
    for (std::size_t col = 0; col < R_; ++col) {
      std::size_t piv = col;
      double best = std::abs(m[col * R_ + col]);
      for (std::size_t r = col + 1; r < R_; ++r) {
        const double v = std::abs(m[r * R_ + col]);
        if (v > best) {
          best = v;
          piv = r;
        }
      }
      if (best < 1e-12) throw SolverFailure("singular basis during refactorization");
      if (piv != col) {
        for (std::size_t k = 0; k < R_; ++k) {
          std::swap(m[piv * R_ + k], m[col * R_ + k]);
          std::swap(inv[piv * R_ + k], inv[col * R_ + k]);
        }
      }
      const double pv = m[col * R_ + col];
      for (std::size_t k = 0; k < R_; ++k) {
        m[col * R_ + k] /= pv;
        inv[col * R_ + k] /= pv;
      }
      for (std::size_t r = 0; r < R_; ++r) {
        if (r == col) continue;
        const double f = m[r * R_ + col];
        if (f == 0.0) continue;
        for (std::size_t k = 0; k < R_; ++k) {
          m[r * R_ + k] -= f * m[col * R_ + k];
          inv[r * R_ + k] -= f * inv[col * R_ + k];
        }
      }
    }
    // xb = B^-1 b
    for (std::size_t t = 0; t < R_; ++t) {
      NeumaierSum s;
      for (std::size_t r = 0; r < R_; ++r) s.add(binv_[t * R_ + r] * p_.rhs[r]);
      xb_[t] = s.value();
    }
  }

  void compute_duals() {
    for (std::size_t r = 0; r < R_; ++r) {
      NeumaierSum s;
      for (std::size_t t = 0; t < R_; ++t) {
        const double cb = p_.cost[basic_[t]];
        if (cb != 0.0) s.add(cb * binv_[t * R_ + r]);
      }
      y_[r] = s.value();
    }
  }

  double reduced_cost(std::size_t col) const {
    double rc = p_.cost[col];
    std::size_t rest = col;
    for (std::size_t axis = 0; axis < p_.shape.size(); ++axis) {
      const std::uint32_t atom = static_cast<std::uint32_t>(rest / p_.strides[axis]);
      rest %= p_.strides[axis];
      const int r = p_.row_of(axis, atom);
      if (r >= 0) rc -= y_[static_cast<std::size_t>(r)];
    }
    return rc;
  }

  // Dantzig pricing with lowest-index tie break; Bland mode takes the first
  // improving column instead.
  std::size_t price(bool bland) const {
    std::size_t best = kNone;
    double best_rc = -opt_tol_;
    for (std::size_t col = 0; col < p_.ncols; ++col) {
      if (in_basis_[col]) continue;
      const double rc = reduced_cost(col);
      if (rc < best_rc) {
        best = col;
        best_rc = rc;
        if (bland) break;
      }
    }
    return best;
  }

  void direction(std::size_t col, std::vector<double>& d) const {
    const ProductIndex idx = unflatten_index(col, p_.shape);
    std::fill(d.begin(), d.end(), 0.0);
    for (std::size_t axis = 0; axis < p_.shape.size(); ++axis) {
      const int r = p_.row_of(axis, idx[axis]);
      if (r < 0) continue;
      const std::size_t rr = static_cast<std::size_t>(r);
      for (std::size_t t = 0; t < R_; ++t) d[t] += binv_[t * R_ + rr];
    }
  }

  // Smallest ratio; ties resolved toward the lowest variable index, which
  // doubles as the Bland leaving rule.
  std::size_t ratio_test(const std::vector<double>& d) const {
    std::size_t leave = kNone;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < R_; ++t) {
      if (d[t] <= 1e-11) continue;
      const double ratio = std::max(xb_[t], 0.0) / d[t];
      if (ratio < best - 1e-15 ||
          (ratio <= best + 1e-15 && (leave == kNone || basic_[t] < basic_[leave]))) {
        best = ratio;
        leave = t;
      }
    }
    return leave;
  }

  void pivot(std::size_t enter, std::size_t leave, const std::vector<double>& d,
             double theta) {
    const double pv = d[leave];
    if (std::abs(pv) < 1e-10) {
      throw SolverFailure("pivot collapse (|pivot| = " + format_double(std::abs(pv)) + ")");
    }
    double* lrow = &binv_[leave * R_];
    for (std::size_t k = 0; k < R_; ++k) lrow[k] /= pv;
    for (std::size_t t = 0; t < R_; ++t) {
      if (t == leave) continue;
      const double f = d[t];
      if (f == 0.0) continue;
      double* row = &binv_[t * R_];
      for (std::size_t k = 0; k < R_; ++k) row[k] -= f * lrow[k];
    }
    for (std::size_t t = 0; t < R_; ++t) {
      if (t == leave) continue;
      xb_[t] -= theta * d[t];
      if (xb_[t] < 0.0 && xb_[t] > -1e-12) xb_[t] = 0.0;
    }
    xb_[leave] = theta;
    in_basis_[basic_[leave]] = 0;
    in_basis_[enter] = 1;
    basic_[leave] = enter;
  }

  std::string iterate_dump() const {
    std::ostringstream out;
    NeumaierSum obj;
    for (std::size_t t = 0; t < R_; ++t) obj.add(p_.cost[basic_[t]] * xb_[t]);
    out << "objective " << format_double(obj.value()) << ", basis size " << R_ << '\n';
    const std::size_t limit = std::min<std::size_t>(R_, 16);
    for (std::size_t t = 0; t < limit; ++t) {
      out << "  basic[" << t << "] col " << basic_[t] << " mass "
          << format_double(xb_[t]) << '\n';
    }
    return out.str();
  }

  Solution extract(const CostOracle& cost) {
    std::vector<PlanEntry> entries;
    NeumaierSum primal;
    for (std::size_t t = 0; t < R_; ++t) {
      const double mass = xb_[t];
      if (mass < -1e-9) {
        throw SolverFailure("negative basic mass " + format_double(mass) + " at extraction");
      }
      if (mass <= 1e-15) continue;
      primal.add(p_.cost[basic_[t]] * mass);
      entries.push_back(PlanEntry{unflatten_index(basic_[t], p_.shape), mass});
    }
    TransportPlan plan(p_.marginals, std::move(entries));
    if (plan.marginal_deviation() > 1e-9) {
      throw SolverFailure("optimal basis violates the marginal constraints (deviation " +
                          format_double(plan.marginal_deviation()) + ")");
    }

    PotentialTuple potentials;
    potentials.values.resize(p_.shape.size());
    for (std::size_t axis = 0; axis < p_.shape.size(); ++axis) {
      potentials.values[axis].resize(p_.shape[axis], 0.0);
      for (std::uint32_t a = 0; a < p_.shape[axis]; ++a) {
        const int r = p_.row_of(axis, a);
        potentials.values[axis][a] = r >= 0 ? y_[static_cast<std::size_t>(r)] : 0.0;
      }
    }

    NeumaierSum dual;
    for (std::size_t axis = 0; axis < p_.shape.size(); ++axis) {
      for (std::uint32_t a = 0; a < p_.shape[axis]; ++a) {
        dual.add(potentials.values[axis][a] * p_.marginals[axis]->weight(a));
      }
    }

    SolveCertificate cert;
    cert.primal_value = primal.value();
    cert.dual_value = dual.value();
    cert.gap = cert.primal_value - cert.dual_value;
    cert.iterations = iterations_;
    cert.vertex = true;
    if (cert.gap < -1e-9) {
      throw SolverFailure("negative duality gap " + format_double(cert.gap));
    }
    (void)cost;
    return Solution{std::move(plan), std::move(potentials), cert};
  }

  const FlatProblem& p_;
  SolverOptions opt_;
  std::size_t R_;
  std::vector<std::size_t> basic_;
  std::vector<std::uint8_t> in_basis_;
  std::vector<double> binv_;
  std::vector<double> xb_;
  std::vector<double> y_;
  double opt_tol_ = 0.0;
  std::size_t max_iter_ = 0;
  std::size_t iterations_ = 0;
};

}  // namespace

Solution solve_exact(const CostOracle& cost, std::vector<MeasurePtr> marginals,
                     const SolverOptions& options) {
  FlatProblem p = flatten(cost, std::move(marginals), options.size_cap);
  RevisedSimplex simplex(p, options);
  return simplex.run(cost);
}

EntropicResult solve_entropic(const CostOracle& cost,
                              std::vector<MeasurePtr> marginals,
                              double epsilon, std::size_t max_iter,
                              std::size_t size_cap) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw InvalidInput("entropic regularization must be positive");
  }
  if (marginals.size() < 2) throw InvalidInput("the solver needs at least two marginals");
  if (cost.arity() != marginals.size()) {
    throw InvalidInput("cost arity does not match the marginal count");
  }

  std::vector<std::size_t> shape, strides;
  std::vector<double> c;
  double scale = 0.0;
  materialize_cost(cost, marginals, size_cap, shape, strides, c, scale);
  const std::size_t n = marginals.size();
  const std::size_t total = c.size();

  std::vector<std::vector<double>> g(n), logmu(n);
  for (std::size_t axis = 0; axis < n; ++axis) {
    g[axis].assign(shape[axis], 0.0);
    logmu[axis].resize(shape[axis]);
    for (std::uint32_t a = 0; a < shape[axis]; ++a) {
      logmu[axis][a] = std::log(marginals[axis]->weight(a));
    }
  }

  auto log_plan = [&](const ProductIndex& idx, std::size_t flat) {
    double lp = -c[flat] / epsilon;
    for (std::size_t axis = 0; axis < n; ++axis) lp += g[axis][idx[axis]];
    return lp;
  };

  double err = std::numeric_limits<double>::infinity();
  std::size_t sweeps = 0;
  bool converged = false;
  while (sweeps < max_iter) {
    ++sweeps;
    for (std::size_t axis = 0; axis < n; ++axis) {
      // Streaming logsumexp per atom of this axis.
      std::vector<double> mx(shape[axis], -std::numeric_limits<double>::infinity());
      std::vector<double> sum(shape[axis], 0.0);
      ProductIndex idx(n, 0);
      std::size_t flat = 0;
      do {
        const double lp = log_plan(idx, flat++);
        const std::uint32_t a = idx[axis];
        if (lp > mx[a]) {
          sum[a] = sum[a] * std::exp(mx[a] - lp) + 1.0;
          mx[a] = lp;
        } else {
          sum[a] += std::exp(lp - mx[a]);
        }
      } while (next_index(idx, shape));
      for (std::uint32_t a = 0; a < shape[axis]; ++a) {
        g[axis][a] += logmu[axis][a] - (mx[a] + std::log(sum[a]));
      }
    }
    // Marginal error after the sweep.
    std::vector<std::vector<NeumaierSum>> marg(n);
    for (std::size_t axis = 0; axis < n; ++axis) marg[axis].resize(shape[axis]);
    {
      ProductIndex idx(n, 0);
      std::size_t flat = 0;
      do {
        const double v = std::exp(log_plan(idx, flat++));
        for (std::size_t axis = 0; axis < n; ++axis) marg[axis][idx[axis]].add(v);
      } while (next_index(idx, shape));
    }
    err = 0.0;
    for (std::size_t axis = 0; axis < n; ++axis) {
      NeumaierSum tv;
      for (std::uint32_t a = 0; a < shape[axis]; ++a) {
        tv.add(std::abs(marg[axis][a].value() - marginals[axis]->weight(a)));
      }
      err = std::max(err, 0.5 * tv.value());
    }
    if (err <= 1e-10) {
      converged = true;
      break;
    }
  }

  // Materialize and round to exact feasibility: cap each axis marginal at
  // its target, then spread the missing mass as a product of the residuals.
  std::vector<double> pi(total);
  {
    ProductIndex idx(n, 0);
    std::size_t flat = 0;
    do {
      pi[flat] = std::exp(log_plan(idx, flat));
      ++flat;
    } while (next_index(idx, shape));
  }
  for (std::size_t axis = 0; axis < n; ++axis) {
    std::vector<NeumaierSum> marg(shape[axis]);
    ProductIndex idx(n, 0);
    std::size_t flat = 0;
    do {
      marg[idx[axis]].add(pi[flat++]);
    } while (next_index(idx, shape));
    std::vector<double> factor(shape[axis], 1.0);
    for (std::uint32_t a = 0; a < shape[axis]; ++a) {
      const double m = marg[a].value();
      if (m > 0.0) factor[a] = std::min(1.0, marginals[axis]->weight(a) / m);
    }
    idx.assign(n, 0);
    flat = 0;
    do {
      pi[flat++] *= factor[idx[axis]];
    } while (next_index(idx, shape));
  }
  std::vector<std::vector<double>> residual(n);
  {
    std::vector<std::vector<NeumaierSum>> marg(n);
    for (std::size_t axis = 0; axis < n; ++axis) marg[axis].resize(shape[axis]);
    ProductIndex idx(n, 0);
    std::size_t flat = 0;
    do {
      const double v = pi[flat++];
      for (std::size_t axis = 0; axis < n; ++axis) marg[axis][idx[axis]].add(v);
    } while (next_index(idx, shape));
    for (std::size_t axis = 0; axis < n; ++axis) {
      residual[axis].resize(shape[axis]);
      for (std::uint32_t a = 0; a < shape[axis]; ++a) {
        residual[axis][a] = std::max(0.0, marginals[axis]->weight(a) - marg[axis][a].value());
      }
    }
  }
  NeumaierSum mass;
  for (double v : pi) mass.add(v);
  const double deficit = 1.0 - mass.value();
  if (deficit > 1e-15) {
    const double denom = std::pow(deficit, static_cast<double>(n - 1));
    ProductIndex idx(n, 0);
    std::size_t flat = 0;
    do {
      double corr = 1.0;
      for (std::size_t axis = 0; axis < n; ++axis) corr *= residual[axis][idx[axis]];
      if (corr != 0.0) pi[flat] += corr / denom;
      ++flat;
    } while (next_index(idx, shape));
  }

  std::vector<PlanEntry> entries;
  NeumaierSum kept;
  {
    ProductIndex idx(n, 0);
    std::size_t flat = 0;
    do {
      const double v = pi[flat++];
      if (v > 1e-15) {
        kept.add(v);
        entries.push_back(PlanEntry{idx, v});
      }
    } while (next_index(idx, shape));
  }
  const double kt = kept.value();
  if (!(kt > 0.0)) throw SolverFailure("entropic plan lost all mass during rounding");
  NeumaierSum objective;
  for (auto& e : entries) {
    e.mass /= kt;
    objective.add(e.mass * c[flatten_index(e.point, strides)]);
  }

  EntropicResult result{TransportPlan(std::move(marginals), std::move(entries)),
                        converged, sweeps, err, objective.value()};
  return result;
}

}  // namespace mmot
