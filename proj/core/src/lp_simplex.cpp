// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>

#include "lp_internal.hpp"

namespace atfm {

namespace lp_detail {

namespace {

constexpr double kPivotEligible = 1e-9;
constexpr double kDegenerateStep = 1e-10;

enum class PhaseResult { kOptimal, kInfeasible, kIterationLimit, kTimeLimit };

class Simplex {
 public:
  Simplex(const LpProblem& p, const SimplexOptions& options)
      : p_(p),
        view_(p),
        options_(options),
        n_(p.n_cols()),
        m_(p.n_rows),
        total_(n_ + m_),
        upper_(total_),
        cost_(total_, 0.0),
        status_(total_, BasisStatus::kAtLower),
        position_of_(total_, -1),
        pi_(m_, 0.0),
        work_(m_, 0.0),
        w_(m_, 0.0) {
    for (int j = 0; j < n_; ++j) upper_[j] = p.upper[j];
    for (int r = 0; r < m_; ++r) {
      if (p.rhs[r] < 0.0)
        throw ModelError("LP rhs must be nonnegative");
      upper_[n_ + r] = kInfinity;  // artificial bounds tighten after phase 1
    }
    max_pivots_ = options.max_pivots > 0
                      ? options.max_pivots
                      : 50000 + 400ll * static_cast<std::int64_t>(m_ + n_);
  }

  LpSolution run(const Basis* warm) {
    bool warm_ok = warm != nullptr && try_warm_start(*warm);
    if (!warm_ok) {
      cold_start();
      set_phase1_costs();
      PhaseResult r1 = iterate();
      if (r1 == PhaseResult::kIterationLimit || r1 == PhaseResult::kTimeLimit)
        return extract(r1 == PhaseResult::kTimeLimit ? LpStatus::kTimeLimit
                                                     : LpStatus::kIterationLimit);
      double infeas = 0.0;
      for (int pos = 0; pos < m_; ++pos)
        if (view_.is_logical(basic_vars_[pos]) &&
            p_.sense[view_.logical_row(basic_vars_[pos])] == RowSense::kEq)
          infeas += std::max(0.0, xb_[pos]);
      if (infeas > options_.feasibility_tol * (1.0 + norm_rhs()))
        return extract(LpStatus::kInfeasible);
      fix_artificials();
    }
    set_phase2_costs();
    PhaseResult r2 = iterate();
    switch (r2) {
      case PhaseResult::kOptimal:
        return extract(LpStatus::kOptimal);
      case PhaseResult::kTimeLimit:
        return extract(LpStatus::kTimeLimit);
      default:
        return extract(LpStatus::kIterationLimit);
    }
  }

 private:
  double norm_rhs() const {
    double v = 0.0;
    for (double b : p_.rhs) v = std::max(v, std::abs(b));
    return v;
  }

  bool is_artificial(int var) const {
    return view_.is_logical(var) && p_.sense[view_.logical_row(var)] == RowSense::kEq;
  }

  void set_phase1_costs() {
    std::fill(cost_.begin(), cost_.end(), 0.0);
    for (int r = 0; r < m_; ++r)
      if (p_.sense[r] == RowSense::kEq) cost_[n_ + r] = 1.0;
    phase2_ = false;
  }

  void set_phase2_costs() {
    for (int j = 0; j < n_; ++j) cost_[j] = p_.cost[j];
    for (int r = 0; r < m_; ++r) cost_[n_ + r] = 0.0;
    phase2_ = true;
  }

  void fix_artificials() {
    for (int r = 0; r < m_; ++r) {
      if (p_.sense[r] != RowSense::kEq) continue;
      upper_[n_ + r] = 0.0;
      int pos = position_of_[n_ + r];
      if (pos >= 0 && std::abs(xb_[pos]) <= options_.feasibility_tol) xb_[pos] = 0.0;
    }
  }

  void cold_start() {
    basic_vars_.resize(m_);
    std::fill(status_.begin(), status_.end(), BasisStatus::kAtLower);
    std::fill(position_of_.begin(), position_of_.end(), -1);
    for (int r = 0; r < m_; ++r) {
      basic_vars_[r] = n_ + r;
      status_[n_ + r] = BasisStatus::kBasic;
      position_of_[n_ + r] = r;
      upper_[n_ + r] = kInfinity;
    }
    factor_.factorize(view_, basic_vars_);
    recompute_xb();
  }

  bool try_warm_start(const Basis& warm) {
    if (static_cast<int>(warm.cols.size()) != n_ || static_cast<int>(warm.rows.size()) != m_)
      return false;
    std::fill(position_of_.begin(), position_of_.end(), -1);
    basic_vars_.clear();
    for (int j = 0; j < total_; ++j) {
      status_[j] = j < n_ ? warm.cols[j] : warm.rows[j - n_];
      if (status_[j] == BasisStatus::kBasic) {
        position_of_[j] = static_cast<int>(basic_vars_.size());
        basic_vars_.push_back(j);
      } else if (status_[j] == BasisStatus::kAtUpper && upper_[j] >= kInfinity) {
        status_[j] = BasisStatus::kAtLower;
      }
    }
    if (static_cast<int>(basic_vars_.size()) != m_) return false;
    for (int r = 0; r < m_; ++r)
      if (p_.sense[r] == RowSense::kEq) upper_[n_ + r] = 0.0;
    try {
      factor_.factorize(view_, basic_vars_);
    } catch (const ModelError&) {
      return false;
    }
    recompute_xb();
    double tol = options_.feasibility_tol * 10.0 * (1.0 + norm_rhs());
    for (int pos = 0; pos < m_; ++pos) {
      int var = basic_vars_[pos];
      if (xb_[pos] < -tol || xb_[pos] > upper_[var] + tol) return false;
      xb_[pos] = std::clamp(xb_[pos], 0.0, upper_[var]);
    }
    return true;
  }

  void recompute_xb() {
    std::fill(work_.begin(), work_.end(), 0.0);
    for (int r = 0; r < m_; ++r) work_[r] = p_.rhs[r];
    for (int j = 0; j < total_; ++j) {
      if (status_[j] != BasisStatus::kAtUpper) continue;
      double u = upper_[j];
      if (u == 0.0) continue;
      view_.for_entries(j, [&](int r, double v) { work_[r] -= v * u; });
    }
    factor_.ftran(work_);
    xb_ = work_;
  }

  void refactorize() {
    factor_.factorize(view_, basic_vars_);
    recompute_xb();
  }

  void compute_duals() {
    for (int pos = 0; pos < m_; ++pos) work_[pos] = cost_[basic_vars_[pos]];
    factor_.btran(work_);
    pi_ = work_;
  }

  double reduced_cost(int j) const { return cost_[j] - view_.dot_with(j, pi_); }

  // Returns the entering variable or -1 at optimality.
  int price() {
    int best = -1;
    double best_viol = phase2_ ? options_.optimality_tol : options_.optimality_tol * 0.1;
    for (int j = 0; j < total_; ++j) {
      if (status_[j] == BasisStatus::kBasic) continue;
      if (upper_[j] <= 0.0) continue;  // fixed at zero
      double d = reduced_cost(j);
      double viol = status_[j] == BasisStatus::kAtLower ? -d : d;
      if (viol > best_viol) {
        best = j;
        if (bland_) return best;  // lowest index wins outright
        best_viol = viol;
      }
    }
    return best;
  }

  PhaseResult iterate() {
    Stopwatch clock;
    std::int64_t degenerate_run = 0;
    bland_ = false;
    bool certified_fresh = factor_.eta_count() == 0;

    while (true) {
      if (pivots_ >= max_pivots_) return PhaseResult::kIterationLimit;
      if (options_.time_limit_seconds > 0.0 && (pivots_ & 63) == 0 &&
          clock.seconds() > options_.time_limit_seconds)
        return PhaseResult::kTimeLimit;

      compute_duals();
      int q = price();
      if (q < 0) {
        if (certified_fresh) return PhaseResult::kOptimal;
        // Re-verify on a fresh factorization before declaring optimality.
        refactorize();
        certified_fresh = true;
        continue;
      }

      // FTRAN the entering column.
      std::fill(w_.begin(), w_.end(), 0.0);
      view_.for_entries(q, [&](int r, double v) { w_[r] += v; });
      factor_.ftran(w_);

      bool from_lower = status_[q] == BasisStatus::kAtLower;
      double sign = from_lower ? 1.0 : -1.0;

      double theta = upper_[q] >= kInfinity ? kInfinity : upper_[q];
      int leave_pos = -1;        // -1 = bound flip
      double leave_abs_w = 0.0;
      bool leave_to_upper = false;

      for (int pos = 0; pos < m_; ++pos) {
        double wp = sign * w_[pos];
        if (std::abs(wp) <= kPivotEligible) continue;
        int var = basic_vars_[pos];
        double cand;
        bool to_upper;
        if (wp > 0.0) {  // basic value decreases toward 0
          cand = std::max(0.0, xb_[pos]) / wp;
          to_upper = false;
        } else {  // increases toward its upper bound
          if (upper_[var] >= kInfinity) continue;
          cand = std::max(0.0, upper_[var] - xb_[pos]) / (-wp);
          to_upper = true;
        }
        bool take = false;
        if (cand < theta - 1e-9) {
          take = true;
        } else if (cand < theta + 1e-9 && leave_pos >= 0) {
          if (bland_) {
            take = var < basic_vars_[leave_pos];
          } else {
            take = std::abs(w_[pos]) > leave_abs_w + 1e-12;
          }
        }
        if (take) {
          theta = cand;
          leave_pos = pos;
          leave_abs_w = std::abs(w_[pos]);
          leave_to_upper = to_upper;
        }
      }

      if (theta >= kInfinity) throw ModelError("unbounded LP relaxation");

      // Track degeneracy; switch to Bland's rule on long degenerate runs.
      if (theta <= kDegenerateStep) {
        if (++degenerate_run > 10ll * std::max(1, m_)) bland_ = true;
      } else {
        degenerate_run = 0;
        bland_ = false;
      }

      if (leave_pos < 0) {
        // Bound flip: the entering variable crosses to its other bound.
        for (int pos = 0; pos < m_; ++pos) xb_[pos] -= sign * theta * w_[pos];
        status_[q] = from_lower ? BasisStatus::kAtUpper : BasisStatus::kAtLower;
      } else {
        int leaving = basic_vars_[leave_pos];
        for (int pos = 0; pos < m_; ++pos) xb_[pos] -= sign * theta * w_[pos];
        status_[leaving] = leave_to_upper ? BasisStatus::kAtUpper : BasisStatus::kAtLower;
        position_of_[leaving] = -1;
        status_[q] = BasisStatus::kBasic;
        position_of_[q] = leave_pos;
        basic_vars_[leave_pos] = q;
        xb_[leave_pos] = from_lower ? theta : upper_[q] - theta;
        factor_.push_eta(w_, leave_pos);
        certified_fresh = false;
        if (factor_.eta_count() >= options_.refactor_interval) {
          refactorize();
          certified_fresh = true;
        }
      }
      ++pivots_;
    }
  }

  LpSolution extract(LpStatus status) {
    LpSolution sol;
    sol.status = status;
    sol.pivots = pivots_;
    sol.x.assign(n_, 0.0);
    for (int j = 0; j < n_; ++j) {
      if (status_[j] == BasisStatus::kBasic)
        sol.x[j] = xb_[position_of_[j]];
      else if (status_[j] == BasisStatus::kAtUpper)
        sol.x[j] = upper_[j];
      sol.x[j] = std::clamp(sol.x[j], 0.0, p_.upper[j]);
    }
    sol.objective = 0.0;
    for (int j = 0; j < n_; ++j) sol.objective += p_.cost[j] * sol.x[j];
    if (status == LpStatus::kOptimal) {
      set_phase2_costs();
      compute_duals();
      sol.duals = pi_;
    } else {
      sol.duals.assign(m_, 0.0);
    }
    sol.basis.cols.assign(status_.begin(), status_.begin() + n_);
    sol.basis.rows.assign(status_.begin() + n_, status_.end());
    return sol;
  }

  const LpProblem& p_;
  AugmentedView view_;
  SimplexOptions options_;
  int n_, m_, total_;
  std::vector<double> upper_;
  std::vector<double> cost_;
  std::vector<BasisStatus> status_;
  std::vector<int> position_of_;
  std::vector<int> basic_vars_;
  std::vector<double> xb_;
  std::vector<double> pi_;
  std::vector<double> work_;
  std::vector<double> w_;
  BasisFactor factor_;
  std::int64_t pivots_ = 0;
  std::int64_t max_pivots_ = 0;
  bool bland_ = false;
  bool phase2_ = false;
};

}  // namespace

LpSolution simplex_solve(const LpProblem& problem, const SimplexOptions& options,
                         const Basis* warm) {
  Simplex s(problem, options);
  return s.run(warm);
}

}  // namespace lp_detail

namespace {

class BuiltinEngine : public LpEngine {
 public:
  std::string name() const override { return "builtin-simplex"; }
  LpSolution solve_lp(const LpProblem& problem, const SimplexOptions& options,
                      const Basis* warm) override {
    return lp_detail::simplex_solve(problem, options, warm);
  }
  IlpSolution solve_ilp(const LpProblem& problem, const IlpOptions& options,
                        const std::vector<std::vector<int>>& warm_solutions) override;
};

BuiltinEngine& builtin_instance() {
  static BuiltinEngine engine;
  return engine;
}

}  // namespace

LpEngine& builtin_engine() { return builtin_instance(); }

std::vector<LpEngine*>& engine_registry() {
  static std::vector<LpEngine*> registry{&builtin_instance()};
  return registry;
}

LpSolution solve_lp(const LpProblem& problem, const SimplexOptions& options, const Basis* warm) {
  return builtin_engine().solve_lp(problem, options, warm);
}

IlpSolution solve_ilp(const LpProblem& problem, const IlpOptions& options,
                      const std::vector<std::vector<int>>& warm_solutions) {
  return builtin_engine().solve_ilp(problem, options, warm_solutions);
}

namespace lp_detail {
IlpSolution branch_and_bound(const LpProblem& problem, const IlpOptions& options,
                             const std::vector<std::vector<int>>& warm_solutions);
}

namespace {
IlpSolution BuiltinEngine::solve_ilp(const LpProblem& problem, const IlpOptions& options,
                                     const std::vector<std::vector<int>>& warm_solutions) {
  return lp_detail::branch_and_bound(problem, options, warm_solutions);
}
}  // namespace

}  // namespace atfm
