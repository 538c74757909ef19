// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <queue>
#include <set>

#include "lp_internal.hpp"

namespace atfm::lp_detail {

LpSolution simplex_solve(const LpProblem& problem, const SimplexOptions& options,
                         const Basis* warm);

namespace {

struct Node {
  double bound = 0.0;
  int id = 0;
  int parent = -1;
  std::vector<int> fixed_zero;  // delta on top of the parent's fixes
  Basis warm;                   // parent's optimal basis
  bool has_warm = false;
};

struct NodeOrder {
  const std::vector<Node>* nodes;
  bool operator()(int a, int b) const {
    double ba = (*nodes)[a].bound, bb = (*nodes)[b].bound;
    if (ba != bb) return ba > bb;  // min-heap on bound
    return a > b;                  // then oldest first
  }
};

class BranchAndBound {
 public:
  BranchAndBound(const LpProblem& problem, const IlpOptions& options)
      : base_(problem), p_(problem), options_(options) {
    // Branching group of a column: the equality row it covers. The models
    // here are assignment-structured, so every column has exactly one.
    group_of_.assign(p_.n_cols(), -1);
    for (int j = 0; j < p_.n_cols(); ++j) {
      for (int k = p_.col_starts[j]; k < p_.col_starts[j + 1]; ++k) {
        if (p_.sense[p_.row_idx[k]] == RowSense::kEq) {
          if (group_of_[j] >= 0)
            throw ModelError("solve_ilp requires exactly one equality row per column");
          group_of_[j] = p_.row_idx[k];
        }
      }
    }
  }

  IlpSolution run(const std::vector<std::vector<int>>& warm_solutions) {
    IlpSolution out;
    for (const std::vector<int>& ones : warm_solutions) try_incumbent(ones);

    Node root;
    root.bound = -kInfinity;  // unknown until the root LP is solved
    nodes_.push_back(std::move(root));
    std::priority_queue<int, std::vector<int>, NodeOrder> open{NodeOrder{&nodes_}};
    open.push(0);
    double best_open_bound = -kInfinity;

    while (!open.empty()) {
      if (options_.node_limit > 0 && processed_ >= options_.node_limit) {
        return finish(out, IlpStatus::kTimeLimit, best_open_bound_of(open));
      }
      if (options_.time_limit_seconds > 0.0 && clock_.seconds() > options_.time_limit_seconds) {
        return finish(out, IlpStatus::kTimeLimit, best_open_bound_of(open));
      }

      int id = open.top();
      best_open_bound = nodes_[id].bound;
      if (has_incumbent_) {
        double bound = std::min(best_open_bound, incumbent_obj_);
        if (gap_of(bound) <= options_.gap_limit + 1e-12)
          return finish(out, gap_of(bound) <= 1e-9 ? IlpStatus::kOptimal : IlpStatus::kGapLimit,
                        bound);
        if (best_open_bound >= incumbent_obj_ - 1e-9) {
          open.pop();
          continue;
        }
      }
      open.pop();
      ++processed_;

      std::vector<int> fixes = collect_fixes(id);
      apply_fixes(fixes);
      SimplexOptions lp_options = options_.lp;
      if (options_.time_limit_seconds > 0.0)
        lp_options.time_limit_seconds =
            std::max(1.0, options_.time_limit_seconds - clock_.seconds());
      LpSolution lp = simplex_solve(p_, lp_options,
                                    nodes_[id].has_warm ? &nodes_[id].warm : nullptr);
      undo_fixes(fixes);

      if (lp.status == LpStatus::kInfeasible) continue;
      if (lp.status != LpStatus::kOptimal)
        return finish(out, IlpStatus::kTimeLimit, best_open_bound_of(open, nodes_[id].bound));
      nodes_[id].bound = lp.objective;
      if (has_incumbent_ && lp.objective >= incumbent_obj_ - 1e-9) continue;

      int frac = most_fractional(lp.x);
      if (frac < 0) {
        accept_integral(lp.x, fixes);
        continue;
      }

      branch(id, frac, lp, open);
    }

    if (has_incumbent_) return finish(out, IlpStatus::kOptimal, incumbent_obj_);
    out.status = IlpStatus::kInfeasible;
    out.nodes = processed_;
    return out;
  }

 private:
  double gap_of(double bound) const {
    return std::abs(incumbent_obj_ - bound) / std::max(1.0, std::abs(bound));
  }

  template <typename Queue>
  double best_open_bound_of(const Queue& open, double fallback = kInfinity) const {
    double b = open.empty() ? fallback : nodes_[open.top()].bound;
    if (has_incumbent_) b = std::min(b, incumbent_obj_);
    return b;
  }

  IlpSolution finish(IlpSolution& out, IlpStatus status, double bound) {
    out.status = has_incumbent_ ? status : IlpStatus::kNoIncumbent;
    if (!has_incumbent_ && status == IlpStatus::kOptimal) out.status = IlpStatus::kInfeasible;
    out.has_incumbent = has_incumbent_;
    out.nodes = processed_;
    if (has_incumbent_) {
      out.x = incumbent_;
      out.objective = incumbent_obj_;
      out.bound = std::min(bound, incumbent_obj_);
      out.gap = gap_of(out.bound);
    } else {
      out.bound = bound;
    }
    return out;
  }

  std::vector<int> collect_fixes(int id) const {
    std::vector<int> fixes;
    for (int cur = id; cur >= 0; cur = nodes_[cur].parent)
      fixes.insert(fixes.end(), nodes_[cur].fixed_zero.begin(), nodes_[cur].fixed_zero.end());
    return fixes;
  }

  void apply_fixes(const std::vector<int>& fixes) {
    for (int c : fixes) p_.upper[c] = 0.0;
  }
  void undo_fixes(const std::vector<int>& fixes) {
    for (int c : fixes) p_.upper[c] = base_.upper[c];
  }

  int most_fractional(const std::vector<double>& x) const {
    int best = -1;
    double best_frac = options_.integrality_tol;
    for (int j = 0; j < static_cast<int>(x.size()); ++j) {
      double frac = std::min(x[j], 1.0 - x[j]);
      if (frac > best_frac) {
        best_frac = frac;
        best = j;
      }
    }
    return best;
  }

  void try_incumbent(const std::vector<int>& ones) {
    std::vector<double> x(p_.n_cols(), 0.0);
    for (int c : ones) {
      if (c < 0 || c >= p_.n_cols() || base_.upper[c] < 0.5) return;
      x[c] = 1.0;
    }
    double obj = 0.0;
    if (!validate(x, &obj)) return;
    if (!has_incumbent_ || obj < incumbent_obj_ - 1e-9) {
      incumbent_ = std::move(x);
      incumbent_obj_ = obj;
      has_incumbent_ = true;
    }
  }

  bool validate(const std::vector<double>& x, double* obj) const {
    std::vector<double> activity(p_.n_rows, 0.0);
    double o = 0.0;
    for (int j = 0; j < p_.n_cols(); ++j) {
      if (x[j] == 0.0) continue;
      o += p_.cost[j] * x[j];
      for (int k = p_.col_starts[j]; k < p_.col_starts[j + 1]; ++k)
        activity[p_.row_idx[k]] += p_.values[k] * x[j];
    }
    for (int r = 0; r < p_.n_rows; ++r) {
      if (p_.sense[r] == RowSense::kEq && std::abs(activity[r] - p_.rhs[r]) > 1e-6) return false;
      if (p_.sense[r] == RowSense::kLe && activity[r] > p_.rhs[r] + 1e-6) return false;
    }
    *obj = o;
    return true;
  }

  void accept_integral(const std::vector<double>& lp_x, const std::vector<int>& fixes) {
    std::vector<double> rounded(lp_x.size(), 0.0);
    for (std::size_t j = 0; j < lp_x.size(); ++j) rounded[j] = lp_x[j] > 0.5 ? 1.0 : 0.0;
    for (int c : fixes) rounded[c] = 0.0;
    double obj = 0.0;
    if (!validate(rounded, &obj)) return;
    if (!has_incumbent_ || obj < incumbent_obj_ - 1e-9) {
      incumbent_ = std::move(rounded);
      incumbent_obj_ = obj;
      has_incumbent_ = true;
    }
  }

  template <typename Queue>
  void branch(int id, int frac_col, const LpSolution& lp, Queue& open) {
    int group = group_of_[frac_col];
    if (group < 0)
      throw ModelError("branching requires every column to cover an equality row");

    // Support of the group in this LP solution.
    std::vector<int> support;
    std::vector<int> members;
    for (int j = 0; j < p_.n_cols(); ++j) {
      if (group_of_[j] != group) continue;
      members.push_back(j);
      if (lp.x[j] > options_.integrality_tol) support.push_back(j);
    }

    auto key = [&](int c) {
      return options_.branch_key.empty() ? c : options_.branch_key[c];
    };
    std::set<int> keys;
    for (int c : support) keys.insert(key(c));

    // Child A commits the group to the fractional column's key (fixing the
    // complement to zero); child B excludes that key. When the support sits
    // on a single key, split by column order at the first support column
    // instead. Either way both children cut off the current LP point.
    std::vector<int> fix_a, fix_b;
    if (keys.size() >= 2) {
      int k_star = key(frac_col);
      for (int c : members) (key(c) == k_star ? fix_b : fix_a).push_back(c);
    } else {
      int threshold = support.front();
      for (int c : members) (c <= threshold ? fix_b : fix_a).push_back(c);
    }
    if (fix_a.empty() || fix_b.empty())
      throw ModelError("degenerate branching partition; equality rows must have rhs 1");

    for (std::vector<int>* fixed : {&fix_a, &fix_b}) {
      if (fixed->empty()) continue;
      Node child;
      child.id = static_cast<int>(nodes_.size());
      child.parent = id;
      child.bound = lp.objective;
      child.fixed_zero = *fixed;
      child.warm = lp.basis;
      child.has_warm = true;
      nodes_.push_back(std::move(child));
      open.push(nodes_.back().id);
    }
  }

  LpProblem base_;
  LpProblem p_;
  IlpOptions options_;
  std::vector<int> group_of_;
  std::vector<Node> nodes_;
  Stopwatch clock_;
  std::int64_t processed_ = 0;
  std::vector<double> incumbent_;
  double incumbent_obj_ = kInfinity;
  bool has_incumbent_ = false;
};

}  // namespace

IlpSolution branch_and_bound(const LpProblem& problem, const IlpOptions& options,
                             const std::vector<std::vector<int>>& warm_solutions) {
  BranchAndBound bb(problem, options);
  return bb.run(warm_solutions);
}

}  // namespace atfm::lp_detail
