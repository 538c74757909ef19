// SPDX-License-Identifier: Apache-2.0
//
// Exact LP and 0/1 ILP solving over explicit column/row systems: a revised
// simplex for bounded variables (sparse LU basis factorization with
// product-form updates, Dantzig pricing, Bland fallback) and a best-first
// branch-and-bound that partitions the columns of one equality group per
// node. Supplies the primal values, duals and basis statuses that column
// insertion needs.
#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "atfm/common.hpp"

namespace atfm {

inline constexpr double kInfinity = 1e30;

enum class RowSense { kEq, kLe };

// min cost.x subject to A x (= or <=) rhs, 0 <= x <= upper.
// rhs must be nonnegative (always true for the assignment/capacity models).
struct LpProblem {
  int n_rows = 0;
  std::vector<RowSense> sense;
  std::vector<double> rhs;

  std::vector<double> cost;
  std::vector<double> upper;
  std::vector<int> col_starts{0};
  std::vector<int> row_idx;
  std::vector<double> values;

  int n_cols() const { return static_cast<int>(cost.size()); }

  void set_rows(std::vector<RowSense> s, std::vector<double> b) {
    sense = std::move(s);
    rhs = std::move(b);
    n_rows = static_cast<int>(rhs.size());
  }

  int add_column(double c, double u, const std::vector<std::pair<int, double>>& entries) {
    cost.push_back(c);
    upper.push_back(u);
    for (const auto& [r, v] : entries) {
      row_idx.push_back(r);
      values.push_back(v);
    }
    col_starts.push_back(static_cast<int>(row_idx.size()));
    return n_cols() - 1;
  }
};

enum class BasisStatus : std::uint8_t { kBasic, kAtLower, kAtUpper };

struct Basis {
  std::vector<BasisStatus> cols;  // structural columns
  std::vector<BasisStatus> rows;  // logical column of each row
};

enum class LpStatus { kOptimal, kInfeasible, kIterationLimit, kTimeLimit };

struct LpSolution {
  LpStatus status = LpStatus::kIterationLimit;
  double objective = 0.0;
  std::vector<double> x;      // structural values
  std::vector<double> duals;  // one per row; <= 0 on <= rows at optimality
  Basis basis;
  std::int64_t pivots = 0;
};

struct SimplexOptions {
  double feasibility_tol = 1e-7;
  double optimality_tol = 1e-7;
  std::int64_t max_pivots = 0;     // 0 = automatic (generous) limit
  double time_limit_seconds = 0.0; // 0 = none
  int refactor_interval = 120;
};

enum class IlpStatus { kOptimal, kGapLimit, kTimeLimit, kInfeasible, kNoIncumbent };

struct IlpSolution {
  IlpStatus status = IlpStatus::kNoIncumbent;
  bool has_incumbent = false;
  std::vector<double> x;  // incumbent, integral
  double objective = 0.0;
  double bound = 0.0;  // proven bound (min sense)
  double gap = 0.0;    // |objective - bound| / max(1, |bound|)
  std::int64_t nodes = 0;
};

struct IlpOptions {
  double gap_limit = 0.01;
  double time_limit_seconds = 3600.0;
  double integrality_tol = 1e-6;
  std::int64_t node_limit = 0;  // 0 = none
  SimplexOptions lp;
  // Optional secondary key per column (the trajectory of the triple it
  // stands for). Branching partitions a group's columns by this key when
  // the fractional support spans several keys, and by column order
  // otherwise. Empty = column index.
  std::vector<int> branch_key;
};

// Solves the LP relaxation; all structural variables keep their box bounds.
// A warm basis with the right shape is used when it is primal feasible,
// otherwise the solver falls back to a fresh two-phase start.
LpSolution solve_lp(const LpProblem& problem, const SimplexOptions& options = {},
                    const Basis* warm = nullptr);

// Branch and bound over the 0/1 restriction of `problem` (every structural
// upper bound must be 1 or 0). Branches by partitioning the columns of the
// equality row owning the most fractional column. `warm_solutions` are
// candidate incumbents given as lists of columns at value 1; infeasible
// candidates are ignored.
IlpSolution solve_ilp(const LpProblem& problem, const IlpOptions& options = {},
                      const std::vector<std::vector<int>>& warm_solutions = {});

// Pluggable engine seam: the built-in simplex/branch-and-bound is the
// default; an external LP/MIP engine can register behind the same contract
// and the conformance suite runs against every registered engine.
class LpEngine {
 public:
  virtual ~LpEngine() = default;
  virtual std::string name() const = 0;
  virtual LpSolution solve_lp(const LpProblem& problem, const SimplexOptions& options,
                              const Basis* warm) = 0;
  virtual IlpSolution solve_ilp(const LpProblem& problem, const IlpOptions& options,
                                const std::vector<std::vector<int>>& warm_solutions) = 0;
};

LpEngine& builtin_engine();
std::vector<LpEngine*>& engine_registry();

}  // namespace atfm
