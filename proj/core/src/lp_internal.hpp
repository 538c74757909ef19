// SPDX-License-Identifier: Apache-2.0
//
// Internals shared by the simplex and the branch-and-bound: the augmented
// column view (structurals followed by one logical per row) and the basis
// factorization (sparse LU with partial pivoting plus product-form eta
// updates between refactorizations).
#pragma once

#include <vector>

#include "atfm/solver_core.hpp"

namespace atfm::lp_detail {

// Variable ids: [0, n) structural, [n, n+m) logical (slack of a <= row,
// artificial of an = row).
class AugmentedView {
 public:
  AugmentedView(const LpProblem& p) : p_(&p) {}

  int n_structural() const { return p_->n_cols(); }
  int n_rows() const { return p_->n_rows; }
  int n_total() const { return n_structural() + n_rows(); }
  bool is_logical(int var) const { return var >= n_structural(); }
  int logical_row(int var) const { return var - n_structural(); }

  template <typename Fn>
  void for_entries(int var, Fn&& fn) const {
    if (is_logical(var)) {
      fn(logical_row(var), 1.0);
      return;
    }
    for (int k = p_->col_starts[var]; k < p_->col_starts[var + 1]; ++k)
      fn(p_->row_idx[k], p_->values[k]);
  }

  double dot_with(int var, const std::vector<double>& dense_by_row) const {
    double acc = 0.0;
    for_entries(var, [&](int r, double v) { acc += v * dense_by_row[r]; });
    return acc;
  }

 private:
  const LpProblem* p_;
};

class BasisFactor {
 public:
  // Factorizes the basis given by `basic_vars` (one variable per basis
  // position). Throws ModelError on a numerically singular basis.
  void factorize(const AugmentedView& view, const std::vector<int>& basic_vars);

  // x := B^-1 x. Input and output are dense; input indexed by row, output
  // by basis position.
  void ftran(std::vector<double>& x) const;

  // x := B^-T x. Input indexed by basis position, output by row.
  void btran(std::vector<double>& x) const;

  // Registers the pivot "basis position r replaced by a column whose
  // FTRANed image is w" as a product-form eta.
  void push_eta(const std::vector<double>& w, int position);

  int eta_count() const { return static_cast<int>(etas_.size()); }
  int dimension() const { return m_; }

 private:
  struct Entry {
    int index;  // row id in L, step id in U
    double value;
  };
  struct Eta {
    int position;
    double pivot;
    std::vector<Entry> entries;  // off-pivot, by basis position
  };

  int m_ = 0;
  std::vector<int> pivot_row_;    // step -> original row
  std::vector<int> position_of_;  // step -> basis position
  std::vector<double> diag_;      // U diagonal per step
  std::vector<std::vector<Entry>> lower_;  // per step: column of L (rows)
  std::vector<std::vector<Entry>> upper_;  // per step: column of U (steps)
  std::vector<Eta> etas_;

  mutable std::vector<double> work_;
};

}  // namespace atfm::lp_detail
