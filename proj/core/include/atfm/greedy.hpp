// SPDX-License-Identifier: Apache-2.0
//
// Constructive initial heuristic: flights in scheduled-departure order each
// take the best capacity-feasible (trajectory, delay) pair under a
// lexicographic rule, mirroring first-planned-first-served slot allocation.
#pragma once

#include <vector>

#include "atfm/atfm_ip.hpp"

namespace atfm {

class CapacityLedger {
 public:
  explicit CapacityLedger(const RowSystem& rows)
      : rows_(&rows), load_(rows.n_capacity_rows(), 0) {}

  // Capacity row ids here are global (>= n_flights), as stored in columns.
  bool fits(const ColumnStore& columns, int col) const {
    auto [begin, end] = columns.capacity_rows(col);
    for (const int* r = begin; r != end; ++r) {
      int ri = *r - rows_->n_flights;
      if (load_[ri] + 1 > rows_->capacity_rows[ri].limit) return false;
    }
    return true;
  }

  void commit(const ColumnStore& columns, int col) {
    auto [begin, end] = columns.capacity_rows(col);
    for (const int* r = begin; r != end; ++r) ++load_[*r - rows_->n_flights];
  }

  int load(int capacity_row_offset) const { return load_[capacity_row_offset]; }
  const std::vector<int>& loads() const { return load_; }

 private:
  const RowSystem* rows_;
  std::vector<int> load_;
};

// Mean over the capacity rows the choice would load of the post-choice
// percent residual (limit - load - 1) / limit; 1.0 when the choice loads no
// capacity row. The choice must be feasible.
double residual_capacity_score(const ColumnStore& columns, int col, const CapacityLedger& ledger,
                               const RowSystem& rows);

struct GreedyResult {
  std::vector<int> chosen_columns;     // column ids, one per assigned flight
  std::vector<ColumnKey> assignment;   // parallel to chosen_columns
  std::vector<int> unassigned_flights; // flight ordinals with no feasible pair
};

// In kMinTotalDelay mode each flight takes, among feasible pairs, the
// lexicographic best by (max preference, min delay, max residual score); in
// kMaxTotalPreference mode preference and delay swap places. Remaining ties
// go to the lowest (trajectory, delay) column. Unassigned flights are a
// result, not an error.
GreedyResult greedy_assign(const AtfmInstance& instance, const RowSystem& rows,
                           const ColumnStore& columns, ModelObjective objective);

}  // namespace atfm
