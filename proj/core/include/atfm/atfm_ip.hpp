// SPDX-License-Identifier: Apache-2.0
//
// Explicit column/row structures of the two assignment models: one column
// per admissible (flight, trajectory, ground delay) triple, one equality
// row per flight, one <= row per declared capacity window, and an optional
// total-delay budget row used by the preference-maximizing model.
#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "atfm/instance.hpp"

namespace atfm {

enum class ModelObjective { kMinTotalDelay, kMaxTotalPreference };

struct ColumnKey {
  int flight = -1;
  int trajectory = -1;  // trajectory ordinal
  int ground_delay = 0;

  auto operator<=>(const ColumnKey&) const = default;
};

struct RowSystem {
  struct CapacityRow {
    int element = -1;
    int start_period = 0;
    int horizon_h = 1;
    int limit = 0;
  };

  int n_flights = 0;
  std::vector<CapacityRow> capacity_rows;  // sorted by (element, start, h)
  std::optional<std::int64_t> budget_rhs;  // present only with kMaxTotalPreference
  ModelObjective objective = ModelObjective::kMinTotalDelay;

  int horizon = 0;

  // Capacity rows covering entries of `element` at period t, as a CSR slice
  // over slot element * horizon + t. Row ids here are capacity-row offsets,
  // i.e. global row id minus n_flights.
  std::vector<int> cover_starts;
  std::vector<int> cover_rows;

  int n_capacity_rows() const { return static_cast<int>(capacity_rows.size()); }
  int total_rows() const {
    return n_flights + n_capacity_rows() + (budget_rhs.has_value() ? 1 : 0);
  }
  int budget_row() const { return budget_rhs ? n_flights + n_capacity_rows() : -1; }

  std::pair<const int*, const int*> covering(int element, int period) const {
    std::size_t slot = static_cast<std::size_t>(element) * horizon + period;
    return {cover_rows.data() + cover_starts[slot], cover_rows.data() + cover_starts[slot + 1]};
  }
};

// Flat column store. Capacity memberships are global row ids in
// [n_flights, n_flights + n_capacity_rows); the assignment row of column i
// is keys[i].flight; the budget coefficient is delay[i].
struct ColumnStore {
  std::vector<ColumnKey> keys;
  std::vector<double> preference;  // G of the trajectory's cluster for the flight
  std::vector<int> delay;          // D, in periods
  std::vector<int> row_starts;     // CSR into capacity_rows_flat
  std::vector<int> capacity_rows_flat;

  int size() const { return static_cast<int>(keys.size()); }
  std::pair<const int*, const int*> capacity_rows(int col) const {
    return {capacity_rows_flat.data() + row_starts[col],
            capacity_rows_flat.data() + row_starts[col + 1]};
  }
  // Objective coefficient in the solver's minimization space.
  double cost(int col, ModelObjective objective) const {
    return objective == ModelObjective::kMinTotalDelay ? static_cast<double>(delay[col])
                                                       : -preference[col];
  }
  int find(const ColumnKey& key) const;  // -1 when absent
};

RowSystem build_rows(const AtfmInstance& instance, ModelObjective objective,
                     std::optional<std::int64_t> budget = std::nullopt);

// One column per admissible triple: the ground delay runs over
// 0..max_ground_delay, pruned where a delayed entry would leave the
// horizon. A flight left with zero admissible columns is a hard error.
ColumnStore build_columns(const AtfmInstance& instance, const RowSystem& rows);

struct AssignmentEvaluation {
  bool feasible = true;
  std::int64_t total_delay = 0;
  double total_preference = 0.0;
  std::vector<int> violated_rows;  // global capacity row ids
};

// Recounts every capacity row under the given full assignment (one key per
// flight) and returns both objective totals. Missing, duplicate or foreign
// keys are caller bugs and throw.
AssignmentEvaluation evaluate_assignment(const AtfmInstance& instance, const RowSystem& rows,
                                         const std::vector<ColumnKey>& assignment);

// Model dump in CPLEX LP text format, for cross-checks with external
// solvers.
std::string write_lp_format(const AtfmInstance& instance, const RowSystem& rows,
                            const ColumnStore& columns);

// Uniform preference scores (1/K per cluster of the flight's OD pair);
// used when no learned preference table is available.
PreferenceTable uniform_preferences(const AtfmInstance& instance);

}  // namespace atfm
