// SPDX-License-Identifier: Apache-2.0
#include "atfm/greedy.hpp"

#include <algorithm>
#include <numeric>

namespace atfm {

double residual_capacity_score(const ColumnStore& columns, int col, const CapacityLedger& ledger,
                               const RowSystem& rows) {
  auto [begin, end] = columns.capacity_rows(col);
  if (begin == end) return 1.0;
  double acc = 0.0;
  for (const int* r = begin; r != end; ++r) {
    int ri = *r - rows.n_flights;
    double limit = static_cast<double>(rows.capacity_rows[ri].limit);
    acc += (limit - ledger.load(ri) - 1.0) / limit;
  }
  return acc / static_cast<double>(end - begin);
}

GreedyResult greedy_assign(const AtfmInstance& instance, const RowSystem& rows,
                           const ColumnStore& columns, ModelObjective objective) {
  const int n_flights = static_cast<int>(instance.flights.size());

  // Column ranges per flight; the store is flight-major.
  std::vector<std::pair<int, int>> range(n_flights, {0, 0});
  for (int c = 0; c < columns.size();) {
    int f = columns.keys[c].flight;
    int begin = c;
    while (c < columns.size() && columns.keys[c].flight == f) ++c;
    range[f] = {begin, c};
  }

  std::vector<int> order(n_flights);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (instance.flights[a].std_period != instance.flights[b].std_period)
      return instance.flights[a].std_period < instance.flights[b].std_period;
    return instance.flights[a].id < instance.flights[b].id;
  });

  CapacityLedger ledger(rows);
  GreedyResult result;
  const bool pref_first = objective == ModelObjective::kMinTotalDelay;

  for (int f : order) {
    int best = -1;
    double best_g = 0.0;
    int best_d = 0;
    double best_residual = 0.0;
    for (int c = range[f].first; c < range[f].second; ++c) {
      if (!ledger.fits(columns, c)) continue;
      double g = columns.preference[c];
      int d = columns.delay[c];
      double residual = residual_capacity_score(columns, c, ledger, rows);
      bool take = false;
      if (best < 0) {
        take = true;
      } else {
        double primary_new = pref_first ? g : -static_cast<double>(d);
        double primary_old = pref_first ? best_g : -static_cast<double>(best_d);
        double secondary_new = pref_first ? -static_cast<double>(d) : g;
        double secondary_old = pref_first ? -static_cast<double>(best_d) : best_g;
        if (primary_new > primary_old + 1e-12)
          take = true;
        else if (primary_new > primary_old - 1e-12) {
          if (secondary_new > secondary_old + 1e-12)
            take = true;
          else if (secondary_new > secondary_old - 1e-12 && residual > best_residual + 1e-12)
            take = true;
        }
      }
      if (take) {
        best = c;
        best_g = g;
        best_d = d;
        best_residual = residual;
      }
    }
    if (best < 0) {
      result.unassigned_flights.push_back(f);
      continue;
    }
    ledger.commit(columns, best);
    result.chosen_columns.push_back(best);
    result.assignment.push_back(columns.keys[best]);
  }
  std::sort(result.unassigned_flights.begin(), result.unassigned_flights.end());
  return result;
}

}  // namespace atfm
