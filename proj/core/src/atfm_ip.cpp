// SPDX-License-Identifier: Apache-2.0
#include "atfm/atfm_ip.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

namespace atfm {

int ColumnStore::find(const ColumnKey& key) const {
  // Columns are built flight-major with trajectories and delays ascending,
  // so the store is sorted by key.
  auto it = std::lower_bound(keys.begin(), keys.end(), key);
  if (it == keys.end() || !(*it == key)) return -1;
  return static_cast<int>(it - keys.begin());
}

RowSystem build_rows(const AtfmInstance& instance, ModelObjective objective,
                     std::optional<std::int64_t> budget) {
  if (budget && objective != ModelObjective::kMaxTotalPreference)
    throw ModelError("the delay budget row belongs to the preference model only");

  RowSystem rows;
  rows.n_flights = static_cast<int>(instance.flights.size());
  rows.objective = objective;
  rows.budget_rhs = budget;
  rows.horizon = instance.time_grid.horizon_periods;

  for (const CapacityProfile& cp : instance.capacities) {
    if (cp.element < 0 || cp.element >= static_cast<int>(instance.elements.size()))
      throw DataError("capacity profile references an unknown element");
    for (const CapacityEntry& e : cp.entries)
      rows.capacity_rows.push_back({cp.element, e.start_period, e.horizon_h, e.limit});
  }
  std::sort(rows.capacity_rows.begin(), rows.capacity_rows.end(),
            [](const RowSystem::CapacityRow& a, const RowSystem::CapacityRow& b) {
              return std::tie(a.element, a.start_period, a.horizon_h) <
                     std::tie(b.element, b.start_period, b.horizon_h);
            });

  // Cover lists: for each (element, period), the capacity rows whose window
  // contains the period.
  std::size_t slots = instance.elements.size() * static_cast<std::size_t>(rows.horizon);
  std::vector<int> counts(slots + 1, 0);
  for (const RowSystem::CapacityRow& r : rows.capacity_rows) {
    int end = std::min(rows.horizon, r.start_period + r.horizon_h);
    for (int t = r.start_period; t < end; ++t)
      ++counts[static_cast<std::size_t>(r.element) * rows.horizon + t];
  }
  rows.cover_starts.assign(slots + 1, 0);
  for (std::size_t s = 0; s < slots; ++s)
    rows.cover_starts[s + 1] = rows.cover_starts[s] + counts[s];
  rows.cover_rows.resize(rows.cover_starts.back());
  std::vector<int> fill(slots, 0);
  for (std::size_t ri = 0; ri < rows.capacity_rows.size(); ++ri) {
    const RowSystem::CapacityRow& r = rows.capacity_rows[ri];
    int end = std::min(rows.horizon, r.start_period + r.horizon_h);
    for (int t = r.start_period; t < end; ++t) {
      std::size_t slot = static_cast<std::size_t>(r.element) * rows.horizon + t;
      rows.cover_rows[rows.cover_starts[slot] + fill[slot]++] = static_cast<int>(ri);
    }
  }
  return rows;
}

namespace {

// Largest admissible ground delay of (flight, trajectory): every delayed
// entry must stay inside the horizon.
int max_admissible_delay(const AtfmInstance& instance, const FlightRecord& flight,
                         const Trajectory4D& traj) {
  int max_offset = 0;
  for (const Crossing& c : traj.crossings)
    max_offset = std::max(max_offset, c.entry_offset_periods);
  int room = instance.time_grid.horizon_periods - 1 - flight.std_period - max_offset;
  return std::min(flight.max_ground_delay_periods, room);
}

}  // namespace

ColumnStore build_columns(const AtfmInstance& instance, const RowSystem& rows) {
  const int n_flights = static_cast<int>(instance.flights.size());
  if (instance.preferences.empty() && n_flights > 0)
    throw ModelError("build_columns needs a preference table (learned or uniform)");

  // Per-flight column blocks built in parallel, then concatenated in flight
  // order so the store layout is deterministic.
  struct Block {
    std::vector<ColumnKey> keys;
    std::vector<double> preference;
    std::vector<int> delay;
    std::vector<int> row_starts{0};
    std::vector<int> rows_flat;
  };
  std::vector<Block> blocks(n_flights);

  parallel_for(n_flights, 0, [&](std::size_t b, std::size_t e) {
    for (std::size_t fi = b; fi < e; ++fi) {
      const FlightRecord& flight = instance.flights[fi];
      Block& block = blocks[fi];
      std::vector<int> candidates = flight.candidate_trajectories;
      std::sort(candidates.begin(), candidates.end());
      for (int ti : candidates) {
        const Trajectory4D& traj = instance.trajectories[ti];
        if (traj.is_outlier()) continue;
        double g = instance.preferences.score(static_cast<int>(fi), traj.cluster_label);
        int d_max = max_admissible_delay(instance, flight, traj);
        for (int d = 0; d <= d_max; ++d) {
          block.keys.push_back({static_cast<int>(fi), ti, d});
          block.preference.push_back(g);
          int lateness =
              flight.std_period + d + traj.duration_periods - flight.sta_period;
          block.delay.push_back(lateness > 0 ? lateness : 0);
          for (const Crossing& c : traj.crossings) {
            int entry = flight.std_period + c.entry_offset_periods + d;
            auto [begin, end] = rows.covering(c.element, entry);
            for (const int* r = begin; r != end; ++r)
              block.rows_flat.push_back(rows.n_flights + *r);
          }
          // Membership sorted per column (crossings can touch rows of
          // different elements in any id order).
          std::sort(block.rows_flat.begin() + block.row_starts.back(), block.rows_flat.end());
          block.row_starts.push_back(static_cast<int>(block.rows_flat.size()));
        }
      }
    }
  });

  ColumnStore store;
  store.row_starts.push_back(0);
  for (int fi = 0; fi < n_flights; ++fi) {
    Block& block = blocks[fi];
    if (block.keys.empty())
      throw ModelError("flight " + instance.flights[fi].id +
                       " has no admissible (trajectory, delay) column");
    store.keys.insert(store.keys.end(), block.keys.begin(), block.keys.end());
    store.preference.insert(store.preference.end(), block.preference.begin(),
                            block.preference.end());
    store.delay.insert(store.delay.end(), block.delay.begin(), block.delay.end());
    int base = static_cast<int>(store.capacity_rows_flat.size());
    store.capacity_rows_flat.insert(store.capacity_rows_flat.end(), block.rows_flat.begin(),
                                    block.rows_flat.end());
    for (std::size_t i = 1; i < block.row_starts.size(); ++i)
      store.row_starts.push_back(base + block.row_starts[i]);
  }
  return store;
}

AssignmentEvaluation evaluate_assignment(const AtfmInstance& instance, const RowSystem& rows,
                                         const std::vector<ColumnKey>& assignment) {
  const int n_flights = static_cast<int>(instance.flights.size());
  std::vector<char> seen(n_flights, 0);
  if (static_cast<int>(assignment.size()) != n_flights)
    throw ModelError("evaluate_assignment needs exactly one key per flight");

  AssignmentEvaluation eval;
  std::vector<int> load(rows.n_capacity_rows(), 0);
  for (const ColumnKey& key : assignment) {
    if (key.flight < 0 || key.flight >= n_flights)
      throw ModelError("assignment key for an unknown flight");
    if (seen[key.flight]) throw ModelError("flight assigned twice");
    seen[key.flight] = 1;
    const FlightRecord& flight = instance.flights[key.flight];
    if (key.trajectory < 0 || key.trajectory >= static_cast<int>(instance.trajectories.size()))
      throw ModelError("assignment key for an unknown trajectory");
    const Trajectory4D& traj = instance.trajectories[key.trajectory];
    if (key.ground_delay < 0 || key.ground_delay > flight.max_ground_delay_periods)
      throw ModelError("assignment ground delay outside the flight's range");

    int lateness =
        flight.std_period + key.ground_delay + traj.duration_periods - flight.sta_period;
    eval.total_delay += lateness > 0 ? lateness : 0;
    if (!instance.preferences.empty())
      eval.total_preference +=
          instance.preferences.score(key.flight, traj.cluster_label);

    for (const Crossing& c : traj.crossings) {
      int entry = flight.std_period + c.entry_offset_periods + key.ground_delay;
      if (entry >= rows.horizon)
        throw ModelError("assignment drives an entry beyond the horizon");
      auto [begin, end] = rows.covering(c.element, entry);
      for (const int* r = begin; r != end; ++r) ++load[*r];
    }
  }
  for (int f = 0; f < n_flights; ++f)
    if (!seen[f]) throw ModelError("flight " + instance.flights[f].id + " is unassigned");

  for (int r = 0; r < rows.n_capacity_rows(); ++r) {
    if (load[r] > rows.capacity_rows[r].limit) {
      eval.feasible = false;
      eval.violated_rows.push_back(rows.n_flights + r);
    }
  }
  return eval;
}

std::string write_lp_format(const AtfmInstance& instance, const RowSystem& rows,
                            const ColumnStore& columns) {
  std::string out;
  char buf[128];
  auto var = [&](int c) {
    const ColumnKey& k = columns.keys[c];
    return "y_" + std::to_string(k.flight) + "_" + std::to_string(k.trajectory) + "_" +
           std::to_string(k.ground_delay);
  };

  bool maximize = rows.objective == ModelObjective::kMaxTotalPreference;
  out += maximize ? "Maximize\n obj:" : "Minimize\n obj:";
  for (int c = 0; c < columns.size(); ++c) {
    double coeff = maximize ? columns.preference[c] : static_cast<double>(columns.delay[c]);
    std::snprintf(buf, sizeof(buf), " + %.17g %s", coeff, var(c).c_str());
    out += buf;
  }
  out += "\nSubject To\n";
  std::vector<std::vector<int>> by_flight(rows.n_flights);
  std::vector<std::vector<int>> by_row(rows.n_capacity_rows());
  for (int c = 0; c < columns.size(); ++c) {
    by_flight[columns.keys[c].flight].push_back(c);
    auto [begin, end] = columns.capacity_rows(c);
    for (const int* r = begin; r != end; ++r) by_row[*r - rows.n_flights].push_back(c);
  }
  for (int f = 0; f < rows.n_flights; ++f) {
    out += " assign_" + std::to_string(f) + ":";
    for (int c : by_flight[f]) out += " + " + var(c);
    out += " = 1\n";
  }
  for (int r = 0; r < rows.n_capacity_rows(); ++r) {
    if (by_row[r].empty()) continue;
    out += " cap_" + std::to_string(r) + ":";
    for (int c : by_row[r]) out += " + " + var(c);
    std::snprintf(buf, sizeof(buf), " <= %d\n", rows.capacity_rows[r].limit);
    out += buf;
  }
  if (rows.budget_rhs) {
    out += " budget:";
    for (int c = 0; c < columns.size(); ++c) {
      if (columns.delay[c] == 0) continue;
      std::snprintf(buf, sizeof(buf), " + %d %s", columns.delay[c], var(c).c_str());
      out += buf;
    }
    std::snprintf(buf, sizeof(buf), " <= %lld\n",
                  static_cast<long long>(*rows.budget_rhs));
    out += buf;
  }
  out += "Binaries\n";
  for (int c = 0; c < columns.size(); ++c) out += " " + var(c);
  out += "\nEnd\n";
  (void)instance;
  return out;
}

PreferenceTable uniform_preferences(const AtfmInstance& instance) {
  PreferenceTable table;
  for (const OdGroup& od : group_by_od(instance)) {
    int k = std::max(1, cluster_count(instance, od));
    std::vector<double> row(k, 1.0 / k);
    for (int f : od.flights) table.set_flight_scores(f, row);
  }
  return table;
}

}  // namespace atfm
