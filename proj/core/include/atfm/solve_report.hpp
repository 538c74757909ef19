// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace atfm {

struct AssignmentRow {
  std::string flight_id;
  std::string trajectory_id;
  int ground_delay_periods = 0;
  int delay_periods = 0;       // D of the chosen column
  double preference = 0.0;     // G of the chosen column

  bool operator==(const AssignmentRow&) const = default;
};

// Everything a solve run reports: linear-relaxation statistics, the integer
// solution, the optimality gap against the certified relaxation bound, and
// the per-flight assignment.
struct SolveReport {
  std::string model;  // "ip_delay" or "ip_pref"
  std::string status; // "optimal", "gap_limit", "time_limit", "infeasible", "no_incumbent"

  double lp_value = 0.0;  // user sense: delay minimized, preference maximized
  bool lp_certified = false;
  double lp_time_seconds = 0.0;
  int lp_iterations = 0;

  int n_admissible_columns = 0;
  int n_final_columns = 0;  // variables of the restricted integer program

  double ilp_objective = 0.0;  // user sense
  double ilp_bound = 0.0;      // user sense
  double ilp_time_seconds = 0.0;
  double gap_percent = 0.0;
  std::int64_t ilp_nodes = 0;

  std::int64_t total_delay_periods = 0;
  double total_preference = 0.0;
  std::int64_t budget = -1;  // rhs of the delay budget row; -1 = absent

  int alpha = 0;
  int beta = 0;
  std::uint64_t seed = 0;
  std::string config_hash;

  std::vector<AssignmentRow> assignments;
  std::vector<std::string> unassigned_flight_ids;

  bool operator==(const SolveReport&) const = default;
};

struct TraceRow {
  int iteration = 0;
  double lp_value = 0.0;  // user sense
  int active_columns = 0;
  int inserted = 0;
  int evicted = 0;
};

}  // namespace atfm
