// SPDX-License-Identifier: Apache-2.0
//
// Domain types for the trajectory-based flow management model: the time
// grid, airspace elements with multi-horizon capacity limits, 4D
// trajectories with sector-crossing events, flights, and per-flight
// preference scores. Pure data plus the two arithmetic helpers the
// formulation is built on; every algorithm lives elsewhere.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "atfm/common.hpp"

namespace atfm {

struct TimeGrid {
  int period_length_seconds = 300;
  int horizon_periods = 288;  // 24h at 5-minute periods

  bool contains(int period) const { return period >= 0 && period < horizon_periods; }
};

enum class ElementKind { kAirport, kEnRouteSector };

struct Element {
  std::string id;
  ElementKind kind = ElementKind::kEnRouteSector;
};

// One declared capacity limit: at most `limit` entries into the element
// during the h contiguous periods starting at start_period.
struct CapacityEntry {
  int start_period = 0;
  int horizon_h = 1;
  int limit = 0;
};

struct CapacityProfile {
  int element = -1;  // element ordinal
  std::vector<CapacityEntry> entries;
};

struct SamplePoint4D {
  double latitude = 0.0;      // degrees
  double longitude = 0.0;     // degrees
  double flight_level = 0.0;  // hundreds of feet
  double elapsed = 0.0;       // seconds since departure
};

struct Crossing {
  int element = -1;               // element ordinal
  int entry_offset_periods = 0;   // relative to departure
};

// Trajectories with this label were flagged as outliers by the clustering
// step and never enter the optimization model.
inline constexpr int kOutlierLabel = -1;

struct Trajectory4D {
  std::string id;
  int origin = -1;       // airport element ordinal
  int destination = -1;  // airport element ordinal
  std::vector<SamplePoint4D> points;
  std::vector<Crossing> crossings;  // ordered by entry offset; first is origin at 0
  int duration_periods = 1;         // >= max crossing offset
  int cluster_label = 0;            // kOutlierLabel or >= 0
  bool preference_eligible = true;

  bool is_outlier() const { return cluster_label == kOutlierLabel; }
};

struct FlightFeatures {
  int day_of_week = 0;  // 0..6
  int week_number = 0;
  std::string airline_code;
  std::string airline_type;  // "legacy" or "low_cost"
  std::string aircraft_model;
};

struct FlightRecord {
  std::string id;
  int origin = -1;
  int destination = -1;
  int std_period = 0;  // scheduled departure
  int sta_period = 0;  // scheduled arrival
  FlightFeatures features;
  std::vector<int> candidate_trajectories;  // trajectory ordinals (P_f)
  int max_ground_delay_periods = 24;        // delay options are 0..max
};

// Per-flight score of each trajectory cluster of its OD pair. Every
// trajectory inherits the score of its cluster; a flight's scores over the
// clusters of its OD pair sum to one.
class PreferenceTable {
 public:
  void set_flight_scores(int flight, std::vector<double> scores_by_cluster) {
    if (static_cast<int>(rows_.size()) <= flight) rows_.resize(flight + 1);
    rows_[flight] = std::move(scores_by_cluster);
  }

  bool has_flight(int flight) const {
    return flight >= 0 && flight < static_cast<int>(rows_.size()) && !rows_[flight].empty();
  }

  double score(int flight, int cluster_label) const {
    if (!has_flight(flight) || cluster_label < 0 ||
        cluster_label >= static_cast<int>(rows_[flight].size())) {
      throw ModelError("preference lookup for unknown (flight, cluster) pair");
    }
    return rows_[flight][cluster_label];
  }

  const std::vector<double>& flight_scores(int flight) const { return rows_.at(flight); }
  bool empty() const { return rows_.empty(); }
  std::size_t size() const { return rows_.size(); }

 private:
  std::vector<std::vector<double>> rows_;
};

struct AtfmInstance {
  TimeGrid time_grid;
  std::vector<Element> elements;
  std::vector<CapacityProfile> capacities;  // at most one profile per element
  std::vector<Trajectory4D> trajectories;
  std::vector<FlightRecord> flights;
  PreferenceTable preferences;
  std::optional<std::int64_t> delay_budget;  // R, in period units

  std::unordered_map<std::string, int> element_index;
  std::unordered_map<std::string, int> trajectory_index;
  std::unordered_map<std::string, int> flight_index;

  int element_ordinal(const std::string& id) const;
  int trajectory_ordinal(const std::string& id) const;
  int flight_ordinal(const std::string& id) const;
  void rebuild_indexes();
};

// Total delay of a flight flying `traj` with the given ground delay:
// max(0, STD + d + E_p - STA). Rejects a delay outside the flight's
// allowed range or a trajectory that is not one of its candidates.
int total_delay(const FlightRecord& flight, const Trajectory4D& traj,
                const AtfmInstance& instance, int ground_delay);

// Period at which the flight enters `element` along `traj` when departing
// with the given ground delay. The element must be crossed by the trajectory.
int entry_period(const FlightRecord& flight, const Trajectory4D& traj, int element,
                 int ground_delay);

// Full referential/invariant validation; throws DataError on the first
// violation. Called by the loaders and by the synthetic generator.
void validate_instance(const AtfmInstance& instance);

// Groups flights and non-outlier trajectories by (origin, destination).
struct OdGroup {
  int origin = -1;
  int destination = -1;
  std::vector<int> trajectories;  // ordinals, candidate options of the pair
  std::vector<int> flights;       // ordinals
};

std::vector<OdGroup> group_by_od(const AtfmInstance& instance);

// Number of clusters (max label + 1) among non-outlier trajectories of each
// OD group, in the order produced by group_by_od.
int cluster_count(const AtfmInstance& instance, const OdGroup& od);

}  // namespace atfm
