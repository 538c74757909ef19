// SPDX-License-Identifier: Apache-2.0
#include "atfm/instance.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <thread>

namespace atfm {

std::string to_hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return std::string(buf);
}

namespace {
int g_max_threads = 0;
}

void set_max_threads(int threads) { g_max_threads = threads > 0 ? threads : 0; }
int max_threads() { return g_max_threads; }

void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t, std::size_t)>& fn) {
  if (n == 0) return;
  int t = resolve_threads(threads);
  if (t <= 1 || n == 1) {
    fn(0, n);
    return;
  }
  std::size_t workers = std::min<std::size_t>(t, n);
  std::size_t chunk = (n + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    std::size_t b = w * chunk;
    std::size_t e = std::min(n, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&fn, b, e] { fn(b, e); });
  }
  for (auto& th : pool) th.join();
}

int AtfmInstance::element_ordinal(const std::string& id) const {
  auto it = element_index.find(id);
  if (it == element_index.end()) throw DataError("unknown element id: " + id);
  return it->second;
}

int AtfmInstance::trajectory_ordinal(const std::string& id) const {
  auto it = trajectory_index.find(id);
  if (it == trajectory_index.end()) throw DataError("unknown trajectory id: " + id);
  return it->second;
}

int AtfmInstance::flight_ordinal(const std::string& id) const {
  auto it = flight_index.find(id);
  if (it == flight_index.end()) throw DataError("unknown flight id: " + id);
  return it->second;
}

void AtfmInstance::rebuild_indexes() {
  element_index.clear();
  trajectory_index.clear();
  flight_index.clear();
  for (std::size_t i = 0; i < elements.size(); ++i) {
    if (!element_index.emplace(elements[i].id, static_cast<int>(i)).second)
      throw DataError("duplicate element id: " + elements[i].id);
  }
  for (std::size_t i = 0; i < trajectories.size(); ++i) {
    if (!trajectory_index.emplace(trajectories[i].id, static_cast<int>(i)).second)
      throw DataError("duplicate trajectory id: " + trajectories[i].id);
  }
  for (std::size_t i = 0; i < flights.size(); ++i) {
    if (!flight_index.emplace(flights[i].id, static_cast<int>(i)).second)
      throw DataError("duplicate flight id: " + flights[i].id);
  }
}

int total_delay(const FlightRecord& flight, const Trajectory4D& traj,
                const AtfmInstance& instance, int ground_delay) {
  if (ground_delay < 0 || ground_delay > flight.max_ground_delay_periods)
    throw ModelError("ground delay " + std::to_string(ground_delay) +
                     " outside the allowed range of flight " + flight.id);
  int traj_ordinal = instance.trajectory_ordinal(traj.id);
  if (std::find(flight.candidate_trajectories.begin(), flight.candidate_trajectories.end(),
                traj_ordinal) == flight.candidate_trajectories.end())
    throw ModelError("trajectory " + traj.id + " is not a candidate of flight " + flight.id);
  int lateness = flight.std_period + ground_delay + traj.duration_periods - flight.sta_period;
  return lateness > 0 ? lateness : 0;
}

int entry_period(const FlightRecord& flight, const Trajectory4D& traj, int element,
                 int ground_delay) {
  for (const Crossing& c : traj.crossings) {
    if (c.element == element)
      return flight.std_period + c.entry_offset_periods + ground_delay;
  }
  throw ModelError("element ordinal " + std::to_string(element) +
                   " not crossed by trajectory " + traj.id);
}

namespace {

void validate_trajectory(const AtfmInstance& instance, const Trajectory4D& t) {
  auto fail = [&](const std::string& msg) { throw DataError("trajectory " + t.id + ": " + msg); };
  if (t.origin < 0 || t.origin >= static_cast<int>(instance.elements.size()) ||
      t.destination < 0 || t.destination >= static_cast<int>(instance.elements.size()))
    fail("dangling origin/destination element");
  if (instance.elements[t.origin].kind != ElementKind::kAirport ||
      instance.elements[t.destination].kind != ElementKind::kAirport)
    fail("origin/destination must be airports");
  if (t.origin == t.destination) fail("origin equals destination");
  if (t.points.size() < 2) fail("needs at least two sample points");
  double prev_elapsed = -1.0;
  for (const SamplePoint4D& p : t.points) {
    if (p.latitude < -90.0 || p.latitude > 90.0) fail("latitude out of range");
    if (p.longitude < -180.0 || p.longitude >= 180.0) fail("longitude out of range");
    if (p.elapsed < prev_elapsed) fail("elapsed times must be nondecreasing");
    prev_elapsed = p.elapsed;
  }
  if (t.points.front().elapsed < 0.0) fail("negative elapsed time");
  if (t.crossings.size() < 2) fail("needs origin and destination crossings");
  if (t.crossings.front().element != t.origin || t.crossings.front().entry_offset_periods != 0)
    fail("first crossing must be the origin airport at offset 0");
  if (t.crossings.back().element != t.destination)
    fail("last crossing must be the destination airport");
  std::set<int> seen;
  int prev_offset = -1;
  int max_offset = 0;
  for (const Crossing& c : t.crossings) {
    if (c.element < 0 || c.element >= static_cast<int>(instance.elements.size()))
      fail("dangling crossing element");
    if (!seen.insert(c.element).second)
      fail("element crossed twice (single-entry model)");
    if (c.entry_offset_periods < prev_offset) fail("crossings not ordered by entry offset");
    prev_offset = c.entry_offset_periods;
    max_offset = std::max(max_offset, c.entry_offset_periods);
  }
  if (t.duration_periods < 1) fail("duration must be positive");
  if (t.duration_periods < max_offset) fail("duration shorter than last crossing offset");
  if (t.cluster_label < kOutlierLabel) fail("invalid cluster label");
}

}  // namespace

void validate_instance(const AtfmInstance& instance) {
  if (instance.time_grid.period_length_seconds <= 0)
    throw DataError("period_length_seconds must be positive");
  if (instance.time_grid.horizon_periods <= 0)
    throw DataError("horizon_periods must be positive");

  std::set<std::string> element_ids;
  for (const Element& e : instance.elements) {
    if (e.id.empty()) throw DataError("empty element id");
    if (!element_ids.insert(e.id).second) throw DataError("duplicate element id: " + e.id);
  }

  std::set<int> capacitated;
  for (const CapacityProfile& cp : instance.capacities) {
    if (cp.element < 0 || cp.element >= static_cast<int>(instance.elements.size()))
      throw DataError("capacity profile references unknown element");
    if (!capacitated.insert(cp.element).second)
      throw DataError("multiple capacity profiles for element " +
                      instance.elements[cp.element].id);
    std::set<std::pair<int, int>> windows;
    for (const CapacityEntry& e : cp.entries) {
      if (e.horizon_h < 1) throw DataError("capacity horizon_h must be >= 1");
      if (e.limit < 0) throw DataError("capacity limit must be >= 0");
      if (!instance.time_grid.contains(e.start_period))
        throw DataError("capacity start_period outside the horizon");
      if (!windows.insert({e.start_period, e.horizon_h}).second)
        throw DataError("duplicate capacity window (start, h) for element " +
                        instance.elements[cp.element].id);
    }
  }

  for (const Trajectory4D& t : instance.trajectories) validate_trajectory(instance, t);

  for (const FlightRecord& f : instance.flights) {
    auto fail = [&](const std::string& msg) { throw DataError("flight " + f.id + ": " + msg); };
    if (f.origin < 0 || f.origin >= static_cast<int>(instance.elements.size()) ||
        f.destination < 0 || f.destination >= static_cast<int>(instance.elements.size()))
      fail("dangling origin/destination");
    if (instance.elements[f.origin].kind != ElementKind::kAirport ||
        instance.elements[f.destination].kind != ElementKind::kAirport)
      fail("origin/destination must be airports");
    if (f.sta_period < f.std_period) fail("STA before STD");
    if (!instance.time_grid.contains(f.std_period) || !instance.time_grid.contains(f.sta_period))
      fail("schedule outside the horizon");
    if (f.max_ground_delay_periods < 0) fail("negative max ground delay");
    for (int traj : f.candidate_trajectories) {
      if (traj < 0 || traj >= static_cast<int>(instance.trajectories.size()))
        fail("dangling candidate trajectory");
      const Trajectory4D& t = instance.trajectories[traj];
      if (t.origin != f.origin || t.destination != f.destination)
        fail("candidate trajectory " + t.id + " has a different OD pair");
    }
  }

  if (!instance.preferences.empty()) {
    auto ods = group_by_od(instance);
    std::map<std::pair<int, int>, int> clusters_of;
    for (const OdGroup& od : ods)
      clusters_of[{od.origin, od.destination}] = cluster_count(instance, od);
    for (std::size_t fi = 0; fi < instance.flights.size(); ++fi) {
      const FlightRecord& f = instance.flights[fi];
      if (!instance.preferences.has_flight(static_cast<int>(fi)))
        throw DataError("flight " + f.id + " has no preference row");
      const auto& row = instance.preferences.flight_scores(static_cast<int>(fi));
      int k = clusters_of[{f.origin, f.destination}];
      if (static_cast<int>(row.size()) < k)
        throw DataError("flight " + f.id + " preference row shorter than its cluster count");
      double sum = 0.0;
      for (double s : row) {
        if (s < 0.0 || s > 1.0)
          throw DataError("flight " + f.id + " preference score outside [0, 1]");
        sum += s;
      }
      if (sum < 1.0 - 1e-9 || sum > 1.0 + 1e-9)
        throw DataError("flight " + f.id + " preference scores do not sum to 1");
    }
  }

  if (instance.delay_budget && *instance.delay_budget < 0)
    throw DataError("delay budget must be nonnegative");
}

std::vector<OdGroup> group_by_od(const AtfmInstance& instance) {
  std::map<std::pair<int, int>, OdGroup> groups;
  auto get = [](std::map<std::pair<int, int>, OdGroup>& m, int o, int d) -> OdGroup& {
    auto [it, inserted] = m.try_emplace({o, d});
    if (inserted) {
      it->second.origin = o;
      it->second.destination = d;
    }
    return it->second;
  };
  for (std::size_t i = 0; i < instance.trajectories.size(); ++i) {
    const Trajectory4D& t = instance.trajectories[i];
    if (t.is_outlier()) continue;
    get(groups, t.origin, t.destination).trajectories.push_back(static_cast<int>(i));
  }
  for (std::size_t i = 0; i < instance.flights.size(); ++i) {
    const FlightRecord& f = instance.flights[i];
    get(groups, f.origin, f.destination).flights.push_back(static_cast<int>(i));
  }
  std::vector<OdGroup> out;
  out.reserve(groups.size());
  for (auto& [key, g] : groups) out.push_back(std::move(g));
  return out;
}

int cluster_count(const AtfmInstance& instance, const OdGroup& od) {
  int k = 0;
  for (int t : od.trajectories) {
    const Trajectory4D& traj = instance.trajectories[t];
    if (!traj.is_outlier()) k = std::max(k, traj.cluster_label + 1);
  }
  return k;
}

}  // namespace atfm
