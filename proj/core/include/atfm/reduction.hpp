// SPDX-License-Identifier: Apache-2.0
//
// Option set reduction: project trajectories to departure-anchored
// (element, period) incidence vectors, drop duplicates that the model
// cannot tell apart, then shrink each flight's option set to k
// representatives via k-means.
#pragma once

#include <cstdint>
#include <vector>

#include "atfm/instance.hpp"

namespace atfm {

// Support of the binary time-sector vector A(p): one (element, relative
// entry period) pair per crossing. Sorted, so equal supports compare equal.
struct TimeSectorVector {
  std::vector<std::pair<int, int>> support;

  bool operator==(const TimeSectorVector&) const = default;
  auto operator<=>(const TimeSectorVector&) const = default;
};

TimeSectorVector project(const Trajectory4D& traj);

// One trajectory per distinct time-sector vector. `options` and `scores`
// are parallel; among equivalents the highest score survives, ties go to
// the lexicographically smallest trajectory id. Returned ordinals keep the
// input's relative order.
std::vector<int> dedup(const AtfmInstance& instance, const std::vector<int>& options,
                       const std::vector<double>& scores);

// Lloyd's algorithm with k-means++ seeding on the dense 0/1 expansion of
// the time-sector vectors, Euclidean distance, at most 200 iterations or
// centroid movement below 1e-9. Each nonempty cluster contributes its
// shortest-duration member; ties by distance to the centroid, then by id.
// With |options| <= k the input is returned unchanged.
std::vector<int> kmeans_reduce(const AtfmInstance& instance, const std::vector<int>& options,
                               int k, std::uint64_t rng_seed);

enum class FlightCategory { kA, kB, kC };

struct CategoryLimits {
  int k_a = 12;
  int k_b = 4;
  int k_c = 1;
  // Airport-rank thresholds of the partition: category A flights connect
  // two airports ranked within top_a by movement count; flights touching an
  // airport ranked below top_c fall into category C.
  int top_a = 0;  // 0 = max(2, n_airports / 3)
  int top_c = 0;  // 0 = all airports (no category C)
};

// Ranks airports by movement counts (ties by id) and assigns categories.
std::vector<FlightCategory> categorize_flights(const AtfmInstance& instance,
                                               const CategoryLimits& limits);

// Rewrites every flight's candidate set as dedup + kmeans_reduce with its
// category's k. Preference scores are needed to pick dedup survivors; pass
// an instance whose preference table is already built (or uniform).
void apply_category_limits(AtfmInstance& instance, const CategoryLimits& limits,
                           std::uint64_t rng_seed);

}  // namespace atfm
