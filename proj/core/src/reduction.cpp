// SPDX-License-Identifier: Apache-2.0
#include "atfm/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace atfm {

TimeSectorVector project(const Trajectory4D& traj) {
  TimeSectorVector v;
  v.support.reserve(traj.crossings.size());
  for (const Crossing& c : traj.crossings)
    v.support.emplace_back(c.element, c.entry_offset_periods);
  std::sort(v.support.begin(), v.support.end());
  return v;
}

std::vector<int> dedup(const AtfmInstance& instance, const std::vector<int>& options,
                       const std::vector<double>& scores) {
  if (options.size() != scores.size())
    throw ModelError("dedup: options and scores must be parallel");
  std::map<TimeSectorVector, int> best;  // vector -> index into options
  for (std::size_t i = 0; i < options.size(); ++i) {
    TimeSectorVector v = project(instance.trajectories[options[i]]);
    auto [it, inserted] = best.try_emplace(std::move(v), static_cast<int>(i));
    if (inserted) continue;
    int j = it->second;
    bool take = scores[i] > scores[j] + 1e-12 ||
                (std::abs(scores[i] - scores[j]) <= 1e-12 &&
                 instance.trajectories[options[i]].id < instance.trajectories[options[j]].id);
    if (take) it->second = static_cast<int>(i);
  }
  std::vector<int> keep_pos;
  keep_pos.reserve(best.size());
  for (const auto& [v, pos] : best) keep_pos.push_back(pos);
  std::sort(keep_pos.begin(), keep_pos.end());
  std::vector<int> out;
  out.reserve(keep_pos.size());
  for (int pos : keep_pos) out.push_back(options[pos]);
  return out;
}

namespace {

// Dense 0/1 expansion over the union of support dimensions of the batch.
struct DenseBatch {
  int dims = 0;
  std::vector<std::vector<int>> points;  // sorted dim indices with value 1
};

DenseBatch densify(const AtfmInstance& instance, const std::vector<int>& options) {
  std::map<std::pair<int, int>, int> dim_of;
  DenseBatch batch;
  batch.points.resize(options.size());
  for (std::size_t i = 0; i < options.size(); ++i) {
    TimeSectorVector v = project(instance.trajectories[options[i]]);
    for (const auto& key : v.support) {
      auto [it, inserted] = dim_of.try_emplace(key, static_cast<int>(dim_of.size()));
      batch.points[i].push_back(it->second);
    }
    std::sort(batch.points[i].begin(), batch.points[i].end());
  }
  batch.dims = static_cast<int>(dim_of.size());
  return batch;
}

double sq_dist_to_centroid(const std::vector<int>& point, const std::vector<double>& centroid,
                           double centroid_sq_norm) {
  // |x - c|^2 = |x| - 2 x.c + |c|^2 for 0/1 x.
  double dot = 0.0;
  for (int d : point) dot += centroid[d];
  return static_cast<double>(point.size()) - 2.0 * dot + centroid_sq_norm;
}

double sq_dist_points(const std::vector<int>& a, const std::vector<int>& b) {
  // |a| + |b| - 2 |a n b| for sorted 0/1 supports.
  std::size_t i = 0, j = 0, common = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) {
      ++common;
      ++i;
      ++j;
    } else if (a[i] < b[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return static_cast<double>(a.size() + b.size() - 2 * common);
}

}  // namespace

std::vector<int> kmeans_reduce(const AtfmInstance& instance, const std::vector<int>& options,
                               int k, std::uint64_t rng_seed) {
  if (k < 1) throw ModelError("kmeans_reduce needs k >= 1");
  if (options.empty()) throw ModelError("kmeans_reduce over an empty option set");
  const int m = static_cast<int>(options.size());
  if (m <= k) return options;

  DenseBatch batch = densify(instance, options);
  Rng rng(rng_seed);

  // k-means++ seeding; ties and the first pick are deterministic.
  std::vector<int> seeds;
  seeds.push_back(static_cast<int>(rng.next_below(m)));
  std::vector<double> d2(m, 0.0);
  while (static_cast<int>(seeds.size()) < k) {
    double total = 0.0;
    for (int i = 0; i < m; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (int s : seeds)
        best = std::min(best, sq_dist_points(batch.points[i], batch.points[s]));
      d2[i] = best;
      total += best;
    }
    int pick = -1;
    if (total <= 0.0) {
      // all points coincide with some seed; fall back to first unseeded
      for (int i = 0; i < m && pick < 0; ++i)
        if (std::find(seeds.begin(), seeds.end(), i) == seeds.end()) pick = i;
    } else {
      double r = rng.next_double() * total;
      double acc = 0.0;
      for (int i = 0; i < m; ++i) {
        acc += d2[i];
        if (acc >= r) {
          pick = i;
          break;
        }
      }
      if (pick < 0) pick = m - 1;
    }
    seeds.push_back(pick);
  }

  std::vector<std::vector<double>> centroids(k, std::vector<double>(batch.dims, 0.0));
  for (int c = 0; c < k; ++c)
    for (int d : batch.points[seeds[c]]) centroids[c][d] = 1.0;

  std::vector<int> assign(m, -1);
  for (int iter = 0; iter < 200; ++iter) {
    std::vector<double> sq_norms(k, 0.0);
    for (int c = 0; c < k; ++c)
      for (double v : centroids[c]) sq_norms[c] += v * v;

    bool changed = false;
    for (int i = 0; i < m; ++i) {
      int best_c = -1;
      double best_d = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        double d = sq_dist_to_centroid(batch.points[i], centroids[c], sq_norms[c]);
        if (d < best_d - 1e-12) {
          best_d = d;
          best_c = c;
        }
      }
      if (assign[i] != best_c) {
        assign[i] = best_c;
        changed = true;
      }
    }

    double movement = 0.0;
    for (int c = 0; c < k; ++c) {
      std::vector<double> mean(batch.dims, 0.0);
      int count = 0;
      for (int i = 0; i < m; ++i) {
        if (assign[i] != c) continue;
        ++count;
        for (int d : batch.points[i]) mean[d] += 1.0;
      }
      if (count == 0) continue;  // empty cluster keeps its centroid
      for (double& v : mean) v /= count;
      for (int d = 0; d < batch.dims; ++d) {
        double delta = mean[d] - centroids[c][d];
        movement += delta * delta;
      }
      centroids[c] = std::move(mean);
    }
    if (!changed || movement < 1e-9) break;
  }

  // Representative per nonempty cluster: min duration, then min distance to
  // the centroid, then smallest id.
  std::vector<double> sq_norms(k, 0.0);
  for (int c = 0; c < k; ++c)
    for (double v : centroids[c]) sq_norms[c] += v * v;

  std::vector<int> representatives;
  for (int c = 0; c < k; ++c) {
    int best = -1;
    double best_dist = 0.0;
    for (int i = 0; i < m; ++i) {
      if (assign[i] != c) continue;
      const Trajectory4D& cand = instance.trajectories[options[i]];
      double dist = sq_dist_to_centroid(batch.points[i], centroids[c], sq_norms[c]);
      if (best < 0) {
        best = i;
        best_dist = dist;
        continue;
      }
      const Trajectory4D& incumbent = instance.trajectories[options[best]];
      bool take = false;
      if (cand.duration_periods != incumbent.duration_periods)
        take = cand.duration_periods < incumbent.duration_periods;
      else if (std::abs(dist - best_dist) > 1e-9)
        take = dist < best_dist;
      else
        take = cand.id < incumbent.id;
      if (take) {
        best = i;
        best_dist = dist;
      }
    }
    if (best >= 0) representatives.push_back(options[best]);
  }
  std::sort(representatives.begin(), representatives.end());
  return representatives;
}

std::vector<FlightCategory> categorize_flights(const AtfmInstance& instance,
                                               const CategoryLimits& limits) {
  int n_airports = 0;
  std::vector<std::int64_t> movements(instance.elements.size(), 0);
  for (std::size_t e = 0; e < instance.elements.size(); ++e)
    if (instance.elements[e].kind == ElementKind::kAirport) ++n_airports;
  for (const FlightRecord& f : instance.flights) {
    ++movements[f.origin];
    ++movements[f.destination];
  }

  std::vector<int> airports;
  for (std::size_t e = 0; e < instance.elements.size(); ++e)
    if (instance.elements[e].kind == ElementKind::kAirport) airports.push_back(static_cast<int>(e));
  std::sort(airports.begin(), airports.end(), [&](int a, int b) {
    if (movements[a] != movements[b]) return movements[a] > movements[b];
    return instance.elements[a].id < instance.elements[b].id;
  });
  std::vector<int> rank(instance.elements.size(), std::numeric_limits<int>::max());
  for (std::size_t i = 0; i < airports.size(); ++i) rank[airports[i]] = static_cast<int>(i) + 1;

  int top_a = limits.top_a > 0 ? limits.top_a : std::max(2, n_airports / 3);
  int top_c = limits.top_c > 0 ? limits.top_c : n_airports;

  std::vector<FlightCategory> categories;
  categories.reserve(instance.flights.size());
  for (const FlightRecord& f : instance.flights) {
    int worst = std::max(rank[f.origin], rank[f.destination]);
    if (worst > top_c)
      categories.push_back(FlightCategory::kC);
    else if (worst <= top_a)
      categories.push_back(FlightCategory::kA);
    else
      categories.push_back(FlightCategory::kB);
  }
  return categories;
}

void apply_category_limits(AtfmInstance& instance, const CategoryLimits& limits,
                           std::uint64_t rng_seed) {
  std::vector<FlightCategory> categories = categorize_flights(instance, limits);
  parallel_for(instance.flights.size(), 0, [&](std::size_t b, std::size_t e) {
    for (std::size_t fi = b; fi < e; ++fi) {
      FlightRecord& f = instance.flights[fi];
      if (f.candidate_trajectories.empty()) continue;
      std::vector<double> scores;
      scores.reserve(f.candidate_trajectories.size());
      for (int t : f.candidate_trajectories) {
        const Trajectory4D& traj = instance.trajectories[t];
        scores.push_back(instance.preferences.has_flight(static_cast<int>(fi)) &&
                                 !traj.is_outlier()
                             ? instance.preferences.score(static_cast<int>(fi),
                                                          traj.cluster_label)
                             : 0.0);
      }
      std::vector<int> kept = dedup(instance, f.candidate_trajectories, scores);
      int k = limits.k_b;
      if (categories[fi] == FlightCategory::kA) k = limits.k_a;
      if (categories[fi] == FlightCategory::kC) k = limits.k_c;
      f.candidate_trajectories =
          kmeans_reduce(instance, kept, k, derive_seed(rng_seed, fi));
    }
  });
}

}  // namespace atfm
