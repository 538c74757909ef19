// SPDX-License-Identifier: Apache-2.0
#include "atfm/trajectory_pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>

namespace atfm {

namespace {

double planar_dist(const SamplePoint4D& a, const SamplePoint4D& b) {
  double dx = a.latitude - b.latitude;
  double dy = a.longitude - b.longitude;
  return std::sqrt(dx * dx + dy * dy);
}

}  // namespace

ResampledTrajectory resample(const Trajectory4D& traj, int n) {
  if (n < 2) throw ModelError("resample needs n >= 2");
  const auto& pts = traj.points;
  if (pts.size() < 2) throw ModelError("resample needs at least 2 points: " + traj.id);

  std::vector<double> cum(pts.size(), 0.0);
  for (std::size_t i = 1; i < pts.size(); ++i)
    cum[i] = cum[i - 1] + planar_dist(pts[i - 1], pts[i]);
  double total = cum.back();
  if (total <= 0.0)
    throw ModelError("degenerate trajectory (all points coincident): " + traj.id);

  ResampledTrajectory out;
  out.source_id = traj.id;
  out.n = n;
  out.vector.resize(4 * static_cast<std::size_t>(n));

  std::size_t seg = 0;  // invariant: cum[seg] <= s target, segment = [seg, seg+1]
  for (int k = 0; k < n; ++k) {
    double s = total * static_cast<double>(k) / static_cast<double>(n - 1);
    const SamplePoint4D* p;
    SamplePoint4D interp;
    if (k == 0) {
      p = &pts.front();
    } else if (k == n - 1) {
      p = &pts.back();
    } else {
      while (seg + 2 < pts.size() && cum[seg + 1] < s) ++seg;
      double len = cum[seg + 1] - cum[seg];
      double t = len > 0.0 ? (s - cum[seg]) / len : 0.0;
      t = std::clamp(t, 0.0, 1.0);
      const SamplePoint4D& a = pts[seg];
      const SamplePoint4D& b = pts[seg + 1];
      interp.latitude = a.latitude + t * (b.latitude - a.latitude);
      interp.longitude = a.longitude + t * (b.longitude - a.longitude);
      interp.flight_level = a.flight_level + t * (b.flight_level - a.flight_level);
      interp.elapsed = a.elapsed + t * (b.elapsed - a.elapsed);
      p = &interp;
    }
    out.vector[4 * k + 0] = p->latitude;
    out.vector[4 * k + 1] = p->longitude;
    out.vector[4 * k + 2] = p->flight_level;
    out.vector[4 * k + 3] = p->elapsed;
  }
  return out;
}

int choose_n(const std::vector<const Trajectory4D*>& od_trajectories) {
  if (od_trajectories.empty()) throw ModelError("choose_n over an empty OD set");
  std::size_t longest = 0;
  for (const Trajectory4D* t : od_trajectories)
    longest = std::max(longest, t->points.size());
  return static_cast<int>(2 * longest);
}

ResampledTrajectory trim(const ResampledTrajectory& rt) {
  if (rt.n < 10)
    throw ModelError("cannot trim a trajectory with fewer than 10 sample points");
  int drop = rt.n / 10;  // floor(0.1 * n)
  ResampledTrajectory out;
  out.source_id = rt.source_id;
  out.n = rt.n - 2 * drop;
  out.vector.assign(rt.vector.begin() + 4 * drop, rt.vector.end() - 4 * drop);
  return out;
}

void minmax_scale(std::vector<ResampledTrajectory>& batch) {
  if (batch.empty()) throw ModelError("minmax_scale over an empty batch");
  std::size_t width = batch.front().vector.size();
  for (const auto& rt : batch)
    if (rt.vector.size() != width)
      throw ModelError("minmax_scale requires equal-length vectors");

  for (std::size_t c = 0; c < width; ++c) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& rt : batch) {
      lo = std::min(lo, rt.vector[c]);
      hi = std::max(hi, rt.vector[c]);
    }
    double range = hi - lo;
    for (auto& rt : batch)
      rt.vector[c] = range > 0.0 ? (rt.vector[c] - lo) / range : 0.0;
  }
}

double cosine_distance(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ModelError("cosine_distance over mismatched lengths");
  double dot = 0.0, nx = 0.0, ny = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    dot += x[i] * y[i];
    nx += x[i] * x[i];
    ny += y[i] * y[i];
  }
  if (nx == 0.0 || ny == 0.0) throw ModelError("cosine_distance of a zero vector");
  return 1.0 - dot / (std::sqrt(nx) * std::sqrt(ny));
}

ClusteringResult dbscan(const std::vector<ResampledTrajectory>& batch, double eps, int min_pts) {
  if (eps <= 0.0) throw ModelError("dbscan eps must be positive");
  if (min_pts < 1) throw ModelError("dbscan min_pts must be >= 1");
  const int m = static_cast<int>(batch.size());

  // Per-point neighbor lists (self excluded); inclusive radius.
  std::vector<std::vector<int>> neighbors(m);
  parallel_for(m, 0, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      for (int j = 0; j < m; ++j) {
        if (static_cast<int>(i) == j) continue;
        if (cosine_distance(batch[i].vector, batch[j].vector) <= eps)
          neighbors[i].push_back(j);
      }
    }
  });

  std::vector<bool> core(m, false);
  for (int i = 0; i < m; ++i)
    core[i] = static_cast<int>(neighbors[i].size()) + 1 >= min_pts;

  constexpr int kUnassigned = -2;
  std::vector<int> label(m, kUnassigned);
  int n_clusters = 0;
  for (int i = 0; i < m; ++i) {
    if (!core[i] || label[i] != kUnassigned) continue;
    int cluster = n_clusters++;
    std::deque<int> queue{i};
    label[i] = cluster;
    while (!queue.empty()) {
      int u = queue.front();
      queue.pop_front();
      for (int v : neighbors[u]) {
        if (core[v] && label[v] == kUnassigned) {
          label[v] = cluster;
          queue.push_back(v);
        }
      }
    }
  }

  // Border points: reachable from >= 1 core point; ties to the lowest
  // cluster number for a canonical labeling.
  ClusteringResult result;
  result.labels.assign(m, kOutlierLabel);
  result.eps = eps;
  result.min_pts = min_pts;
  result.n_clusters = n_clusters;
  for (int i = 0; i < m; ++i) {
    if (core[i]) {
      result.labels[i] = label[i];
      continue;
    }
    int best = std::numeric_limits<int>::max();
    for (int v : neighbors[i])
      if (core[v]) best = std::min(best, label[v]);
    if (best != std::numeric_limits<int>::max()) result.labels[i] = best;
  }
  for (int i = 0; i < m; ++i)
    if (result.labels[i] == kOutlierLabel) ++result.n_outliers;
  return result;
}

ExtractionResult extract_options(const AtfmInstance& instance,
                                 const std::vector<int>& raw_trajectories,
                                 const PipelineParams& params,
                                 std::string* distance_dump_csv) {
  if (raw_trajectories.empty()) throw ModelError("extract_options needs >= 1 trajectory");

  std::vector<const Trajectory4D*> raw;
  raw.reserve(raw_trajectories.size());
  for (int t : raw_trajectories) raw.push_back(&instance.trajectories.at(t));

  int n = choose_n(raw);
  std::vector<ResampledTrajectory> batch;
  batch.reserve(raw.size());
  for (const Trajectory4D* t : raw) batch.push_back(resample(*t, n));
  for (auto& rt : batch) rt = trim(rt);
  minmax_scale(batch);

  ExtractionResult result;
  result.n_input = static_cast<int>(raw.size());
  result.clustering = dbscan(batch, params.eps, params.min_pts);
  for (std::size_t i = 0; i < raw_trajectories.size(); ++i)
    if (result.clustering.labels[i] != kOutlierLabel)
      result.surviving.push_back(raw_trajectories[i]);

  if (distance_dump_csv != nullptr) {
    std::string& out = *distance_dump_csv;
    out += "trajectory_id,label";
    for (std::size_t j = 0; j < batch.size(); ++j) out += ",d" + std::to_string(j);
    out += "\n";
    char buf[32];
    for (std::size_t i = 0; i < batch.size(); ++i) {
      out += batch[i].source_id + "," + std::to_string(result.clustering.labels[i]);
      for (std::size_t j = 0; j < batch.size(); ++j) {
        double d = i == j ? 0.0 : cosine_distance(batch[i].vector, batch[j].vector);
        std::snprintf(buf, sizeof(buf), ",%.9g", d);
        out += buf;
      }
      out += "\n";
    }
  }
  return result;
}

}  // namespace atfm
