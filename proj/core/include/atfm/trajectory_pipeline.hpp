// SPDX-License-Identifier: Apache-2.0
//
// Trajectory option extraction: resample raw trajectories of an OD pair to a
// common number of equidistant 4D points, trim takeoff/approach segments,
// min-max scale the feature columns, cluster with DBSCAN under cosine
// distance, and drop outliers.
#pragma once

#include <string>
#include <vector>

#include "atfm/instance.hpp"

namespace atfm {

// A trajectory flattened to a 4n vector: n points, each (lat, lon, FL,
// elapsed), in point-major order.
struct ResampledTrajectory {
  std::string source_id;
  int n = 0;
  std::vector<double> vector;  // size 4n

  double at(int point, int field) const { return vector[4 * point + field]; }
};

struct ClusteringResult {
  std::vector<int> labels;  // kOutlierLabel or contiguous 0..n_clusters-1
  int n_clusters = 0;
  int n_outliers = 0;
  double eps = 0.0;
  int min_pts = 0;
};

struct PipelineParams {
  double eps = 0.03;
  int min_pts = 5;
};

// Arc-length resampling to n points: consecutive points are equidistant in
// the lat-lon plane; flight level and elapsed time are linearly interpolated
// at the same arc positions. Endpoints are preserved.
ResampledTrajectory resample(const Trajectory4D& traj, int n);

// n for an OD pair: twice the longest raw point sequence.
int choose_n(const std::vector<const Trajectory4D*>& od_trajectories);

// Drops floor(0.1 * n) points from each end. Requires n >= 10.
ResampledTrajectory trim(const ResampledTrajectory& rt);

// Column-wise affine map of each of the 4n features onto [0, 1] across the
// batch; constant columns map to 0. All vectors must have equal length.
void minmax_scale(std::vector<ResampledTrajectory>& batch);

// 1 - <x,y> / (|x| |y|). Throws ModelError on a zero vector.
double cosine_distance(const std::vector<double>& x, const std::vector<double>& y);

// DBSCAN over the batch with cosine distance. A point's eps-neighborhood
// includes the point itself and uses an inclusive (<= eps) comparison.
// Clusters are numbered by their smallest core point index; border points
// reachable from several clusters go to the lowest-numbered one.
ClusteringResult dbscan(const std::vector<ResampledTrajectory>& batch, double eps, int min_pts);

struct ExtractionResult {
  std::vector<int> surviving;  // trajectory ordinals, cluster_label set
  ClusteringResult clustering; // labels aligned with the raw input order
  int n_input = 0;
};

// Full pipeline for one OD pair over trajectory ordinals of `instance`.
// Mutates nothing; the caller applies the labels. Optionally dumps the
// pairwise distance matrix and labels as CSV for diagnosis.
ExtractionResult extract_options(const AtfmInstance& instance,
                                 const std::vector<int>& raw_trajectories,
                                 const PipelineParams& params,
                                 std::string* distance_dump_csv = nullptr);

}  // namespace atfm
