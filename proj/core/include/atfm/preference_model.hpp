// SPDX-License-Identifier: Apache-2.0
//
// Preference learning: a from-scratch random forest over one-hot flight
// features predicting the trajectory cluster of the filed flight plan.
// Averaged leaf class proportions ("associations") are the preference
// scores; a nested stratified cross-validation reports classifier quality.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "atfm/instance.hpp"

namespace atfm {

class OneHotEncoder {
 public:
  // Vocabularies in declaration order; categories not in the vocabulary
  // encode to an all-zero block.
  void fit(const std::vector<FlightFeatures>& samples);
  std::vector<std::uint8_t> encode(const FlightFeatures& f) const;
  int width() const { return width_; }

  // feature blocks: 0 day_of_week, 1 week_number, 2 airline_code,
  // 3 airline_type, 4 aircraft_model
  const std::vector<std::vector<std::string>>& vocabularies() const { return vocab_; }
  void set_vocabularies(std::vector<std::vector<std::string>> vocab);

 private:
  std::vector<std::vector<std::string>> vocab_{5, std::vector<std::string>{}};
  int width_ = 0;
};

struct TreeNode {
  // Internal node: feature >= 0, children set. Leaf: feature == -1 and
  // `association` holds per-cluster proportions summing to 1.
  int feature = -1;
  int left = -1;   // encoded feature value 0
  int right = -1;  // encoded feature value 1
  std::vector<double> association;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  const std::vector<double>& leaf_for(const std::vector<std::uint8_t>& x) const;
};

struct ForestConfig {
  int n_trees = 100;
  int min_leaf = 1;
  int max_depth = 0;       // 0 = unlimited
  int features_per_split = 0;  // 0 = ceil(sqrt(width))
  std::uint64_t rng_seed = 1;
  int threads = 0;
};

struct RandomForest {
  std::vector<DecisionTree> trees;
  int n_classes = 0;
  OneHotEncoder encoder;
  ForestConfig config;
};

struct LabeledSample {
  FlightFeatures features;
  int label = 0;  // cluster label, contiguous 0..K-1
};

// Trains a forest: each tree fits a bootstrap resample with a fresh feature
// subset per split, Gini impurity splits, growth stopping at purity, max
// depth or min leaf size. Deterministic under a fixed seed; per-tree RNG
// streams are derived from the seed by tree index, so parallel and serial
// training produce identical forests.
RandomForest fit(const ForestConfig& config, const std::vector<LabeledSample>& samples);

// Mean over trees of the leaf association vectors; a probability vector.
std::vector<double> associations(const RandomForest& forest, const FlightFeatures& flight);

// Majority vote over per-tree argmax associations; ties toward the lower
// cluster label (both per tree and in the vote).
int predict(const RandomForest& forest, const FlightFeatures& flight);

// G(flight, cluster) = associations(flight)[cluster] for the flight's OD
// forest. ODs in `od_groups` without trajectories keep no row; every flight
// must belong to some group with a forest.
PreferenceTable build_preference_table(const AtfmInstance& instance,
                                       const std::vector<OdGroup>& od_groups,
                                       const std::vector<RandomForest>& od_forests);

struct EvalReport {
  double f1_weighted = 0.0;
  double precision_weighted = 0.0;
  double recall_weighted = 0.0;
  double f1_sem = 0.0;
  double precision_sem = 0.0;
  double recall_sem = 0.0;
  int folds_used = 0;
  int runs = 0;
};

struct CvConfig {
  int folds = 10;
  int runs = 10;
  int inner_folds = 3;
  // Tuning grid over (n_trees, min_leaf); kept to four combinations to
  // bound runtime.
  std::vector<std::pair<int, int>> grid{{50, 1}, {50, 4}, {100, 1}, {100, 4}};
  std::uint64_t rng_seed = 1;
  ForestConfig base;
};

// Nested cross-validation: outer stratified k-fold repeated `runs` times
// with distinct seeds; the inner loop tunes (n_trees, min_leaf) on the
// training part. Reports the weighted F1/precision/recall means over runs
// and their standard errors. The fold count is reduced (with the report's
// folds_used recording it) when the smallest class has fewer members than
// requested folds.
EvalReport evaluate_cv(const std::vector<LabeledSample>& samples, const CvConfig& config);

// Versioned JSON round-trip of a fitted forest.
std::string forest_to_json(const RandomForest& forest);
RandomForest forest_from_json(const std::string& json_text);

}  // namespace atfm
