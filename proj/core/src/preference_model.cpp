// SPDX-License-Identifier: Apache-2.0
#include "atfm/preference_model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include <json.hpp>

namespace atfm {

namespace {

std::vector<std::string> sorted_unique(std::set<std::string>&& values) {
  return {values.begin(), values.end()};
}

int vocab_find(const std::vector<std::string>& vocab, const std::string& v) {
  auto it = std::lower_bound(vocab.begin(), vocab.end(), v);
  if (it == vocab.end() || *it != v) return -1;
  return static_cast<int>(it - vocab.begin());
}

}  // namespace

void OneHotEncoder::fit(const std::vector<FlightFeatures>& samples) {
  std::set<std::string> weeks, airlines, types, models;
  for (const FlightFeatures& f : samples) {
    weeks.insert(std::to_string(f.week_number));
    airlines.insert(f.airline_code);
    types.insert(f.airline_type);
    models.insert(f.aircraft_model);
  }
  vocab_.assign(5, {});
  for (int d = 0; d < 7; ++d) vocab_[0].push_back(std::to_string(d));
  vocab_[1] = sorted_unique(std::move(weeks));
  vocab_[2] = sorted_unique(std::move(airlines));
  vocab_[3] = sorted_unique(std::move(types));
  vocab_[4] = sorted_unique(std::move(models));
  width_ = 0;
  for (const auto& v : vocab_) width_ += static_cast<int>(v.size());
}

void OneHotEncoder::set_vocabularies(std::vector<std::vector<std::string>> vocab) {
  if (vocab.size() != 5) throw DataError("encoder needs exactly 5 feature vocabularies");
  vocab_ = std::move(vocab);
  width_ = 0;
  for (const auto& v : vocab_) width_ += static_cast<int>(v.size());
}

std::vector<std::uint8_t> OneHotEncoder::encode(const FlightFeatures& f) const {
  std::vector<std::uint8_t> x(width_, 0);
  int offset = 0;
  auto mark = [&](int block, const std::string& value) {
    int idx = vocab_find(vocab_[block], value);
    if (idx >= 0) x[offset + idx] = 1;
    offset += static_cast<int>(vocab_[block].size());
  };
  mark(0, std::to_string(f.day_of_week));
  mark(1, std::to_string(f.week_number));
  mark(2, f.airline_code);
  mark(3, f.airline_type);
  mark(4, f.aircraft_model);
  return x;
}

const std::vector<double>& DecisionTree::leaf_for(const std::vector<std::uint8_t>& x) const {
  int node = 0;
  while (nodes[node].feature >= 0)
    node = x[nodes[node].feature] ? nodes[node].right : nodes[node].left;
  return nodes[node].association;
}

namespace {

struct TreeBuilder {
  const std::vector<std::vector<std::uint8_t>>& x;
  const std::vector<int>& y;
  int n_classes;
  int width;
  int mtry;
  int min_leaf;
  int max_depth;
  Rng& rng;
  DecisionTree tree;
  std::vector<int> feature_pool;  // scratch for per-split sampling

  int build(std::vector<int>& idx, int depth) {
    std::vector<double> counts(n_classes, 0.0);
    for (int i : idx) counts[y[i]] += 1.0;
    double total = static_cast<double>(idx.size());

    bool pure = false;
    for (int k = 0; k < n_classes; ++k)
      if (counts[k] == total) pure = true;

    int best_feature = -1;
    double best_gini = std::numeric_limits<double>::infinity();
    if (!pure && (max_depth == 0 || depth < max_depth) &&
        static_cast<int>(idx.size()) >= 2 * min_leaf) {
      // Sample mtry distinct features, then evaluate in ascending index
      // order so equal-impurity ties resolve to the lowest feature.
      for (int k = 0; k < mtry; ++k) {
        int j = k + static_cast<int>(rng.next_below(width - k));
        std::swap(feature_pool[k], feature_pool[j]);
      }
      std::vector<int> chosen(feature_pool.begin(), feature_pool.begin() + mtry);
      std::sort(chosen.begin(), chosen.end());

      std::vector<double> left_counts(n_classes);
      for (int f : chosen) {
        std::fill(left_counts.begin(), left_counts.end(), 0.0);
        double nl = 0.0;
        for (int i : idx) {
          if (!x[i][f]) {
            left_counts[y[i]] += 1.0;
            nl += 1.0;
          }
        }
        double nr = total - nl;
        if (nl < min_leaf || nr < min_leaf) continue;
        double gl = 1.0, gr = 1.0;
        for (int c = 0; c < n_classes; ++c) {
          double pl = left_counts[c] / nl;
          double pr = (counts[c] - left_counts[c]) / nr;
          gl -= pl * pl;
          gr -= pr * pr;
        }
        double g = (nl * gl + nr * gr) / total;
        if (g < best_gini - 1e-12) {
          best_gini = g;
          best_feature = f;
        }
      }
    }

    if (best_feature < 0) {
      TreeNode leaf;
      leaf.association.resize(n_classes);
      for (int c = 0; c < n_classes; ++c) leaf.association[c] = counts[c] / total;
      tree.nodes.push_back(std::move(leaf));
      return static_cast<int>(tree.nodes.size()) - 1;
    }

    std::vector<int> left_idx, right_idx;
    for (int i : idx)
      (x[i][best_feature] ? right_idx : left_idx).push_back(i);
    idx.clear();
    idx.shrink_to_fit();

    int self = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes[self].feature = best_feature;
    int l = build(left_idx, depth + 1);
    int r = build(right_idx, depth + 1);
    tree.nodes[self].left = l;
    tree.nodes[self].right = r;
    return self;
  }
};

DecisionTree fit_tree(const std::vector<std::vector<std::uint8_t>>& x, const std::vector<int>& y,
                      int n_classes, const ForestConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  int n = static_cast<int>(x.size());
  std::vector<int> bootstrap(n);
  for (int i = 0; i < n; ++i) bootstrap[i] = static_cast<int>(rng.next_below(n));

  int width = static_cast<int>(x.front().size());
  TreeBuilder builder{x,
                      y,
                      n_classes,
                      width,
                      cfg.features_per_split > 0
                          ? std::min(cfg.features_per_split, width)
                          : std::max(1, static_cast<int>(std::ceil(std::sqrt(width)))),
                      std::max(1, cfg.min_leaf),
                      cfg.max_depth,
                      rng,
                      {},
                      {}};
  builder.feature_pool.resize(width);
  std::iota(builder.feature_pool.begin(), builder.feature_pool.end(), 0);
  builder.build(bootstrap, 0);
  return std::move(builder.tree);
}

}  // namespace

RandomForest fit(const ForestConfig& config, const std::vector<LabeledSample>& samples) {
  if (samples.empty()) throw ModelError("cannot fit a forest on an empty sample set");

  RandomForest forest;
  forest.config = config;

  std::vector<FlightFeatures> features;
  features.reserve(samples.size());
  int n_classes = 0;
  for (const LabeledSample& s : samples) {
    if (s.label < 0) throw ModelError("negative cluster label in training data");
    features.push_back(s.features);
    n_classes = std::max(n_classes, s.label + 1);
  }
  forest.n_classes = n_classes;
  forest.encoder.fit(features);

  std::vector<std::vector<std::uint8_t>> x;
  std::vector<int> y;
  x.reserve(samples.size());
  y.reserve(samples.size());
  for (const LabeledSample& s : samples) {
    x.push_back(forest.encoder.encode(s.features));
    y.push_back(s.label);
  }

  forest.trees.resize(config.n_trees);
  parallel_for(config.n_trees, config.threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t t = b; t < e; ++t)
      forest.trees[t] = fit_tree(x, y, n_classes, config, derive_seed(config.rng_seed, t));
  });
  return forest;
}

std::vector<double> associations(const RandomForest& forest, const FlightFeatures& flight) {
  if (forest.trees.empty()) throw ModelError("associations from an unfitted forest");
  std::vector<std::uint8_t> x = forest.encoder.encode(flight);
  std::vector<double> mean(forest.n_classes, 0.0);
  for (const DecisionTree& tree : forest.trees) {
    const std::vector<double>& leaf = tree.leaf_for(x);
    for (int c = 0; c < forest.n_classes; ++c) mean[c] += leaf[c];
  }
  double inv = 1.0 / static_cast<double>(forest.trees.size());
  for (double& v : mean) v *= inv;
  return mean;
}

int predict(const RandomForest& forest, const FlightFeatures& flight) {
  if (forest.trees.empty()) throw ModelError("predict from an unfitted forest");
  std::vector<std::uint8_t> x = forest.encoder.encode(flight);
  std::vector<int> votes(forest.n_classes, 0);
  for (const DecisionTree& tree : forest.trees) {
    const std::vector<double>& leaf = tree.leaf_for(x);
    int arg = 0;
    for (int c = 1; c < forest.n_classes; ++c)
      if (leaf[c] > leaf[arg]) arg = c;
    ++votes[arg];
  }
  int winner = 0;
  for (int c = 1; c < forest.n_classes; ++c)
    if (votes[c] > votes[winner]) winner = c;
  return winner;
}

PreferenceTable build_preference_table(const AtfmInstance& instance,
                                       const std::vector<OdGroup>& od_groups,
                                       const std::vector<RandomForest>& od_forests) {
  if (od_groups.size() != od_forests.size())
    throw ModelError("one forest per OD group is required");
  PreferenceTable table;
  for (std::size_t g = 0; g < od_groups.size(); ++g) {
    const OdGroup& od = od_groups[g];
    if (od.flights.empty()) continue;
    const RandomForest& forest = od_forests[g];
    if (forest.trees.empty())
      throw ModelError("missing forest for an OD pair with flights");
    for (int flight : od.flights) {
      table.set_flight_scores(flight,
                              associations(forest, instance.flights[flight].features));
    }
  }
  return table;
}

namespace {

struct Confusion {
  int n_classes = 0;
  std::vector<double> matrix;  // row = true, col = predicted

  explicit Confusion(int k) : n_classes(k), matrix(static_cast<std::size_t>(k) * k, 0.0) {}
  void add(int truth, int pred) { matrix[truth * n_classes + pred] += 1.0; }
};

struct WeightedMetrics {
  double precision = 0.0, recall = 0.0, f1 = 0.0;
};

WeightedMetrics weighted_metrics(const Confusion& cm) {
  int k = cm.n_classes;
  double total = 0.0;
  for (double v : cm.matrix) total += v;
  WeightedMetrics out;
  if (total == 0.0) return out;
  for (int c = 0; c < k; ++c) {
    double tp = cm.matrix[c * k + c];
    double support = 0.0, predicted = 0.0;
    for (int j = 0; j < k; ++j) {
      support += cm.matrix[c * k + j];
      predicted += cm.matrix[j * k + c];
    }
    double prec = predicted > 0.0 ? tp / predicted : 0.0;
    double rec = support > 0.0 ? tp / support : 0.0;
    double f1 = prec + rec > 0.0 ? 2.0 * prec * rec / (prec + rec) : 0.0;
    double w = support / total;
    out.precision += w * prec;
    out.recall += w * rec;
    out.f1 += w * f1;
  }
  return out;
}

// Stratified fold assignment: per class, shuffle then deal round-robin.
std::vector<int> stratified_folds(const std::vector<int>& labels, int n_classes, int folds,
                                  Rng& rng) {
  std::vector<int> fold_of(labels.size(), 0);
  for (int c = 0; c < n_classes; ++c) {
    std::vector<int> members;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == c) members.push_back(static_cast<int>(i));
    rng.shuffle(members);
    for (std::size_t j = 0; j < members.size(); ++j)
      fold_of[members[j]] = static_cast<int>(j % folds);
  }
  return fold_of;
}

double tune_and_score(const std::vector<LabeledSample>& samples, const std::vector<int>& train,
                      const std::vector<int>& test, const CvConfig& config, int n_classes,
                      std::uint64_t seed, Confusion* out_cm) {
  // Inner loop: pick (n_trees, min_leaf) by weighted F1 on an inner
  // stratified split of the training part; ties keep the earlier grid entry.
  std::vector<int> train_labels;
  train_labels.reserve(train.size());
  for (int i : train) train_labels.push_back(samples[i].label);
  int min_class = std::numeric_limits<int>::max();
  std::vector<int> counts(n_classes, 0);
  for (int l : train_labels) ++counts[l];
  for (int c = 0; c < n_classes; ++c)
    if (counts[c] > 0) min_class = std::min(min_class, counts[c]);
  int inner = std::min(config.inner_folds, min_class);

  std::pair<int, int> best = config.grid.front();
  if (inner >= 2 && config.grid.size() > 1) {
    Rng inner_rng(derive_seed(seed, 7));
    std::vector<int> fold_of = stratified_folds(train_labels, n_classes, inner, inner_rng);
    double best_score = -1.0;
    for (const auto& [n_trees, min_leaf] : config.grid) {
      double score = 0.0;
      for (int f = 0; f < inner; ++f) {
        std::vector<LabeledSample> fit_set;
        std::vector<int> eval_set;
        for (std::size_t j = 0; j < train.size(); ++j) {
          if (fold_of[j] == f)
            eval_set.push_back(train[j]);
          else
            fit_set.push_back(samples[train[j]]);
        }
        ForestConfig fc = config.base;
        fc.n_trees = n_trees;
        fc.min_leaf = min_leaf;
        fc.threads = 1;  // the run loop is already parallel
        fc.rng_seed = derive_seed(seed, 100 + f);
        RandomForest forest = fit(fc, fit_set);
        Confusion cm(n_classes);
        for (int i : eval_set) cm.add(samples[i].label, predict(forest, samples[i].features));
        score += weighted_metrics(cm).f1;
      }
      score /= inner;
      if (score > best_score + 1e-12) {
        best_score = score;
        best = {n_trees, min_leaf};
      }
    }
  }

  std::vector<LabeledSample> fit_set;
  fit_set.reserve(train.size());
  for (int i : train) fit_set.push_back(samples[i]);
  ForestConfig fc = config.base;
  fc.n_trees = best.first;
  fc.min_leaf = best.second;
  fc.threads = 1;
  fc.rng_seed = derive_seed(seed, 999);
  RandomForest forest = fit(fc, fit_set);
  Confusion cm(n_classes);
  for (int i : test) cm.add(samples[i].label, predict(forest, samples[i].features));
  *out_cm = cm;
  return weighted_metrics(cm).f1;
}

}  // namespace

EvalReport evaluate_cv(const std::vector<LabeledSample>& samples, const CvConfig& config) {
  if (samples.empty()) throw ModelError("evaluate_cv on an empty sample set");
  int n_classes = 0;
  for (const LabeledSample& s : samples) n_classes = std::max(n_classes, s.label + 1);
  if (n_classes < 2) throw ModelError("evaluate_cv needs at least two classes");

  std::vector<int> labels;
  labels.reserve(samples.size());
  std::vector<int> counts(n_classes, 0);
  for (const LabeledSample& s : samples) {
    labels.push_back(s.label);
    ++counts[s.label];
  }
  int min_class = *std::min_element(counts.begin(), counts.end());
  int folds = std::min(config.folds, min_class);
  if (folds < 2) throw ModelError("fewer samples than folds in some class");

  EvalReport report;
  report.folds_used = folds;
  report.runs = config.runs;

  std::vector<WeightedMetrics> run_metrics(config.runs);
  parallel_for(config.runs, config.base.threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t run = b; run < e; ++run) {
      std::uint64_t run_seed = derive_seed(config.rng_seed, run);
      Rng rng(run_seed);
      std::vector<int> fold_of = stratified_folds(labels, n_classes, folds, rng);
      WeightedMetrics acc;
      for (int f = 0; f < folds; ++f) {
        std::vector<int> train, test;
        for (std::size_t i = 0; i < samples.size(); ++i)
          (fold_of[i] == f ? test : train).push_back(static_cast<int>(i));
        Confusion cm(n_classes);
        tune_and_score(samples, train, test, config, n_classes, derive_seed(run_seed, f), &cm);
        WeightedMetrics m = weighted_metrics(cm);
        acc.precision += m.precision;
        acc.recall += m.recall;
        acc.f1 += m.f1;
      }
      run_metrics[run] = {acc.precision / folds, acc.recall / folds, acc.f1 / folds};
    }
  });

  auto mean_sem = [&](auto getter, double* mean, double* sem) {
    double m = 0.0;
    for (const auto& r : run_metrics) m += getter(r);
    m /= config.runs;
    double var = 0.0;
    for (const auto& r : run_metrics) {
      double d = getter(r) - m;
      var += d * d;
    }
    *mean = m;
    *sem = config.runs > 1 ? std::sqrt(var / (config.runs - 1)) / std::sqrt(config.runs) : 0.0;
  };
  mean_sem([](const WeightedMetrics& m) { return m.f1; }, &report.f1_weighted, &report.f1_sem);
  mean_sem([](const WeightedMetrics& m) { return m.precision; }, &report.precision_weighted,
           &report.precision_sem);
  mean_sem([](const WeightedMetrics& m) { return m.recall; }, &report.recall_weighted,
           &report.recall_sem);
  return report;
}

std::string forest_to_json(const RandomForest& forest) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["kind"] = "atfm-forest";
  j["n_classes"] = forest.n_classes;
  j["n_trees"] = forest.config.n_trees;
  j["min_leaf"] = forest.config.min_leaf;
  j["max_depth"] = forest.config.max_depth;
  j["features_per_split"] = forest.config.features_per_split;
  j["rng_seed"] = forest.config.rng_seed;
  j["vocabularies"] = forest.encoder.vocabularies();
  nlohmann::json trees = nlohmann::json::array();
  for (const DecisionTree& tree : forest.trees) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const TreeNode& n : tree.nodes) {
      nlohmann::json node;
      node["f"] = n.feature;
      if (n.feature >= 0) {
        node["l"] = n.left;
        node["r"] = n.right;
      } else {
        node["a"] = n.association;
      }
      nodes.push_back(std::move(node));
    }
    trees.push_back(std::move(nodes));
  }
  j["trees"] = std::move(trees);
  return j.dump();
}

RandomForest forest_from_json(const std::string& json_text) {
  nlohmann::json j = nlohmann::json::parse(json_text);
  if (j.value("kind", "") != "atfm-forest" || j.value("schema_version", 0) != 1)
    throw DataError("not a version-1 forest file");
  RandomForest forest;
  forest.n_classes = j.at("n_classes").get<int>();
  forest.config.n_trees = j.at("n_trees").get<int>();
  forest.config.min_leaf = j.at("min_leaf").get<int>();
  forest.config.max_depth = j.at("max_depth").get<int>();
  forest.config.features_per_split = j.at("features_per_split").get<int>();
  forest.config.rng_seed = j.at("rng_seed").get<std::uint64_t>();
  forest.encoder.set_vocabularies(j.at("vocabularies").get<std::vector<std::vector<std::string>>>());
  for (const auto& tj : j.at("trees")) {
    DecisionTree tree;
    for (const auto& nj : tj) {
      TreeNode n;
      n.feature = nj.at("f").get<int>();
      if (n.feature >= 0) {
        n.left = nj.at("l").get<int>();
        n.right = nj.at("r").get<int>();
      } else {
        n.association = nj.at("a").get<std::vector<double>>();
      }
      tree.nodes.push_back(std::move(n));
    }
    forest.trees.push_back(std::move(tree));
  }
  return forest;
}

}  // namespace atfm
