/*
 * Copyright 2026 The Tweedie Conformal Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Gradient-boosted regression trees with Newton leaf values, grown leaf-wise
// (best gain first) over histogram bins. Two objectives: Tweedie deviance on
// a log-link score, and squared error on an identity score (used for the
// spread models of locally weighted intervals).

#ifndef TWEEDIE_CONFORMAL_GBM_HPP_
#define TWEEDIE_CONFORMAL_GBM_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "tweedie_conformal/dataset.hpp"
#include "tweedie_conformal/errors.hpp"
#include "tweedie_conformal/loss.hpp"
#include "tweedie_conformal/resampling.hpp"
#include "tweedie_conformal/tweedie.hpp"

namespace tweedie_conformal::models {

enum class Objective { tweedie, squared_error };

struct GbmConfig {
  int max_leaves = 10;
  double learning_rate = 0.005;
  int num_rounds = 2000;
  int min_leaf_count = 20;
  double leaf_l2 = 1.0;
  int bins = 255;
  double min_child_hessian = 1e-3;

  void validate() const {
    if (max_leaves < 2) throw ParameterError("max_leaves must be at least 2");
    if (!(learning_rate > 0.0)) throw ParameterError("learning_rate must be positive");
    if (num_rounds < 0) throw ParameterError("num_rounds must be nonnegative");
    if (min_leaf_count < 1) throw ParameterError("min_leaf_count must be positive");
    if (!(leaf_l2 >= 0.0)) throw ParameterError("leaf_l2 must be nonnegative");
    if (bins < 2 || bins > 65000) throw ParameterError("bins must lie in [2, 65000]");
  }
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  bool categorical = false;
  // Numeric: go left iff the value is missing (NaN) or <= threshold.
  double threshold = 0.0;
  // Categorical: level codes routed to each side, sorted. Codes in neither
  // set (unseen at this node) go to the child with larger training cover.
  std::vector<int> left_levels;
  std::vector<int> right_levels;
  bool unseen_left = false;
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf output before shrinkage
  double gain = 0.0;
  std::size_t count = 0;  // training rows reaching the node

  bool is_leaf() const { return feature < 0; }

  bool goes_left(double x) const {
    if (!categorical) return std::isnan(x) || x <= threshold;
    const int code = x >= 0.0 ? static_cast<int>(x) : -1;
    if (std::binary_search(left_levels.begin(), left_levels.end(), code)) return true;
    if (std::binary_search(right_levels.begin(), right_levels.end(), code)) return false;
    return unseen_left;
  }
};

struct Tree {
  std::vector<TreeNode> nodes;

  template <typename RowAccess>
  double leaf_value(RowAccess&& feature_value) const {
    int n = 0;
    while (!nodes[n].is_leaf()) {
      const TreeNode& node = nodes[n];
      n = node.goes_left(feature_value(node.feature)) ? node.left : node.right;
    }
    return nodes[n].value;
  }

  double predict(std::span<const double> row) const {
    return leaf_value([&](int f) { return row[static_cast<std::size_t>(f)]; });
  }

  std::size_t num_leaves() const {
    return static_cast<std::size_t>(
        std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& t) { return t.is_leaf(); }));
  }
};

// Raw (unnormalized) importance totals per feature.
struct ImportanceTotals {
  std::vector<double> gain;
  std::vector<double> cover;
  std::vector<double> frequency;

  void resize(std::size_t n) {
    gain.assign(n, 0.0);
    cover.assign(n, 0.0);
    frequency.assign(n, 0.0);
  }
};

struct GbmModel {
  Objective objective = Objective::tweedie;
  double power = 1.5;  // unused for squared error
  double base_score = 0.0;
  double learning_rate = 0.005;
  std::vector<Tree> trees;
  std::vector<data::FeatureInfo> features;
  ImportanceTotals importance;
  GbmConfig config;

  template <typename RowAccess>
  double raw_score_with(RowAccess&& access) const {
    double s = 0.0;
    for (const Tree& t : trees) s += t.leaf_value(access);
    return base_score + learning_rate * s;
  }

  double raw_score(std::span<const double> row) const {
    check_row(row);
    return raw_score_with([&](int f) { return row[static_cast<std::size_t>(f)]; });
  }

  double link_inverse(double score) const {
    return objective == Objective::tweedie ? std::exp(clamp_score(score)) : score;
  }

  double predict(std::span<const double> row) const { return link_inverse(raw_score(row)); }

  std::vector<double> predict(const data::Dataset& ds) const {
    if (ds.features() != features) {
      throw DataError("dataset columns do not match the model's training schema");
    }
    // Tree-major order keeps each tree hot in cache.
    std::vector<double> sum(ds.rows(), 0.0);
    for (const Tree& t : trees) {
      for (std::size_t i = 0; i < ds.rows(); ++i) {
        sum[i] += t.leaf_value([&](int f) { return ds.value(i, static_cast<std::size_t>(f)); });
      }
    }
    std::vector<double> out(ds.rows());
    for (std::size_t i = 0; i < ds.rows(); ++i) out[i] = link_inverse(base_score + learning_rate * sum[i]);
    return out;
  }

  std::size_t num_splits() const {
    std::size_t n = 0;
    for (const auto& t : trees) n += t.nodes.size() - t.num_leaves();
    return n;
  }

 private:
  void check_row(std::span<const double> row) const {
    if (row.size() != features.size()) {
      std::ostringstream os;
      os << "feature row has " << row.size() << " values, model expects " << features.size();
      throw DataError(os.str());
    }
  }
};

struct FeatureImportance {
  std::vector<std::string> names;
  std::vector<double> gain;
  std::vector<double> cover;
  std::vector<double> frequency;
};

// Shares of total gain, cover and split count per feature. All zeros when the
// model has no splits.
inline FeatureImportance feature_importance(const GbmModel& model) {
  FeatureImportance out;
  for (const auto& f : model.features) out.names.push_back(f.name);
  auto share = [](const std::vector<double>& v) {
    const double total = std::accumulate(v.begin(), v.end(), 0.0);
    std::vector<double> s(v.size(), 0.0);
    if (total > 0.0) {
      for (std::size_t i = 0; i < v.size(); ++i) s[i] = v[i] / total;
    }
    return s;
  };
  out.gain = share(model.importance.gain);
  out.cover = share(model.importance.cover);
  out.frequency = share(model.importance.frequency);
  return out;
}

namespace internal {

struct FeatureBins {
  bool categorical = false;
  std::vector<double> thresholds;  // numeric upper bin edges
  std::size_t num_bins = 0;
};

// Numeric bin 0 holds missing values; bins 1.. follow the thresholds.
inline FeatureBins make_numeric_bins(std::span<const double> col, int max_bins) {
  std::vector<double> v;
  v.reserve(col.size());
  for (double x : col) {
    if (!std::isnan(x)) v.push_back(x);
  }
  std::sort(v.begin(), v.end());
  std::vector<double> distinct;
  for (double x : v) {
    if (distinct.empty() || x != distinct.back()) distinct.push_back(x);
  }
  FeatureBins fb;
  if (distinct.size() <= static_cast<std::size_t>(max_bins)) {
    for (std::size_t i = 0; i + 1 < distinct.size(); ++i) {
      fb.thresholds.push_back(0.5 * (distinct[i] + distinct[i + 1]));
    }
  } else {
    const std::size_t n = v.size();
    for (int k = 1; k < max_bins; ++k) {
      const double cut = v[static_cast<std::size_t>(
          static_cast<double>(k) * static_cast<double>(n) / max_bins)];
      if (cut < distinct.back() && (fb.thresholds.empty() || cut > fb.thresholds.back())) {
        fb.thresholds.push_back(cut);
      }
    }
  }
  fb.num_bins = fb.thresholds.size() + 2;
  return fb;
}

inline std::uint16_t numeric_bin(const FeatureBins& fb, double x) {
  if (std::isnan(x)) return 0;
  const auto it = std::lower_bound(fb.thresholds.begin(), fb.thresholds.end(), x);
  return static_cast<std::uint16_t>(1 + (it - fb.thresholds.begin()));
}

struct BinnedData {
  std::vector<FeatureBins> bins;
  std::vector<std::vector<std::uint16_t>> codes;  // [feature][row]
  std::vector<std::size_t> offsets;               // histogram offset per feature
  std::size_t total_bins = 0;
};

inline BinnedData bin_dataset(const data::Dataset& ds, int max_bins) {
  BinnedData bd;
  const std::size_t nf = ds.num_features();
  bd.bins.resize(nf);
  bd.codes.resize(nf);
  for (std::size_t f = 0; f < nf; ++f) {
    const auto col = ds.column(f);
    auto& codes = bd.codes[f];
    codes.resize(ds.rows());
    if (ds.feature(f).kind == data::FeatureKind::categorical) {
      FeatureBins fb;
      fb.categorical = true;
      fb.num_bins = std::max<std::size_t>(ds.feature(f).levels.size(), 1);
      for (std::size_t i = 0; i < ds.rows(); ++i) {
        if (col[i] < 0.0 || col[i] >= static_cast<double>(fb.num_bins)) {
          throw DataError("training rows contain a categorical level outside the column metadata");
        }
        codes[i] = static_cast<std::uint16_t>(col[i]);
      }
      bd.bins[f] = std::move(fb);
    } else {
      bd.bins[f] = make_numeric_bins(col, max_bins);
      for (std::size_t i = 0; i < ds.rows(); ++i) codes[i] = numeric_bin(bd.bins[f], col[i]);
    }
    bd.offsets.push_back(bd.total_bins);
    bd.total_bins += bd.bins[f].num_bins;
  }
  return bd;
}

struct HistBin {
  double g = 0.0;
  double h = 0.0;
  double c = 0.0;
};

struct Split {
  double gain = 0.0;
  int feature = -1;
  bool categorical = false;
  std::size_t bin = 0;            // numeric: bins <= bin go left
  std::vector<int> left_levels;   // categorical
  std::vector<int> right_levels;  // categorical
};

struct LeafState {
  std::size_t begin = 0;
  std::size_t end = 0;
  int node = 0;
  double g = 0.0;
  double h = 0.0;
  std::vector<HistBin> hist;
  Split best;
};

class TreeGrower {
 public:
  TreeGrower(const BinnedData& bd, const GbmConfig& cfg, std::size_t rows)
      : bd_(bd), cfg_(cfg), order_(rows) {}

  // Grows one tree on the given gradients. Returns leaf row ranges through
  // `leaves()` for the caller's score update.
  Tree grow(std::span<const double> grad, std::span<const double> hess,
            ImportanceTotals& importance) {
    std::iota(order_.begin(), order_.end(), 0u);
    leaves_.clear();
    Tree tree;
    tree.nodes.emplace_back();

    LeafState root;
    root.begin = 0;
    root.end = order_.size();
    root.node = 0;
    root.hist = build_hist(root.begin, root.end, grad, hess);
    for (std::size_t i = 0; i < order_.size(); ++i) {
      root.g += grad[i];
      root.h += hess[i];
    }
    gain_floor_ = kMinRelativeGain * std::max(root.h, 1e-300);
    root.best = find_best(root);
    leaves_.push_back(std::move(root));

    while (static_cast<int>(leaves_.size()) < cfg_.max_leaves) {
      std::size_t pick = leaves_.size();
      double best_gain = gain_floor_;
      for (std::size_t l = 0; l < leaves_.size(); ++l) {
        if (leaves_[l].best.feature >= 0 && leaves_[l].best.gain > best_gain) {
          best_gain = leaves_[l].best.gain;
          pick = l;
        }
      }
      if (pick == leaves_.size()) break;
      split_leaf(pick, tree, grad, hess, importance);
    }
    for (const LeafState& leaf : leaves_) {
      TreeNode& node = tree.nodes[static_cast<std::size_t>(leaf.node)];
      node.value = -leaf.g / (leaf.h + cfg_.leaf_l2);
      node.count = leaf.end - leaf.begin;
    }
    return tree;
  }

  const std::vector<LeafState>& leaves() const { return leaves_; }
  const std::vector<std::uint32_t>& order() const { return order_; }

 private:
  static constexpr double kMinRelativeGain = 1e-10;

  std::vector<HistBin> build_hist(std::size_t begin, std::size_t end,
                                  std::span<const double> grad,
                                  std::span<const double> hess) const {
    std::vector<HistBin> hist(bd_.total_bins);
    for (std::size_t f = 0; f < bd_.bins.size(); ++f) {
      HistBin* base = hist.data() + bd_.offsets[f];
      const std::uint16_t* codes = bd_.codes[f].data();
      for (std::size_t k = begin; k < end; ++k) {
        const std::uint32_t r = order_[k];
        HistBin& b = base[codes[r]];
        b.g += grad[r];
        b.h += hess[r];
        b.c += 1.0;
      }
    }
    return hist;
  }

  double score(double g, double h) const { return g * g / (h + cfg_.leaf_l2); }

  bool admissible(double cl, double hl, double cr, double hr) const {
    return cl >= cfg_.min_leaf_count && cr >= cfg_.min_leaf_count &&
           hl >= cfg_.min_child_hessian && hr >= cfg_.min_child_hessian;
  }

  Split find_best(const LeafState& leaf) const {
    Split best;
    const double count = static_cast<double>(leaf.end - leaf.begin);
    if (count < 2.0 * cfg_.min_leaf_count) return best;
    const double parent = score(leaf.g, leaf.h);
    for (std::size_t f = 0; f < bd_.bins.size(); ++f) {
      const FeatureBins& fb = bd_.bins[f];
      const HistBin* hist = leaf.hist.data() + bd_.offsets[f];
      if (!fb.categorical) {
        double gl = 0.0, hl = 0.0, cl = 0.0;
        for (std::size_t b = 0; b + 1 < fb.num_bins; ++b) {
          gl += hist[b].g;
          hl += hist[b].h;
          cl += hist[b].c;
          if (hist[b].c == 0.0) continue;  // same partition as the previous bin
          const double gr = leaf.g - gl, hr = leaf.h - hl, cr = count - cl;
          if (!admissible(cl, hl, cr, hr)) continue;
          const double gain = score(gl, hl) + score(gr, hr) - parent;
          if (gain > best.gain) {
            best = Split{gain, static_cast<int>(f), false, b, {}, {}};
          }
        }
      } else {
        std::vector<int> cats;
        for (std::size_t b = 0; b < fb.num_bins; ++b) {
          if (hist[b].c > 0.0) cats.push_back(static_cast<int>(b));
        }
        if (cats.size() < 2) continue;
        std::stable_sort(cats.begin(), cats.end(), [&](int a, int b) {
          return hist[a].g / hist[a].h < hist[b].g / hist[b].h;
        });
        double gl = 0.0, hl = 0.0, cl = 0.0;
        for (std::size_t k = 0; k + 1 < cats.size(); ++k) {
          gl += hist[cats[k]].g;
          hl += hist[cats[k]].h;
          cl += hist[cats[k]].c;
          const double gr = leaf.g - gl, hr = leaf.h - hl, cr = count - cl;
          if (!admissible(cl, hl, cr, hr)) continue;
          const double gain = score(gl, hl) + score(gr, hr) - parent;
          if (gain > best.gain) {
            Split s{gain, static_cast<int>(f), true, 0, {}, {}};
            s.left_levels.assign(cats.begin(), cats.begin() + static_cast<long>(k) + 1);
            s.right_levels.assign(cats.begin() + static_cast<long>(k) + 1, cats.end());
            std::sort(s.left_levels.begin(), s.left_levels.end());
            std::sort(s.right_levels.begin(), s.right_levels.end());
            best = std::move(s);
          }
        }
      }
    }
    return best;
  }

  void split_leaf(std::size_t index, Tree& tree, std::span<const double> grad,
                  std::span<const double> hess, ImportanceTotals& importance) {
    LeafState parent = std::move(leaves_[index]);
    const Split& s = parent.best;
    const auto f = static_cast<std::size_t>(s.feature);
    const auto& codes = bd_.codes[f];
    auto left_of = [&](std::uint32_t r) {
      const std::uint16_t code = codes[r];
      if (!s.categorical) return code <= s.bin;
      return std::binary_search(s.left_levels.begin(), s.left_levels.end(),
                                static_cast<int>(code));
    };
    const auto mid_it = std::stable_partition(
        order_.begin() + static_cast<long>(parent.begin),
        order_.begin() + static_cast<long>(parent.end), left_of);
    const std::size_t mid = static_cast<std::size_t>(mid_it - order_.begin());

    LeafState left, right;
    left.begin = parent.begin;
    left.end = mid;
    right.begin = mid;
    right.end = parent.end;
    const std::size_t nl = left.end - left.begin;
    const std::size_t nr = right.end - right.begin;
    LeafState& small = nl <= nr ? left : right;
    LeafState& large = nl <= nr ? right : left;
    small.hist = build_hist(small.begin, small.end, grad, hess);
    large.hist = std::move(parent.hist);
    for (std::size_t b = 0; b < large.hist.size(); ++b) {
      large.hist[b].g -= small.hist[b].g;
      large.hist[b].h -= small.hist[b].h;
      large.hist[b].c -= small.hist[b].c;
    }
    for (std::size_t k = small.begin; k < small.end; ++k) {
      small.g += grad[order_[k]];
      small.h += hess[order_[k]];
    }
    large.g = parent.g - small.g;
    large.h = parent.h - small.h;

    TreeNode& node = tree.nodes[static_cast<std::size_t>(parent.node)];
    node.feature = s.feature;
    node.categorical = s.categorical;
    node.gain = s.gain;
    node.count = parent.end - parent.begin;
    if (s.categorical) {
      node.left_levels = s.left_levels;
      node.right_levels = s.right_levels;
      node.unseen_left = nl >= nr;
    } else {
      const FeatureBins& fb = bd_.bins[f];
      node.threshold = s.bin == 0 ? -std::numeric_limits<double>::infinity()
                                  : fb.thresholds[s.bin - 1];
    }
    importance.gain[f] += s.gain;
    importance.cover[f] += static_cast<double>(node.count);
    importance.frequency[f] += 1.0;

    const int left_node = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes.emplace_back();
    tree.nodes[static_cast<std::size_t>(parent.node)].left = left_node;
    tree.nodes[static_cast<std::size_t>(parent.node)].right = left_node + 1;
    left.node = left_node;
    right.node = left_node + 1;
    left.best = find_best(left);
    right.best = find_best(right);
    leaves_[index] = std::move(left);
    leaves_.push_back(std::move(right));
  }

  const BinnedData& bd_;
  const GbmConfig& cfg_;
  std::vector<std::uint32_t> order_;
  std::vector<LeafState> leaves_;
  double gain_floor_ = 0.0;
};

inline double objective_loss(Objective obj, double y, double score, double p) {
  if (obj == Objective::tweedie) return tweedie_loss(y, score, p);
  const double r = y - score;
  return 0.5 * r * r;
}

inline GradHess objective_grad_hess(Objective obj, double y, double score, double p) {
  if (obj == Objective::tweedie) return tweedie_loss_grad_hess(y, score, p);
  return {score - y, 1.0};
}

// Per-row held-out metric: unit deviance for Tweedie, squared error otherwise.
inline double holdout_metric(Objective obj, double y, double score, double p) {
  if (obj == Objective::tweedie) {
    return tweedie::unit_deviance(y, std::exp(clamp_score(score)), p);
  }
  const double r = y - score;
  return r * r;
}

}  // namespace internal

struct GbmFitResult {
  GbmModel model;
  // Mean training loss before the first tree and after each round.
  std::vector<double> train_loss;
  // Mean held-out metric after each round, when a validation set was given.
  std::vector<double> valid_metric;
};

inline GbmFitResult gbm_train(const data::Dataset& train, Objective objective,
                              double p, const GbmConfig& cfg,
                              const data::Dataset* valid = nullptr) {
  cfg.validate();
  if (objective == Objective::tweedie) tweedie::check_power(p);
  const std::size_t n = train.rows();
  if (n < 2 * static_cast<std::size_t>(cfg.min_leaf_count)) {
    std::ostringstream os;
    os << "boosting needs at least " << 2 * cfg.min_leaf_count << " rows, got " << n;
    throw DataError(os.str());
  }
  if (valid && valid->features() != train.features()) {
    throw DataError("validation rows do not match the training schema");
  }
  const auto y = train.target();

  GbmFitResult result;
  GbmModel& model = result.model;
  model.objective = objective;
  model.power = objective == Objective::tweedie ? p : 0.0;
  model.learning_rate = cfg.learning_rate;
  model.features = train.features();
  model.config = cfg;
  model.importance.resize(train.num_features());
  const double mean_y = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  model.base_score = objective == Objective::tweedie ? std::log(std::max(mean_y, 1e-12)) : mean_y;

  const internal::BinnedData bd = internal::bin_dataset(train, cfg.bins);
  internal::TreeGrower grower(bd, cfg, n);
  std::vector<double> score(n, model.base_score);
  std::vector<double> grad(n), hess(n);

  auto mean_loss = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += internal::objective_loss(objective, y[i], score[i], p);
    return s / static_cast<double>(n);
  };
  result.train_loss.push_back(mean_loss());

  std::vector<double> valid_score;
  if (valid) valid_score.assign(valid->rows(), model.base_score);

  for (int round = 0; round < cfg.num_rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      const GradHess gh = internal::objective_grad_hess(objective, y[i], score[i], p);
      grad[i] = gh.gradient;
      hess[i] = gh.hessian;
    }
    Tree tree = grower.grow(grad, hess, model.importance);
    if (tree.nodes.size() == 1) break;  // no admissible split
    const auto& order = grower.order();
    for (const auto& leaf : grower.leaves()) {
      const double delta =
          cfg.learning_rate * tree.nodes[static_cast<std::size_t>(leaf.node)].value;
      for (std::size_t k = leaf.begin; k < leaf.end; ++k) score[order[k]] += delta;
    }
    if (valid) {
      double m = 0.0;
      const auto vy = valid->target();
      for (std::size_t i = 0; i < valid->rows(); ++i) {
        valid_score[i] += cfg.learning_rate * tree.leaf_value([&](int f) {
          return valid->value(i, static_cast<std::size_t>(f));
        });
        m += internal::holdout_metric(objective, vy[i], valid_score[i], p);
      }
      result.valid_metric.push_back(m / static_cast<double>(valid->rows()));
    }
    model.trees.push_back(std::move(tree));
    result.train_loss.push_back(mean_loss());
  }
  for (const double s : score) {
    if (!std::isfinite(s)) throw NumericError("boosting produced a non-finite score");
  }
  return result;
}

// Tweedie-loss boosting for power p.
inline GbmModel gbm_fit(const data::Dataset& train, double p, const GbmConfig& cfg = {}) {
  return gbm_train(train, Objective::tweedie, p, cfg).model;
}

struct RoundSelection {
  int rounds = 0;
  std::vector<double> mean_valid_metric;  // per round count 1..num_rounds
};

// K-fold cross-validation of the number of boosting rounds: returns the
// round count minimizing mean held-out deviance (or squared error).
inline RoundSelection gbm_cv_rounds(const data::Dataset& train, Objective objective,
                                    double p, const GbmConfig& cfg, int folds,
                                    std::uint64_t seed) {
  if (folds < 2) throw ParameterError("cross-validation needs at least 2 folds");
  const auto assignment = resampling::fold_assignment(train.rows(), folds, seed);
  RoundSelection sel;
  sel.mean_valid_metric.assign(static_cast<std::size_t>(cfg.num_rounds), 0.0);
  for (int k = 0; k < folds; ++k) {
    std::vector<std::size_t> tr, va;
    for (std::size_t i = 0; i < train.rows(); ++i) {
      (assignment[i] == k ? va : tr).push_back(i);
    }
    const data::Dataset dtr = train.subset(tr);
    const data::Dataset dva = train.subset(va);
    GbmFitResult fit = gbm_train(dtr, objective, p, cfg, &dva);
    auto& m = fit.valid_metric;
    double last = m.empty() ? 0.0 : m.back();
    if (m.empty()) {
      const auto vy = dva.target();
      for (std::size_t i = 0; i < dva.rows(); ++i) {
        last += internal::holdout_metric(objective, vy[i], fit.model.base_score, p);
      }
      last /= static_cast<double>(std::max<std::size_t>(dva.rows(), 1));
    }
    m.resize(static_cast<std::size_t>(cfg.num_rounds), last);
    for (std::size_t r = 0; r < m.size(); ++r) sel.mean_valid_metric[r] += m[r] / folds;
  }
  if (sel.mean_valid_metric.empty()) {
    sel.rounds = 0;
    return sel;
  }
  const auto best = std::min_element(sel.mean_valid_metric.begin(), sel.mean_valid_metric.end());
  sel.rounds = static_cast<int>(best - sel.mean_valid_metric.begin()) + 1;
  return sel;
}

}  // namespace tweedie_conformal::models

#endif  // TWEEDIE_CONFORMAL_GBM_HPP_
