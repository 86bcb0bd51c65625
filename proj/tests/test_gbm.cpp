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

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "test_support.hpp"
#include "tweedie_conformal.hpp"

namespace {

namespace tc = tweedie_conformal;
namespace m = tweedie_conformal::models;
using tc::data::Dataset;
using tc::data::FeatureInfo;
using tc::data::FeatureKind;

TEST(TweedieLoss, GradientAndHessianMatchFiniteDifferences) {
  EXPECT_LT(tc_test::loss_derivative_worst(10000, 1), 1e-6);
}

TEST(TweedieLoss, HessianPositiveAndScoreClamped) {
  for (double y : {0.0, 1.0, 1e6}) {
    for (double f : {-100.0, -5.0, 0.0, 5.0, 100.0}) {
      const auto gh = m::tweedie_loss_grad_hess(y, f, 1.5);
      EXPECT_GT(gh.hessian, 0.0);
      EXPECT_TRUE(std::isfinite(gh.gradient));
    }
  }
  EXPECT_DOUBLE_EQ(m::clamp_score(100.0), m::kScoreClamp);
}

Dataset numeric_dataset(const std::vector<std::vector<double>>& cols, std::vector<double> y) {
  std::vector<FeatureInfo> fs;
  for (std::size_t j = 0; j < cols.size(); ++j) fs.push_back({"x" + std::to_string(j), FeatureKind::numeric, {}});
  return Dataset(fs, cols, std::move(y));
}

TEST(Gbm, SquaredErrorRecoversGroupMeans) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::normal_distribution<double> z(0.0, 0.1);
  std::vector<double> x0, x1, y;
  for (int i = 0; i < 1000; ++i) {
    x0.push_back(u(rng));
    x1.push_back(u(rng));
    y.push_back((x0.back() < 0.2 ? 1.0 : 3.0) + z(rng));
  }
  const auto ds = numeric_dataset({x0, x1}, y);
  m::GbmConfig cfg;
  cfg.max_leaves = 2;
  cfg.learning_rate = 0.1;
  cfg.num_rounds = 300;
  const auto fit = m::gbm_train(ds, m::Objective::squared_error, 0.0, cfg);
  double sa = 0, na = 0, sb = 0, nb = 0;
  for (int i = 0; i < 1000; ++i) (x0[i] < 0.2 ? (sa += y[i], na += 1) : (sb += y[i], nb += 1));
  const std::vector<double> left = {-0.5, 0.0}, right = {0.7, 0.0};
  EXPECT_NEAR(fit.model.predict(left) / (sa / na), 1.0, 0.01);
  EXPECT_NEAR(fit.model.predict(right) / (sb / nb), 1.0, 0.01);
  for (std::size_t r = 1; r < fit.train_loss.size(); ++r) EXPECT_LE(fit.train_loss[r], fit.train_loss[r - 1] + 1e-12);
}

TEST(Gbm, SingleSplitImportance) {
  std::vector<double> x0, x1, y;
  for (int i = 0; i < 200; ++i) {
    x0.push_back(i);
    x1.push_back((i * 37) % 200);
    y.push_back(i < 100 ? 0.0 : 10.0);
  }
  const auto ds = numeric_dataset({x0, x1}, y);
  m::GbmConfig cfg;
  cfg.max_leaves = 2;
  cfg.num_rounds = 1;
  cfg.learning_rate = 1.0;
  const auto model = m::gbm_train(ds, m::Objective::squared_error, 0.0, cfg).model;
  ASSERT_EQ(model.num_splits(), 1u);
  EXPECT_EQ(model.trees[0].nodes[0].feature, 0);
  const auto imp = m::feature_importance(model);
  EXPECT_DOUBLE_EQ(imp.gain[0], 1.0);
  EXPECT_DOUBLE_EQ(imp.frequency[0], 1.0);
  EXPECT_DOUBLE_EQ(imp.cover[0], 1.0);
  EXPECT_DOUBLE_EQ(imp.gain[1], 0.0);
}

TEST(Gbm, ImportanceSharesAndFrequencyCounts) {
  tc::data::SynthConfig c;
  c.rows = 800;
  const auto s = tc::data::generate_synthetic(c, 4);
  m::GbmConfig cfg;
  cfg.num_rounds = 50;
  cfg.learning_rate = 0.1;
  const auto model = m::gbm_fit(s.dataset, 1.5, cfg);
  const auto imp = m::feature_importance(model);
  auto total = [](const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); };
  EXPECT_NEAR(total(imp.gain), 1.0, 1e-12);
  EXPECT_NEAR(total(imp.cover), 1.0, 1e-12);
  EXPECT_NEAR(total(imp.frequency), 1.0, 1e-12);
  std::vector<double> splits(model.features.size(), 0.0);
  for (const auto& t : model.trees) {
    for (const auto& n : t.nodes) {
      if (!n.is_leaf()) splits[static_cast<std::size_t>(n.feature)] += 1;
    }
  }
  for (std::size_t f = 0; f < splits.size(); ++f) {
    EXPECT_DOUBLE_EQ(imp.frequency[f], splits[f] / static_cast<double>(model.num_splits()));
  }
}

TEST(Gbm, NoSplitsGivesZeroImportance) {
  std::vector<double> x(100);
  std::iota(x.begin(), x.end(), 0.0);
  const auto ds = numeric_dataset({x}, std::vector<double>(100, 1.0));
  const auto model = m::gbm_train(ds, m::Objective::squared_error, 0.0, {}).model;
  EXPECT_EQ(model.num_splits(), 0u);
  const auto imp = m::feature_importance(model);
  EXPECT_DOUBLE_EQ(imp.gain[0], 0.0);
  EXPECT_DOUBLE_EQ(imp.frequency[0], 0.0);
}

TEST(Gbm, DrivingFeatureHasTopGainShare) {
  int wins = 0;
  for (int run = 0; run < 100; ++run) {
    std::mt19937_64 rng(1000 + run);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<std::vector<double>> cols(4, std::vector<double>(500));
    std::vector<double> y(500);
    for (int i = 0; i < 500; ++i) {
      for (auto& c : cols) c[i] = u(rng);
      const double mu = std::exp(1.0 * cols[1][i]);
      y[i] = tc::tweedie::sample_one(tc::tweedie::TweedieParams(mu, 1.0, 1.5), rng);
    }
    m::GbmConfig cfg;
    cfg.num_rounds = 100;
    cfg.learning_rate = 0.05;
    const auto model = m::gbm_fit(numeric_dataset(cols, y), 1.5, cfg);
    const auto imp = m::feature_importance(model);
    wins += std::max_element(imp.gain.begin(), imp.gain.end()) - imp.gain.begin() == 1;
  }
  EXPECT_GE(wins, 95);
}

TEST(Gbm, CategoricalSplitsAndUnseenLevels) {
  // Levels a, c are low; b, d are high; d is rare.
  std::vector<FeatureInfo> fs = {{"c", FeatureKind::categorical, {"a", "b", "c", "d"}}};
  std::vector<double> col, y;
  for (int i = 0; i < 400; ++i) {
    const int lvl = i % 10 == 9 ? 3 : i % 3;
    col.push_back(lvl);
    y.push_back(lvl == 0 || lvl == 2 ? 1.0 : 5.0);
  }
  const Dataset ds(fs, {col}, y);
  m::GbmConfig cfg;
  cfg.max_leaves = 2;
  cfg.num_rounds = 200;
  cfg.learning_rate = 0.1;
  const auto model = m::gbm_train(ds, m::Objective::squared_error, 0.0, cfg).model;
  for (double lvl : {0.0, 2.0}) EXPECT_NEAR(model.predict(std::vector<double>{lvl}), 1.0, 1e-3);
  for (double lvl : {1.0, 3.0}) EXPECT_NEAR(model.predict(std::vector<double>{lvl}), 5.0, 1e-3);
  // Unseen level follows the larger child (the low group holds more rows).
  const auto& root = model.trees[0].nodes[0];
  ASSERT_TRUE(root.categorical);
  const double unseen = model.predict(std::vector<double>{tc::data::kUnseenLevel});
  const std::size_t lc = model.trees[0].nodes[static_cast<std::size_t>(root.left)].count;
  const std::size_t rc = model.trees[0].nodes[static_cast<std::size_t>(root.right)].count;
  EXPECT_EQ(root.unseen_left, lc >= rc);
  EXPECT_NEAR(unseen, 1.0, 1e-3);
}

TEST(Gbm, MissingNumericValuesGoLeft) {
  std::vector<double> x, y;
  for (int i = 0; i < 300; ++i) {
    x.push_back(i % 3 == 0 ? std::nan("") : static_cast<double>(i));
    y.push_back(i % 3 == 0 ? 0.0 : 4.0);
  }
  const auto ds = numeric_dataset({x}, y);
  m::GbmConfig cfg;
  cfg.num_rounds = 100;
  cfg.learning_rate = 0.2;
  const auto model = m::gbm_train(ds, m::Objective::squared_error, 0.0, cfg).model;
  EXPECT_NEAR(model.predict(std::vector<double>{std::nan("")}), 0.0, 1e-2);
  EXPECT_NEAR(model.predict(std::vector<double>{100.0}), 4.0, 1e-2);
}

TEST(Gbm, PredictionsFiniteForExtremeTargets) {
  std::vector<double> x, y;
  for (int i = 0; i < 200; ++i) {
    x.push_back(i);
    y.push_back(i < 190 ? 0.0 : 1e12);
  }
  const auto ds = numeric_dataset({x}, y);
  m::GbmConfig cfg;
  cfg.num_rounds = 300;
  cfg.learning_rate = 1.0;
  const auto model = m::gbm_fit(ds, 1.9, cfg);
  for (double v : {-1e300, 0.0, 195.0, 1e300, std::nan("")}) {
    const double mu = model.predict(std::vector<double>{v});
    EXPECT_TRUE(std::isfinite(mu) && mu > 0.0);
  }
}

TEST(Gbm, DeterministicAndSchemaChecked) {
  tc::data::SynthConfig c;
  c.rows = 300;
  const auto s = tc::data::generate_synthetic(c, 5);
  m::GbmConfig cfg;
  cfg.num_rounds = 30;
  const auto a = m::gbm_fit(s.dataset, 1.5, cfg).predict(s.dataset);
  const auto b = m::gbm_fit(s.dataset, 1.5, cfg).predict(s.dataset);
  EXPECT_EQ(a, b);
  const auto model = m::gbm_fit(s.dataset, 1.5, cfg);
  for (std::size_t i = 0; i < 20; ++i) EXPECT_DOUBLE_EQ(model.predict(s.dataset.row(i)), a[i]);
  const auto other = numeric_dataset({{1.0, 2.0}}, {1.0, 2.0});
  EXPECT_THROW(model.predict(other), tc::DataError);
  EXPECT_THROW(model.predict(std::vector<double>{1.0}), tc::DataError);
}

TEST(Gbm, CrossValidatedRoundCount) {
  tc::data::SynthConfig c;
  c.rows = 600;
  const auto s = tc::data::generate_synthetic(c, 6);
  m::GbmConfig cfg;
  cfg.num_rounds = 400;
  cfg.learning_rate = 0.1;
  const auto sel = m::gbm_cv_rounds(s.dataset, m::Objective::tweedie, 1.5, cfg, 5, 9);
  EXPECT_GE(sel.rounds, 1);
  EXPECT_LE(sel.rounds, 400);
  ASSERT_EQ(sel.mean_valid_metric.size(), 400u);
  const double best = *std::min_element(sel.mean_valid_metric.begin(), sel.mean_valid_metric.end());
  EXPECT_DOUBLE_EQ(sel.mean_valid_metric[static_cast<std::size_t>(sel.rounds - 1)], best);
  EXPECT_THROW(m::gbm_cv_rounds(s.dataset, m::Objective::tweedie, 1.5, cfg, 1, 9), tc::ParameterError);
}

TEST(Spread, OutputNeverBelowFloor) {
  tc::data::SynthConfig c;
  c.rows = 400;
  const auto s = tc::data::generate_synthetic(c, 7);
  std::vector<double> r(400, 0.0);
  r[0] = 1.0;
  m::GbmConfig cfg;
  cfg.num_rounds = 50;
  const auto sm = m::spread_fit(s.dataset, r, cfg, m::SpreadTarget::pearson);
  EXPECT_DOUBLE_EQ(sm.floor(), std::max(1e-6, 1e-3 / 400.0));
  for (double v : sm.predict(s.dataset)) EXPECT_GE(v, sm.floor());
  EXPECT_THROW(m::spread_fit(s.dataset, std::vector<double>(400, -1.0), cfg, m::SpreadTarget::pearson),
               tc::DataError);
}

TEST(GbmRecipe, SingleCellGridReportsThatPower) {
  tc::data::SynthConfig c;
  c.rows = 400;
  const auto s = tc::data::generate_synthetic(c, 8);
  m::GbmRecipe r;
  r.powers = {1.5};
  r.config.num_rounds = 50;
  const auto res = m::fit_gbm_recipe(s.dataset, r);
  EXPECT_DOUBLE_EQ(res.power, 1.5);
  EXPECT_DOUBLE_EQ(res.model.power, 1.5);
  EXPECT_GT(res.phi, 0.0);
}

}  // namespace
