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

#include "tweedie_conformal.hpp"

namespace {

namespace tc = tweedie_conformal;
namespace ev = tweedie_conformal::evaluation;
namespace cf = tweedie_conformal::conformal;
using tc::models::ModelKind;

TEST(PointMetrics, ReferenceValues) {
  const std::vector<double> y = {0.0, 2.0}, mu = {1.0, 1.0};
  const auto m = ev::point_metrics(y, mu);
  EXPECT_DOUBLE_EQ(m.rmse, 1.0);
  EXPECT_DOUBLE_EQ(m.mae, 1.0);
  EXPECT_DOUBLE_EQ(m.r2, 0.0);  // constant prediction at the mean
  const auto perfect = ev::point_metrics(y, y);
  EXPECT_DOUBLE_EQ(perfect.rmse, 0.0);
  EXPECT_DOUBLE_EQ(perfect.mae, 0.0);
  EXPECT_DOUBLE_EQ(perfect.r2, 1.0);
  EXPECT_TRUE(std::isnan(ev::point_metrics(std::vector<double>{1, 1}, std::vector<double>{1, 2}).r2));
  EXPECT_THROW(ev::point_metrics(std::vector<double>{1}, std::vector<double>{1}), tc::ParameterError);
}

struct Bench {
  tc::data::SyntheticData synth;
  ev::ExperimentConfig cfg;
};

Bench oracle_bench(std::size_t n1, std::size_t n2, std::size_t n3, int reps) {
  tc::data::SynthConfig c;
  c.rows = n1 + n2 + n3 + 100;
  c.categorical_features = 0;
  c.heteroscedastic = true;
  Bench b{tc::data::generate_synthetic(c, 77), {}};
  b.cfg.n1 = n1;
  b.cfg.n2 = n2;
  b.cfg.n3 = n3;
  b.cfg.repetitions = reps;
  b.cfg.models = {ModelKind::oracle};
  b.cfg.kinds = {cf::ResidualKind::pearson, cf::ResidualKind::deviance};
  b.cfg.oracle = tc::models::OracleModel{b.synth.true_mean, 1.5, b.synth.dataset.features()};
  return b;
}

TEST(Experiment, OracleCoverageNearNominal) {
  auto b = oracle_bench(50, 500, 500, 40);
  b.cfg.modes = {cf::Mode::symmetric, cf::Mode::asymmetric};
  const auto rep = ev::run_experiment(b.synth.dataset, b.cfg);
  EXPECT_EQ(rep.failed, 0u);
  ASSERT_EQ(rep.aggregate.size(), 4u);
  for (const auto& a : rep.aggregate) {
    EXPECT_NEAR(a.coverage.mean, 0.95, 0.015) << cf::to_string(a.kind) << cf::to_string(a.mode);
    EXPECT_EQ(a.coverage.count, 40u);
    EXPECT_GT(a.width.mean, 0.0);
    EXPECT_GE(a.coverage.sd, 0.0);
  }
}

TEST(Experiment, SingleRepetitionFlagsZeroSd) {
  auto b = oracle_bench(50, 200, 200, 1);
  const auto rep = ev::run_experiment(b.synth.dataset, b.cfg);
  EXPECT_TRUE(rep.single_repetition);
  for (const auto& a : rep.aggregate) EXPECT_DOUBLE_EQ(a.coverage.sd, 0.0);
}

TEST(Experiment, InfiniteIntervalsCountedNotAveraged) {
  // n2 = 10 with alpha = 0.05 gives k = 11 > 10: every interval is [0, inf).
  auto b = oracle_bench(50, 10, 100, 3);
  const auto rep = ev::run_experiment(b.synth.dataset, b.cfg);
  for (const auto& a : rep.aggregate) {
    EXPECT_DOUBLE_EQ(a.coverage.mean, 1.0);
    EXPECT_EQ(a.width.count, 0u);
    EXPECT_TRUE(std::isnan(a.width.mean));
    EXPECT_EQ(a.infinite, 300u);
  }
}

TEST(Experiment, ByteIdenticalAcrossRunsAndThreadCounts) {
  auto b = oracle_bench(300, 300, 300, 4);
  b.cfg.models = {ModelKind::gbm, ModelKind::oracle};
  b.cfg.kinds = {cf::ResidualKind::pearson, cf::ResidualKind::locally_weighted_pearson,
                 cf::ResidualKind::lei_locally_weighted};
  b.cfg.gbm.powers = {1.4, 1.6};
  b.cfg.gbm.config.num_rounds = 30;
  b.cfg.gbm.config.learning_rate = 0.1;
  b.cfg.spread.num_rounds = 20;
  const auto r1 = ev::run_experiment(b.synth.dataset, b.cfg);
  b.cfg.threads = 3;
  const auto r2 = ev::run_experiment(b.synth.dataset, b.cfg);
  auto strip = [](nlohmann::json j) {
    j["config"].erase("threads");
    return j.dump();
  };
  EXPECT_EQ(strip(ev::report_to_json(r1)), strip(ev::report_to_json(r2)));
  EXPECT_EQ(ev::aggregate_csv(r1), ev::aggregate_csv(r2));
  EXPECT_EQ(ev::repetition_csv(r1), ev::repetition_csv(r2));
  EXPECT_EQ(r1.failed, 0u);
  // Selected powers come from the grid and are recorded per repetition.
  for (const auto& r : r1.repetitions) {
    for (const auto& mr : r.models) {
      if (mr.model == ModelKind::gbm) {
        EXPECT_TRUE(mr.power == 1.4 || mr.power == 1.6);
      }
    }
  }
}

TEST(Experiment, FastModeReusesFirstRepetitionChoices) {
  auto b = oracle_bench(300, 200, 200, 3);
  b.cfg.models = {ModelKind::gbm};
  b.cfg.kinds = {cf::ResidualKind::pearson};
  b.cfg.gbm.powers = {1.3, 1.5, 1.7};
  b.cfg.gbm.config.num_rounds = 30;
  b.cfg.fast = true;
  const auto rep = ev::run_experiment(b.synth.dataset, b.cfg);
  const double p0 = rep.repetitions[0].models[0].power;
  for (const auto& r : rep.repetitions) EXPECT_DOUBLE_EQ(r.models[0].power, p0);
  EXPECT_TRUE(ev::report_to_json(rep)["config"]["fast_mode"].get<bool>());
}

TEST(Experiment, FailedRepetitionsAreRecorded) {
  auto b = oracle_bench(50, 100, 100, 2);
  // An oracle that returns a non-positive mean makes every repetition fail.
  b.cfg.oracle->mean = [](std::span<const double>) { return -1.0; };
  const auto rep = ev::run_experiment(b.synth.dataset, b.cfg);
  EXPECT_EQ(rep.failed, 2u);
  EXPECT_FALSE(rep.repetitions[0].error.empty());
  EXPECT_NE(ev::repetition_csv(rep).find("failed"), std::string::npos);
}

TEST(Experiment, ValidatesConfig) {
  auto b = oracle_bench(50, 100, 100, 1);
  b.cfg.n1 = 100000;
  EXPECT_THROW(ev::run_experiment(b.synth.dataset, b.cfg), tc::ConfigError);
  b.cfg.n1 = 50;
  b.cfg.repetitions = 0;
  EXPECT_THROW(ev::run_experiment(b.synth.dataset, b.cfg), tc::ConfigError);
  b.cfg.repetitions = 1;
  b.cfg.oracle.reset();
  EXPECT_THROW(ev::run_experiment(b.synth.dataset, b.cfg), tc::ConfigError);
}

TEST(Experiment, CoverageInvariantToMonotoneRescaling) {
  // Locally weighted Pearson with a constant spread is a rescaled Pearson
  // score: per-repetition coverage must agree exactly.
  auto b = oracle_bench(300, 300, 300, 3);
  b.cfg.kinds = {cf::ResidualKind::pearson, cf::ResidualKind::locally_weighted_pearson};
  b.cfg.spread.num_rounds = 0;
  const auto rep = ev::run_experiment(b.synth.dataset, b.cfg);
  const auto a = rep.cells(ModelKind::oracle, cf::ResidualKind::pearson, cf::Mode::symmetric);
  const auto w = rep.cells(ModelKind::oracle, cf::ResidualKind::locally_weighted_pearson, cf::Mode::symmetric);
  ASSERT_EQ(a.size(), w.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_DOUBLE_EQ(a[i]->coverage, w[i]->coverage);
    EXPECT_NEAR(a[i]->mean_width, w[i]->mean_width, 1e-9 * a[i]->mean_width);
  }
}

}  // namespace
