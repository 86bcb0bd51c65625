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

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "test_support.hpp"
#include "tweedie_conformal.hpp"

namespace {

namespace tc = tweedie_conformal;
namespace m = tweedie_conformal::models;

using tc_test::make_glm_problem;

TEST(GlmSolver, UnpenalizedMatchesIrls) {
  for (double p : {1.3, 1.6}) {
    EXPECT_LT(tc_test::irls_gap(make_glm_problem(2000, 20, p, 1), p), 1e-4) << "p=" << p;
  }
}

TEST(GlmSolver, KktAlongPath) {
  const auto pr = make_glm_problem(2000, 20, 1.5, 2);
  for (double gamma : {0.0, 0.5, 1.0}) EXPECT_LE(tc_test::kkt_path_worst(pr, 1.5, gamma), 1e-5) << gamma;
}

TEST(GlmSolver, SubgradientConditionsPerCoordinate) {
  const auto pr = make_glm_problem(1000, 10, 1.5, 3);
  const double lam = 0.05 * m::lambda_max(pr.x, pr.y, 1.5, 0.7);
  const auto sol = m::glm_solve(pr.x, pr.y, 1.5, lam, 0.7);
  // Gradient of the mean loss by finite differences of the objective.
  std::vector<double> eta(1000);
  for (std::size_t j = 0; j < 10; ++j) {
    double g = 0.0;
    for (std::size_t i = 0; i < 1000; ++i) {
      double e = sol.beta0;
      for (std::size_t k = 0; k < 10; ++k) e += pr.x(i, k) * sol.beta[k];
      g += pr.x(i, j) * m::tweedie_loss_grad_hess(pr.y[i], e, 1.5).gradient;
    }
    g = g / 1000.0 + lam * 0.3 * sol.beta[j];
    if (sol.beta[j] == 0.0) {
      EXPECT_LE(std::abs(g), lam * 0.7 + 1e-5);
    } else {
      EXPECT_NEAR(g + lam * 0.7 * (sol.beta[j] > 0 ? 1 : -1), 0.0, 1e-5);
    }
  }
}

TEST(GlmSolver, LambdaAboveMaxZeroesCoefficients) {
  const auto pr = make_glm_problem(500, 8, 1.5, 4);
  const double lmax = m::lambda_max(pr.x, pr.y, 1.5, 1.0);
  for (double lam : {lmax, 10 * lmax, 1e9}) {
    const auto sol = m::glm_solve(pr.x, pr.y, 1.5, lam, 1.0);
    for (double b : sol.beta) EXPECT_EQ(b, 0.0);
    EXPECT_NEAR(sol.beta0, m::intercept_only(pr.y), 1e-6);
  }
  // Just below lambda_max at least one coefficient enters.
  const auto sol = m::glm_solve(pr.x, pr.y, 1.5, 0.9 * lmax, 1.0);
  int active = 0;
  for (double b : sol.beta) active += b != 0.0;
  EXPECT_GE(active, 1);
}

TEST(GlmSolver, ObjectiveNeverIncreases) {
  const auto pr = make_glm_problem(800, 12, 1.4, 5);
  m::GlmSolverOptions o;
  o.record_trace = true;
  const auto sol = m::glm_solve(pr.x, pr.y, 1.4, 0.01, 0.5, o);
  ASSERT_GE(sol.trace.size(), 2u);
  for (std::size_t i = 1; i < sol.trace.size(); ++i) EXPECT_LE(sol.trace[i], sol.trace[i - 1] + 1e-15);
  EXPECT_NEAR(sol.objective, m::glm_objective(pr.x, pr.y, 1.4, 0.01, 0.5, sol.beta0, sol.beta), 1e-12);
}

TEST(GlmSolver, RejectsBadArguments) {
  const auto pr = make_glm_problem(50, 3, 1.5, 6);
  EXPECT_THROW(m::glm_solve(pr.x, pr.y, 1.5, -1.0, 0.5), tc::ParameterError);
  EXPECT_THROW(m::glm_solve(pr.x, pr.y, 1.5, 1.0, 1.5), tc::ParameterError);
  EXPECT_THROW(m::glm_solve(pr.x, pr.y, 2.5, 1.0, 0.5), tc::ParameterError);
}

TEST(LambdaPath, LogSpacedAndDecreasing) {
  const auto path = m::lambda_path(2.0, 100, 1e-4);
  ASSERT_EQ(path.size(), 100u);
  EXPECT_DOUBLE_EQ(path.front(), 2.0);
  EXPECT_NEAR(path.back(), 2e-4, 1e-15);
  for (std::size_t i = 1; i < path.size(); ++i) {
    EXPECT_LT(path[i], path[i - 1]);
    EXPECT_NEAR(path[i] / path[i - 1], std::pow(1e-4, 1.0 / 99.0), 1e-12);
  }
}

TEST(GlmFit, PredictsFromRawRows) {
  tc::data::SynthConfig c;
  c.rows = 1500;
  const auto s = tc::data::generate_synthetic(c, 7);
  const auto model = m::glm_fit(s.dataset, 1.5, 0.0, 0.5);
  const auto mu = model.predict(s.dataset);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_NEAR(model.predict(s.dataset.row(i)), mu[i], 1e-12 * mu[i]);
  // Log-linear truth: coefficients on the raw scale are close to the generating effects.
  const auto& cols = model.encoding().columns();
  const double truth[] = {0.8, -0.6, 0.5, -0.4, 0.3};
  for (std::size_t j = 0; j < 5; ++j) {
    EXPECT_EQ(cols[j].name, "x" + std::to_string(j));
    EXPECT_NEAR(model.beta()[j] / cols[j].scale, truth[j], 0.2);
  }
}

TEST(GlmCv, SelectsFromGridAndRefits) {
  tc::data::SynthConfig c;
  c.rows = 600;
  const auto s = tc::data::generate_synthetic(c, 8);
  m::GlmCvConfig cfg;
  cfg.powers = {1.5};
  cfg.gammas = {0.0, 1.0};
  cfg.path_length = 15;
  cfg.seed = 3;
  const auto res = m::glm_cv_select(s.dataset, cfg);
  EXPECT_DOUBLE_EQ(res.power, 1.5);
  EXPECT_TRUE(res.gamma == 0.0 || res.gamma == 1.0);
  EXPECT_GT(res.lambda, 0.0);
  EXPECT_GT(res.phi, 0.0);
  EXPECT_DOUBLE_EQ(res.model.lambda(), res.lambda);
  const auto again = m::glm_cv_select(s.dataset, cfg);
  EXPECT_EQ(again.model.beta(), res.model.beta());
}

TEST(GlmCv, ProfileLikelihoodAcrossPowers) {
  tc::data::SynthConfig c;
  c.rows = 1500;
  const auto s = tc::data::generate_synthetic(c, 9);
  m::GlmCvConfig cfg;
  cfg.powers = {1.2, 1.5, 1.8};
  cfg.gammas = {0.5};
  cfg.path_length = 10;
  const auto res = m::glm_cv_select(s.dataset, cfg);
  EXPECT_DOUBLE_EQ(res.power, 1.5);
  EXPECT_EQ(res.per_power.size(), 3u);
}

}  // namespace
