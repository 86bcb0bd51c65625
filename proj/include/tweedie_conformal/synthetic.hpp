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

// Synthetic Tweedie regression data with known mean and dispersion functions.

#ifndef TWEEDIE_CONFORMAL_SYNTHETIC_HPP_
#define TWEEDIE_CONFORMAL_SYNTHETIC_HPP_

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "tweedie_conformal/dataset.hpp"
#include "tweedie_conformal/errors.hpp"
#include "tweedie_conformal/tweedie.hpp"

namespace tweedie_conformal::data {

enum class MeanFunction { linear_log, nonlinear };

struct SynthConfig {
  std::size_t rows = 1000;
  std::size_t numeric_features = 5;
  std::size_t categorical_features = 1;
  std::size_t categorical_levels = 3;
  MeanFunction mean_function = MeanFunction::linear_log;
  double intercept = 0.0;
  // Multiplies every covariate effect; 0 gives a constant mean exp(intercept).
  double signal = 1.0;
  double phi = 1.0;
  double p = 1.5;
  // When set, phi(x) = phi * exp(hetero_strength * x_last) where x_last is
  // the last numeric feature.
  bool heteroscedastic = false;
  double hetero_strength = 1.5;

  void validate() const {
    if (rows == 0) throw ParameterError("synthetic row count must be positive");
    if (!(phi > 0.0)) throw ParameterError("synthetic phi must be positive");
    tweedie::check_power(p);
    if (categorical_features > 0 && categorical_levels < 2) {
      throw ParameterError("categorical features need at least two levels");
    }
    if (heteroscedastic && numeric_features == 0) {
      throw ParameterError("heteroscedastic data needs a numeric feature");
    }
  }
};

using RowFunction = std::function<double(std::span<const double>)>;

struct SyntheticData {
  Dataset dataset;
  RowFunction true_mean;
  RowFunction true_phi;
  double power = 1.5;
};

namespace internal {
inline constexpr std::array<double, 5> kLinearEffects = {0.8, -0.6, 0.5, -0.4, 0.3};

inline double level_effect(double code, std::size_t levels) {
  if (code < 0.0 || levels < 2) return 0.0;
  // Evenly spread on [-0.3, 0.3].
  return -0.3 + 0.6 * code / static_cast<double>(levels - 1);
}
}  // namespace internal

inline SyntheticData generate_synthetic(const SynthConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);

  std::vector<FeatureInfo> features;
  for (std::size_t j = 0; j < cfg.numeric_features; ++j) {
    features.push_back({"x" + std::to_string(j), FeatureKind::numeric, {}});
  }
  for (std::size_t j = 0; j < cfg.categorical_features; ++j) {
    FeatureInfo f{"c" + std::to_string(j), FeatureKind::categorical, {}};
    for (std::size_t l = 0; l < cfg.categorical_levels; ++l) {
      f.levels.push_back("L" + std::to_string(l));
    }
    features.push_back(std::move(f));
  }

  const std::size_t nnum = cfg.numeric_features;
  const std::size_t ncat = cfg.categorical_features;
  const std::size_t nlev = cfg.categorical_levels;
  const SynthConfig c = cfg;

  RowFunction mean = [c, nnum, ncat, nlev](std::span<const double> x) {
    double eta = c.intercept;
    double s = 0.0;
    if (c.mean_function == MeanFunction::linear_log) {
      for (std::size_t j = 0; j < nnum && j < internal::kLinearEffects.size(); ++j) {
        s += internal::kLinearEffects[j] * x[j];
      }
    } else {
      auto at = [&](std::size_t j) { return j < nnum ? x[j] : 0.0; };
      s = 0.8 * std::sin(std::numbers::pi * at(0)) + 0.6 * at(1) * at(1) -
          0.4 * std::abs(at(2)) + 0.5 * at(0) * at(3);
    }
    for (std::size_t k = 0; k < ncat; ++k) s += internal::level_effect(x[nnum + k], nlev);
    return std::exp(eta + c.signal * s);
  };
  RowFunction phi = [c, nnum](std::span<const double> x) {
    if (!c.heteroscedastic) return c.phi;
    return c.phi * std::exp(c.hetero_strength * x[nnum - 1]);
  };

  std::vector<std::vector<double>> cols(features.size(), std::vector<double>(cfg.rows));
  std::vector<double> target(cfg.rows);
  std::uniform_int_distribution<std::size_t> level(0, nlev > 0 ? nlev - 1 : 0);
  std::vector<double> row(features.size());
  for (std::size_t i = 0; i < cfg.rows; ++i) {
    for (std::size_t j = 0; j < nnum; ++j) row[j] = unif(rng);
    for (std::size_t k = 0; k < ncat; ++k) row[nnum + k] = static_cast<double>(level(rng));
    for (std::size_t j = 0; j < row.size(); ++j) cols[j][i] = row[j];
    const tweedie::TweedieParams params(mean(row), phi(row), cfg.p);
    target[i] = tweedie::sample_one(params, rng);
  }
  // Source id distinguishes datasets from different seeds.
  const std::uint64_t source = fnv1a("synthetic", seed * 0x9E3779B97F4A7C15ULL + 1);
  return {Dataset(std::move(features), std::move(cols), std::move(target), source),
          std::move(mean), std::move(phi), cfg.p};
}

}  // namespace tweedie_conformal::data

#endif  // TWEEDIE_CONFORMAL_SYNTHETIC_HPP_
