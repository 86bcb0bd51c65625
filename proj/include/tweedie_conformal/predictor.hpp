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

// Uniform mean-function interface over the GLM, the boosted trees and known
// ("oracle") mean functions, plus the squared-error spread models used by
// the locally weighted scores and the training recipes of both learners.

#ifndef TWEEDIE_CONFORMAL_PREDICTOR_HPP_
#define TWEEDIE_CONFORMAL_PREDICTOR_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "tweedie_conformal/dataset.hpp"
#include "tweedie_conformal/errors.hpp"
#include "tweedie_conformal/gbm.hpp"
#include "tweedie_conformal/glm.hpp"
#include "tweedie_conformal/synthetic.hpp"
#include "tweedie_conformal/tweedie.hpp"

namespace tweedie_conformal::models {

// Identifies the rows a model was trained on: the source dataset plus the
// source row ids. Used to refuse calibration on training rows.
struct Provenance {
  std::uint64_t source_id = 0;
  std::vector<std::uint64_t> row_ids;  // sorted, unique

  static Provenance of(const data::Dataset& ds) {
    Provenance p;
    p.source_id = ds.source_id();
    p.row_ids = ds.row_ids();
    std::sort(p.row_ids.begin(), p.row_ids.end());
    p.row_ids.erase(std::unique(p.row_ids.begin(), p.row_ids.end()), p.row_ids.end());
    return p;
  }

  bool empty() const { return row_ids.empty(); }

  bool overlaps(const data::Dataset& ds) const {
    if (row_ids.empty() || ds.source_id() != source_id) return false;
    for (std::uint64_t id : ds.row_ids()) {
      if (std::binary_search(row_ids.begin(), row_ids.end(), id)) return true;
    }
    return false;
  }
};

enum class ModelKind { glm, gbm, oracle };

inline std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::glm: return "glm";
    case ModelKind::gbm: return "gbm";
    case ModelKind::oracle: return "oracle";
  }
  return "?";
}

inline ModelKind parse_model_kind(const std::string& s) {
  if (s == "glm") return ModelKind::glm;
  if (s == "gbm") return ModelKind::gbm;
  if (s == "oracle") return ModelKind::oracle;
  throw ParameterError("unknown model kind '" + s + "'");
}

// A known mean function, e.g. the generating mean of synthetic data.
struct OracleModel {
  data::RowFunction mean;
  double power = 1.5;
  std::vector<data::FeatureInfo> features;
};

class Predictor {
 public:
  Predictor(GlmModel m, Provenance prov) : model_(std::move(m)), provenance_(std::move(prov)) {}
  Predictor(GbmModel m, Provenance prov) : model_(std::move(m)), provenance_(std::move(prov)) {
    if (gbm()->objective != Objective::tweedie) {
      throw ParameterError("a mean predictor needs a Tweedie-objective ensemble");
    }
  }
  explicit Predictor(OracleModel m) : model_(std::move(m)) {}

  ModelKind kind() const {
    switch (model_.index()) {
      case 0: return ModelKind::glm;
      case 1: return ModelKind::gbm;
      default: return ModelKind::oracle;
    }
  }

  double power() const {
    return std::visit(
        [](const auto& m) {
          if constexpr (std::is_same_v<std::decay_t<decltype(m)>, GlmModel>) {
            return m.power();
          } else {
            return m.power;
          }
        },
        model_);
  }

  const std::vector<data::FeatureInfo>& features() const {
    return std::visit(
        [](const auto& m) -> const std::vector<data::FeatureInfo>& {
          if constexpr (std::is_same_v<std::decay_t<decltype(m)>, GlmModel>) {
            return m.features();
          } else {
            return m.features;
          }
        },
        model_);
  }

  const Provenance& provenance() const { return provenance_; }
  const GlmModel* glm() const { return std::get_if<GlmModel>(&model_); }
  const GbmModel* gbm() const { return std::get_if<GbmModel>(&model_); }

  double predict_mean(std::span<const double> row) const {
    double mu = 0.0;
    if (const auto* m = glm()) {
      mu = m->predict(row);
    } else if (const auto* g = gbm()) {
      mu = g->predict(row);
    } else {
      const auto& o = std::get<OracleModel>(model_);
      if (row.size() != o.features.size()) throw DataError("feature row does not match the oracle schema");
      mu = o.mean(row);
    }
    return checked(mu);
  }

  std::vector<double> predict_mean(const data::Dataset& ds) const {
    std::vector<double> out;
    if (const auto* m = glm()) {
      out = m->predict(ds);
    } else if (const auto* g = gbm()) {
      out = g->predict(ds);
    } else {
      const auto& o = std::get<OracleModel>(model_);
      if (ds.features() != o.features) throw DataError("dataset does not match the oracle schema");
      out.resize(ds.rows());
      for (std::size_t i = 0; i < ds.rows(); ++i) out[i] = o.mean(ds.row(i));
    }
    for (double& v : out) v = checked(v);
    return out;
  }

 private:
  static double checked(double mu) {
    if (!(mu > 0.0) || !std::isfinite(mu)) throw NumericError("predicted mean is not a positive finite number");
    return mu;
  }

  std::variant<GlmModel, GbmModel, OracleModel> model_;
  Provenance provenance_;
};

// What a spread model estimates: the Pearson residual spread rho(x) for
// locally weighted Pearson scores, or the conditional mean absolute
// deviation sigma(x) for the absolute-residual locally weighted scores.
enum class SpreadTarget { pearson, absolute };

inline std::string to_string(SpreadTarget t) {
  return t == SpreadTarget::pearson ? "pearson" : "absolute";
}

class SpreadModel {
 public:
  SpreadModel() = default;
  SpreadModel(GbmModel ensemble, double floor, SpreadTarget target, Provenance prov)
      : ensemble_(std::move(ensemble)), floor_(floor), target_(target), provenance_(std::move(prov)) {
    if (ensemble_.objective != Objective::squared_error) {
      throw ParameterError("a spread model needs a squared-error ensemble");
    }
    if (!(floor_ > 0.0)) throw ParameterError("spread floor must be positive");
  }

  double predict(std::span<const double> row) const {
    return std::max(floor_, ensemble_.predict(row));
  }

  std::vector<double> predict(const data::Dataset& ds) const {
    auto out = ensemble_.predict(ds);
    for (double& v : out) v = std::max(floor_, v);
    return out;
  }

  const GbmModel& ensemble() const { return ensemble_; }
  double floor() const { return floor_; }
  SpreadTarget target() const { return target_; }
  const Provenance& provenance() const { return provenance_; }

 private:
  GbmModel ensemble_;
  double floor_ = 1e-6;
  SpreadTarget target_ = SpreadTarget::pearson;
  Provenance provenance_;
};

// Squared-error boosting of nonnegative residuals on the training features;
// predictions are floored at max(1e-6, 1e-3 * mean(residuals)).
inline SpreadModel spread_fit(const data::Dataset& features, std::span<const double> residuals,
                              const GbmConfig& cfg, SpreadTarget target) {
  if (residuals.size() != features.rows()) throw DataError("residual count differs from row count");
  double mean = 0.0;
  for (double r : residuals) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw DataError("spread residuals must be finite and nonnegative");
    mean += r;
  }
  mean /= static_cast<double>(std::max<std::size_t>(residuals.size(), 1));
  const data::Dataset ds = features.with_target({residuals.begin(), residuals.end()});
  GbmModel m = gbm_train(ds, Objective::squared_error, 0.0, cfg).model;
  return SpreadModel(std::move(m), std::max(1e-6, 1e-3 * mean), target, Provenance::of(features));
}

// Residuals that a spread model of the given target is fit to.
inline std::vector<double> spread_residuals(SpreadTarget target, std::span<const double> y,
                                            std::span<const double> mu, double p) {
  std::vector<double> r(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double a = std::abs(y[i] - mu[i]);
    r[i] = target == SpreadTarget::pearson ? a / std::pow(mu[i], p / 2.0) : a;
  }
  return r;
}

// Fits a spread model on the predictor's own training rows. With
// cv_folds >= 2 the round count is chosen by cross-validation, capped at
// cfg.num_rounds; noisy absolute residuals overfit quickly otherwise.
inline SpreadModel fit_spread_for(const Predictor& predictor, const data::Dataset& train,
                                  SpreadTarget target, const GbmConfig& cfg, int cv_folds = 0,
                                  std::uint64_t seed = 0) {
  const auto mu = predictor.predict_mean(train);
  const auto r = spread_residuals(target, train.target(), mu, predictor.power());
  GbmConfig c = cfg;
  if (cv_folds >= 2 && cfg.num_rounds > 0) {
    c.num_rounds = std::max(
        1, gbm_cv_rounds(train.with_target(r), Objective::squared_error, 0.0, cfg, cv_folds, seed).rounds);
  }
  return spread_fit(train, r, c, target);
}

struct GbmRecipe {
  GbmConfig config;
  std::vector<double> powers = tweedie::PowerGrid::default_values();
  // 0 disables cross-validated round selection.
  int cv_folds = 0;
  std::uint64_t seed = 0;
};

struct GbmRecipeResult {
  GbmModel model;
  double power = 0.0;
  double phi = 0.0;
  int rounds = 0;
  std::vector<std::optional<double>> profile;
};

// Tweedie boosting with the power chosen by profile likelihood on `train`
// and, optionally, the round count chosen by cross-validation per power.
inline GbmRecipeResult fit_gbm_recipe(const data::Dataset& train, const GbmRecipe& recipe) {
  const tweedie::PowerGrid grid(recipe.powers);
  auto fit = [&](double p) {
    GbmConfig cfg = recipe.config;
    if (recipe.cv_folds >= 2) {
      cfg.num_rounds = std::max(
          1, gbm_cv_rounds(train, Objective::tweedie, p, recipe.config, recipe.cv_folds, recipe.seed)
                 .rounds);
    }
    return gbm_fit(train, p, cfg);
  };
  auto res = tweedie::profile_power_select(train.target(), grid, fit,
                                           [&](const GbmModel& m) { return m.predict(train); });
  GbmRecipeResult out;
  out.power = res.power;
  out.phi = res.phi;
  out.rounds = static_cast<int>(res.model.trees.size());
  out.profile = std::move(res.profile);
  out.model = std::move(res.model);
  return out;
}

}  // namespace tweedie_conformal::models

#endif  // TWEEDIE_CONFORMAL_PREDICTOR_HPP_
