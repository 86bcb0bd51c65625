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

// JSON save/load for fitted models.
//
// Every document carries {"format": "tweedie-conformal-model", "version": 1,
// "kind": "glm" | "gbm" | "spread"} plus the feature schema and the training
// provenance. Trees are nested objects: a leaf is {"leaf": v, "count": n}; a
// split holds the feature index, either a numeric threshold or the two level
// lists, and "left"/"right" children. Doubles are written with round-trip
// precision, so a reloaded model predicts bit-identically.

#ifndef TWEEDIE_CONFORMAL_MODEL_IO_HPP_
#define TWEEDIE_CONFORMAL_MODEL_IO_HPP_

#include <fstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>
#include "tweedie_conformal/csv.hpp"
#include "tweedie_conformal/dataset.hpp"
#include "tweedie_conformal/errors.hpp"
#include "tweedie_conformal/gbm.hpp"
#include "tweedie_conformal/glm.hpp"
#include "tweedie_conformal/predictor.hpp"

namespace tweedie_conformal::model_io {

using nlohmann::json;

inline constexpr const char* kFormat = "tweedie-conformal-model";
inline constexpr int kVersion = 1;

namespace internal {

inline json node_to_json(const models::Tree& t, int n) {
  const auto& node = t.nodes[static_cast<std::size_t>(n)];
  json j;
  if (node.is_leaf()) {
    j["leaf"] = node.value;
    j["count"] = node.count;
    return j;
  }
  j["feature"] = node.feature;
  j["gain"] = node.gain;
  j["count"] = node.count;
  if (node.categorical) {
    j["left_levels"] = node.left_levels;
    j["right_levels"] = node.right_levels;
    j["unseen_left"] = node.unseen_left;
  } else {
    j["threshold"] = node.threshold;
  }
  j["left"] = node_to_json(t, node.left);
  j["right"] = node_to_json(t, node.right);
  return j;
}

inline int node_from_json(const json& j, models::Tree& t, std::size_t num_features) {
  const int id = static_cast<int>(t.nodes.size());
  t.nodes.emplace_back();
  models::TreeNode node;
  node.count = j.value("count", std::size_t{0});
  if (j.contains("leaf")) {
    node.value = j.at("leaf").get<double>();
    t.nodes[static_cast<std::size_t>(id)] = node;
    return id;
  }
  node.feature = j.at("feature").get<int>();
  if (node.feature < 0 || static_cast<std::size_t>(node.feature) >= num_features) {
    throw DataError("tree split refers to feature index out of range");
  }
  node.gain = j.value("gain", 0.0);
  if (j.contains("threshold")) {
    node.threshold = j.at("threshold").get<double>();
  } else {
    node.categorical = true;
    node.left_levels = j.at("left_levels").get<std::vector<int>>();
    node.right_levels = j.at("right_levels").get<std::vector<int>>();
    node.unseen_left = j.at("unseen_left").get<bool>();
    std::sort(node.left_levels.begin(), node.left_levels.end());
    std::sort(node.right_levels.begin(), node.right_levels.end());
  }
  node.left = node_from_json(j.at("left"), t, num_features);
  node.right = node_from_json(j.at("right"), t, num_features);
  t.nodes[static_cast<std::size_t>(id)] = node;
  return id;
}

inline json provenance_to_json(const models::Provenance& p) {
  return {{"source_id", p.source_id}, {"row_ids", p.row_ids}};
}

inline models::Provenance provenance_from_json(const json& j) {
  models::Provenance p;
  p.source_id = j.at("source_id").get<std::uint64_t>();
  p.row_ids = j.at("row_ids").get<std::vector<std::uint64_t>>();
  std::sort(p.row_ids.begin(), p.row_ids.end());
  return p;
}

inline json header(const std::string& kind) {
  return {{"format", kFormat}, {"version", kVersion}, {"kind", kind}};
}

inline void check_header(const json& j) {
  if (!j.is_object() || j.value("format", std::string()) != kFormat) {
    throw DataError("not a tweedie-conformal model document");
  }
  if (j.value("version", 0) != kVersion) throw DataError("unsupported model document version");
}

}  // namespace internal

inline json gbm_to_json(const models::GbmModel& m) {
  json j;
  j["objective"] = m.objective == models::Objective::tweedie ? "tweedie" : "squared_error";
  j["power"] = m.power;
  j["base_score"] = m.base_score;
  j["learning_rate"] = m.learning_rate;
  j["features"] = data::features_to_json(m.features);
  j["config"] = {{"max_leaves", m.config.max_leaves},
                 {"learning_rate", m.config.learning_rate},
                 {"num_rounds", m.config.num_rounds},
                 {"min_leaf_count", m.config.min_leaf_count},
                 {"leaf_l2", m.config.leaf_l2},
                 {"bins", m.config.bins},
                 {"min_child_hessian", m.config.min_child_hessian}};
  j["importance"] = {{"gain", m.importance.gain},
                     {"cover", m.importance.cover},
                     {"frequency", m.importance.frequency}};
  json trees = json::array();
  for (const auto& t : m.trees) trees.push_back(internal::node_to_json(t, 0));
  j["trees"] = std::move(trees);
  return j;
}

inline models::GbmModel gbm_from_json(const json& j) {
  models::GbmModel m;
  const auto obj = j.at("objective").get<std::string>();
  if (obj == "tweedie") {
    m.objective = models::Objective::tweedie;
  } else if (obj == "squared_error") {
    m.objective = models::Objective::squared_error;
  } else {
    throw DataError("unknown objective '" + obj + "'");
  }
  m.power = j.at("power").get<double>();
  m.base_score = j.at("base_score").get<double>();
  m.learning_rate = j.at("learning_rate").get<double>();
  m.features = data::features_from_json(j.at("features"));
  if (j.contains("config")) {
    const auto& c = j["config"];
    m.config.max_leaves = c.value("max_leaves", m.config.max_leaves);
    m.config.learning_rate = c.value("learning_rate", m.config.learning_rate);
    m.config.num_rounds = c.value("num_rounds", m.config.num_rounds);
    m.config.min_leaf_count = c.value("min_leaf_count", m.config.min_leaf_count);
    m.config.leaf_l2 = c.value("leaf_l2", m.config.leaf_l2);
    m.config.bins = c.value("bins", m.config.bins);
    m.config.min_child_hessian = c.value("min_child_hessian", m.config.min_child_hessian);
  }
  m.importance.resize(m.features.size());
  if (j.contains("importance")) {
    m.importance.gain = j["importance"].at("gain").get<std::vector<double>>();
    m.importance.cover = j["importance"].at("cover").get<std::vector<double>>();
    m.importance.frequency = j["importance"].at("frequency").get<std::vector<double>>();
    if (m.importance.gain.size() != m.features.size()) {
      throw DataError("importance table does not match the feature count");
    }
  }
  for (const auto& tj : j.at("trees")) {
    models::Tree t;
    internal::node_from_json(tj, t, m.features.size());
    m.trees.push_back(std::move(t));
  }
  return m;
}

inline json glm_to_json(const models::GlmModel& m) {
  json j;
  j["power"] = m.power();
  j["lambda"] = m.lambda();
  j["gamma"] = m.gamma();
  j["intercept"] = m.beta0();
  j["features"] = data::features_to_json(m.features());
  j["medians"] = m.encoding().medians();
  json cols = json::array();
  for (std::size_t k = 0; k < m.encoding().width(); ++k) {
    const auto& c = m.encoding().columns()[k];
    cols.push_back({{"name", c.name},
                    {"source", c.source},
                    {"level", c.level},
                    {"mean", c.mean},
                    {"scale", c.scale},
                    {"coefficient", m.beta()[k]}});
  }
  j["columns"] = std::move(cols);
  return j;
}

inline models::GlmModel glm_from_json(const json& j) {
  auto features = data::features_from_json(j.at("features"));
  auto medians = j.at("medians").get<std::vector<double>>();
  if (medians.size() != features.size()) throw DataError("median count does not match the feature count");
  std::vector<models::EncodedColumn> cols;
  std::vector<double> beta;
  for (const auto& c : j.at("columns")) {
    models::EncodedColumn e;
    e.name = c.at("name").get<std::string>();
    e.source = c.at("source").get<std::size_t>();
    e.level = c.at("level").get<int>();
    e.mean = c.at("mean").get<double>();
    e.scale = c.at("scale").get<double>();
    if (e.source >= features.size()) throw DataError("GLM column refers to feature index out of range");
    if (!(e.scale > 0.0)) throw DataError("GLM column scale must be positive");
    cols.push_back(std::move(e));
    beta.push_back(c.at("coefficient").get<double>());
  }
  models::GlmEncoding enc(std::move(features), std::move(cols), std::move(medians));
  return models::GlmModel(j.at("intercept").get<double>(), std::move(beta),
                          j.at("lambda").get<double>(), j.at("gamma").get<double>(),
                          j.at("power").get<double>(), std::move(enc));
}

// Mean predictor document (GLM or GBM). `extra` is merged in verbatim, e.g.
// the selected dispersion.
inline json predictor_to_json(const models::Predictor& p, const json& extra = json::object()) {
  json j;
  if (const auto* g = p.glm()) {
    j = internal::header("glm");
    j["model"] = glm_to_json(*g);
  } else if (const auto* b = p.gbm()) {
    j = internal::header("gbm");
    j["model"] = gbm_to_json(*b);
  } else {
    throw ParameterError("oracle predictors cannot be serialized");
  }
  j["provenance"] = internal::provenance_to_json(p.provenance());
  if (!extra.is_null()) j["info"] = extra;
  return j;
}

inline models::Predictor predictor_from_json(const json& j) {
  internal::check_header(j);
  const auto kind = j.at("kind").get<std::string>();
  auto prov = j.contains("provenance") ? internal::provenance_from_json(j["provenance"])
                                       : models::Provenance{};
  if (kind == "glm") return models::Predictor(glm_from_json(j.at("model")), std::move(prov));
  if (kind == "gbm") return models::Predictor(gbm_from_json(j.at("model")), std::move(prov));
  throw DataError("model document of kind '" + kind + "' is not a mean predictor");
}

inline json spread_to_json(const models::SpreadModel& s) {
  json j = internal::header("spread");
  j["target"] = models::to_string(s.target());
  j["floor"] = s.floor();
  j["model"] = gbm_to_json(s.ensemble());
  j["provenance"] = internal::provenance_to_json(s.provenance());
  return j;
}

inline models::SpreadModel spread_from_json(const json& j) {
  internal::check_header(j);
  if (j.at("kind").get<std::string>() != "spread") throw DataError("model document is not a spread model");
  const auto t = j.at("target").get<std::string>();
  models::SpreadTarget target;
  if (t == "pearson") {
    target = models::SpreadTarget::pearson;
  } else if (t == "absolute") {
    target = models::SpreadTarget::absolute;
  } else {
    throw DataError("unknown spread target '" + t + "'");
  }
  return models::SpreadModel(gbm_from_json(j.at("model")), j.at("floor").get<double>(), target,
                             internal::provenance_from_json(j.at("provenance")));
}

inline void write_json(const std::string& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out << j.dump(1) << '\n';
  if (!out) throw DataError("failed writing '" + path + "'");
}

inline json read_json(const std::string& path) {
  try {
    return json::parse(csv::read_file(path));
  } catch (const json::exception& e) {
    throw DataError("'" + path + "' is not valid JSON: " + e.what());
  }
}

inline std::string document_kind(const json& j) {
  internal::check_header(j);
  return j.at("kind").get<std::string>();
}

}  // namespace tweedie_conformal::model_io

#endif  // TWEEDIE_CONFORMAL_MODEL_IO_HPP_
