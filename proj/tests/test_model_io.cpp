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

#include <filesystem>

#include "tweedie_conformal.hpp"

namespace {

namespace tc = tweedie_conformal;
namespace m = tweedie_conformal::models;
namespace io = tweedie_conformal::model_io;

tc::data::SyntheticData data(std::size_t rows, std::uint64_t seed) {
  tc::data::SynthConfig c;
  c.rows = rows;
  c.categorical_features = 2;
  c.categorical_levels = 4;
  return tc::data::generate_synthetic(c, seed);
}

TEST(ModelIo, GbmRoundTripIsBitIdentical) {
  const auto s = data(500, 1);
  m::GbmConfig cfg;
  cfg.num_rounds = 40;
  cfg.learning_rate = 0.1;
  const m::Predictor p(m::gbm_fit(s.dataset, 1.4, cfg), m::Provenance::of(s.dataset));
  const auto path = (std::filesystem::temp_directory_path() / "tc_gbm.json").string();
  io::write_json(path, io::predictor_to_json(p));
  const auto back = io::predictor_from_json(io::read_json(path));
  EXPECT_EQ(back.kind(), m::ModelKind::gbm);
  EXPECT_DOUBLE_EQ(back.power(), 1.4);
  EXPECT_EQ(back.predict_mean(s.dataset), p.predict_mean(s.dataset));
  EXPECT_EQ(back.provenance().row_ids, p.provenance().row_ids);
  EXPECT_EQ(back.gbm()->importance.gain, p.gbm()->importance.gain);
  std::filesystem::remove(path);
}

TEST(ModelIo, GlmRoundTripIsBitIdentical) {
  const auto s = data(400, 2);
  const m::Predictor p(m::glm_fit(s.dataset, 1.6, 0.001, 0.5), m::Provenance::of(s.dataset));
  const auto j = io::predictor_to_json(p);
  EXPECT_EQ(j["kind"], "glm");
  const auto back = io::predictor_from_json(nlohmann::json::parse(j.dump()));
  EXPECT_EQ(back.predict_mean(s.dataset), p.predict_mean(s.dataset));
  EXPECT_EQ(back.glm()->beta(), p.glm()->beta());
}

TEST(ModelIo, SpreadRoundTrip) {
  const auto s = data(300, 3);
  m::GbmConfig cfg;
  cfg.num_rounds = 20;
  std::vector<double> r(s.dataset.target().begin(), s.dataset.target().end());
  const auto sm = m::spread_fit(s.dataset, r, cfg, m::SpreadTarget::absolute);
  const auto back = io::spread_from_json(nlohmann::json::parse(io::spread_to_json(sm).dump()));
  EXPECT_EQ(back.target(), m::SpreadTarget::absolute);
  EXPECT_EQ(back.predict(s.dataset), sm.predict(s.dataset));
  EXPECT_DOUBLE_EQ(back.floor(), sm.floor());
}

TEST(ModelIo, RejectsForeignDocuments) {
  EXPECT_THROW(io::predictor_from_json(nlohmann::json::parse(R"({"a": 1})")), tc::DataError);
  EXPECT_THROW(io::predictor_from_json(nlohmann::json::parse(
                   R"({"format": "tweedie-conformal-model", "version": 99, "kind": "gbm"})")),
               tc::DataError);
  const auto s = data(300, 4);
  m::GbmConfig cfg;
  cfg.num_rounds = 5;
  const auto sm = m::spread_fit(s.dataset, std::vector<double>(300, 1.0), cfg, m::SpreadTarget::pearson);
  EXPECT_THROW(io::predictor_from_json(io::spread_to_json(sm)), tc::DataError);
  EXPECT_THROW(io::predictor_to_json(m::Predictor(m::OracleModel{[](auto) { return 1.0; }, 1.5, {}})),
               tc::ParameterError);
}

}  // namespace
