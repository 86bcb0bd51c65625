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

// Repeated random-partition experiments: split into training (D1),
// calibration (D2) and validation (D3) sets, fit each model on D1, calibrate
// each score kind on D2 and measure coverage and width on D3. Per-repetition
// averages are aggregated into means and standard deviations.

#ifndef TWEEDIE_CONFORMAL_EVALUATION_HPP_
#define TWEEDIE_CONFORMAL_EVALUATION_HPP_

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>
#include "tweedie_conformal/conformal.hpp"
#include "tweedie_conformal/csv.hpp"
#include "tweedie_conformal/dataset.hpp"
#include "tweedie_conformal/errors.hpp"
#include "tweedie_conformal/gbm.hpp"
#include "tweedie_conformal/glm.hpp"
#include "tweedie_conformal/predictor.hpp"
#include "tweedie_conformal/resampling.hpp"

namespace tweedie_conformal::evaluation {

using conformal::Mode;
using conformal::ResidualKind;
using models::ModelKind;

struct PointMetrics {
  double rmse = 0.0;
  double mae = 0.0;
  // NaN when the target has zero variance.
  double r2 = 0.0;
};

inline PointMetrics point_metrics(std::span<const double> y, std::span<const double> mu) {
  if (y.size() != mu.size()) throw ParameterError("point metrics need equal-length vectors");
  if (y.size() < 2) throw ParameterError("point metrics need at least two rows");
  const double n = static_cast<double>(y.size());
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= n;
  double sse = 0.0, sae = 0.0, sst = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double e = y[i] - mu[i];
    sse += e * e;
    sae += std::abs(e);
    sst += (y[i] - mean) * (y[i] - mean);
  }
  PointMetrics m;
  m.rmse = std::sqrt(sse / n);
  m.mae = sae / n;
  m.r2 = sst > 0.0 ? 1.0 - sse / sst : std::numeric_limits<double>::quiet_NaN();
  return m;
}

struct ExperimentConfig {
  std::size_t n1 = 4000;
  std::size_t n2 = 4000;
  std::size_t n3 = 2296;
  int repetitions = 100;
  double alpha = 0.05;
  std::vector<ResidualKind> kinds = {std::begin(conformal::kAllKinds), std::end(conformal::kAllKinds)};
  std::vector<ModelKind> models = {ModelKind::gbm};
  std::vector<Mode> modes = {Mode::symmetric};
  std::uint64_t seed = 20240101;
  models::GbmRecipe gbm;
  models::GlmCvConfig glm;
  // Ensemble settings for the spread models of the locally weighted kinds.
  models::GbmConfig spread;
  // Folds for choosing the spread round count; 0 uses spread.num_rounds.
  int spread_cv_folds = 5;
  // Reuse the hyperparameters chosen in repetition 0 for later repetitions.
  bool fast = false;
  int threads = 1;
  // Required when `models` contains the oracle.
  std::optional<models::OracleModel> oracle;

  void validate(std::size_t rows) const {
    if (repetitions < 1) throw ConfigError("repetition count must be at least 1");
    conformal::check_alpha(alpha);
    if (n1 == 0 || n2 == 0 || n3 == 0) throw ConfigError("partition sizes must be positive");
    if (n1 + n2 + n3 > rows) {
      std::ostringstream os;
      os << "partition sizes " << n1 << "+" << n2 << "+" << n3 << " exceed the " << rows
         << " available rows";
      throw ConfigError(os.str());
    }
    if (kinds.empty()) throw ConfigError("no residual kinds requested");
    if (models.empty()) throw ConfigError("no models requested");
    if (modes.empty()) throw ConfigError("no interval modes requested");
    if (threads < 1) throw ConfigError("thread count must be at least 1");
    if (spread_cv_folds == 1 || spread_cv_folds < 0) throw ConfigError("spread_cv_folds must be 0 or at least 2");
    for (ModelKind m : models) {
      if (m == ModelKind::oracle && !oracle) throw ConfigError("oracle model requested without a mean function");
    }
    gbm.config.validate();
    spread.validate();
  }
};

// Coverage and width of one (model, kind, mode) cell in one repetition.
struct CellResult {
  ModelKind model = ModelKind::gbm;
  ResidualKind kind = ResidualKind::pearson;
  Mode mode = Mode::symmetric;
  double coverage = 0.0;
  // Mean over finite, nonempty intervals; NaN when there are none.
  double mean_width = 0.0;
  std::size_t infinite = 0;
  std::size_t empty = 0;
};

struct ModelResult {
  ModelKind model = ModelKind::gbm;
  double power = 0.0;
  double phi = 0.0;
  // GBM: selected round count. GLM: selected penalty.
  int rounds = 0;
  double lambda = 0.0;
  double gamma = 0.0;
  // Rounds of the Pearson and absolute spread ensembles; -1 when not fit.
  int spread_rounds[2] = {-1, -1};
  PointMetrics metrics;
};

struct RepetitionResult {
  int index = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  std::vector<ModelResult> models;
  std::vector<CellResult> cells;
};

struct Summary {
  double mean = 0.0;
  double sd = 0.0;
  std::size_t count = 0;
};

inline Summary summarize(const std::vector<double>& v) {
  Summary s;
  s.count = v.size();
  if (v.empty()) {
    s.mean = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  s.mean = m;
  s.sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
  return s;
}

struct AggregateRow {
  ModelKind model = ModelKind::gbm;
  ResidualKind kind = ResidualKind::pearson;
  Mode mode = Mode::symmetric;
  Summary coverage;
  // Over repetitions with at least one finite interval.
  Summary width;
  std::size_t infinite = 0;
  std::size_t empty = 0;
};

struct ModelAggregate {
  ModelKind model = ModelKind::gbm;
  Summary rmse;
  Summary mae;
  Summary r2;
  Summary power;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<RepetitionResult> repetitions;
  std::vector<AggregateRow> aggregate;
  std::vector<ModelAggregate> model_metrics;
  std::size_t failed = 0;
  // Set when only one repetition succeeded; SDs are then reported as 0.
  bool single_repetition = false;

  const AggregateRow* find(ModelKind m, ResidualKind k, Mode mode) const {
    for (const auto& a : aggregate) {
      if (a.model == m && a.kind == k && a.mode == mode) return &a;
    }
    return nullptr;
  }

  // Per-repetition cell values for successful repetitions, in repetition order.
  std::vector<const CellResult*> cells(ModelKind m, ResidualKind k, Mode mode) const {
    std::vector<const CellResult*> out;
    for (const auto& r : repetitions) {
      if (!r.ok) continue;
      for (const auto& c : r.cells) {
        if (c.model == m && c.kind == k && c.mode == mode) out.push_back(&c);
      }
    }
    return out;
  }
};

namespace internal {

struct Tuned {
  std::optional<double> gbm_power;
  int gbm_rounds = 0;
  std::optional<double> glm_power;
  double glm_gamma = 0.0;
  double glm_lambda = 0.0;
  // Spread round counts per (model, target slot).
  std::map<std::pair<ModelKind, int>, int> spread_rounds;
};

struct FittedModel {
  ModelResult info;
  std::unique_ptr<models::Predictor> predictor;
};

inline FittedModel fit_model(ModelKind kind, const data::Dataset& d1, const ExperimentConfig& cfg,
                             std::uint64_t seed, const Tuned* tuned) {
  FittedModel out;
  out.info.model = kind;
  if (kind == ModelKind::gbm) {
    models::GbmRecipe recipe = cfg.gbm;
    recipe.seed = resampling::derive_seed(seed, 11);
    if (tuned && tuned->gbm_power) {
      recipe.powers = {*tuned->gbm_power};
      recipe.cv_folds = 0;
      recipe.config.num_rounds = tuned->gbm_rounds;
    }
    auto res = models::fit_gbm_recipe(d1, recipe);
    out.info.power = res.power;
    out.info.phi = res.phi;
    out.info.rounds = res.rounds;
    out.predictor = std::make_unique<models::Predictor>(std::move(res.model), models::Provenance::of(d1));
  } else if (kind == ModelKind::glm) {
    models::GlmCvConfig gc = cfg.glm;
    gc.seed = resampling::derive_seed(seed, 12);
    if (tuned && tuned->glm_power) {
      gc.powers = {*tuned->glm_power};
      gc.gammas = {tuned->glm_gamma};
      gc.lambdas = {tuned->glm_lambda};
    }
    auto res = models::glm_cv_select(d1, gc);
    out.info.power = res.power;
    out.info.phi = res.phi;
    out.info.lambda = res.lambda;
    out.info.gamma = res.gamma;
    out.predictor = std::make_unique<models::Predictor>(std::move(res.model), models::Provenance::of(d1));
  } else {
    out.info.power = cfg.oracle->power;
    out.predictor = std::make_unique<models::Predictor>(*cfg.oracle);
  }
  return out;
}

inline void check_disjoint(const std::vector<std::vector<std::size_t>>& parts, std::size_t n) {
  std::vector<char> seen(n, 0);
  for (const auto& p : parts) {
    for (std::size_t i : p) {
      if (seen[i]) throw ContractError("partitions overlap");
      seen[i] = 1;
    }
  }
}

inline RepetitionResult run_repetition(const data::Dataset& ds, const ExperimentConfig& cfg, int r,
                                       const Tuned* tuned, Tuned* record) {
  RepetitionResult out;
  out.index = r;
  out.seed = resampling::derive_seed(cfg.seed, static_cast<std::uint64_t>(r));
  const auto parts = resampling::split_sizes(ds.rows(), {cfg.n1, cfg.n2, cfg.n3}, out.seed);
  check_disjoint(parts, ds.rows());
  const data::Dataset d1 = ds.subset(parts[0]);
  const data::Dataset d2 = ds.subset(parts[1]);
  const data::Dataset d3 = ds.subset(parts[2]);
  const auto y3 = d3.target();

  for (ModelKind mk : cfg.models) {
    FittedModel fm = fit_model(mk, d1, cfg, out.seed, tuned);
    if (record) {
      if (mk == ModelKind::gbm) {
        record->gbm_power = fm.info.power;
        record->gbm_rounds = fm.info.rounds;
      } else if (mk == ModelKind::glm) {
        record->glm_power = fm.info.power;
        record->glm_gamma = fm.info.gamma;
        record->glm_lambda = fm.info.lambda;
      }
    }
    const models::Predictor& pred = *fm.predictor;
    const auto mu3 = pred.predict_mean(d3);
    fm.info.metrics = point_metrics(y3, mu3);

    // Spread models are shared by every mode of the kinds that need them.
    std::shared_ptr<const models::SpreadModel> spreads[2];
    for (ResidualKind k : cfg.kinds) {
      if (!conformal::needs_spread(k)) continue;
      const int slot = conformal::spread_target(k) == models::SpreadTarget::pearson ? 0 : 1;
      if (!spreads[slot]) {
        models::GbmConfig sc = cfg.spread;
        int folds = cfg.spread_cv_folds;
        if (tuned) {
          if (auto it = tuned->spread_rounds.find({mk, slot}); it != tuned->spread_rounds.end()) {
            sc.num_rounds = it->second;
            folds = 0;
          }
        }
        spreads[slot] = std::make_shared<const models::SpreadModel>(models::fit_spread_for(
            pred, d1, conformal::spread_target(k), sc, folds, resampling::derive_seed(out.seed, 13 + slot)));
        fm.info.spread_rounds[slot] = static_cast<int>(spreads[slot]->ensemble().trees.size());
        if (record) record->spread_rounds[{mk, slot}] = fm.info.spread_rounds[slot];
      }
    }

    for (ResidualKind k : cfg.kinds) {
      std::shared_ptr<const models::SpreadModel> sp;
      std::vector<double> rho;
      if (conformal::needs_spread(k)) {
        sp = spreads[conformal::spread_target(k) == models::SpreadTarget::pearson ? 0 : 1];
        rho = sp->predict(d3);
      }
      for (Mode mode : cfg.modes) {
        const conformal::IntervalSpec spec(cfg.alpha, mode);
        const auto calib = conformal::calibrate(k, pred, sp, d2, spec);
        CellResult cell;
        cell.model = mk;
        cell.kind = k;
        cell.mode = mode;
        std::size_t covered = 0, finite = 0;
        double width = 0.0;
        for (std::size_t i = 0; i < d3.rows(); ++i) {
          const auto iv = calib.interval(mu3[i], rho.empty() ? std::nullopt : std::optional<double>(rho[i]),
                                         cfg.alpha);
          if (iv.contains(y3[i])) ++covered;
          if (iv.empty) {
            ++cell.empty;
          } else if (!iv.finite()) {
            ++cell.infinite;
            continue;
          }
          width += iv.width();
          ++finite;
        }
        cell.coverage = static_cast<double>(covered) / static_cast<double>(d3.rows());
        cell.mean_width = finite > 0 ? width / static_cast<double>(finite)
                                     : std::numeric_limits<double>::quiet_NaN();
        out.cells.push_back(cell);
      }
    }
    out.models.push_back(fm.info);
  }
  out.ok = true;
  return out;
}

inline RepetitionResult guarded_repetition(const data::Dataset& ds, const ExperimentConfig& cfg, int r,
                                           const Tuned* tuned, Tuned* record) {
  try {
    return run_repetition(ds, cfg, r, tuned, record);
  } catch (const ContractError&) {
    throw;
  } catch (const std::exception& e) {
    RepetitionResult out;
    out.index = r;
    out.seed = resampling::derive_seed(cfg.seed, static_cast<std::uint64_t>(r));
    out.ok = false;
    out.error = e.what();
    return out;
  }
}

inline void aggregate(ExperimentReport& rep) {
  const auto& cfg = rep.config;
  std::size_t ok = 0;
  for (const auto& r : rep.repetitions) {
    if (r.ok) {
      ++ok;
    } else {
      ++rep.failed;
    }
  }
  rep.single_repetition = ok == 1;
  for (ModelKind m : cfg.models) {
    for (ResidualKind k : cfg.kinds) {
      for (Mode mode : cfg.modes) {
        AggregateRow row;
        row.model = m;
        row.kind = k;
        row.mode = mode;
        std::vector<double> cov, wid;
        for (const CellResult* c : rep.cells(m, k, mode)) {
          cov.push_back(c->coverage);
          if (!std::isnan(c->mean_width)) wid.push_back(c->mean_width);
          row.infinite += c->infinite;
          row.empty += c->empty;
        }
        row.coverage = summarize(cov);
        row.width = summarize(wid);
        rep.aggregate.push_back(row);
      }
    }
    ModelAggregate ma;
    ma.model = m;
    std::vector<double> rmse, mae, r2, pw;
    for (const auto& r : rep.repetitions) {
      if (!r.ok) continue;
      for (const auto& mr : r.models) {
        if (mr.model != m) continue;
        rmse.push_back(mr.metrics.rmse);
        mae.push_back(mr.metrics.mae);
        if (!std::isnan(mr.metrics.r2)) r2.push_back(mr.metrics.r2);
        pw.push_back(mr.power);
      }
    }
    ma.rmse = summarize(rmse);
    ma.mae = summarize(mae);
    ma.r2 = summarize(r2);
    ma.power = summarize(pw);
    rep.model_metrics.push_back(ma);
  }
}

}  // namespace internal

// Runs every repetition. Repetitions may execute on several threads; results
// are stored by repetition index, so the report does not depend on the
// thread count. A repetition that throws is recorded as failed; a partition
// contract violation aborts the experiment.
inline ExperimentReport run_experiment(const data::Dataset& ds, const ExperimentConfig& cfg) {
  cfg.validate(ds.rows());
  ExperimentReport rep;
  rep.config = cfg;
  rep.repetitions.resize(static_cast<std::size_t>(cfg.repetitions));

  internal::Tuned tuned;
  int first = 0;
  if (cfg.fast) {
    rep.repetitions[0] = internal::guarded_repetition(ds, cfg, 0, nullptr, &tuned);
    first = 1;
  }
  const internal::Tuned* reuse = cfg.fast && rep.repetitions[0].ok ? &tuned : nullptr;

  const int workers = std::min(cfg.threads, std::max(1, cfg.repetitions - first));
  if (workers <= 1) {
    for (int r = first; r < cfg.repetitions; ++r) {
      rep.repetitions[static_cast<std::size_t>(r)] = internal::guarded_repetition(ds, cfg, r, reuse, nullptr);
    }
  } else {
    std::atomic<int> next{first};
    std::exception_ptr fatal;
    std::mutex fatal_mu;
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int r = next++; r < cfg.repetitions; r = next++) {
          try {
            rep.repetitions[static_cast<std::size_t>(r)] =
                internal::guarded_repetition(ds, cfg, r, reuse, nullptr);
          } catch (...) {
            std::lock_guard<std::mutex> lock(fatal_mu);
            if (!fatal) fatal = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    if (fatal) std::rethrow_exception(fatal);
  }
  internal::aggregate(rep);
  return rep;
}

namespace internal {
inline nlohmann::json num(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

inline nlohmann::json summary_json(const Summary& s) {
  return {{"mean", num(s.mean)}, {"sd", num(s.sd)}, {"count", s.count}};
}
}  // namespace internal

inline nlohmann::json report_to_json(const ExperimentReport& rep) {
  using nlohmann::json;
  using internal::num;
  const auto& c = rep.config;
  json j;
  json cfg;
  cfg["n1"] = c.n1;
  cfg["n2"] = c.n2;
  cfg["n3"] = c.n3;
  cfg["repetitions"] = c.repetitions;
  cfg["alpha"] = c.alpha;
  cfg["seed"] = c.seed;
  cfg["fast_mode"] = c.fast;
  json kinds = json::array(), mods = json::array(), modes = json::array();
  for (auto k : c.kinds) kinds.push_back(conformal::to_string(k));
  for (auto m : c.models) mods.push_back(models::to_string(m));
  for (auto m : c.modes) modes.push_back(conformal::to_string(m));
  cfg["kinds"] = kinds;
  cfg["models"] = mods;
  cfg["modes"] = modes;
  cfg["gbm"] = {{"max_leaves", c.gbm.config.max_leaves},
                {"learning_rate", c.gbm.config.learning_rate},
                {"num_rounds", c.gbm.config.num_rounds},
                {"cv_folds", c.gbm.cv_folds},
                {"powers", c.gbm.powers}};
  cfg["spread"] = {{"max_leaves", c.spread.max_leaves},
                   {"learning_rate", c.spread.learning_rate},
                   {"num_rounds", c.spread.num_rounds},
                   {"cv_folds", c.spread_cv_folds}};
  cfg["glm"] = {{"powers", c.glm.powers}, {"gammas", c.glm.gammas}, {"folds", c.glm.folds}};
  j["config"] = cfg;
  j["failed_repetitions"] = rep.failed;
  j["single_repetition"] = rep.single_repetition;

  json agg = json::array();
  for (const auto& a : rep.aggregate) {
    agg.push_back({{"model", models::to_string(a.model)},
                   {"kind", conformal::to_string(a.kind)},
                   {"mode", conformal::to_string(a.mode)},
                   {"coverage", internal::summary_json(a.coverage)},
                   {"width", internal::summary_json(a.width)},
                   {"infinite_intervals", a.infinite},
                   {"empty_intervals", a.empty}});
  }
  j["aggregate"] = agg;

  json pm = json::array();
  for (const auto& m : rep.model_metrics) {
    pm.push_back({{"model", models::to_string(m.model)},
                  {"rmse", internal::summary_json(m.rmse)},
                  {"mae", internal::summary_json(m.mae)},
                  {"r2", internal::summary_json(m.r2)},
                  {"power", internal::summary_json(m.power)}});
  }
  j["point_metrics"] = pm;

  json reps = json::array();
  for (const auto& r : rep.repetitions) {
    json rj;
    rj["index"] = r.index;
    rj["seed"] = r.seed;
    rj["ok"] = r.ok;
    if (!r.ok) rj["error"] = r.error;
    json ms = json::array();
    for (const auto& m : r.models) {
      ms.push_back({{"model", models::to_string(m.model)},
                    {"power", m.power},
                    {"phi", num(m.phi)},
                    {"rounds", m.rounds},
                    {"lambda", m.lambda},
                    {"gamma", m.gamma},
                    {"spread_rounds_pearson", m.spread_rounds[0]},
                    {"spread_rounds_absolute", m.spread_rounds[1]},
                    {"rmse", num(m.metrics.rmse)},
                    {"mae", num(m.metrics.mae)},
                    {"r2", num(m.metrics.r2)}});
    }
    rj["models"] = ms;
    reps.push_back(rj);
  }
  j["repetitions"] = reps;
  return j;
}

// One row per (model, kind, mode), shaped like a coverage/width table.
inline std::string aggregate_csv(const ExperimentReport& rep) {
  using csv::format_double;
  std::ostringstream os;
  os << "model,kind,mode,coverage_mean,coverage_sd,width_mean,width_sd,repetitions,"
        "width_repetitions,infinite_intervals,empty_intervals\n";
  for (const auto& a : rep.aggregate) {
    os << models::to_string(a.model) << ',' << conformal::to_string(a.kind) << ','
       << conformal::to_string(a.mode) << ',' << format_double(a.coverage.mean) << ','
       << format_double(a.coverage.sd) << ',' << format_double(a.width.mean) << ','
       << format_double(a.width.sd) << ',' << a.coverage.count << ',' << a.width.count << ','
       << a.infinite << ',' << a.empty << '\n';
  }
  return os.str();
}

inline std::string repetition_csv(const ExperimentReport& rep) {
  using csv::format_double;
  std::ostringstream os;
  os << "repetition,seed,status,model,power,kind,mode,coverage,mean_width,infinite_intervals,"
        "empty_intervals,error\n";
  for (const auto& r : rep.repetitions) {
    if (!r.ok) {
      os << r.index << ',' << r.seed << ",failed,,,,,,,,," << csv::quote(r.error) << '\n';
      continue;
    }
    for (const auto& c : r.cells) {
      double power = 0.0;
      for (const auto& m : r.models) {
        if (m.model == c.model) power = m.power;
      }
      os << r.index << ',' << r.seed << ",ok," << models::to_string(c.model) << ','
         << format_double(power) << ',' << conformal::to_string(c.kind) << ','
         << conformal::to_string(c.mode) << ',' << format_double(c.coverage) << ','
         << format_double(c.mean_width) << ',' << c.infinite << ',' << c.empty << ",\n";
    }
  }
  return os.str();
}

}  // namespace tweedie_conformal::evaluation

#endif  // TWEEDIE_CONFORMAL_EVALUATION_HPP_
