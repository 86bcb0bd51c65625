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

// Command-line front end: fit, interval, simulate, importance, generate.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tweedie_conformal.hpp"

namespace {

namespace tc = tweedie_conformal;
namespace cf = tweedie_conformal::conformal;
namespace ev = tweedie_conformal::evaluation;
namespace io = tweedie_conformal::model_io;
namespace m = tweedie_conformal::models;
using nlohmann::json;

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

// Thrown for flag combinations CLI11 cannot express.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonOptions {
  std::string schema_path;
  std::string target;
  std::uint64_t seed = 20240101;
};

struct GbmOptions {
  int leaves = 10;
  double learning_rate = 0.005;
  int rounds = 2000;
  int min_leaf = 20;
  int cv_folds = 5;

  m::GbmConfig config() const {
    m::GbmConfig c;
    c.max_leaves = leaves;
    c.learning_rate = learning_rate;
    c.num_rounds = rounds;
    c.min_leaf_count = min_leaf;
    return c;
  }
};

void add_gbm_flags(CLI::App* app, GbmOptions& g) {
  app->add_option("--leaves", g.leaves, "Maximum leaves per tree")->capture_default_str();
  app->add_option("--learning-rate", g.learning_rate, "Shrinkage")->capture_default_str();
  app->add_option("--rounds", g.rounds, "Boosting rounds (upper bound when cross-validated)")
      ->capture_default_str();
  app->add_option("--min-leaf", g.min_leaf, "Minimum rows per leaf")->capture_default_str();
  app->add_option("--cv-folds", g.cv_folds, "Folds for round selection; 0 uses --rounds as is")
      ->capture_default_str();
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> parse_grid(const std::string& s) {
  std::vector<double> out;
  for (const auto& t : split_list(s)) {
    const auto v = tc::csv::parse_double(t);
    if (!v) throw UsageError("bad number '" + t + "' in grid");
    out.push_back(*v);
  }
  if (out.empty()) throw UsageError("empty grid");
  return out;
}

std::vector<cf::ResidualKind> parse_kinds(const std::string& s) {
  if (s == "all") return {std::begin(cf::kAllKinds), std::end(cf::kAllKinds)};
  std::vector<cf::ResidualKind> out;
  for (const auto& t : split_list(s)) {
    const auto k = cf::parse_kind(t);
    if (std::find(out.begin(), out.end(), k) == out.end()) out.push_back(k);
  }
  if (out.empty()) throw UsageError("no residual kinds given");
  return out;
}

std::vector<cf::Mode> parse_modes(const std::string& s) {
  if (s == "both") return {cf::Mode::symmetric, cf::Mode::asymmetric};
  return {cf::parse_mode(s)};
}

tc::data::Schema resolve_schema(const CommonOptions& c) {
  if (!c.schema_path.empty()) return tc::data::Schema::load(c.schema_path);
  if (c.target.empty()) throw UsageError("either --schema or --target is required");
  tc::data::Schema s;
  s.target = c.target;
  return s;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw tc::DataError("cannot write '" + path + "'");
  out << text;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

int thread_default() {
  if (const char* env = std::getenv("TWEEDIE_CONFORMAL_THREADS")) {
    const int t = std::atoi(env);
    if (t >= 1) return t;
  }
  return 1;
}

// ---- fit -------------------------------------------------------------------

struct FitOptions {
  CommonOptions common;
  std::string data;
  std::string out;
  std::string model = "gbm";
  std::string power_grid = "1.1,1.2,1.3,1.4,1.5,1.6,1.7,1.8,1.9";
  std::string gamma_grid = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1";
  std::optional<double> lambda;
  std::optional<double> gamma;
  int glm_folds = 5;
  GbmOptions gbm;
  std::string spread_pearson;
  std::string spread_absolute;
  GbmOptions spread;
};

int run_fit(const FitOptions& o) {
  const auto schema = resolve_schema(o.common);
  const auto train = tc::data::load_csv(o.data, schema);
  const auto powers = parse_grid(o.power_grid);
  json info;
  info["schema"] = schema.to_json();
  info["train_rows"] = train.rows();
  std::unique_ptr<m::Predictor> pred;
  std::ostringstream msg;
  if (o.model == "gbm") {
    if (o.lambda || o.gamma) throw UsageError("--lambda and --gamma apply to --model glm only");
    m::GbmRecipe r;
    r.config = o.gbm.config();
    r.powers = powers;
    r.cv_folds = o.gbm.cv_folds;
    r.seed = o.common.seed;
    auto res = m::fit_gbm_recipe(train, r);
    info["power"] = res.power;
    info["phi"] = res.phi;
    info["rounds"] = res.rounds;
    msg << "model=gbm power=" << res.power << " rounds=" << res.rounds << " phi=" << res.phi;
    pred = std::make_unique<m::Predictor>(std::move(res.model), m::Provenance::of(train));
  } else if (o.model == "glm") {
    m::GlmCvConfig g;
    g.powers = powers;
    g.gammas = o.gamma ? std::vector<double>{*o.gamma} : parse_grid(o.gamma_grid);
    if (o.lambda) g.lambdas = {*o.lambda};
    g.folds = o.glm_folds;
    g.seed = o.common.seed;
    auto res = m::glm_cv_select(train, g);
    const auto& beta = res.model.beta();
    const auto nonzero = std::count_if(beta.begin(), beta.end(), [](double b) { return b != 0.0; });
    info["power"] = res.power;
    info["phi"] = res.phi;
    info["lambda"] = res.lambda;
    info["gamma"] = res.gamma;
    msg << "model=glm power=" << res.power << " lambda=" << res.lambda << " gamma=" << res.gamma
        << " phi=" << res.phi << " nonzero=" << nonzero << "/" << beta.size();
    pred = std::make_unique<m::Predictor>(std::move(res.model), m::Provenance::of(train));
  } else {
    throw UsageError("--model must be gbm or glm");
  }
  io::write_json(o.out, io::predictor_to_json(*pred, info));
  std::cout << msg.str() << "\n";
  // Spread models for the locally weighted kinds, fit on the same rows.
  auto spread_cfg = o.spread.config();
  for (const auto& [path, target] : {std::pair{o.spread_pearson, m::SpreadTarget::pearson},
                                     std::pair{o.spread_absolute, m::SpreadTarget::absolute}}) {
    if (path.empty()) continue;
    const auto sm = m::fit_spread_for(*pred, train, target, spread_cfg, o.spread.cv_folds, o.common.seed);
    io::write_json(path, io::spread_to_json(sm));
    std::cout << "spread=" << m::to_string(target) << " rounds=" << sm.ensemble().trees.size() << " -> " << path
              << "\n";
  }
  return 0;
}

// ---- interval --------------------------------------------------------------

struct IntervalOptions {
  std::string model;
  std::string calibration;
  std::string query;
  std::string schema_path;
  std::vector<std::string> spreads;
  std::string kinds = "pearson";
  std::string mode = "symmetric";
  double alpha = 0.05;
  std::string out;
};

int run_interval(const IntervalOptions& o) {
  const json doc = io::read_json(o.model);
  const m::Predictor pred = io::predictor_from_json(doc);
  tc::data::Schema schema;
  if (!o.schema_path.empty()) {
    schema = tc::data::Schema::load(o.schema_path);
  } else if (doc.contains("info") && doc["info"].contains("schema")) {
    schema = tc::data::Schema::from_json(doc["info"]["schema"]);
  } else {
    throw UsageError("model file has no stored schema; pass --schema");
  }
  const auto kinds = parse_kinds(o.kinds);
  std::shared_ptr<const m::SpreadModel> spread_by_target[2];
  for (const auto& path : o.spreads) {
    auto s = std::make_shared<const m::SpreadModel>(io::spread_from_json(io::read_json(path)));
    spread_by_target[static_cast<int>(s->target())] = std::move(s);
  }
  for (auto k : kinds) {
    if (cf::needs_spread(k) && !spread_by_target[static_cast<int>(cf::spread_target(k))]) {
      throw UsageError("kind '" + cf::to_string(k) + "' needs a --spread file with target '" +
                       m::to_string(cf::spread_target(k)) + "'");
    }
  }
  const auto calib = tc::data::load_csv(o.calibration, schema).aligned_to(pred.features());
  tc::data::LoadOptions qopt;
  qopt.target_optional = true;
  const auto query = tc::data::load_csv(o.query, schema, qopt).aligned_to(pred.features());
  std::vector<cf::IntervalRecord> records;
  for (auto mode : parse_modes(o.mode)) {
    const cf::IntervalSpec spec(o.alpha, mode);
    for (auto k : kinds) {
      auto spread = cf::needs_spread(k) ? spread_by_target[static_cast<int>(cf::spread_target(k))] : nullptr;
      const auto scores = cf::calibrate(k, pred, spread, calib, spec);
      const auto batch = cf::predict_intervals(scores, pred, query, spec);
      for (std::size_t i = 0; i < query.rows(); ++i) {
        records.push_back({query.row_ids()[i], batch.mu[i], batch.intervals[i], k, o.alpha, mode});
      }
    }
  }
  const std::string text = ends_with(o.out, ".json") ? cf::intervals_to_json(records).dump(1) + "\n"
                                                     : cf::intervals_to_csv(records);
  if (o.out.empty() || o.out == "-") {
    std::cout << text;
  } else {
    write_text(o.out, text);
  }
  return 0;
}

// ---- simulate --------------------------------------------------------------

struct SimulateOptions {
  std::string data;
  CommonOptions common;
  bool synthetic = false;
  std::size_t synth_rows = 0;
  double synth_power = 1.5;
  double synth_phi = 1.0;
  double synth_intercept = 0.0;
  bool heteroscedastic = false;
  bool nonlinear = false;
  std::size_t n1 = 4000, n2 = 4000, n3 = 2296;
  int reps = 100;
  double alpha = 0.05;
  std::string kinds = "all";
  std::string models = "gbm";
  std::string mode = "symmetric";
  std::string power_grid = "1.1,1.2,1.3,1.4,1.5,1.6,1.7,1.8,1.9";
  GbmOptions gbm;
  GbmOptions spread;
  bool fast = false;
  int threads = 0;
  std::string out_dir = ".";
};

int run_simulate(const SimulateOptions& o) {
  ev::ExperimentConfig cfg;
  cfg.n1 = o.n1;
  cfg.n2 = o.n2;
  cfg.n3 = o.n3;
  cfg.repetitions = o.reps;
  cfg.alpha = o.alpha;
  cfg.kinds = parse_kinds(o.kinds);
  cfg.modes = parse_modes(o.mode);
  cfg.seed = o.common.seed;
  cfg.fast = o.fast;
  cfg.threads = o.threads > 0 ? o.threads : thread_default();
  cfg.models.clear();
  for (const auto& s : split_list(o.models)) cfg.models.push_back(m::parse_model_kind(s));
  cfg.gbm.config = o.gbm.config();
  cfg.gbm.powers = parse_grid(o.power_grid);
  cfg.gbm.cv_folds = o.gbm.cv_folds;
  cfg.glm.powers = cfg.gbm.powers;
  cfg.spread = o.spread.config();
  cfg.spread_cv_folds = o.spread.cv_folds;

  tc::data::Dataset ds;
  if (o.synthetic) {
    if (!o.data.empty()) throw UsageError("--synthetic and --data are mutually exclusive");
    tc::data::SynthConfig sc;
    sc.rows = o.synth_rows ? o.synth_rows : o.n1 + o.n2 + o.n3;
    sc.p = o.synth_power;
    sc.phi = o.synth_phi;
    sc.intercept = o.synth_intercept;
    sc.heteroscedastic = o.heteroscedastic;
    sc.mean_function = o.nonlinear ? tc::data::MeanFunction::nonlinear : tc::data::MeanFunction::linear_log;
    auto synth = tc::data::generate_synthetic(sc, tc::resampling::derive_seed(o.common.seed, 0xda7a));
    cfg.oracle = m::OracleModel{synth.true_mean, synth.power, synth.dataset.features()};
    ds = std::move(synth.dataset);
  } else {
    if (o.data.empty()) throw UsageError("one of --data or --synthetic is required");
    ds = tc::data::load_csv(o.data, resolve_schema(o.common));
    if (std::count(cfg.models.begin(), cfg.models.end(), m::ModelKind::oracle)) {
      throw UsageError("the oracle model needs --synthetic data");
    }
  }
  const auto rep = ev::run_experiment(ds, cfg);
  std::filesystem::create_directories(o.out_dir);
  const std::filesystem::path dir(o.out_dir);
  write_text((dir / "report.json").string(), ev::report_to_json(rep).dump(1) + "\n");
  write_text((dir / "aggregate.csv").string(), ev::aggregate_csv(rep));
  write_text((dir / "repetitions.csv").string(), ev::repetition_csv(rep));
  std::cout << ev::aggregate_csv(rep);
  if (rep.failed > 0) {
    std::cerr << "error: " << rep.failed << " of " << o.reps << " repetitions failed; see repetitions.csv\n";
    return kExitNumeric;
  }
  return 0;
}

// ---- importance ------------------------------------------------------------

int run_importance(const std::string& model_path, const std::string& out) {
  const json doc = io::read_json(model_path);
  if (io::document_kind(doc) != "gbm") {
    throw UsageError("importance needs a boosted-tree model, got '" + io::document_kind(doc) + "'");
  }
  const auto model = io::gbm_from_json(doc.at("model"));
  const auto imp = m::feature_importance(model);
  std::vector<std::size_t> order(imp.names.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return imp.gain[a] > imp.gain[b]; });
  std::ostringstream os;
  os << "feature,gain,cover,frequency\n";
  for (auto j : order) {
    os << tc::csv::quote(imp.names[j]) << ',' << tc::csv::format_double(imp.gain[j]) << ','
       << tc::csv::format_double(imp.cover[j]) << ',' << tc::csv::format_double(imp.frequency[j]) << '\n';
  }
  if (out.empty() || out == "-") {
    std::cout << os.str();
  } else {
    write_text(out, os.str());
  }
  return 0;
}

// ---- generate --------------------------------------------------------------

struct GenerateOptions {
  std::size_t rows = 1000;
  double power = 1.5;
  double phi = 1.0;
  double intercept = 0.0;
  bool heteroscedastic = false;
  bool nonlinear = false;
  std::uint64_t seed = 20240101;
  std::string out;
};

int run_generate(const GenerateOptions& o) {
  tc::data::SynthConfig sc;
  sc.rows = o.rows;
  sc.p = o.power;
  sc.phi = o.phi;
  sc.intercept = o.intercept;
  sc.heteroscedastic = o.heteroscedastic;
  sc.mean_function = o.nonlinear ? tc::data::MeanFunction::nonlinear : tc::data::MeanFunction::linear_log;
  const auto s = tc::data::generate_synthetic(sc, o.seed);
  tc::data::write_csv(s.dataset, o.out, "y");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Split conformal prediction intervals for zero-inflated nonnegative targets"};
  app.require_subcommand(1);
  // Later occurrences of a flag win.
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  FitOptions fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a Tweedie GLM or boosted-tree mean model");
  fit_cmd->add_option("--data", fit.data, "Training CSV")->required();
  fit_cmd->add_option("--schema", fit.common.schema_path, "Schema JSON");
  fit_cmd->add_option("--target", fit.common.target, "Target column when no schema is given");
  fit_cmd->add_option("--out", fit.out, "Model JSON to write")->required();
  fit_cmd->add_option("--model", fit.model, "gbm or glm")->capture_default_str();
  fit_cmd->add_option("--power-grid", fit.power_grid, "Comma-separated Tweedie powers")->capture_default_str();
  fit_cmd->add_option("--gamma-grid", fit.gamma_grid, "Elastic-net mixing grid (glm)")->capture_default_str();
  fit_cmd->add_option("--lambda", fit.lambda, "Fixed penalty (glm)");
  fit_cmd->add_option("--gamma", fit.gamma, "Fixed mixing (glm)");
  fit_cmd->add_option("--glm-folds", fit.glm_folds, "Cross-validation folds (glm)")->capture_default_str();
  fit_cmd->add_option("--seed", fit.common.seed, "Seed")->capture_default_str();
  add_gbm_flags(fit_cmd, fit.gbm);
  fit_cmd->add_option("--spread-pearson", fit.spread_pearson, "Also write a Pearson spread model here");
  fit_cmd->add_option("--spread-absolute", fit.spread_absolute, "Also write an absolute-residual spread model here");
  fit_cmd->add_option("--spread-rounds", fit.spread.rounds, "Spread ensemble rounds (upper bound when cross-validated)")
      ->capture_default_str();
  fit_cmd->add_option("--spread-learning-rate", fit.spread.learning_rate, "Spread ensemble shrinkage")
      ->capture_default_str();
  fit_cmd->add_option("--spread-cv-folds", fit.spread.cv_folds, "Spread round-selection folds")
      ->capture_default_str();

  IntervalOptions iv;
  auto* iv_cmd = app.add_subcommand("interval", "Calibrate and emit prediction intervals");
  iv_cmd->add_option("--model", iv.model, "Model JSON")->required();
  iv_cmd->add_option("--calibration", iv.calibration, "Calibration CSV")->required();
  iv_cmd->add_option("--query", iv.query, "Query CSV")->required();
  iv_cmd->add_option("--schema", iv.schema_path, "Schema JSON (defaults to the one stored in the model)")
      ;
  iv_cmd->add_option("--spread", iv.spreads, "Spread model JSON (repeatable)");
  iv_cmd->add_option("--kinds", iv.kinds, "Comma-separated residual kinds, or all")->capture_default_str();
  iv_cmd->add_option("--mode", iv.mode, "symmetric, asymmetric or both")->capture_default_str();
  iv_cmd->add_option("--alpha", iv.alpha, "Miscoverage level")->capture_default_str();
  iv_cmd->add_option("--out", iv.out, "Output file (.json for JSON, else CSV; - for stdout)");

  SimulateOptions sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Repeated random-split coverage and width study");
  auto* data_opt = sim_cmd->add_option("--data", sim.data, "Dataset CSV");
  auto* synth_flag = sim_cmd->add_flag("--synthetic", sim.synthetic, "Use generated data");
  data_opt->excludes(synth_flag);
  sim_cmd->add_option("--schema", sim.common.schema_path, "Schema JSON");
  sim_cmd->add_option("--target", sim.common.target, "Target column when no schema is given");
  sim_cmd->add_option("--synthetic-rows", sim.synth_rows, "Generated rows (default n1+n2+n3)");
  sim_cmd->add_option("--synthetic-power", sim.synth_power, "Generating Tweedie power")->capture_default_str();
  sim_cmd->add_option("--synthetic-phi", sim.synth_phi, "Generating dispersion")->capture_default_str();
  sim_cmd->add_option("--synthetic-intercept", sim.synth_intercept, "Log-mean intercept")->capture_default_str();
  sim_cmd->add_flag("--heteroscedastic", sim.heteroscedastic, "Covariate-dependent dispersion");
  sim_cmd->add_flag("--nonlinear", sim.nonlinear, "Nonlinear mean function");
  sim_cmd->add_option("--n1", sim.n1, "Training rows")->capture_default_str();
  sim_cmd->add_option("--n2", sim.n2, "Calibration rows")->capture_default_str();
  sim_cmd->add_option("--n3", sim.n3, "Test rows")->capture_default_str();
  sim_cmd->add_option("--reps", sim.reps, "Repetitions")->capture_default_str();
  sim_cmd->add_option("--alpha", sim.alpha, "Miscoverage level")->capture_default_str();
  sim_cmd->add_option("--kinds", sim.kinds, "Comma-separated residual kinds, or all")->capture_default_str();
  sim_cmd->add_option("--models", sim.models, "Comma-separated: gbm, glm, oracle")->capture_default_str();
  sim_cmd->add_option("--mode", sim.mode, "symmetric, asymmetric or both")->capture_default_str();
  sim_cmd->add_option("--power-grid", sim.power_grid, "Comma-separated Tweedie powers")->capture_default_str();
  add_gbm_flags(sim_cmd, sim.gbm);
  sim_cmd->add_option("--spread-rounds", sim.spread.rounds, "Spread ensemble rounds (upper bound when cross-validated)")
      ->capture_default_str();
  sim_cmd->add_option("--spread-learning-rate", sim.spread.learning_rate, "Spread ensemble shrinkage")
      ->capture_default_str();
  sim_cmd->add_option("--spread-cv-folds", sim.spread.cv_folds, "Spread round-selection folds; 0 disables")
      ->capture_default_str();
  sim_cmd->add_flag("--fast", sim.fast, "Reuse the first repetition's tuning");
  sim_cmd->add_option("--threads", sim.threads, "Worker threads (default from TWEEDIE_CONFORMAL_THREADS or 1)");
  sim_cmd->add_option("--seed", sim.common.seed, "Seed")->capture_default_str();
  sim_cmd->add_option("--out-dir", sim.out_dir, "Directory for report.json, aggregate.csv, repetitions.csv")
      ->capture_default_str();

  std::string imp_model, imp_out;
  auto* imp_cmd = app.add_subcommand("importance", "Feature importance of a boosted-tree model");
  imp_cmd->add_option("--model", imp_model, "Model JSON")->required();
  imp_cmd->add_option("--out", imp_out, "Output CSV (default stdout)");

  GenerateOptions gen;
  auto* gen_cmd = app.add_subcommand("generate", "Write a synthetic Tweedie dataset (target column y)");
  gen_cmd->add_option("--rows", gen.rows, "Rows")->capture_default_str();
  gen_cmd->add_option("--power", gen.power, "Tweedie power")->capture_default_str();
  gen_cmd->add_option("--phi", gen.phi, "Dispersion")->capture_default_str();
  gen_cmd->add_option("--intercept", gen.intercept, "Log-mean intercept")->capture_default_str();
  gen_cmd->add_flag("--heteroscedastic", gen.heteroscedastic, "Covariate-dependent dispersion");
  gen_cmd->add_flag("--nonlinear", gen.nonlinear, "Nonlinear mean function");
  gen_cmd->add_option("--seed", gen.seed, "Seed")->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "CSV to write")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*fit_cmd) return run_fit(fit);
    if (*iv_cmd) return run_interval(iv);
    if (*sim_cmd) return run_simulate(sim);
    if (*imp_cmd) return run_importance(imp_model, imp_out);
    if (*gen_cmd) return run_generate(gen);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const tc::ParameterError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const tc::ConfigError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const tc::ContractError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const tc::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const tc::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
