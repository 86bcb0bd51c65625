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

// Acceptance driver: one PASS/FAIL line per criterion, nonzero exit on any
// failure.
//
// Environment:
//   TWEEDIE_CONFORMAL_ACCEPTANCE_REPS  repetitions of the synthetic benchmark
//                                      (default 100; ordering thresholds scale)
//   TWEEDIE_CONFORMAL_AUTOCLAIM_CSV    path to the AutoClaim CSV; criterion 10
//                                      is skipped when unset or unreadable

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include "test_support.hpp"

namespace {

namespace tc = tweedie_conformal;
namespace cf = tweedie_conformal::conformal;
namespace ev = tweedie_conformal::evaluation;
using cf::Mode;
using cf::ResidualKind;
using tc::models::ModelKind;

// Pinned tolerances.
constexpr double kCoverageLo = 0.935;
constexpr double kCoverageHi = 0.965;
constexpr double kOrderingShare = 0.80;
constexpr int kInversionCases = 1000;
constexpr int kInversionGrid = 10000;
constexpr double kClosedFormTol = 1e-8;
constexpr double kFiniteDifferenceTol = 1e-6;
constexpr double kIrlsTol = 1e-4;
constexpr double kKktTol = 1e-5;
constexpr double kMassTol = 1e-4;
constexpr double kKsTol = 0.01;
constexpr double kChiSquareLevel = 0.001;
constexpr double kAutoclaimLo = 0.94;
constexpr double kAutoclaimHi = 0.96;

int failures = 0;

void report(int id, const char* status, const std::string& detail, double seconds) {
  std::printf("criterion %2d: %s  %s  (%.1fs)\n", id, status, detail.c_str(), seconds);
  std::fflush(stdout);
}

void check(int id, const std::function<std::pair<bool, std::string>()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = false;
  std::string detail;
  try {
    std::tie(ok, detail) = body();
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!ok) ++failures;
  report(id, ok ? "PASS" : "FAIL", detail, s);
}

std::string fmt(double v, int digits = 4) {
  std::ostringstream os;
  os.precision(digits);
  os << v;
  return os.str();
}

int env_int(const char* name, int fallback) {
  const char* v = std::getenv(name);
  return v && std::atoi(v) > 0 ? std::atoi(v) : fallback;
}

// ---- shared synthetic benchmark ---------------------------------------------------

ev::ExperimentReport run_benchmark(int reps, double& seconds) {
  tc::data::SynthConfig sc;
  sc.rows = 6000;
  sc.p = 1.5;
  sc.phi = 1.0;
  sc.heteroscedastic = true;
  sc.mean_function = tc::data::MeanFunction::linear_log;
  const auto synth = tc::data::generate_synthetic(sc, 20240101);
  ev::ExperimentConfig cfg;
  cfg.n1 = cfg.n2 = cfg.n3 = 2000;
  cfg.repetitions = reps;
  cfg.alpha = 0.05;
  cfg.models = {ModelKind::gbm};
  cfg.modes = {Mode::symmetric, Mode::asymmetric};
  cfg.gbm.powers = {1.3, 1.4, 1.5, 1.6, 1.7};
  cfg.gbm.config.learning_rate = 0.05;
  cfg.gbm.config.num_rounds = 200;
  cfg.spread.learning_rate = 0.05;
  cfg.spread.num_rounds = 300;
  cfg.spread_cv_folds = 5;
  const auto t0 = std::chrono::steady_clock::now();
  auto rep = ev::run_experiment(synth.dataset, cfg);
  seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

int required(int reps) { return static_cast<int>(std::ceil(kOrderingShare * reps - 1e-9)); }

}  // namespace

int main() {
  const int reps = env_int("TWEEDIE_CONFORMAL_ACCEPTANCE_REPS", 100);
  std::printf("synthetic benchmark: %d repetitions\n", reps);
  double bench_seconds = 0.0;
  std::optional<ev::ExperimentReport> bench;
  std::string bench_error;
  try {
    bench = run_benchmark(reps, bench_seconds);
  } catch (const std::exception& e) {
    bench_error = e.what();
  }
  std::printf("benchmark runtime %.1fs\n", bench_seconds);
  auto need_bench = [&] {
    if (!bench) throw std::runtime_error("benchmark failed: " + bench_error);
    if (bench->failed > 0) throw std::runtime_error(std::to_string(bench->failed) + " repetitions failed");
  };

  check(1, [&] {
    need_bench();
    bool ok = true;
    std::ostringstream os;
    for (ResidualKind k : cf::kAllKinds) {
      const auto* a = bench->find(ModelKind::gbm, k, Mode::symmetric);
      const double c = a->coverage.mean;
      ok = ok && c >= kCoverageLo && c <= kCoverageHi;
      os << cf::to_string(k) << "=" << fmt(c) << " ";
    }
    os << "band [" << kCoverageLo << ", " << kCoverageHi << "]";
    return std::pair{ok, os.str()};
  });

  check(2, [&] {
    need_bench();
    const auto lw = bench->cells(ModelKind::gbm, ResidualKind::locally_weighted_pearson, Mode::symmetric);
    const auto pe = bench->cells(ModelKind::gbm, ResidualKind::pearson, Mode::symmetric);
    const auto un = bench->cells(ModelKind::gbm, ResidualKind::unstandardized, Mode::symmetric);
    int hits = 0;
    for (std::size_t i = 0; i < pe.size(); ++i) {
      hits += lw[i]->mean_width <= pe[i]->mean_width && pe[i]->mean_width < un[i]->mean_width;
    }
    std::ostringstream os;
    os << "lwp <= pearson < unstandardized in " << hits << "/" << pe.size() << " (need " << required(reps)
       << "); mean widths " << fmt(bench->find(ModelKind::gbm, ResidualKind::locally_weighted_pearson, Mode::symmetric)->width.mean)
       << " / " << fmt(bench->find(ModelKind::gbm, ResidualKind::pearson, Mode::symmetric)->width.mean) << " / "
       << fmt(bench->find(ModelKind::gbm, ResidualKind::unstandardized, Mode::symmetric)->width.mean);
    return std::pair{hits >= required(reps), os.str()};
  });

  check(3, [] {
    std::mt19937_64 rng(3);
    int bad = 0;
    for (int i = 0; i < kInversionCases; ++i) {
      const auto c = tc_test::random_case(rng);
      bad += tc_test::inversion_disagreements(c, false, kInversionGrid);
      bad += tc_test::inversion_disagreements(c, true, kInversionGrid);
    }
    return std::pair{bad == 0, std::to_string(bad) + " disagreements over " + std::to_string(kInversionCases) +
                                   " symmetric and asymmetric cases, grid " + std::to_string(kInversionGrid)};
  });

  check(4, [] {
    const auto iv = cf::invert_interval(ResidualKind::deviance, 1.0, 2.0, 1.5, std::nullopt);
    const double err = std::max(std::abs(iv.lo - 0.0), std::abs(iv.hi - 4.0));
    return std::pair{!iv.empty && err <= kClosedFormTol,
                     "interval [" + fmt(iv.lo, 12) + ", " + fmt(iv.hi, 12) + "], max error " + fmt(err, 3)};
  });

  check(5, [] {
    const double worst = tc_test::loss_derivative_worst(10000, 5);
    return std::pair{worst < kFiniteDifferenceTol, "worst relative error " + fmt(worst, 3) + " over 10000 points"};
  });

  check(6, [] {
    double gap = 0.0;
    for (double p : {1.3, 1.5, 1.7}) gap = std::max(gap, tc_test::irls_gap(tc_test::make_glm_problem(2000, 20, p, 6), p));
    const auto pr = tc_test::make_glm_problem(2000, 20, 1.5, 7);
    double kkt = 0.0;
    for (double g : {0.0, 0.5, 1.0}) kkt = std::max(kkt, tc_test::kkt_path_worst(pr, 1.5, g));
    return std::pair{gap < kIrlsTol && kkt <= kKktTol,
                     "max |beta - IRLS| " + fmt(gap, 3) + ", max KKT residual " + fmt(kkt, 3)};
  });

  check(7, [] {
    double worst = 0.0;
    for (double mu : {0.5, 1.0, 5.0}) {
      for (double phi : {0.5, 1.0, 2.0}) {
        for (double p : {1.2, 1.5, 1.8}) worst = std::max(worst, std::abs(tc_test::total_mass(mu, phi, p) - 1.0));
      }
    }
    const auto ks = tc_test::sampler_ks(1.0, 1.0, 1.5, 100000, 7);
    return std::pair{worst <= kMassTol && ks.distance < kKsTol,
                     "max |mass - 1| " + fmt(worst, 3) + ", KS distance " + fmt(ks.distance, 3)};
  });

  check(8, [] {
    const double pv = tc_test::rank_uniformity_pvalue(10000, 8000);
    return std::pair{pv > kChiSquareLevel, "chi-square p-value " + fmt(pv, 3)};
  });

  check(9, [&] {
    need_bench();
    const auto sym = bench->cells(ModelKind::gbm, ResidualKind::pearson, Mode::symmetric);
    const auto asy = bench->cells(ModelKind::gbm, ResidualKind::pearson, Mode::asymmetric);
    int hits = 0;
    for (std::size_t i = 0; i < sym.size(); ++i) hits += asy[i]->mean_width >= sym[i]->mean_width;
    const double cov = bench->find(ModelKind::gbm, ResidualKind::pearson, Mode::asymmetric)->coverage.mean;
    const bool ok = hits >= required(reps) && cov >= kCoverageLo && cov <= kCoverageHi;
    std::ostringstream os;
    os << "asymmetric >= symmetric width in " << hits << "/" << sym.size() << " (need " << required(reps)
       << "); asymmetric coverage " << fmt(cov);
    return std::pair{ok, os.str()};
  });

  const char* csv = std::getenv("TWEEDIE_CONFORMAL_AUTOCLAIM_CSV");
  if (!csv || !std::filesystem::exists(csv)) {
    report(10, "SKIP", "set TWEEDIE_CONFORMAL_AUTOCLAIM_CSV to the AutoClaim CSV to run", 0.0);
  } else {
    check(10, [&] {
      auto schema = tc::data::Schema::autoclaim();
      schema.allow_missing = true;
      const auto ds = tc::data::load_csv(csv, schema);
      ev::ExperimentConfig cfg;  // n1 = n2 = 4000, n3 = 2296, 100 repetitions
      cfg.gbm.config.learning_rate = 0.05;
      cfg.gbm.config.num_rounds = 400;
      cfg.gbm.cv_folds = 5;
      cfg.spread.learning_rate = 0.05;
      cfg.spread.num_rounds = 300;
      cfg.fast = true;
      cfg.threads = env_int("TWEEDIE_CONFORMAL_THREADS", 1);
      const auto rep = ev::run_experiment(ds, cfg);
      bool ok = rep.failed == 0;
      std::ostringstream os;
      for (ResidualKind k : cf::kAllKinds) {
        const double c = rep.find(ModelKind::gbm, k, Mode::symmetric)->coverage.mean;
        ok = ok && c >= kAutoclaimLo && c <= kAutoclaimHi;
        os << cf::to_string(k) << "=" << fmt(c) << " ";
      }
      const double wp = rep.find(ModelKind::gbm, ResidualKind::pearson, Mode::symmetric)->width.mean;
      const double wu = rep.find(ModelKind::gbm, ResidualKind::unstandardized, Mode::symmetric)->width.mean;
      ok = ok && wp < wu;
      os << "widths pearson " << fmt(wp) << " < unstandardized " << fmt(wu);
      return std::pair{ok, os.str()};
    });
  }

  std::printf("%s\n", failures == 0 ? "ALL CRITERIA PASSED" : "SOME CRITERIA FAILED");
  return failures == 0 ? 0 : 1;
}
