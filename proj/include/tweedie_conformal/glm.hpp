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

// Elastic-net Tweedie GLM with log link:
//
//   min_{b0, b}  (1/n) sum_i l(y_i, b0 + b'x_i)
//                + lambda ((1 - gamma) |b|_2^2 / 2 + gamma |b|_1)
//
// solved by proximal gradient descent (Barzilai-Borwein trial steps with
// backtracking, soft-thresholding for the l1 part). The intercept is not
// penalized and features are one-hot encoded and standardized first.

#ifndef TWEEDIE_CONFORMAL_GLM_HPP_
#define TWEEDIE_CONFORMAL_GLM_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "tweedie_conformal/dataset.hpp"
#include "tweedie_conformal/errors.hpp"
#include "tweedie_conformal/loss.hpp"
#include "tweedie_conformal/resampling.hpp"
#include "tweedie_conformal/tweedie.hpp"

namespace tweedie_conformal::models {

// Row-major dense design matrix.
struct DesignMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  std::span<const double> row(std::size_t i) const {
    return {values.data() + i * cols, cols};
  }
  double operator()(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
};

struct EncodedColumn {
  std::size_t source = 0;  // index of the dataset feature
  int level = -1;          // indicator level for categorical sources, -1 numeric
  double mean = 0.0;
  double scale = 1.0;
  std::string name;
};

// One-hot (first level dropped) plus standardization, fitted on training rows
// and replayable on any rows with the same schema. Unseen categorical levels
// encode as the dropped reference level; missing numerics take the training
// median.
class GlmEncoding {
 public:
  GlmEncoding() = default;
  GlmEncoding(std::vector<data::FeatureInfo> features, std::vector<EncodedColumn> columns,
              std::vector<double> medians)
      : features_(std::move(features)), columns_(std::move(columns)), medians_(std::move(medians)) {}

  static GlmEncoding fit(const data::Dataset& ds) {
    std::vector<EncodedColumn> cols;
    std::vector<double> medians(ds.num_features(), 0.0);
    const double n = static_cast<double>(ds.rows());
    for (std::size_t f = 0; f < ds.num_features(); ++f) {
      const auto col = ds.column(f);
      const auto& info = ds.feature(f);
      if (info.kind == data::FeatureKind::numeric) {
        std::vector<double> present;
        for (double v : col) {
          if (!std::isnan(v)) present.push_back(v);
        }
        if (!present.empty()) {
          const auto mid = present.begin() + static_cast<long>(present.size() / 2);
          std::nth_element(present.begin(), mid, present.end());
          medians[f] = *mid;
        }
        cols.push_back({f, -1, 0.0, 1.0, info.name});
      } else {
        for (std::size_t l = 1; l < info.levels.size(); ++l) {
          cols.push_back({f, static_cast<int>(l), 0.0, 1.0, info.name + "=" + info.levels[l]});
        }
      }
    }
    GlmEncoding enc(ds.features(), {}, medians);
    std::vector<EncodedColumn> kept;
    for (auto c : cols) {
      double s = 0.0, ss = 0.0;
      for (std::size_t i = 0; i < ds.rows(); ++i) {
        const double v = enc.raw_value(c, ds.value(i, c.source));
        s += v;
        ss += v * v;
      }
      const double mean = s / n;
      const double var = std::max(ss / n - mean * mean, 0.0);
      const double sd = std::sqrt(var);
      if (!(sd > 1e-12 * (1.0 + std::abs(mean)))) {
        warn("GLM encoding drops constant column '" + c.name + "'");
        continue;
      }
      c.mean = mean;
      c.scale = sd;
      kept.push_back(c);
    }
    enc.columns_ = std::move(kept);
    return enc;
  }

  std::size_t width() const { return columns_.size(); }
  const std::vector<EncodedColumn>& columns() const { return columns_; }
  const std::vector<data::FeatureInfo>& features() const { return features_; }
  const std::vector<double>& medians() const { return medians_; }

  void encode_row(std::span<const double> row, std::span<double> out) const {
    for (std::size_t k = 0; k < columns_.size(); ++k) {
      const auto& c = columns_[k];
      out[k] = (raw_value(c, row[c.source]) - c.mean) / c.scale;
    }
  }

  DesignMatrix apply(const data::Dataset& ds) const {
    if (ds.features() != features_) {
      throw DataError("dataset columns do not match the GLM encoding schema");
    }
    DesignMatrix x;
    x.rows = ds.rows();
    x.cols = columns_.size();
    x.values.resize(x.rows * x.cols);
    for (std::size_t k = 0; k < columns_.size(); ++k) {
      const auto& c = columns_[k];
      const auto col = ds.column(c.source);
      for (std::size_t i = 0; i < x.rows; ++i) {
        x.values[i * x.cols + k] = (raw_value(c, col[i]) - c.mean) / c.scale;
      }
    }
    return x;
  }

 private:
  double raw_value(const EncodedColumn& c, double v) const {
    if (c.level >= 0) return v == static_cast<double>(c.level) ? 1.0 : 0.0;
    return std::isnan(v) ? medians_[c.source] : v;
  }

  std::vector<data::FeatureInfo> features_;
  std::vector<EncodedColumn> columns_;
  std::vector<double> medians_;
};

struct EncodedDesign {
  DesignMatrix matrix;
  GlmEncoding encoding;
};

inline EncodedDesign encode_for_glm(const data::Dataset& ds) {
  GlmEncoding enc = GlmEncoding::fit(ds);
  DesignMatrix x = enc.apply(ds);
  return {std::move(x), std::move(enc)};
}

struct GlmSolverOptions {
  double tolerance = 1e-6;  // KKT residual max-norm
  int max_iterations = 200000;
  // Record the full objective after every accepted step.
  bool record_trace = false;
};

struct GlmSolution {
  double beta0 = 0.0;
  std::vector<double> beta;
  double objective = 0.0;
  double kkt = 0.0;
  int iterations = 0;
  std::vector<double> trace;
};

namespace internal {

struct GlmProblem {
  const DesignMatrix& x;
  std::span<const double> y;
  double p;
  double lambda;
  double gamma;

  double l1() const { return lambda * gamma; }
  double l2() const { return lambda * (1.0 - gamma); }

  void linear_predictor(double b0, std::span<const double> b, std::vector<double>& eta) const {
    eta.assign(x.rows, b0);
    for (std::size_t i = 0; i < x.rows; ++i) {
      const double* r = x.values.data() + i * x.cols;
      double s = 0.0;
      for (std::size_t j = 0; j < x.cols; ++j) s += r[j] * b[j];
      eta[i] += s;
    }
  }

  // Smooth part of the objective and its gradient at the given eta.
  double smooth(std::span<const double> b, const std::vector<double>& eta, double* g0,
                std::vector<double>* g) const {
    const double n = static_cast<double>(x.rows);
    double loss = 0.0;
    if (g) g->assign(x.cols, 0.0);
    double s0 = 0.0;
    for (std::size_t i = 0; i < x.rows; ++i) {
      loss += tweedie_loss(y[i], eta[i], p);
      if (g) {
        const double r = tweedie_loss_grad_hess(y[i], eta[i], p).gradient;
        s0 += r;
        const double* row = x.values.data() + i * x.cols;
        for (std::size_t j = 0; j < x.cols; ++j) (*g)[j] += row[j] * r;
      }
    }
    double ridge = 0.0;
    for (std::size_t j = 0; j < x.cols; ++j) ridge += b[j] * b[j];
    if (g) {
      *g0 = s0 / n;
      for (std::size_t j = 0; j < x.cols; ++j) (*g)[j] = (*g)[j] / n + l2() * b[j];
    }
    return loss / n + 0.5 * l2() * ridge;
  }

  double penalty(std::span<const double> b) const {
    double s = 0.0;
    for (double v : b) s += std::abs(v);
    return l1() * s;
  }

  double kkt(std::span<const double> b, double g0, const std::vector<double>& g) const {
    double r = std::abs(g0);
    for (std::size_t j = 0; j < b.size(); ++j) {
      const double v = b[j] != 0.0 ? std::abs(g[j] + l1() * (b[j] > 0 ? 1.0 : -1.0))
                                   : std::max(0.0, std::abs(g[j]) - l1());
      r = std::max(r, v);
    }
    return r;
  }
};

inline double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

}  // namespace internal

inline void check_glm_inputs(const DesignMatrix& x, std::span<const double> y, double p,
                             double lambda, double gamma) {
  tweedie::check_power(p);
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ParameterError("lambda must be finite and >= 0");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ParameterError("gamma must lie in [0, 1]");
  if (x.rows != y.size()) throw ParameterError("design rows and target length differ");
  if (x.rows == 0) throw DataError("GLM needs at least one row");
  for (double v : y) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw DataError("GLM targets must be finite and nonnegative");
  }
}

inline double intercept_only(std::span<const double> y) {
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  return std::log(std::max(mean, 1e-12));
}

// Maximum-norm KKT residual of (b0, b) for the penalized problem.
inline double glm_kkt_residual(const DesignMatrix& x, std::span<const double> y, double p,
                               double lambda, double gamma, double b0,
                               std::span<const double> b) {
  internal::GlmProblem prob{x, y, p, lambda, gamma};
  std::vector<double> eta, g;
  double g0 = 0.0;
  prob.linear_predictor(b0, b, eta);
  prob.smooth(b, eta, &g0, &g);
  return prob.kkt(b, g0, g);
}

inline double glm_objective(const DesignMatrix& x, std::span<const double> y, double p,
                            double lambda, double gamma, double b0, std::span<const double> b) {
  internal::GlmProblem prob{x, y, p, lambda, gamma};
  std::vector<double> eta;
  prob.linear_predictor(b0, b, eta);
  return prob.smooth(b, eta, nullptr, nullptr) + prob.penalty(b);
}

// Proximal gradient solve from an optional warm start.
inline GlmSolution glm_solve(const DesignMatrix& x, std::span<const double> y, double p,
                             double lambda, double gamma, const GlmSolverOptions& opts = {},
                             const GlmSolution* warm = nullptr) {
  check_glm_inputs(x, y, p, lambda, gamma);
  internal::GlmProblem prob{x, y, p, lambda, gamma};
  const std::size_t k = x.cols;
  GlmSolution sol;
  if (warm && warm->beta.size() == k) {
    sol.beta0 = warm->beta0;
    sol.beta = warm->beta;
  } else {
    sol.beta0 = intercept_only(y);
    sol.beta.assign(k, 0.0);
  }

  std::vector<double> eta, g, eta_new, g_new, b_new(k);
  double g0 = 0.0, g0_new = 0.0;
  prob.linear_predictor(sol.beta0, sol.beta, eta);
  double f = prob.smooth(sol.beta, eta, &g0, &g);
  double obj = f + prob.penalty(sol.beta);
  if (!std::isfinite(obj)) throw NumericError("GLM objective is not finite at the starting point");
  if (opts.record_trace) sol.trace.push_back(obj);
  double step = 1.0;
  sol.kkt = prob.kkt(sol.beta, g0, g);

  int it = 0;
  while (sol.kkt > opts.tolerance) {
    if (++it > opts.max_iterations) {
      std::ostringstream os;
      os << "GLM solver did not reach KKT tolerance " << opts.tolerance << " in "
         << opts.max_iterations << " iterations (residual " << sol.kkt << ")";
      throw NumericError(os.str());
    }
    double f_new = 0.0;
    double b0_new = 0.0;
    bool accepted = false;
    for (int bt = 0; bt < 200; ++bt) {
      b0_new = sol.beta0 - step * g0;
      for (std::size_t j = 0; j < k; ++j) {
        b_new[j] = internal::soft_threshold(sol.beta[j] - step * g[j], step * prob.l1());
      }
      prob.linear_predictor(b0_new, b_new, eta_new);
      f_new = prob.smooth(b_new, eta_new, nullptr, nullptr);
      // Sufficient decrease against the quadratic upper model.
      double lin = (b0_new - sol.beta0) * g0;
      double sq = (b0_new - sol.beta0) * (b0_new - sol.beta0);
      for (std::size_t j = 0; j < k; ++j) {
        const double d = b_new[j] - sol.beta[j];
        lin += d * g[j];
        sq += d * d;
      }
      if (std::isfinite(f_new) && f_new <= f + lin + sq / (2.0 * step) + 1e-15 * std::abs(f)) {
        accepted = true;
        break;
      }
      step *= 0.5;
      if (step < 1e-20) break;
    }
    if (!accepted) throw NumericError("GLM line search failed to decrease the objective");
    const double obj_new = f_new + prob.penalty(b_new);
    if (obj_new > obj + 1e-12 * (1.0 + std::abs(obj))) {
      throw NumericError("GLM objective increased despite backtracking");
    }
    prob.smooth(b_new, eta_new, &g0_new, &g_new);
    // Barzilai-Borwein trial step for the next iteration.
    double ss = (b0_new - sol.beta0) * (b0_new - sol.beta0);
    double sy = (b0_new - sol.beta0) * (g0_new - g0);
    for (std::size_t j = 0; j < k; ++j) {
      const double s = b_new[j] - sol.beta[j];
      ss += s * s;
      sy += s * (g_new[j] - g[j]);
    }
    step = sy > 0.0 ? std::clamp(ss / sy, 1e-10, 1e10) : std::min(step * 2.0, 1e10);

    sol.beta0 = b0_new;
    sol.beta.swap(b_new);
    b_new.resize(k);
    eta.swap(eta_new);
    g.swap(g_new);
    g0 = g0_new;
    f = f_new;
    obj = obj_new;
    if (opts.record_trace) sol.trace.push_back(obj);
    sol.kkt = prob.kkt(sol.beta, g0, g);
  }
  sol.iterations = it;
  sol.objective = obj;
  return sol;
}

// Smallest lambda at which every coefficient is zero for mixing weight gamma
// (gamma is floored at 1e-3 so the ridge end stays finite).
inline double lambda_max(const DesignMatrix& x, std::span<const double> y, double p, double gamma) {
  const double mean = std::max(std::exp(intercept_only(y)), 1e-12);
  const double scale = std::pow(mean, 1.0 - p);
  double best = 0.0;
  for (std::size_t j = 0; j < x.cols; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.rows; ++i) s += x(i, j) * (mean - y[i]);
    best = std::max(best, std::abs(scale * s / static_cast<double>(x.rows)));
  }
  return best / std::max(gamma, 1e-3);
}

// Log-spaced decreasing path from lambda_max to ratio * lambda_max.
inline std::vector<double> lambda_path(double lmax, std::size_t length = 100, double ratio = 1e-4) {
  if (length == 0) throw ParameterError("lambda path length must be positive");
  std::vector<double> path(length);
  if (!(lmax > 0.0)) lmax = 1e-8;
  for (std::size_t i = 0; i < length; ++i) {
    const double t = length == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(length - 1);
    path[i] = lmax * std::pow(ratio, t);
  }
  return path;
}

class GlmModel {
 public:
  GlmModel() = default;
  GlmModel(double beta0, std::vector<double> beta, double lambda, double gamma, double power,
           GlmEncoding encoding)
      : beta0_(beta0),
        beta_(std::move(beta)),
        lambda_(lambda),
        gamma_(gamma),
        power_(power),
        encoding_(std::move(encoding)) {
    if (beta_.size() != encoding_.width()) throw ParameterError("coefficient count differs from encoding width");
  }

  double beta0() const { return beta0_; }
  const std::vector<double>& beta() const { return beta_; }
  double lambda() const { return lambda_; }
  double gamma() const { return gamma_; }
  double power() const { return power_; }
  const GlmEncoding& encoding() const { return encoding_; }
  const std::vector<data::FeatureInfo>& features() const { return encoding_.features(); }

  double linear_predictor(std::span<const double> row) const {
    if (row.size() != encoding_.features().size()) {
      std::ostringstream os;
      os << "feature row has " << row.size() << " values, model expects "
         << encoding_.features().size();
      throw DataError(os.str());
    }
    std::vector<double> z(encoding_.width());
    encoding_.encode_row(row, z);
    double eta = beta0_;
    for (std::size_t j = 0; j < z.size(); ++j) eta += beta_[j] * z[j];
    return eta;
  }

  double predict(std::span<const double> row) const {
    return std::exp(clamp_score(linear_predictor(row)));
  }

  std::vector<double> predict(const data::Dataset& ds) const {
    const DesignMatrix x = encoding_.apply(ds);
    std::vector<double> out(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) {
      double eta = beta0_;
      for (std::size_t j = 0; j < x.cols; ++j) eta += beta_[j] * x(i, j);
      out[i] = std::exp(clamp_score(eta));
    }
    return out;
  }

 private:
  double beta0_ = 0.0;
  std::vector<double> beta_;
  double lambda_ = 0.0;
  double gamma_ = 1.0;
  double power_ = 1.5;
  GlmEncoding encoding_;
};

inline GlmModel glm_fit(const data::Dataset& train, double p, double lambda, double gamma,
                        const GlmSolverOptions& opts = {}) {
  EncodedDesign d = encode_for_glm(train);
  const GlmSolution sol = glm_solve(d.matrix, train.target(), p, lambda, gamma, opts);
  return GlmModel(sol.beta0, sol.beta, lambda, gamma, p, std::move(d.encoding));
}

struct GlmCvConfig {
  std::vector<double> powers = tweedie::PowerGrid::default_values();
  std::vector<double> gammas = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  // Explicit lambda values; when empty a path is built per (p, gamma).
  std::vector<double> lambdas;
  std::size_t path_length = 100;
  double path_min_ratio = 1e-4;
  int folds = 5;
  std::uint64_t seed = 0;
  GlmSolverOptions solver;
};

struct GlmCvCell {
  double power = 0.0;
  double gamma = 0.0;
  double lambda = 0.0;
  double cv_deviance = 0.0;
};

struct GlmPowerChoice {
  double power = 0.0;
  double gamma = 0.0;
  double lambda = 0.0;
  double cv_deviance = 0.0;
  std::optional<double> profile_log_likelihood;
};

struct GlmCvResult {
  GlmModel model;
  double power = 0.0;
  double gamma = 0.0;
  double lambda = 0.0;
  double phi = 0.0;
  double cv_deviance = 0.0;
  std::vector<GlmPowerChoice> per_power;
};

namespace internal {

inline std::vector<double> sorted_path(std::vector<double> v) {
  std::sort(v.begin(), v.end(), std::greater<>());
  return v;
}

// Solves along a decreasing lambda path with warm starts; stops at `upto`.
inline GlmSolution solve_path(const DesignMatrix& x, std::span<const double> y, double p,
                              double gamma, const std::vector<double>& path, std::size_t upto,
                              const GlmSolverOptions& opts) {
  GlmSolution sol;
  for (std::size_t l = 0; l <= upto; ++l) {
    sol = glm_solve(x, y, p, path[l], gamma, opts, l == 0 ? nullptr : &sol);
  }
  return sol;
}

}  // namespace internal

// Five-fold (by default) cross-validated choice of (gamma, lambda) for a
// single power, by mean held-out unit deviance; refit on all of `train`.
inline GlmCvResult glm_cv_select_power(const data::Dataset& train, double p,
                                       const GlmCvConfig& cfg) {
  tweedie::check_power(p);
  if (cfg.gammas.empty()) throw ParameterError("gamma grid must not be empty");
  if (train.rows() < static_cast<std::size_t>(cfg.folds)) {
    throw DataError("fewer training rows than cross-validation folds");
  }
  const auto assignment = resampling::fold_assignment(train.rows(), cfg.folds, cfg.seed);
  const EncodedDesign full = encode_for_glm(train);

  struct FoldData {
    DesignMatrix xtr;
    std::vector<double> ytr;
    DesignMatrix xva;
    std::vector<double> yva;
  };
  std::vector<FoldData> folds;
  for (int k = 0; k < cfg.folds; ++k) {
    std::vector<std::size_t> tr, va;
    for (std::size_t i = 0; i < train.rows(); ++i) (assignment[i] == k ? va : tr).push_back(i);
    const data::Dataset dtr = train.subset(tr);
    const data::Dataset dva = train.subset(va);
    EncodedDesign e = encode_for_glm(dtr);
    FoldData fd;
    fd.xtr = std::move(e.matrix);
    fd.ytr.assign(dtr.target().begin(), dtr.target().end());
    fd.xva = e.encoding.apply(dva);
    fd.yva.assign(dva.target().begin(), dva.target().end());
    folds.push_back(std::move(fd));
  }

  std::optional<GlmCvCell> best;
  std::vector<double> best_path;
  std::size_t best_index = 0;
  for (double gamma : cfg.gammas) {
    const std::vector<double> path =
        cfg.lambdas.empty()
            ? lambda_path(lambda_max(full.matrix, train.target(), p, gamma), cfg.path_length,
                          cfg.path_min_ratio)
            : internal::sorted_path(cfg.lambdas);
    std::vector<double> dev(path.size(), 0.0);
    std::vector<bool> ok(path.size(), true);
    for (const FoldData& fd : folds) {
      GlmSolution sol;
      bool have = false;
      for (std::size_t l = 0; l < path.size(); ++l) {
        if (!ok[l]) continue;
        try {
          sol = glm_solve(fd.xtr, fd.ytr, p, path[l], gamma, cfg.solver, have ? &sol : nullptr);
          have = true;
        } catch (const Error& e) {
          ok[l] = false;
          continue;
        }
        double d = 0.0;
        for (std::size_t i = 0; i < fd.xva.rows; ++i) {
          double eta = sol.beta0;
          for (std::size_t j = 0; j < fd.xva.cols; ++j) eta += sol.beta[j] * fd.xva(i, j);
          d += tweedie::unit_deviance(fd.yva[i], std::exp(clamp_score(eta)), p);
        }
        dev[l] += d / static_cast<double>(std::max<std::size_t>(fd.xva.rows, 1)) /
                  static_cast<double>(folds.size());
      }
    }
    for (std::size_t l = 0; l < path.size(); ++l) {
      if (!ok[l] || !std::isfinite(dev[l])) continue;
      if (!best || dev[l] < best->cv_deviance) {
        best = GlmCvCell{p, gamma, path[l], dev[l]};
        best_path = path;
        best_index = l;
      }
    }
  }
  if (!best) throw NumericError("every GLM cross-validation cell failed");
  const GlmSolution sol = internal::solve_path(full.matrix, train.target(), p, best->gamma,
                                               best_path, best_index, cfg.solver);
  GlmCvResult out;
  out.model = GlmModel(sol.beta0, sol.beta, best->lambda, best->gamma, p, full.encoding);
  out.power = p;
  out.gamma = best->gamma;
  out.lambda = best->lambda;
  out.cv_deviance = best->cv_deviance;
  return out;
}

// Full GLM recipe: cross-validated (gamma, lambda) per power, then the power
// with the highest profile likelihood (dispersion at its MLE) on `train`.
inline GlmCvResult glm_cv_select(const data::Dataset& train, const GlmCvConfig& cfg) {
  const tweedie::PowerGrid grid(cfg.powers);
  std::vector<GlmPowerChoice> per_power;
  auto profile = tweedie::profile_power_select(
      train.target(), grid,
      [&](double p) {
        GlmCvResult r = glm_cv_select_power(train, p, cfg);
        per_power.push_back({p, r.gamma, r.lambda, r.cv_deviance, std::nullopt});
        return r;
      },
      [&](const GlmCvResult& r) { return r.model.predict(train); });
  GlmCvResult out = std::move(profile.model);
  out.phi = profile.phi;
  std::size_t k = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (k < per_power.size() && per_power[k].power == grid.values()[i]) {
      per_power[k].profile_log_likelihood = profile.profile[i];
      ++k;
    }
  }
  out.per_power = std::move(per_power);
  return out;
}

}  // namespace tweedie_conformal::models

#endif  // TWEEDIE_CONFORMAL_GLM_HPP_
