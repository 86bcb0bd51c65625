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

// Split conformal prediction intervals for nonnegative targets.
//
// A fitted mean function mu(x) (and, for the locally weighted kinds, a spread
// model) is applied to a calibration set disjoint from its training rows.
// Non-conformity scores are ranked there, and the conformal quantile is
// inverted back to an interval in target units, truncated at zero.
//
// Every score kind is written as a signed "raw" score r(y) that increases in
// y and vanishes at y = mu:
//
//   pearson                   (y - mu) / mu^{p/2}
//   deviance                  sgn(y - mu) sqrt(d(y, mu))
//   anscombe                  (y^{1-p/3} - mu^{1-p/3}) / mu^{p/6}
//   unstandardized            y - mu
//   locally_weighted_pearson  (y - mu) / (mu^{p/2} rho(x))
//   lei_locally_weighted      (y - mu) / sigma(x)
//
// Symmetric intervals use |r| and the ceil((n+1)(1-alpha))-th smallest
// calibration score q, giving {y >= 0 : -q <= r(y) <= q}. Asymmetric
// intervals use the floor((alpha/2)(n+1))-th and ceil((1-alpha/2)(n+1))-th
// smallest raw scores. Out-of-range ranks become -inf / +inf.

#ifndef TWEEDIE_CONFORMAL_CONFORMAL_HPP_
#define TWEEDIE_CONFORMAL_CONFORMAL_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>
#include "tweedie_conformal/csv.hpp"
#include "tweedie_conformal/dataset.hpp"
#include "tweedie_conformal/errors.hpp"
#include "tweedie_conformal/numeric.hpp"
#include "tweedie_conformal/predictor.hpp"
#include "tweedie_conformal/resampling.hpp"
#include "tweedie_conformal/tweedie.hpp"

namespace tweedie_conformal::conformal {

using numeric::kInf;

enum class ResidualKind {
  pearson,
  deviance,
  anscombe,
  unstandardized,
  locally_weighted_pearson,
  lei_locally_weighted,
};

inline constexpr ResidualKind kAllKinds[] = {
    ResidualKind::pearson,        ResidualKind::deviance,
    ResidualKind::anscombe,       ResidualKind::unstandardized,
    ResidualKind::locally_weighted_pearson, ResidualKind::lei_locally_weighted,
};

inline std::string to_string(ResidualKind k) {
  switch (k) {
    case ResidualKind::pearson: return "pearson";
    case ResidualKind::deviance: return "deviance";
    case ResidualKind::anscombe: return "anscombe";
    case ResidualKind::unstandardized: return "unstandardized";
    case ResidualKind::locally_weighted_pearson: return "locally_weighted_pearson";
    case ResidualKind::lei_locally_weighted: return "lei_locally_weighted";
  }
  return "?";
}

inline ResidualKind parse_kind(const std::string& s) {
  for (ResidualKind k : kAllKinds) {
    if (to_string(k) == s) return k;
  }
  throw ParameterError("unknown residual kind '" + s + "'");
}

inline bool needs_spread(ResidualKind k) {
  return k == ResidualKind::locally_weighted_pearson || k == ResidualKind::lei_locally_weighted;
}

inline models::SpreadTarget spread_target(ResidualKind k) {
  return k == ResidualKind::lei_locally_weighted ? models::SpreadTarget::absolute
                                                 : models::SpreadTarget::pearson;
}

enum class Mode { symmetric, asymmetric };

inline std::string to_string(Mode m) { return m == Mode::symmetric ? "symmetric" : "asymmetric"; }

inline Mode parse_mode(const std::string& s) {
  if (s == "symmetric") return Mode::symmetric;
  if (s == "asymmetric") return Mode::asymmetric;
  throw ParameterError("unknown interval mode '" + s + "'");
}

inline void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("alpha must lie in (0, 1)");
}

struct IntervalSpec {
  double alpha = 0.05;
  Mode mode = Mode::symmetric;

  IntervalSpec() = default;
  IntervalSpec(double a, Mode m = Mode::symmetric) : alpha(a), mode(m) { check_alpha(a); }
};

// [lo, hi] with 0 <= lo <= hi; hi may be +inf. An asymmetric interval whose
// upper quantile lies below every attainable score is empty.
struct PredictionInterval {
  double lo = 0.0;
  double hi = kInf;
  bool empty = false;

  static PredictionInterval make_empty() { return {0.0, 0.0, true}; }

  bool contains(double y) const { return !empty && y >= lo && y <= hi; }
  bool finite() const { return std::isfinite(hi); }
  double width() const { return empty ? 0.0 : hi - lo; }
};

namespace internal {
inline void check_spread(ResidualKind kind, std::optional<double> spread) {
  if (!needs_spread(kind)) return;
  if (!spread) {
    throw ConfigError("residual kind '" + to_string(kind) + "' requires a spread estimate");
  }
  if (!(*spread > 0.0) || !std::isfinite(*spread)) {
    throw ParameterError("spread estimate must be positive and finite");
  }
}
}  // namespace internal

// Signed raw score r(y).
inline double raw_score(ResidualKind kind, double y, double mu, double p,
                        std::optional<double> spread = std::nullopt) {
  tweedie::check_mean(mu);
  tweedie::check_power(p);
  if (!(y >= 0.0)) throw ParameterError("scores require y >= 0");
  internal::check_spread(kind, spread);
  switch (kind) {
    case ResidualKind::pearson:
      return (y - mu) / std::pow(mu, p / 2.0);
    case ResidualKind::deviance: {
      const double r = std::sqrt(tweedie::unit_deviance(y, mu, p));
      return y < mu ? -r : r;
    }
    case ResidualKind::anscombe: {
      const double e = 1.0 - p / 3.0;
      return (std::pow(y, e) - std::pow(mu, e)) / std::pow(mu, p / 6.0);
    }
    case ResidualKind::unstandardized:
      return y - mu;
    case ResidualKind::locally_weighted_pearson:
      return (y - mu) / (std::pow(mu, p / 2.0) * *spread);
    case ResidualKind::lei_locally_weighted:
      return (y - mu) / *spread;
  }
  return 0.0;
}

// Non-conformity score: |r(y)| in symmetric mode, r(y) in asymmetric mode.
inline double score(ResidualKind kind, double y, double mu, double p,
                    std::optional<double> spread = std::nullopt, Mode mode = Mode::symmetric) {
  const double r = raw_score(kind, y, mu, p, spread);
  return mode == Mode::symmetric ? std::abs(r) : r;
}

// Rank k = ceil((n+1)(1-alpha)); the k-th smallest of the sorted scores, or
// +inf when k > n.
inline double conformal_quantile(std::span<const double> sorted_scores, double alpha) {
  check_alpha(alpha);
  const double n = static_cast<double>(sorted_scores.size());
  const auto k = static_cast<std::size_t>(std::ceil((n + 1.0) * (1.0 - alpha) - 1e-12));
  if (k == 0) return sorted_scores.empty() ? kInf : sorted_scores.front();
  if (k > sorted_scores.size()) return kInf;
  return sorted_scores[k - 1];
}

inline std::size_t conformal_rank(std::size_t n, double alpha) {
  check_alpha(alpha);
  return static_cast<std::size_t>(
      std::ceil((static_cast<double>(n) + 1.0) * (1.0 - alpha) - 1e-12));
}

struct QuantilePair {
  double lower = -kInf;
  double upper = kInf;
};

// floor((alpha/2)(n+1))-th and ceil((1-alpha/2)(n+1))-th smallest of the
// sorted raw scores, with -inf for rank 0 and +inf for rank > n.
inline QuantilePair asymmetric_quantiles(std::span<const double> sorted_scores, double alpha) {
  check_alpha(alpha);
  const double n1 = static_cast<double>(sorted_scores.size()) + 1.0;
  const auto kl = static_cast<std::size_t>(std::floor(alpha / 2.0 * n1 + 1e-12));
  const auto kr = static_cast<std::size_t>(std::ceil((1.0 - alpha / 2.0) * n1 - 1e-12));
  QuantilePair q;
  q.lower = kl == 0 ? -kInf : sorted_scores[std::min(kl, sorted_scores.size()) - 1];
  q.upper = kr > sorted_scores.size() || kr == 0 ? kInf : sorted_scores[kr - 1];
  return q;
}

namespace internal {

inline double root_tolerance(double mu) { return 1e-9 * (1.0 + mu); }

// Smallest y in [0, mu] with d(y, mu) <= target (d decreases on [0, mu]).
inline double deviance_left(double mu, double p, double target) {
  if (target >= tweedie::unit_deviance(0.0, mu, p)) return 0.0;
  if (target <= 0.0) return mu;
  auto g = [&](double y) { return tweedie::unit_deviance(y, mu, p) - target; };
  const auto r = numeric::bisect(g, 0.0, mu, root_tolerance(mu), 200);
  return r.x;
}

// Largest y >= mu with d(y, mu) <= target (d increases on [mu, inf)).
inline double deviance_right(double mu, double p, double target) {
  if (target <= 0.0) return mu;
  double hi = 2.0 * mu + 1.0;
  int doublings = 0;
  while (tweedie::unit_deviance(hi, mu, p) < target) {
    hi *= 2.0;
    if (++doublings > 2000 || !std::isfinite(hi)) return kInf;
  }
  auto g = [&](double y) { return tweedie::unit_deviance(y, mu, p) - target; };
  const auto r = numeric::bisect(g, mu, hi, root_tolerance(mu), 200);
  return r.x;
}

// Solves r(y) = t for a kind whose raw score is affine in y with slope 1/s.
inline double affine_inverse(double mu, double s, double t) { return mu + t * s; }

// Smallest y >= 0 with r(y) >= t, or nullopt if r(y) < t for all y >= 0
// (only possible for t = +inf, handled by the caller).
inline double lower_end(ResidualKind kind, double mu, double p, std::optional<double> spread,
                        double t) {
  if (t == -kInf) return 0.0;
  double y = 0.0;
  switch (kind) {
    case ResidualKind::pearson:
      y = affine_inverse(mu, std::pow(mu, p / 2.0), t);
      break;
    case ResidualKind::locally_weighted_pearson:
      y = affine_inverse(mu, std::pow(mu, p / 2.0) * *spread, t);
      break;
    case ResidualKind::unstandardized:
      y = affine_inverse(mu, 1.0, t);
      break;
    case ResidualKind::lei_locally_weighted:
      y = affine_inverse(mu, *spread, t);
      break;
    case ResidualKind::anscombe: {
      const double e = 1.0 - p / 3.0;
      const double base = std::pow(mu, e) + t * std::pow(mu, p / 6.0);
      y = base <= 0.0 ? 0.0 : std::pow(base, 3.0 / (3.0 - p));
      break;
    }
    case ResidualKind::deviance:
      y = t >= 0.0 ? deviance_right(mu, p, t * t) : deviance_left(mu, p, t * t);
      break;
  }
  return std::max(y, 0.0);
}

// Largest y with r(y) <= t; negative when no y >= 0 qualifies.
inline double upper_end(ResidualKind kind, double mu, double p, std::optional<double> spread,
                        double t) {
  if (t == kInf) return kInf;
  switch (kind) {
    case ResidualKind::pearson:
      return affine_inverse(mu, std::pow(mu, p / 2.0), t);
    case ResidualKind::locally_weighted_pearson:
      return affine_inverse(mu, std::pow(mu, p / 2.0) * *spread, t);
    case ResidualKind::unstandardized:
      return affine_inverse(mu, 1.0, t);
    case ResidualKind::lei_locally_weighted:
      return affine_inverse(mu, *spread, t);
    case ResidualKind::anscombe: {
      const double e = 1.0 - p / 3.0;
      const double base = std::pow(mu, e) + t * std::pow(mu, p / 6.0);
      return base < 0.0 ? -1.0 : std::pow(base, 3.0 / (3.0 - p));
    }
    case ResidualKind::deviance: {
      if (t >= 0.0) return deviance_right(mu, p, t * t);
      if (t * t > tweedie::unit_deviance(0.0, mu, p)) return -1.0;
      return deviance_left(mu, p, t * t);
    }
  }
  return kInf;
}

}  // namespace internal

// {y >= 0 : lower <= r(y) <= upper}. r is increasing in y, so the set is an
// interval; it is truncated at zero and may be empty.
inline PredictionInterval invert_raw(ResidualKind kind, double mu, double p, double lower,
                                     double upper, std::optional<double> spread = std::nullopt) {
  tweedie::check_mean(mu);
  tweedie::check_power(p);
  internal::check_spread(kind, spread);
  if (std::isnan(lower) || std::isnan(upper) || lower > upper) {
    throw ParameterError("quantile bounds must satisfy lower <= upper");
  }
  const double hi = internal::upper_end(kind, mu, p, spread, upper);
  if (hi < 0.0) return PredictionInterval::make_empty();
  const double lo = internal::lower_end(kind, mu, p, spread, lower);
  if (lo > hi) return PredictionInterval::make_empty();
  return {lo, hi, false};
}

// Symmetric interval {y >= 0 : |r(y)| <= q}.
inline PredictionInterval invert_interval(ResidualKind kind, double mu, double q, double p,
                                          std::optional<double> spread = std::nullopt) {
  if (std::isnan(q) || q < 0.0) throw ParameterError("conformal quantile must be nonnegative");
  if (q == kInf) {
    tweedie::check_mean(mu);
    internal::check_spread(kind, spread);
    return {0.0, kInf, false};
  }
  return invert_raw(kind, mu, p, -q, q, spread);
}

// Asymmetric interval {y >= 0 : qL <= r(y) <= qR}.
inline PredictionInterval invert_interval(ResidualKind kind, double mu, QuantilePair q, double p,
                                          std::optional<double> spread = std::nullopt) {
  return invert_raw(kind, mu, p, q.lower, q.upper, spread);
}

// Scores of the calibration rows, sorted ascending, together with everything
// needed to turn a quantile back into intervals. Immutable once built.
class CalibrationScores {
 public:
  CalibrationScores(ResidualKind kind, Mode mode, double power, std::vector<double> scores,
                    std::shared_ptr<const models::SpreadModel> spread = nullptr)
      : kind_(kind), mode_(mode), power_(power), scores_(std::move(scores)), spread_(std::move(spread)) {
    tweedie::check_power(power);
    if (scores_.empty()) throw ParameterError("calibration needs at least one score");
    for (double s : scores_) {
      if (std::isnan(s)) throw NumericError("calibration score is NaN");
      if (mode_ == Mode::symmetric && s < 0.0) {
        throw ParameterError("symmetric calibration scores must be nonnegative");
      }
    }
    std::stable_sort(scores_.begin(), scores_.end());
    if (needs_spread(kind_) && !spread_) {
      throw ConfigError("residual kind '" + to_string(kind_) + "' requires a spread model");
    }
  }

  ResidualKind kind() const { return kind_; }
  Mode mode() const { return mode_; }
  double power() const { return power_; }
  std::size_t size() const { return scores_.size(); }
  std::span<const double> scores() const { return scores_; }
  const models::SpreadModel* spread_model() const { return spread_.get(); }

  double quantile(double alpha) const {
    if (mode_ != Mode::symmetric) throw ConfigError("symmetric quantile requested from raw scores");
    return conformal_quantile(scores_, alpha);
  }

  QuantilePair quantiles(double alpha) const {
    if (mode_ != Mode::asymmetric) throw ConfigError("asymmetric quantiles requested from absolute scores");
    return asymmetric_quantiles(scores_, alpha);
  }

  // Interval for a point with predicted mean mu and spread (if used).
  PredictionInterval interval(double mu, std::optional<double> spread, double alpha) const {
    if (mode_ == Mode::symmetric) return invert_interval(kind_, mu, quantile(alpha), power_, spread);
    return invert_interval(kind_, mu, quantiles(alpha), power_, spread);
  }

 private:
  ResidualKind kind_;
  Mode mode_;
  double power_;
  std::vector<double> scores_;
  std::shared_ptr<const models::SpreadModel> spread_;
};

// Computes the calibration scores of every row of `calibration`. The mean
// predictor and the spread model must not have seen any of those rows.
inline CalibrationScores calibrate(ResidualKind kind, const models::Predictor& predictor,
                                   std::shared_ptr<const models::SpreadModel> spread,
                                   const data::Dataset& calibration, const IntervalSpec& spec) {
  check_alpha(spec.alpha);
  if (calibration.rows() == 0) throw DataError("calibration set is empty");
  if (needs_spread(kind)) {
    if (!spread) {
      throw ConfigError("residual kind '" + to_string(kind) + "' requires a spread model");
    }
    if (spread->target() != spread_target(kind)) {
      throw ConfigError("spread model estimates '" + models::to_string(spread->target()) +
                        "' residuals but '" + to_string(kind) + "' needs '" +
                        models::to_string(spread_target(kind)) + "'");
    }
    if (spread->provenance().overlaps(calibration)) {
      throw ContractError("spread model was trained on rows that are in the calibration set");
    }
  } else {
    spread = nullptr;
  }
  if (predictor.provenance().overlaps(calibration)) {
    throw ContractError("predictor was trained on rows that are in the calibration set");
  }
  const auto mu = predictor.predict_mean(calibration);
  std::vector<double> rho;
  if (spread) rho = spread->predict(calibration);
  const double p = predictor.power();
  const auto y = calibration.target();
  std::vector<double> s(calibration.rows());
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = score(kind, y[i], mu[i], p, spread ? std::optional<double>(rho[i]) : std::nullopt, spec.mode);
  }
  return CalibrationScores(kind, spec.mode, p, std::move(s), std::move(spread));
}

inline PredictionInterval predict_interval(const CalibrationScores& calib,
                                           const models::Predictor& predictor,
                                           std::span<const double> x, const IntervalSpec& spec) {
  const double mu = predictor.predict_mean(x);
  std::optional<double> rho;
  if (const auto* sm = calib.spread_model()) rho = sm->predict(x);
  return calib.interval(mu, rho, spec.alpha);
}

struct IntervalBatch {
  std::vector<double> mu;
  std::vector<PredictionInterval> intervals;
};

inline IntervalBatch predict_intervals(const CalibrationScores& calib,
                                       const models::Predictor& predictor,
                                       const data::Dataset& rows, const IntervalSpec& spec) {
  IntervalBatch out;
  out.mu = predictor.predict_mean(rows);
  std::vector<double> rho;
  if (const auto* sm = calib.spread_model()) rho = sm->predict(rows);
  out.intervals.reserve(rows.rows());
  // Quantiles are looked up once for the batch.
  if (calib.mode() == Mode::symmetric) {
    const double q = calib.quantile(spec.alpha);
    for (std::size_t i = 0; i < rows.rows(); ++i) {
      out.intervals.push_back(invert_interval(
          calib.kind(), out.mu[i], q, calib.power(),
          rho.empty() ? std::nullopt : std::optional<double>(rho[i])));
    }
  } else {
    const QuantilePair q = calib.quantiles(spec.alpha);
    for (std::size_t i = 0; i < rows.rows(); ++i) {
      out.intervals.push_back(invert_interval(
          calib.kind(), out.mu[i], q, calib.power(),
          rho.empty() ? std::nullopt : std::optional<double>(rho[i])));
    }
  }
  return out;
}

// Disjoint uniformly random index sets of sizes n1 and n2 drawn from 0..n-1.
struct IndexSplit {
  std::vector<std::size_t> first;
  std::vector<std::size_t> second;
};

inline IndexSplit split_indices(std::size_t n, std::size_t n1, std::size_t n2, std::uint64_t seed) {
  auto parts = resampling::split_sizes(n, {n1, n2}, seed);
  return {std::move(parts[0]), std::move(parts[1])};
}

// One exported interval row.
struct IntervalRecord {
  std::uint64_t row_id = 0;
  double mu = 0.0;
  PredictionInterval interval;
  ResidualKind kind = ResidualKind::pearson;
  double alpha = 0.05;
  Mode mode = Mode::symmetric;
};

inline std::string intervals_to_csv(const std::vector<IntervalRecord>& rows) {
  std::ostringstream os;
  os << "row_id,mu_hat,lo,hi,kind,alpha,mode\n";
  for (const auto& r : rows) {
    os << r.row_id << ',' << csv::format_double(r.mu) << ','
       << (r.interval.empty ? std::string("NA") : csv::format_double(r.interval.lo)) << ','
       << (r.interval.empty ? std::string("NA") : csv::format_double(r.interval.hi)) << ','
       << to_string(r.kind) << ',' << csv::format_double(r.alpha) << ',' << to_string(r.mode)
       << '\n';
  }
  return os.str();
}

// JSON rows; an infinite upper end is written as null.
inline nlohmann::json intervals_to_json(const std::vector<IntervalRecord>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json j;
    j["row_id"] = r.row_id;
    j["mu_hat"] = r.mu;
    j["lo"] = r.interval.empty ? nlohmann::json(nullptr) : nlohmann::json(r.interval.lo);
    j["hi"] = r.interval.empty || !r.interval.finite() ? nlohmann::json(nullptr)
                                                       : nlohmann::json(r.interval.hi);
    j["empty"] = r.interval.empty;
    j["kind"] = to_string(r.kind);
    j["alpha"] = r.alpha;
    j["mode"] = to_string(r.mode);
    arr.push_back(j);
  }
  return arr;
}

}  // namespace tweedie_conformal::conformal

#endif  // TWEEDIE_CONFORMAL_CONFORMAL_HPP_
