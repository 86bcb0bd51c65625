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

// Tweedie compound Poisson-Gamma mathematics for power 1 < p < 2: density
// (series evaluation), unit deviance, variance function, dispersion MLE,
// power selection by profile likelihood, and exact sampling.

#ifndef TWEEDIE_CONFORMAL_TWEEDIE_HPP_
#define TWEEDIE_CONFORMAL_TWEEDIE_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "tweedie_conformal/errors.hpp"
#include "tweedie_conformal/numeric.hpp"

namespace tweedie_conformal::tweedie {

inline void check_power(double p) {
  if (!(p > 1.0 && p < 2.0)) {
    std::ostringstream os;
    os << "Tweedie power must lie in (1, 2), got " << p;
    throw ParameterError(os.str());
  }
}

inline void check_mean(double mu) {
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    std::ostringstream os;
    os << "Tweedie mean must be positive and finite, got " << mu;
    throw ParameterError(os.str());
  }
}

// (mu, phi, p) of a compound Poisson-Gamma law. var(Y) = phi * mu^p.
class TweedieParams {
 public:
  TweedieParams(double mu, double phi, double p) : mu_(mu), phi_(phi), p_(p) {
    check_mean(mu);
    if (!(phi > 0.0) || !std::isfinite(phi)) {
      throw ParameterError("Tweedie dispersion must be positive and finite");
    }
    check_power(p);
  }

  double mu() const { return mu_; }
  double phi() const { return phi_; }
  double p() const { return p_; }

  // Poisson rate of the jump count.
  double poisson_rate() const {
    return std::pow(mu_, 2.0 - p_) / (phi_ * (2.0 - p_));
  }
  // Shape and scale of each Gamma jump.
  double gamma_shape() const { return (2.0 - p_) / (p_ - 1.0); }
  double gamma_scale() const {
    return phi_ * (p_ - 1.0) * std::pow(mu_, p_ - 1.0);
  }

 private:
  double mu_;
  double phi_;
  double p_;
};

// Strictly increasing candidate powers, all inside (1, 2).
class PowerGrid {
 public:
  PowerGrid() : PowerGrid(default_values()) {}
  explicit PowerGrid(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw ParameterError("power grid must not be empty");
    for (std::size_t i = 0; i < values_.size(); ++i) {
      check_power(values_[i]);
      if (i > 0 && !(values_[i] > values_[i - 1])) {
        throw ParameterError("power grid must be strictly increasing");
      }
    }
  }

  static std::vector<double> default_values() {
    std::vector<double> v;
    for (int i = 1; i <= 9; ++i) v.push_back(1.0 + 0.1 * i);
    return v;
  }

  const std::vector<double>& values() const { return values_; }
  std::size_t size() const { return values_.size(); }

 private:
  std::vector<double> values_;
};

// V(mu) = mu^p.
inline double variance_function(double mu, double p) {
  check_mean(mu);
  check_power(p);
  return std::pow(mu, p);
}

// d(y, mu) = 2 (y mu^{1-p}/(p-1) - y^{2-p}/((p-1)(2-p)) + mu^{2-p}/(2-p)).
inline double unit_deviance(double y, double mu, double p) {
  check_mean(mu);
  check_power(p);
  if (!(y >= 0.0)) throw ParameterError("unit_deviance requires y >= 0");
  const double q1 = p - 1.0;
  const double q2 = 2.0 - p;
  const double y_term = y > 0.0 ? std::pow(y, q2) / (q1 * q2) : 0.0;
  const double d = 2.0 * (y * std::pow(mu, -q1) / q1 - y_term +
                          std::pow(mu, q2) / q2);
  // Rounding can leave a tiny negative value near y == mu.
  return d > 0.0 ? d : 0.0;
}

// Caches log(j!) and lgamma(j*a) for one power so that repeated series
// evaluations (likelihood sums, dispersion search) avoid recomputing them.
// Not thread-safe; create one per thread.
class SeriesEvaluator {
 public:
  static constexpr std::size_t kMaxTerms = 100000;
  static constexpr std::size_t kTableSize = 65536;
  // Terms below exp(kLogDrop) times the running sum are dropped.
  static constexpr double kLogDrop = -39.14394658089878;  // log(1e-17)

  explicit SeriesEvaluator(double p) : p_(p), a_((2.0 - p) / (p - 1.0)) {
    check_power(p);
    lfact_.push_back(0.0);  // j = 0 placeholder
    lgamma_ja_.push_back(0.0);
  }

  double p() const { return p_; }

  // log c(y, phi, p) for y > 0.
  double log_c(double y, double phi) {
    const double log_z = a_ * std::log(y) - (1.0 + a_) * std::log(phi) -
                         std::log(2.0 - p_) - a_ * std::log(p_ - 1.0);
    const double j_star = std::pow(y, 2.0 - p_) / (phi * (2.0 - p_));
    if (!(j_star < 1e15)) throw_no_convergence(y, phi, 1, 1);
    const std::size_t j_max =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(j_star)));
    auto log_term = [&](std::size_t j) {
      const double jj = static_cast<double>(j);
      if (j >= kTableSize) {
        return jj * log_z - std::lgamma(jj + 1.0) - std::lgamma(jj * a_);
      }
      ensure(j);
      return jj * log_z - lfact_[j] - lgamma_ja_[j];
    };
    const double peak = log_term(j_max);
    // Accumulate relative to the peak: sum of exp(term - peak).
    double rel_sum = 1.0;
    std::size_t used = 1;
    std::size_t hi = j_max;
    std::size_t lo = j_max;
    bool up_done = false;
    bool down_done = j_max == 1;
    while (!(up_done && down_done)) {
      if (used >= kMaxTerms) throw_no_convergence(y, phi, lo, hi);
      if (!up_done) {
        ++hi;
        const double t = log_term(hi) - peak;
        rel_sum += std::exp(t);
        ++used;
        if (t < kLogDrop + std::log(rel_sum)) up_done = true;
      }
      if (!down_done) {
        --lo;
        const double t = log_term(lo) - peak;
        rel_sum += std::exp(t);
        ++used;
        if (lo == 1 || t < kLogDrop + std::log(rel_sum)) down_done = true;
      }
    }
    return peak + std::log(rel_sum) - std::log(y);
  }

  double log_density(double y, double mu, double phi) {
    if (!(y >= 0.0)) throw ParameterError("log_density requires y >= 0");
    const double q2 = 2.0 - p_;
    const double mu_2p = std::pow(mu, q2);
    if (y == 0.0) return -mu_2p / (phi * q2);
    const double kernel =
        (y * std::pow(mu, 1.0 - p_) / (1.0 - p_) - mu_2p / q2) / phi;
    return kernel + log_c(y, phi);
  }

  // Sum of log densities over paired (y, mu) vectors.
  double log_likelihood(std::span<const double> y, std::span<const double> mu,
                        double phi) {
    double total = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      total += log_density(y[i], mu[i], phi);
    }
    return total;
  }

 private:
  void ensure(std::size_t j) {
    while (lfact_.size() <= j) {
      const double jj = static_cast<double>(lfact_.size());
      lfact_.push_back(lfact_.back() + std::log(jj));
      lgamma_ja_.push_back(std::lgamma(jj * a_));
    }
  }

  [[noreturn]] void throw_no_convergence(double y, double phi, std::size_t lo,
                                         std::size_t hi) const {
    std::ostringstream os;
    os << "Tweedie series did not converge for y=" << y << ", phi=" << phi
       << ", p=" << p_ << " (terms j in [" << lo << ", " << hi << "], budget "
       << kMaxTerms << ")";
    throw NumericError(os.str());
  }

  double p_;
  double a_;
  std::vector<double> lfact_;
  std::vector<double> lgamma_ja_;
};

// log p_Y(y | mu, phi, p).
inline double log_density(double y, const TweedieParams& params) {
  SeriesEvaluator eval(params.p());
  return eval.log_density(y, params.mu(), params.phi());
}

struct DispersionFit {
  double phi = 0.0;
  double log_likelihood = 0.0;
};

namespace internal {
inline void check_paired(std::span<const double> y, std::span<const double> mu,
                         std::size_t min_len) {
  if (y.size() != mu.size()) {
    throw ParameterError("target and mean vectors differ in length");
  }
  if (y.size() < min_len) {
    std::ostringstream os;
    os << "need at least " << min_len << " observations, got " << y.size();
    throw ParameterError(os.str());
  }
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!(y[i] >= 0.0) || !std::isfinite(y[i])) {
      throw ParameterError("targets must be finite and nonnegative");
    }
    check_mean(mu[i]);
  }
}
}  // namespace internal

// Maximum-likelihood dispersion for fixed means and power. The search runs on
// log(phi) inside [1e-8, 1e8]: a coarse log grid brackets the maximum and
// golden-section refines it to 1e-6 relative precision.
inline DispersionFit mle_dispersion_fit(std::span<const double> y,
                                        std::span<const double> mu, double p) {
  check_power(p);
  internal::check_paired(y, mu, 2);
  constexpr double kLogMin = -18.420680743952367;  // log(1e-8)
  constexpr double kLogMax = 18.420680743952367;
  SeriesEvaluator eval(p);
  auto objective = [&](double log_phi) {
    try {
      const double v = eval.log_likelihood(y, mu, std::exp(log_phi));
      return std::isfinite(v) ? v : -numeric::kInf;
    } catch (const NumericError&) {
      return -numeric::kInf;
    }
  };

  // Pearson moment estimate seeds the bracket.
  double moment = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double r = y[i] - mu[i];
    moment += r * r / std::pow(mu[i], p);
  }
  moment /= static_cast<double>(y.size());
  double center = std::clamp(std::log(std::max(moment, 1e-8)), kLogMin, kLogMax);

  constexpr double kStep = 1.151292546497023;  // log(10) / 2
  constexpr int kHalfWidth = 6;
  std::vector<double> xs;
  std::vector<double> fs;
  double lo_edge = std::max(kLogMin, center - kHalfWidth * kStep);
  double hi_edge = std::min(kLogMax, center + kHalfWidth * kStep);
  for (double x = lo_edge; x <= hi_edge + 1e-12; x += kStep) {
    xs.push_back(x);
    fs.push_back(objective(x));
  }
  // Extend outward while the best point sits on an open edge.
  for (int guard = 0; guard < 64; ++guard) {
    const auto best = std::max_element(fs.begin(), fs.end()) - fs.begin();
    if (best == 0 && xs.front() > kLogMin + 1e-12) {
      const double x = std::max(kLogMin, xs.front() - kStep);
      xs.insert(xs.begin(), x);
      fs.insert(fs.begin(), objective(x));
    } else if (best == static_cast<long>(xs.size()) - 1 &&
               xs.back() < kLogMax - 1e-12) {
      const double x = std::min(kLogMax, xs.back() + kStep);
      xs.push_back(x);
      fs.push_back(objective(x));
    } else {
      break;
    }
  }
  const auto best =
      static_cast<std::size_t>(std::max_element(fs.begin(), fs.end()) - fs.begin());
  if (!std::isfinite(fs[best])) {
    throw NumericError("dispersion likelihood is non-finite over the whole search range");
  }
  const double a = xs[best > 0 ? best - 1 : best];
  const double b = xs[best + 1 < xs.size() ? best + 1 : best];
  numeric::MaximizeResult refined{xs[best], fs[best], 0};
  if (b > a) {
    refined = numeric::golden_section_maximize(objective, a, b, 1e-6);
    if (!(refined.value >= fs[best])) refined = {xs[best], fs[best], 0};
  }
  return {std::exp(refined.x), refined.value};
}

inline double mle_dispersion(std::span<const double> y,
                             std::span<const double> mu, double p) {
  return mle_dispersion_fit(y, mu, p).phi;
}

// One compound Poisson-Gamma draw.
template <typename Urbg>
double sample_one(const TweedieParams& params, Urbg& rng) {
  std::poisson_distribution<std::int64_t> count(params.poisson_rate());
  const std::int64_t n = count(rng);
  if (n == 0) return 0.0;
  std::gamma_distribution<double> total(static_cast<double>(n) * params.gamma_shape(),
                                        params.gamma_scale());
  return total(rng);
}

template <typename Urbg>
std::vector<double> sample_cpg(const TweedieParams& params, std::size_t count,
                               Urbg& rng) {
  if (count == 0) throw ParameterError("sample count must be positive");
  std::vector<double> out(count);
  for (auto& v : out) v = sample_one(params, rng);
  return out;
}

template <typename Model>
struct ProfileResult {
  double power = 0.0;
  double phi = 0.0;
  double log_likelihood = 0.0;
  Model model;
  // Per grid point; nullopt where fitting failed.
  std::vector<std::optional<double>> profile;
};

// Profile likelihood over a power grid. `fit(p)` trains a model for power p;
// `fitted(model)` returns its mean predictions on the same training rows whose
// targets are `y`. Failed powers are skipped with a warning.
template <typename Fit, typename Fitted>
auto profile_power_select(std::span<const double> y, const PowerGrid& grid,
                          Fit&& fit, Fitted&& fitted)
    -> ProfileResult<decltype(fit(1.5))> {
  using Model = decltype(fit(1.5));
  std::optional<ProfileResult<Model>> best;
  std::vector<std::optional<double>> profile;
  std::string last_error;
  for (double p : grid.values()) {
    try {
      Model model = fit(p);
      const std::vector<double> mu = fitted(model);
      const DispersionFit disp = mle_dispersion_fit(y, mu, p);
      if (!std::isfinite(disp.log_likelihood)) {
        throw NumericError("non-finite profile likelihood");
      }
      profile.emplace_back(disp.log_likelihood);
      if (!best || disp.log_likelihood > best->log_likelihood) {
        best = ProfileResult<Model>{p, disp.phi, disp.log_likelihood,
                                    std::move(model), {}};
      }
    } catch (const Error& e) {
      std::ostringstream os;
      os << "power " << p << " skipped: " << e.what();
      last_error = os.str();
      warn(last_error);
      profile.emplace_back(std::nullopt);
    }
  }
  if (!best) {
    throw NumericError("profile likelihood failed for every power (" +
                       last_error + ")");
  }
  best->profile = std::move(profile);
  return std::move(*best);
}

}  // namespace tweedie_conformal::tweedie

#endif  // TWEEDIE_CONFORMAL_TWEEDIE_HPP_
