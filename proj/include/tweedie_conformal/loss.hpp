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

#ifndef TWEEDIE_CONFORMAL_LOSS_HPP_
#define TWEEDIE_CONFORMAL_LOSS_HPP_

#include <algorithm>
#include <cmath>

namespace tweedie_conformal::models {

// Scores are clamped to this range before exponentiation.
inline constexpr double kScoreClamp = 30.0;

struct GradHess {
  double gradient = 0.0;
  double hessian = 0.0;
};

inline double clamp_score(double f) {
  return std::clamp(f, -kScoreClamp, kScoreClamp);
}

// Tweedie negative log-likelihood in the log-mean score F, dropping the
// dispersion and the normalizing term:
//   l(y, F) = -y e^{(1-p)F} / (1-p) + e^{(2-p)F} / (2-p).
inline double tweedie_loss(double y, double score, double p) {
  const double f = clamp_score(score);
  return -y * std::exp((1.0 - p) * f) / (1.0 - p) +
         std::exp((2.0 - p) * f) / (2.0 - p);
}

inline GradHess tweedie_loss_grad_hess(double y, double score, double p) {
  const double f = clamp_score(score);
  const double e1 = std::exp((1.0 - p) * f);
  const double e2 = std::exp((2.0 - p) * f);
  return {-y * e1 + e2, -y * (1.0 - p) * e1 + (2.0 - p) * e2};
}

}  // namespace tweedie_conformal::models

#endif  // TWEEDIE_CONFORMAL_LOSS_HPP_
