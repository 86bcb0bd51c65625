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

// Small one-dimensional solvers shared by the dispersion estimator and the
// deviance interval inversion.

#ifndef TWEEDIE_CONFORMAL_NUMERIC_HPP_
#define TWEEDIE_CONFORMAL_NUMERIC_HPP_

#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>

namespace tweedie_conformal::numeric {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct MaximizeResult {
  double x = 0.0;
  double value = -kInf;
  int iterations = 0;
};

// Golden-section search for the maximum of a unimodal `f` on [lo, hi].
// Stops once the bracket is narrower than `abs_tol`.
template <typename F>
MaximizeResult golden_section_maximize(F&& f, double lo, double hi,
                                       double abs_tol, int max_iter = 500) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  int iter = 0;
  while (b - a > abs_tol && iter < max_iter) {
    ++iter;
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  MaximizeResult out;
  out.iterations = iter;
  if (fc >= fd) {
    out.x = c;
    out.value = fc;
  } else {
    out.x = d;
    out.value = fd;
  }
  return out;
}

struct RootResult {
  double x = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Bisection for g(x) = 0 on [lo, hi] where g(lo) and g(hi) have opposite
// signs (or one is zero). Terminates when the bracket is below `abs_tol`.
template <typename G>
RootResult bisect(G&& g, double lo, double hi, double abs_tol,
                  int max_iter = 200) {
  double glo = g(lo);
  RootResult out;
  if (glo == 0.0) {
    out.x = lo;
    out.converged = true;
    return out;
  }
  for (int i = 0; i < max_iter; ++i) {
    out.iterations = i + 1;
    const double mid = 0.5 * (lo + hi);
    if (hi - lo <= abs_tol || mid == lo || mid == hi) {
      out.x = mid;
      out.converged = true;
      return out;
    }
    const double gm = g(mid);
    if (gm == 0.0) {
      out.x = mid;
      out.converged = true;
      return out;
    }
    if ((gm < 0.0) == (glo < 0.0)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
  }
  out.x = 0.5 * (lo + hi);
  out.converged = hi - lo <= abs_tol;
  return out;
}

// log(exp(a) + exp(b)) without overflow.
inline double log_add_exp(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  if (a < b) std::swap(a, b);
  return a + std::log1p(std::exp(b - a));
}

}  // namespace tweedie_conformal::numeric

#endif  // TWEEDIE_CONFORMAL_NUMERIC_HPP_
