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

#ifndef TWEEDIE_CONFORMAL_ERRORS_HPP_
#define TWEEDIE_CONFORMAL_ERRORS_HPP_

#include <functional>
#include <iostream>
#include <mutex>
#include <stdexcept>
#include <string>

namespace tweedie_conformal {

// Error taxonomy. Every failure raised by the library derives from Error so
// callers (the CLI in particular) can map the category to an exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid argument values (domain violations, bad sizes).
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Malformed, missing or out-of-contract input data.
class DataError : public Error {
 public:
  using Error::Error;
};

// Non-convergence, overflow, or no finite value found.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Inconsistent combination of options (e.g. a weighted score with no spread).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A usage contract between components was broken, e.g. calibration rows
// that were also used for training.
class ContractError : public Error {
 public:
  using Error::Error;
};

// Warnings go through a replaceable sink; the default writes to stderr.
using WarningSink = std::function<void(const std::string&)>;

namespace internal {
inline WarningSink& warning_sink() {
  static WarningSink sink = [](const std::string& msg) {
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    std::cerr << "warning: " << msg << "\n";
  };
  return sink;
}
}  // namespace internal

inline void set_warning_sink(WarningSink sink) {
  internal::warning_sink() = std::move(sink);
}

inline void warn(const std::string& msg) {
  if (internal::warning_sink()) internal::warning_sink()(msg);
}

}  // namespace tweedie_conformal

#endif  // TWEEDIE_CONFORMAL_ERRORS_HPP_
