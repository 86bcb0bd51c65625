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

#ifndef TWEEDIE_CONFORMAL_HPP_
#define TWEEDIE_CONFORMAL_HPP_

#include "tweedie_conformal/conformal.hpp"
#include "tweedie_conformal/csv.hpp"
#include "tweedie_conformal/dataset.hpp"
#include "tweedie_conformal/errors.hpp"
#include "tweedie_conformal/evaluation.hpp"
#include "tweedie_conformal/gbm.hpp"
#include "tweedie_conformal/glm.hpp"
#include "tweedie_conformal/loss.hpp"
#include "tweedie_conformal/model_io.hpp"
#include "tweedie_conformal/numeric.hpp"
#include "tweedie_conformal/predictor.hpp"
#include "tweedie_conformal/resampling.hpp"
#include "tweedie_conformal/synthetic.hpp"
#include "tweedie_conformal/tweedie.hpp"

#endif  // TWEEDIE_CONFORMAL_HPP_
