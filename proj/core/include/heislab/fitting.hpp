// Copyright 2026 The heislab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace heislab::fitting {

struct ScalingFit {
  std::string x_name = "x";
  std::string y_name = "y";
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double r_squared = 0.0;
  std::size_t points = 0;
};

/**
 * Least squares on (log x, log y). Requires at least four strictly positive
 * points.
 */
ScalingFit fit_scaling(const std::vector<double>& x, const std::vector<double>& y,
                       const std::string& x_name = "x", const std::string& y_name = "y");

/**
 * AIC (in log-y residual space) of the one-parameter model y = c ln^2(x).
 * x must be > 1 so the regressor is positive.
 */
double aic_log_squared(const std::vector<double>& x, const std::vector<double>& y);

/**
 * AIC of the best two-parameter power law y = c x^p with p constrained to
 * p >= min_exponent (the exponent fit is clamped and c refit when the
 * unconstrained optimum violates the bound).
 */
double aic_power_law(const std::vector<double>& x, const std::vector<double>& y,
                     double min_exponent);

std::string scaling_fit_csv(const ScalingFit& fit);

}  // namespace heislab::fitting
