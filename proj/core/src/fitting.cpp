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

#include "heislab/fitting.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "heislab/errors.hpp"

namespace heislab::fitting {

namespace {

void check_positive(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ShapeError("fit: x and y lengths differ");
  for (double v : x)
    if (!(v > 0.0)) throw InvalidArgument("fit: x values must be positive");
  for (double v : y)
    if (!(v > 0.0)) throw InvalidArgument("fit: y values must be positive");
}

double aic_from_rss(double rss, std::size_t n, std::size_t k_params) {
  const double mse = std::max(rss / static_cast<double>(n), 1e-300);
  return static_cast<double>(n) * std::log(mse) + 2.0 * static_cast<double>(k_params);
}

}  // namespace

ScalingFit fit_scaling(const std::vector<double>& x, const std::vector<double>& y,
                       const std::string& x_name, const std::string& y_name) {
  check_positive(x, y);
  const std::size_t n = x.size();
  if (n < 4) throw InvalidArgument("fit_scaling: needs at least 4 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double denom = static_cast<double>(n) * sxx - sx * sx;
  if (denom == 0.0) throw InvalidArgument("fit_scaling: degenerate abscissa");
  ScalingFit fit;
  fit.x_name = x_name;
  fit.y_name = y_name;
  fit.points = n;
  fit.slope = (static_cast<double>(n) * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / static_cast<double>(n);
  double rss = 0.0, tss = 0.0;
  const double y_mean = sy / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double ly = std::log(y[i]);
    const double pred = fit.intercept + fit.slope * std::log(x[i]);
    rss += (ly - pred) * (ly - pred);
    tss += (ly - y_mean) * (ly - y_mean);
  }
  fit.r_squared = tss > 0.0 ? 1.0 - rss / tss : 1.0;
  if (n > 2) {
    const double var = rss / static_cast<double>(n - 2);
    fit.slope_stderr = std::sqrt(var * static_cast<double>(n) / denom);
  }
  return fit;
}

double aic_log_squared(const std::vector<double>& x, const std::vector<double>& y) {
  check_positive(x, y);
  const std::size_t n = x.size();
  double c_log = 0.0;
  std::vector<double> reg(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 1.0)) throw InvalidArgument("aic_log_squared: x must exceed 1");
    reg[i] = std::log(std::pow(std::log(x[i]), 2.0));
    c_log += std::log(y[i]) - reg[i];
  }
  c_log /= static_cast<double>(n);
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double resid = std::log(y[i]) - (c_log + reg[i]);
    rss += resid * resid;
  }
  return aic_from_rss(rss, n, 1);
}

double aic_power_law(const std::vector<double>& x, const std::vector<double>& y,
                     double min_exponent) {
  check_positive(x, y);
  const std::size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double denom = static_cast<double>(n) * sxx - sx * sx;
  double p = (static_cast<double>(n) * sxy - sx * sy) / denom;
  if (p < min_exponent) p = min_exponent;
  const double c_log = (sy - p * sx) / static_cast<double>(n);
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double resid = std::log(y[i]) - (c_log + p * std::log(x[i]));
    rss += resid * resid;
  }
  return aic_from_rss(rss, n, 2);
}

std::string scaling_fit_csv(const ScalingFit& fit) {
  std::ostringstream out;
  char buf[256];
  out << "x,y,slope,intercept,slope_stderr,r_squared,points\n";
  std::snprintf(buf, sizeof(buf), "%s,%s,%.17g,%.17g,%.17g,%.17g,%zu\n", fit.x_name.c_str(),
                fit.y_name.c_str(), fit.slope, fit.intercept, fit.slope_stderr,
                fit.r_squared, fit.points);
  out << buf;
  return out.str();
}

}  // namespace heislab::fitting
