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

#include "heislab/gaussian.hpp"

#include <cmath>

#include "heislab/errors.hpp"

namespace heislab::gaussian {

namespace {

void check_modes(const GaussianBosonState& state, const std::vector<double>& v,
                 const char* what) {
  if (v.size() != state.n_modes())
    throw ShapeError(std::string(what) + ": per-mode vector length does not match state");
}

Complex phase(double angle) { return Complex(std::cos(angle), std::sin(angle)); }

// Marginal quadrature variance of a squeezed vacuum S(z)|0> along X or P:
// Var[X] = (cosh 2r - sinh 2r cos phi)/2, Var[P] = (cosh 2r + sinh 2r cos phi)/2
// for z = r e^{i phi}.
double squeezed_variance(Complex z, Quadrature q) {
  const double r = std::abs(z);
  if (r == 0.0) return 0.5;
  const double cos_phi = std::cos(std::arg(z));
  const double sign = q == Quadrature::X ? -1.0 : 1.0;
  return 0.5 * (std::cosh(2.0 * r) + sign * std::sinh(2.0 * r) * cos_phi);
}

}  // namespace

void SpamNoise::validate() const {
  if (quad_sigma < 0.0) throw InvalidArgument("SpamNoise: quad_sigma must be >= 0");
  if (qubit_flip_p < 0.0 || qubit_flip_p >= 0.5)
    throw InvalidArgument("SpamNoise: qubit_flip_p must lie in [0, 0.5)");
}

GaussianBosonState GaussianBosonState::vacuum(std::size_t n_modes) {
  GaussianBosonState s;
  s.alpha.assign(n_modes, Complex(0.0, 0.0));
  s.z.assign(n_modes, Complex(0.0, 0.0));
  return s;
}

GaussianBosonState GaussianBosonState::coherent(const std::vector<Complex>& alpha) {
  GaussianBosonState s = vacuum(alpha.size());
  s.alpha = alpha;
  return s;
}

double GaussianBosonState::mean_photons(std::size_t mode) const {
  const double sh = std::sinh(std::abs(z.at(mode)));
  return std::norm(alpha.at(mode)) + sh * sh;
}

double GaussianBosonState::quadrature_mean(std::size_t mode, Quadrature q) const {
  const Complex a = alpha.at(mode);
  return std::sqrt(2.0) * (q == Quadrature::X ? a.real() : a.imag());
}

double GaussianBosonState::symmetric_quadrature_variance(std::size_t mode, Quadrature q) const {
  return squeezed_variance(z.at(mode), q);
}

double GaussianBosonState::quadrature_variance(std::size_t mode, Quadrature q) const {
  const double sym = symmetric_quadrature_variance(mode, q);
  if (copies <= 1) return sym;
  // One copy sees 1/W of the squeezed symmetric mode and (W-1)/W of vacuum.
  const double w = static_cast<double>(copies);
  return sym / w + 0.5 * (w - 1.0) / w;
}

GaussianBosonState evolve_displaced_oscillators(const GaussianBosonState& state,
                                                const std::vector<double>& lambda,
                                                const std::vector<double>& omega, double t) {
  check_modes(state, lambda, "evolve_displaced_oscillators");
  check_modes(state, omega, "evolve_displaced_oscillators");
  GaussianBosonState out = state;
  for (std::size_t n = 0; n < state.n_modes(); ++n) {
    if (!(omega[n] > 0.0))
      throw InvalidArgument("evolve_displaced_oscillators: omega must be positive");
    const Complex rot = phase(-omega[n] * t);
    out.alpha[n] = state.alpha[n] * rot + (lambda[n] / omega[n]) * (rot - 1.0);
    out.z[n] = state.z[n] * phase(-2.0 * omega[n] * t);
  }
  return out;
}

GaussianBosonState evolve_trotter_effective(const GaussianBosonState& state,
                                            const std::vector<double>& lambda, double t) {
  check_modes(state, lambda, "evolve_trotter_effective");
  GaussianBosonState out = state;
  for (std::size_t n = 0; n < state.n_modes(); ++n) {
    out.alpha[n] -= Complex(0.0, lambda[n] * t);
  }
  return out;
}

GaussianBosonState evolve_trotter_detuned(const GaussianBosonState& state,
                                          const std::vector<double>& lambda,
                                          const std::vector<double>& delta, double t) {
  check_modes(state, lambda, "evolve_trotter_detuned");
  check_modes(state, delta, "evolve_trotter_detuned");
  GaussianBosonState out = state;
  for (std::size_t n = 0; n < state.n_modes(); ++n) {
    const double half = 0.5 * delta[n] * t;
    // (lambda/delta)(e^{-i delta t} - 1) = -i lambda t sinc(half) e^{-i half}
    const double sinc = half == 0.0 ? 1.0 : std::sin(half) / half;
    const Complex drive = Complex(0.0, -lambda[n] * t * sinc) * phase(-half);
    out.alpha[n] = state.alpha[n] * phase(-delta[n] * t) + drive;
    out.z[n] = state.z[n] * phase(-2.0 * delta[n] * t);
  }
  return out;
}

GaussianBosonState evolve_free(const GaussianBosonState& state, const std::vector<double>& omega,
                               double t) {
  check_modes(state, omega, "evolve_free");
  GaussianBosonState out = state;
  for (std::size_t n = 0; n < state.n_modes(); ++n) {
    out.alpha[n] = state.alpha[n] * phase(-omega[n] * t);
    out.z[n] = state.z[n] * phase(-2.0 * omega[n] * t);
  }
  return out;
}

GaussianBosonState build_entangled_squeezed(std::size_t n_modes, std::size_t copies, Complex z) {
  if (copies < 1) throw InvalidArgument("build_entangled_squeezed: copies must be >= 1");
  if (n_modes < 1) throw InvalidArgument("build_entangled_squeezed: n_modes must be >= 1");
  GaussianBosonState s = GaussianBosonState::vacuum(n_modes);
  s.copies = copies;
  for (std::size_t n = 0; n < n_modes; ++n) s.z[n] = z;
  return s;
}

std::vector<HomodyneSample> sample_homodyne(const GaussianBosonState& state, std::size_t mode,
                                            Quadrature q, std::size_t shots,
                                            const SpamNoise& noise, RngStream& rng) {
  if (mode >= state.n_modes()) throw ShapeError("sample_homodyne: mode index out of range");
  if (shots < 1) throw InvalidArgument("sample_homodyne: shots must be >= 1");
  noise.validate();
  const double mean = state.quadrature_mean(mode, q);
  const double var = state.quadrature_variance(mode, q) + noise.quad_sigma * noise.quad_sigma;
  const double sigma = std::sqrt(var);
  std::vector<HomodyneSample> out;
  out.reserve(shots);
  for (std::size_t i = 0; i < shots; ++i) {
    out.push_back({mode, q, rng.normal(mean, sigma)});
  }
  return out;
}

double dqs_predicted_rmse(const GaussianBosonState& state, std::size_t mode,
                          std::size_t shots_per_copy, const SpamNoise& noise) {
  const double var_b = state.symmetric_quadrature_variance(mode, Quadrature::X) +
                       noise.quad_sigma * noise.quad_sigma;
  return std::sqrt(var_b / (static_cast<double>(state.copies) *
                            static_cast<double>(shots_per_copy)));
}

DqsEstimate dqs_estimate(const GaussianBosonState& state, std::size_t mode, std::size_t copies,
                         std::size_t shots_per_copy, const SpamNoise& noise, RngStream& rng) {
  if (mode >= state.n_modes()) throw ShapeError("dqs_estimate: mode index out of range");
  if (copies != state.copies) throw ShapeError("dqs_estimate: copy count does not match state");
  if (shots_per_copy < 1) throw InvalidArgument("dqs_estimate: shots_per_copy must be >= 1");
  noise.validate();
  const double w = static_cast<double>(state.copies);
  const double mean = state.quadrature_mean(mode, Quadrature::X);
  // X_tilde = X_B / sqrt(W) plus the W-averaged readout noise.
  const double var_per_prep =
      (state.symmetric_quadrature_variance(mode, Quadrature::X) +
       noise.quad_sigma * noise.quad_sigma) / w;
  const double sigma = std::sqrt(var_per_prep);
  double acc = 0.0;
  for (std::size_t s = 0; s < shots_per_copy; ++s) acc += rng.normal(mean, sigma);
  DqsEstimate est;
  est.x_tilde = acc / static_cast<double>(shots_per_copy);
  est.predicted_rmse = dqs_predicted_rmse(state, mode, shots_per_copy, noise);
  return est;
}

}  // namespace heislab::gaussian
