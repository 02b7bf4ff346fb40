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

#include <complex>
#include <cstdint>
#include <vector>

#include "heislab/rng.hpp"

namespace heislab::gaussian {

using Complex = std::complex<double>;

/** Measured quadrature: X = (b^dag + b)/sqrt(2) or P = i(b^dag - b)/sqrt(2). */
enum class Quadrature { X, P };

// Quadrature convention: [X, P] = i, vacuum variance 1/2 per quadrature,
// coherent-state means <X> = sqrt(2) Re(alpha), <P> = sqrt(2) Im(alpha).

/** State-preparation-and-measurement error model. Defaults are noiseless. */
struct SpamNoise {
  double quad_sigma = 0.0;      // additive Gaussian stddev on quadrature readout
  Complex prep_offset{0.0, 0.0};  // displacement error applied at preparation
  double qubit_flip_p = 0.0;    // binary spin-readout flip probability

  void validate() const;
};

/** One homodyne readout. */
struct HomodyneSample {
  std::size_t mode = 0;
  Quadrature quadrature = Quadrature::X;
  double value = 0.0;
};

/**
 * A product of displaced squeezed states D(alpha_n) S(z_n) |0>, optionally
 * over W entangled copies of the system (the W-copy configuration squeezes
 * the symmetric mode B_n = sum_w b_{n,w} / sqrt(W) and displaces every copy
 * by the same alpha_n, which is exactly the state produced by the linear
 * dynamics this engine models). Exact under displacement channels; no Fock
 * truncation anywhere.
 */
struct GaussianBosonState {
  std::vector<Complex> alpha;  // per-mode displacement (per copy when W > 1)
  std::vector<Complex> z;      // per-mode squeezing, on the symmetric mode when W > 1
  std::size_t copies = 1;      // W

  static GaussianBosonState vacuum(std::size_t n_modes);
  static GaussianBosonState coherent(const std::vector<Complex>& alpha);

  std::size_t n_modes() const { return alpha.size(); }
  /** n_bar = |alpha|^2 + sinh^2 |z| for the given mode. */
  double mean_photons(std::size_t mode) const;

  double quadrature_mean(std::size_t mode, Quadrature q) const;
  /** Marginal variance of a single copy's quadrature (no readout noise). */
  double quadrature_variance(std::size_t mode, Quadrature q) const;
  /** Variance of the symmetric-mode quadrature (equals the above when W = 1). */
  double symmetric_quadrature_variance(std::size_t mode, Quadrature q) const;
};

/**
 * Exact displaced-oscillator step for H_n = Lambda_n (b^dag + b) + omega_n N:
 * alpha_n <- alpha_n e^{-i omega_n t} + (Lambda_n / omega_n)(e^{-i omega_n t} - 1)
 * and the squeezing phase rotates as z_n <- z_n e^{-2 i omega_n t}.
 */
GaussianBosonState evolve_displaced_oscillators(const GaussianBosonState& state,
                                                const std::vector<double>& lambda,
                                                const std::vector<double>& omega, double t);

/**
 * Effective dynamics of the frequency-cancelled (trotter) scheme:
 * alpha_n <- alpha_n - i Lambda_n t, squeezing untouched.
 */
GaussianBosonState evolve_trotter_effective(const GaussianBosonState& state,
                                            const std::vector<double>& lambda, double t);

/**
 * Trotter scheme with residual detuning delta_n = omega_n - omega_tilde_n
 * (the frequency estimate error): the displaced-oscillator step at frequency
 * delta_n, with a sinc-stable delta -> 0 limit equal to evolve_trotter_effective.
 */
GaussianBosonState evolve_trotter_detuned(const GaussianBosonState& state,
                                          const std::vector<double>& lambda,
                                          const std::vector<double>& delta, double t);

/** Free rotation: alpha_n <- alpha_n e^{-i omega_n t}, z_n <- z_n e^{-2 i omega_n t}. */
GaussianBosonState evolve_free(const GaussianBosonState& state,
                               const std::vector<double>& omega, double t);

/**
 * W-copy entangled squeezed vacuum with squeezing z on each symmetric mode.
 * Total photons per mode N_pt = sinh^2 |z|.
 */
GaussianBosonState build_entangled_squeezed(std::size_t n_modes, std::size_t copies, Complex z);

/**
 * Independent homodyne draws of one copy's quadrature. Gaussian with the
 * state's marginal mean/variance plus quad_sigma^2 readout noise.
 */
std::vector<HomodyneSample> sample_homodyne(const GaussianBosonState& state, std::size_t mode,
                                            Quadrature q, std::size_t shots,
                                            const SpamNoise& noise, RngStream& rng);

struct DqsEstimate {
  double x_tilde = 0.0;        // copy-averaged X readout
  double predicted_rmse = 0.0; // engine-convention prediction for this configuration
};

/**
 * Distributed-sensing displacement readout: X_tilde = (1/W) sum_w X_{n,w},
 * averaged over `shots_per_copy` independent preparations. The copy average
 * equals the symmetric-mode quadrature scaled by 1/sqrt(W), so its exact
 * distribution is N(sqrt(2) Re alpha, (Var[X_B] + quad_sigma^2) / W) per
 * preparation. predicted_rmse is sqrt((Var[X_B] + quad_sigma^2)/(W * shots)),
 * which for real z and no noise equals
 * sqrt(1 / (2 W (sqrt(1+N_pt) + sqrt(N_pt))^2)) at shots_per_copy = 1.
 */
DqsEstimate dqs_estimate(const GaussianBosonState& state, std::size_t mode, std::size_t copies,
                         std::size_t shots_per_copy, const SpamNoise& noise, RngStream& rng);

/** The prediction part of dqs_estimate, available without sampling. */
double dqs_predicted_rmse(const GaussianBosonState& state, std::size_t mode,
                          std::size_t shots_per_copy, const SpamNoise& noise);

}  // namespace heislab::gaussian
