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

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "heislab/pauli.hpp"

namespace heislab::model {

/**
 * A spin-boson Hamiltonian
 *
 *   H = sum_a xi_a E_a  +  sum_n omega_n b_n^dag b_n
 *     + sum_{a,n} lambda_a^n E_a (b_n^dag + b_n)
 *
 * where E_a are Pauli strings. Coupling coefficients multiply the bare
 * ladder combination (b^dag + b) = sqrt(2) X; this is the convention under
 * which the displaced-oscillator formulas used throughout the library hold
 * (alpha gains (Lambda/omega)(e^{-i omega t} - 1), <P> = -sqrt(2) Lambda t).
 *
 * `spin_terms` is the shared Pauli dictionary: couplings refer to entries by
 * index, and a Pauli that appears only in the interaction is stored with
 * xi = 0. The identity string is allowed as a term (constant offsets such as
 * the "1" in Holstein's (1 - Z_i) couplings); its spin coefficient is a
 * global phase and is excluded from learnability claims.
 */
struct HybridHamiltonian {
  struct SpinTerm {
    pauli::PauliString op;
    double xi = 0.0;
  };
  struct Coupling {
    std::size_t term = 0;  // index into spin_terms
    std::size_t mode = 0;
    double lambda = 0.0;
  };

  std::size_t n_qubits = 0;
  std::size_t locality = 0;  // declared k
  std::vector<SpinTerm> spin_terms;
  std::vector<double> mode_freqs;
  std::vector<Coupling> couplings;

  std::size_t n_modes() const { return mode_freqs.size(); }

  /** Index of `op` in spin_terms, inserting a xi = 0 entry if absent. */
  std::size_t term_index(const pauli::PauliString& op);
  std::optional<std::size_t> find_term(const pauli::PauliString& op) const;

  double xi_of(const pauli::PauliString& op) const;
  double lambda_of(const pauli::PauliString& op, std::size_t mode) const;

  /** Throws InvalidArgument/ShapeError if any structural invariant fails. */
  void validate() const;

  std::string to_json() const;
  static HybridHamiltonian from_json(const std::string& text);
};

/**
 * Lorentzian-type bath spectral density
 *
 *   J(omega) = eta * omega / ((omega^2 - Omega^2)^2 + gamma^2 omega^2)
 *
 * discretized over [0, omega_cut] into n_modes bins.
 */
struct SpectralDensitySpec {
  double eta = 0.01;
  double gamma = 1.0;
  double big_omega = 2.0;
  double omega_cut = 4.0;
  std::size_t n_modes = 50;

  double density(double omega) const;
  void validate() const;
};

/** One discretized bath mode: amplitude Lambda_n and centroid frequency omega_n. */
struct DiscretizedMode {
  double lambda = 0.0;
  double omega = 0.0;
};

/**
 * Bin-integral discretization: Lambda_n^2 is the integral of J over bin n and
 * omega_n the J-weighted centroid, both via adaptive quadrature (relative
 * tolerance 1e-10).
 */
std::vector<DiscretizedMode> discretize_spectral_density(const SpectralDensitySpec& spec);

/**
 * Generalized Dicke model: 3 qubits, 1 mode with omega = 1, all 27 weight-2
 * strings, xi_a ~ U(0.5, 1.5) and lambda_a ~ U(0.01, 0.03).
 */
HybridHamiltonian build_gdm(std::uint64_t rng_seed);

/**
 * Spin-boson model: 1 qubit with terms {X, Y, Z}, xi_a ~ U(0.5, 1.5), bath
 * modes from `spec` and lambda_a^n = kappa_a * Lambda_n with
 * kappa_a ~ U(0.5, 1.5).
 */
HybridHamiltonian build_sbm(const SpectralDensitySpec& spec, std::uint64_t rng_seed);

enum class NamedModel { Holstein, Ssh, SpinPeierls };

NamedModel named_model_from_string(const std::string& name);

/** Sampling ranges for the named-model constructors. */
struct NamedModelParams {
  std::pair<double, double> xi_range{0.5, 1.5};
  std::pair<double, double> lambda_range{0.01, 0.03};
  std::pair<double, double> omega_range{0.5, 1.5};
};

/**
 * Jordan-Wigner forms of the 1D Holstein, SSH and Spin-Peierls chains on
 * `size` >= 2 sites (open boundary). Spin-1/2 operators are expanded into
 * Pauli strings with the 1/4 factors absorbed into the coefficients, and the
 * quadrature couplings of the Spin-Peierls model carry the 1/sqrt(2) from
 * X = (b^dag + b)/sqrt(2).
 */
HybridHamiltonian build_named_model(NamedModel which, std::size_t size,
                                    const NamedModelParams& params, std::uint64_t rng_seed);

}  // namespace heislab::model
