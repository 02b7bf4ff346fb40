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

#include <optional>
#include <vector>

#include "heislab/fock.hpp"
#include "heislab/model.hpp"
#include "heislab/pauli.hpp"
#include "heislab/rng.hpp"

namespace heislab::rut {

enum class LayerKind { U1, U2b, U3 };

/**
 * One sampled insertion layer.
 *
 * U1 is a global boson-number phase exp(-i theta sum_n N_n) with
 * theta ~ U(0, 2pi). U2b is the per-qubit Pauli rotation product keyed to a
 * reference string E_b: exp(-i theta_j P_j^b) on support qubits and
 * exp(-i theta_j X) exp(-i phi_j Y) off support (the non-commuting pair is
 * fixed to (X, Y) for reproducibility), all angles ~ U(0, pi). U3 is the
 * deterministic frequency-cancelling phase prod_n exp(+i omega_tilde_n N_n tau).
 */
struct UnitaryLayer {
  LayerKind kind = LayerKind::U1;
  double theta = 0.0;                                        // U1
  pauli::PauliString e_b;                                    // U2b
  std::vector<double> support_theta;                         // U2b, support qubits ascending
  std::vector<std::pair<double, double>> off_support_angles; // U2b, (theta, phi) ascending
  std::vector<double> omega_tilde;                           // U3
  double tau = 0.0;                                          // U3
};

struct LayerKinds {
  bool u1 = false;
  bool u2b = false;
};

/**
 * Reshaping recipe for one evolution query. tau > 0 requests the physical
 * finite-R circuit with R = round(t / tau) segments and fresh layer samples
 * per segment; tau == 0 requests the effective (R -> infinity) dynamics.
 * When insert_u3 is set the U3 phase is appended on the right of every
 * segment, using the caller-supplied frequency estimates.
 */
struct ReshapePlan {
  LayerKinds kinds;
  std::optional<pauli::PauliString> e_b;  // required when kinds.u2b
  bool insert_u3 = false;
  std::vector<double> omega_tilde;        // required when insert_u3
  double tau = 0.0;

  bool effective() const { return tau == 0.0; }
  std::size_t segments(double t) const;
  void validate() const;
};

/**
 * Symbolic reshaped Hamiltonian: U1 deletes every coupling (unbalanced
 * ladder phases average to zero), U2b keeps exactly the spin terms and
 * couplings whose Pauli string lies in S_b, and pure-boson number terms
 * always survive. Idempotent per kind.
 */
model::HybridHamiltonian effective_hamiltonian(const model::HybridHamiltonian& h,
                                               LayerKinds kinds,
                                               const std::optional<pauli::PauliString>& e_b);

/** Fresh independent angles for one insertion layer. */
UnitaryLayer sample_layer(LayerKind kind, const std::optional<pauli::PauliString>& e_b,
                          RngStream& rng);

/** Deterministic U3 layer from frequency estimates. */
UnitaryLayer make_u3(const std::vector<double>& omega_tilde, double tau);

/** 2x2 matrix of the U2b rotation on one qubit of the layer. */
Eigen::Matrix2cd layer_qubit_matrix(const UnitaryLayer& layer, std::size_t qubit);

/** Apply the layer (or its adjoint) to a dense state in place. */
void apply_layer_in_place(fock::DenseHybridState& state, const UnitaryLayer& layer, bool dagger);

/** Similarity transform m <- U^dag m U for the layer. */
void conjugate_by_layer_in_place(Eigen::MatrixXcd& m, const fock::HybridDims& dims,
                                 const UnitaryLayer& layer);

/**
 * The executable R-segment program of Eq.-7 shape: every segment applies
 * [U3] then the sampled layers, the fixed e^{-iH tau} propagator, and the
 * layer adjoints. Layers are sampled fresh from the caller's stream, so runs
 * are replayable from the stream seed.
 */
struct FiniteRCircuit {
  fock::HybridDims dims;
  Eigen::MatrixXcd segment_propagator;
  ReshapePlan plan;
  std::size_t r = 1;
  double leak_threshold = 1e-6;

  fock::DenseHybridState run(const fock::DenseHybridState& init, RngStream& rng) const;
};

FiniteRCircuit build_finite_r_circuit(const model::HybridHamiltonian& h, const ReshapePlan& plan,
                                      double t, const std::vector<std::size_t>& cutoffs);

/**
 * Dense generator of the ideal (R -> infinity) trotter-scheme dynamics:
 * materialize(effective U2b Hamiltonian) minus sum_n omega_tilde_n N_n.
 */
fock::DenseOperator materialize_effective_trotter(const model::HybridHamiltonian& h,
                                                  const pauli::PauliString& e_b,
                                                  const std::vector<double>& omega_tilde,
                                                  const std::vector<std::size_t>& cutoffs);

struct DeviationPoint {
  double t = 0.0;
  double tau = 0.0;
  std::size_t r = 0;
  double mean_td = 0.0;
  double var_td = 0.0;
  double stderr_td = 0.0;
  std::size_t trials = 0;
};

struct DeviationConfig {
  std::vector<std::size_t> cutoffs;
  pauli::PauliString e_b;
  std::size_t label_index = 0;
  std::vector<double> omega_tilde;  // empty = exact frequencies
  std::size_t trials = 300;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  double leak_threshold = 1e-6;
};

struct DeviationRaw {
  std::size_t point = 0;
  std::size_t trial = 0;
  double trace_distance = 0.0;
};

/**
 * Monte-Carlo estimate of the trace distance between the finite-R
 * trotter-scheme state and the ideal effective state, on a grid of
 * (t, tau) points. Requires trials >= 100. When `raw` is non-null, every
 * per-trial trace distance is appended to it.
 */
std::vector<DeviationPoint> deviation_study(const model::HybridHamiltonian& h,
                                            const std::vector<double>& t_grid,
                                            const std::vector<double>& tau_grid,
                                            const DeviationConfig& cfg,
                                            std::vector<DeviationRaw>* raw = nullptr);

/**
 * Branch-frozen displacement drive of a U2b-reshaped coupling plan: with the
 * spin register frozen in |E_b>_l (off-support qubits in |0>), the
 * instantaneous displacement coefficient of mode n under a sampled layer is
 * Lambda_l^n(theta) = sum_a lambda_a^n <l| U^dag E_a U |l>. Support-qubit
 * factors are deterministic (+-1 for letters of E_b, 0 for mismatches); all
 * randomness enters through off-support letters. The mean over layers is the
 * effective drive sum_{s in S_b} gamma_l^s lambda_s^n.
 */
class BranchDriveModel {
 public:
  BranchDriveModel(const model::HybridHamiltonian& h, const pauli::PauliString& e_b,
                   const pauli::EigenstateLabel& label);

  std::size_t n_modes() const { return mean_drive_.size(); }
  const std::vector<double>& mean_drive() const { return mean_drive_; }
  bool has_noise_terms() const { return !noise_terms_.empty(); }

  /** Draw one layer's angles from `rng` and write the per-mode drive. */
  void sample_drive(RngStream& rng, std::vector<double>& out) const;

 private:
  struct NoiseTerm {
    std::size_t mode;
    double coeff;
    std::vector<std::pair<std::size_t, pauli::Pauli>> off_factors;  // (off index, letter)
  };
  std::size_t n_support_ = 0;
  std::size_t n_off_ = 0;
  std::vector<bool> is_support_;
  std::vector<double> mean_drive_;
  std::vector<NoiseTerm> noise_terms_;
};

}  // namespace heislab::rut
