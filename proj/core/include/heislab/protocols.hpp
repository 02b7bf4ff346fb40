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
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "heislab/estimators.hpp"
#include "heislab/gaussian.hpp"
#include "heislab/model.hpp"
#include "heislab/pauli.hpp"
#include "heislab/rng.hpp"
#include "heislab/rut.hpp"

namespace heislab::protocols {

enum class Backend { GaussianAnalytic, FockDense };

Backend backend_from_string(const std::string& name);

struct OracleOptions {
  Backend backend = Backend::GaussianAnalytic;
  gaussian::SpamNoise noise;
  std::vector<std::size_t> fock_cutoffs;  // FockDense only
  double leak_threshold = 1e-6;
  /** Diagnostic mode: measurements return exact expectations instead of
   * sampled outcomes (reshaping randomness is still sampled). */
  bool exact_expectations = false;
};

struct Meters {
  double evolution_time = 0.0;
  std::uint64_t shots = 0;
};

/** Boson register preparation for one query. */
struct BosonPrep {
  enum class Kind { Vacuum, Coherent, EntangledSqueezed };
  Kind kind = Kind::Vacuum;
  std::vector<gaussian::Complex> alpha;  // Coherent
  std::size_t copies = 1;                // EntangledSqueezed
  gaussian::Complex z{0.0, 0.0};         // EntangledSqueezed

  static BosonPrep vacuum() { return {}; }
  static BosonPrep coherent(std::vector<gaussian::Complex> alpha);
  static BosonPrep entangled_squeezed(std::size_t copies, gaussian::Complex z);
};

/** Spin register preparation: one labeled eigenstate branch of E_b. */
struct SpinBranch {
  pauli::PauliString e_b;
  std::size_t label = 0;
};

/**
 * Metered query access to an unknown Hamiltonian. Every query is
 * prepare -> evolve-with-plan -> measure, repeated `shots` times, and adds
 * duration x shots (x copies for distributed sensing) to the meters. The
 * hidden Hamiltonian is private; nothing outside this class reads it.
 *
 * Backends: GaussianAnalytic evolves displacements in closed form — exact
 * under the effective (tau = 0) reshaped dynamics for every query, and for
 * finite tau it runs the branch-frozen sampled-drive model of U2b coupling
 * plans (spin and U1 queries are effective-only there). FockDense executes
 * the literal circuits on the truncated composite space.
 */
class EvolutionOracle {
 public:
  EvolutionOracle(model::HybridHamiltonian hidden, OracleOptions opts);

  std::size_t n_qubits() const { return n_qubits_; }
  std::size_t n_modes() const { return n_modes_; }
  Backend backend() const { return opts_.backend; }
  Meters meters() const;

  /**
   * Prepare (|E_b>_{l1} + |E_b>_{l2})/sqrt(2) (x) vacuum, evolve for t, and
   * measure `shots` projective outcomes. which = 1 projects back onto the
   * prepared state, p = (1 + cos(DeltaXi t))/2; which = 2 projects onto the
   * +i combination, p = (1 + sin(DeltaXi t))/2, DeltaXi = Xi_{l1} - Xi_{l2}.
   */
  double pair_survival(const pauli::PauliString& e_b, std::size_t l1, std::size_t l2,
                       int which, const rut::ReshapePlan& plan, double t, std::uint64_t shots,
                       RngStream& rng);

  /**
   * Homodyne samples of one mode after evolving the prepared state under the
   * plan for t. `branch` fixes the spin register on |E_b>_l (absent: |0...0>).
   * When `readout_rng` is given, measurement noise draws come from it instead
   * of `rng` (lets paired studies share readout randomness across plans).
   */
  std::vector<double> homodyne_samples(const std::optional<SpinBranch>& branch,
                                       const BosonPrep& prep, const rut::ReshapePlan& plan,
                                       double t, std::size_t mode, gaussian::Quadrature quad,
                                       std::uint64_t shots, RngStream& rng,
                                       RngStream* readout_rng = nullptr);

  /**
   * Simultaneous multi-mode homodyne: every shot measures the chosen
   * quadrature of all modes at once (they commute), so the meter advances by
   * t x shots total. Returns per-mode sample means.
   */
  std::vector<double> multimode_quadrature_means(const BosonPrep& prep,
                                                 const rut::ReshapePlan& plan, double t,
                                                 gaussian::Quadrature quad,
                                                 std::uint64_t shots, RngStream& rng);

  /**
   * Distributed-sensing readout: W copies prepared in the entangled squeezed
   * state with per-mode photon number N_pt = copies x n_pt, each copy evolved
   * under the plan for t, X averaged over copies (and over shots_per_copy
   * repeated preparations). Meter advances by copies x t x shots_per_copy.
   */
  gaussian::DqsEstimate dqs_xtilde(const SpinBranch& branch, std::size_t mode,
                                   std::size_t copies, double n_pt,
                                   const rut::ReshapePlan& plan, double t,
                                   std::size_t shots_per_copy, RngStream& rng);

 private:
  struct FockContext;
  double branch_eigenvalue_xi(const pauli::PauliString& e_b, std::size_t label) const;
  std::vector<double> branch_drive(const pauli::PauliString& e_b, std::size_t label) const;
  gaussian::GaussianBosonState gaussian_prep(const BosonPrep& prep) const;
  gaussian::GaussianBosonState gaussian_evolve(const gaussian::GaussianBosonState& state,
                                               const std::optional<SpinBranch>& branch,
                                               const rut::ReshapePlan& plan, double t,
                                               RngStream& rng) const;
  void add_meter(double time, std::uint64_t shots);

  model::HybridHamiltonian hidden_;
  OracleOptions opts_;
  std::size_t n_qubits_ = 0;
  std::size_t n_modes_ = 0;
  mutable std::mutex meter_mutex_;
  Meters meters_;
};

struct CoefficientEstimate {
  std::string name;  // "xi:<pauli>" | "lambda:<pauli>:<mode>" | "omega:<mode>"
  double estimate = 0.0;
  double variance = 0.0;           // propagated prediction, not an empirical moment
  std::optional<double> truth;     // attached by the caller who owns the真 model
  std::optional<double> abs_error;
};

struct LearningResult {
  std::string scheme;
  std::vector<CoefficientEstimate> coefficients;
  double total_evolution_time = 0.0;
  std::uint64_t total_shots = 0;
  std::optional<model::HybridHamiltonian> estimated;
  std::vector<std::string> warnings;

  const CoefficientEstimate* find(const std::string& name) const;
};

/** Fill truth/abs_error columns from the model the caller built the oracle with. */
void attach_truth(LearningResult& result, const model::HybridHamiltonian& truth);

struct LearnOptions {
  double epsilon = 1e-2;
  double delta = 0.05;
  double tau = 0.0;           // 0 = effective dynamics
  std::size_t k_max = 6;      // RFE stage cap
  double delta_xi_bound = 12.0;
  double omega_bound = 4.0;
  double sqrt2_lambda_bound = 1.0;
  double coherent_alpha = 1.0;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
};

/**
 * Learn all mode frequencies by RFE on the quadrature signal
 * Z = <X> + i<P> of a freely rotating coherent state under the U1 plan.
 */
LearningResult learn_boson_frequencies(EvolutionOracle& oracle, const LearnOptions& opts);

/**
 * Learn all k-local spin coefficients: for every E_b with |supp| = k, RPE on
 * eigenstate-pair phase differences over a Hamming-distance-1 spanning tree
 * of the 2^k branches, gauge Xi sum to zero (identity coefficient = 0), then
 * solve the Hadamard system. Duplicate estimates from overlapping S_b sets
 * merge by inverse-variance weighting.
 */
LearningResult learn_spin_coefficients(EvolutionOracle& oracle, std::size_t k,
                                       const LearnOptions& opts);

/**
 * Trotter-based coupling learning: for every (E_b, branch, mode), RFE on the
 * signal Z(t) = exp(-i P_mean(t)) of the U2b + U3 plan started from vacuum;
 * the estimated frequency is -sqrt(2) Lambda.
 */
LearningResult learn_couplings_trotter(EvolutionOracle& oracle,
                                       const std::vector<double>& omega_tilde, std::size_t k,
                                       const LearnOptions& opts);

struct DqsOptions {
  std::size_t copies = 1000;  // W
  double n_pt = 1.0;
  std::size_t shots_per_copy = 1;
  double delta = 0.05;
  double tau = 0.0;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  std::vector<pauli::PauliString> eb_filter;  // empty = all of enumerate_eb
};

/**
 * Distributed-sensing coupling learning: per (E_b, branch, mode), evolve the
 * W-copy entangled squeezed state under the U2b plan to t = pi/omega_tilde_n
 * and invert Lambda = -omega_tilde_n X_tilde / (2 sqrt(2)).
 */
LearningResult learn_couplings_dqs(EvolutionOracle& oracle,
                                   const std::vector<double>& omega_tilde, std::size_t k,
                                   const DqsOptions& opts);

struct SpectrumOptions {
  DqsOptions dqs;
  double omega_epsilon = 1e-3;
  double omega_bound = 4.0;
  double delta = 0.05;
  std::uint64_t seed = 1;
};

struct SpectrumRow {
  std::size_t mode = 0;
  double omega_tilde = 0.0;
  double lambda_x = 0.0;     // estimated lambda_X^n
  double lambda_x_sq = 0.0;  // estimated profile value
  double variance = 0.0;
};

struct SpectrumResult {
  std::vector<SpectrumRow> rows;
  double total_evolution_time = 0.0;
  std::uint64_t total_shots = 0;
};

/**
 * Spectral-profile reconstruction of an SBM-type oracle: frequencies by RFE,
 * then the lambda_X^n profile by the DQS scheme restricted to E_b = X.
 */
SpectrumResult learn_spectrum(EvolutionOracle& oracle, const SpectrumOptions& opts);

enum class CouplingScheme { Trotter, Dqs };

CouplingScheme scheme_from_string(const std::string& name);

struct PipelineOptions {
  LearnOptions learn;
  CouplingScheme scheme = CouplingScheme::Trotter;
  DqsOptions dqs;  // used when scheme == Dqs
};

/**
 * Frequencies (at epsilon/10) -> spin coefficients -> couplings, with the
 * failure budget split across stages and meters aggregated.
 */
LearningResult full_pipeline(EvolutionOracle& oracle, std::size_t k,
                             const PipelineOptions& opts);

// ---- Scaling studies (figure reproduction) ----------------------------------

struct ScalingPoint {
  double total_time = 0.0;   // evolution time consumed per full estimate
  double rmse = 0.0;
  std::size_t trials = 0;
  double target_epsilon = 0.0;  // RFE sweeps only
};

/** One trial of a scaling study, for raw-data emission. */
struct ScalingRaw {
  std::size_t point = 0;
  std::size_t trial = 0;
  double total_time = 0.0;
  double error = 0.0;
};

struct ScalingStudy {
  std::vector<ScalingPoint> points;
  std::vector<ScalingRaw> raw;
};

struct SingleShotScalingOptions {
  pauli::PauliString target_eb;   // the coupling Pauli being estimated
  std::size_t mode = 0;
  double tau = 0.0;
  std::vector<double> total_times;
  std::size_t trials = 100;
  std::uint64_t seed = 1;
  gaussian::SpamNoise noise;
  std::size_t threads = 1;
  bool paired_readout = true;  // share readout draws across tau for paired runs
};

/**
 * One-homodyne-shot-per-branch coupling estimator (the ideal-line protocol):
 * Lambda_l = -P/(sqrt(2) t) per branch at t = T / 2^k, Hadamard solve, RMSE
 * against truth across trials. Error is 1/(2t) per branch plus reshaping
 * noise, so the curve tracks the epsilon = 1/(2T) line.
 */
ScalingStudy scaling_single_shot(const model::HybridHamiltonian& truth,
                                 const SingleShotScalingOptions& opts);

struct RfeScalingOptions {
  pauli::PauliString target_eb;
  std::size_t mode = 0;
  double tau = 0.0;
  std::vector<double> epsilons;
  std::size_t k_max = 6;
  double delta = 0.05;
  double sqrt2_lambda_bound = 1.0;
  std::size_t trials = 100;
  std::uint64_t seed = 1;
  gaussian::SpamNoise noise;
  std::size_t threads = 1;
};

/** RMSE-vs-time sweep of the RFE-based trotter estimator at a fixed stage cap. */
ScalingStudy scaling_rfe(const model::HybridHamiltonian& truth,
                         const RfeScalingOptions& opts);

}  // namespace heislab::protocols
