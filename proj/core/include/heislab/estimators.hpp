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
#include <functional>
#include <string>
#include <vector>

#include "heislab/errors.hpp"

namespace heislab::estimators {

using Complex = std::complex<double>;

/**
 * Shots needed so an empirical mean of unit-variance data lands within eta of
 * the true mean except with probability delta (Chernoff bound):
 * ceil((2 / eta^2) ln(2 / delta)).
 */
std::uint64_t chernoff_shots(double eta, double delta);

struct StageLog {
  std::size_t stage = 0;
  double t = 0.0;
  std::uint64_t shots = 0;
  double raw_phase = 0.0;
  double window_lo = 0.0;
  double window_hi = 0.0;
  bool accepted = false;
  double estimate = 0.0;
};

struct EstimationReport {
  double estimate = 0.0;
  double target_epsilon = 0.0;
  /** Consistency-window guarantee of the deepest accepted stage. */
  double achieved_epsilon = 0.0;
  double total_evolution_time = 0.0;
  std::uint64_t total_shots = 0;
  bool capped = false;  // ladder stopped by the stage cap, not by target_epsilon
  std::vector<StageLog> stages;
};

/** Ladder inconsistency: a stage phase fell outside the inherited window. */
class EstimationFailure : public Error {
 public:
  EstimationFailure(const std::string& msg, std::vector<StageLog> stages)
      : Error(msg), stages(std::move(stages)) {}
  std::vector<StageLog> stages;
};

/**
 * Probability oracle of the RPE pair-state protocol: given an evolution time
 * and a shot budget, returns the empirical means of the two outcome
 * probabilities p1(t) = (1 + cos(Delta t))/2 and p2(t) = (1 + sin(Delta t))/2.
 */
using PhaseProbOracle =
    std::function<std::pair<double, double>(double t, std::uint64_t shots)>;

/**
 * Robust phase estimation: doubling ladder t_j = 2^j t0 with t0
 * = 1/(2 prior_bound), K = ceil(log2(pi / (2 epsilon t0))) stages, per-stage
 * majority shots chernoff_shots(1/4, delta/(2K)) for each of the two
 * observables, and a 1/3-window consistency check at every stage. The stage
 * phase is atan2(2 p2_hat - 1, 2 p1_hat - 1). Caller guarantees
 * |Delta| <= prior_bound. Total evolution time is O(1/epsilon).
 */
EstimationReport rpe(const PhaseProbOracle& oracle, double epsilon, double delta,
                     double prior_bound);

/** One oracle response: a unit-modulus signal plus its resource cost. */
struct SignalSample {
  Complex z{1.0, 0.0};
  std::uint64_t shots = 0;
  double evolution_time = 0.0;
};

/**
 * Signal oracle contract: sample(t, eta, delta) returns Z(t) with |Z| = 1 and
 * |Z(t) - e^{-i theta t}| <= eta with probability at least 1 - delta,
 * reporting the evolution time and measurement count it consumed.
 */
struct SignalOracle {
  std::function<SignalSample(double t, double eta, double delta)> sample;
};

/**
 * Robust frequency estimation: the same doubling ladder driven by
 * Z(t_j) directly, with stage phase -arg Z(t_j) unwrapped inside the
 * inherited window. Stages are capped at j <= k_max; when the cap binds the
 * report is marked capped and achieved_epsilon reflects the 2^-k_max floor.
 * Measurement count is polylog(1/epsilon).
 */
EstimationReport rfe(const SignalOracle& oracle, double epsilon, double delta,
                     double prior_bound, std::size_t k_max);

/** Z = exp(-i mean(samples)); the trotter-scheme signal. */
Complex signal_from_p_mean(const std::vector<double>& p_samples);

struct QuadratureSignal {
  Complex z{1.0, 0.0};
  double modulus = 0.0;  // |x + i p| before normalization, ~ sqrt(2)|alpha|
};

/** Z = (x + i p)/|x + i p| with the modulus kept as a diagnostic. */
QuadratureSignal signal_from_quadratures(double x_mean, double p_mean);

/** Serialize stage logs as CSV (stage, t, shots, raw_phase, window_lo, window_hi, accepted). */
std::string stage_log_csv(const std::vector<StageLog>& stages);

}  // namespace heislab::estimators
