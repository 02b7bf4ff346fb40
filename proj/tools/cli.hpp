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
#include <string>
#include <vector>

#include "heislab/model.hpp"
#include "heislab/protocols.hpp"

namespace heislab::cli {

struct NoiseConfig {
  double quad_sigma = 0.0;
  double qubit_flip_p = 0.0;
  double prep_offset_re = 0.0;
  double prep_offset_im = 0.0;

  gaussian::SpamNoise to_spam() const;
};

/**
 * Experiment configuration. Parsed from a versioned JSON document with
 * fail-fast validation: unknown keys are rejected at every level, exactly one
 * model source must be given, and a seed is mandatory (resolution order:
 * --seed flag, config "seed", HEISLAB_SEED environment variable).
 */
struct ExperimentConfig {
  int schema_version = 1;

  // model source (exactly one)
  std::optional<std::string> model_name;  // gdm | sbm | holstein | ssh | spin_peierls
  std::size_t model_size = 2;             // named lattice models
  std::optional<std::string> hamiltonian_file;
  std::optional<model::SpectralDensitySpec> spectral;

  std::string scheme = "trotter";
  std::string backend = "gaussian";
  std::string estimator = "single_shot";  // scaling subcommand: single_shot | rfe
  double epsilon = 1e-2;
  double delta = 0.05;
  double tau = 0.0;
  std::size_t k_max = 6;
  std::size_t copies = 1000;  // W
  double n_pt = 1.0;
  std::size_t shots_per_copy = 1;
  NoiseConfig noise;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  std::size_t trials = 100;
  std::size_t threads = 1;
  std::size_t cutoff = 32;  // fock backend / deviation study

  // figure-reproduction grids
  std::string target = "XXI";
  std::size_t target_mode = 0;
  std::vector<double> total_times;
  std::vector<double> taus;
  std::vector<double> t_grid;
  std::vector<double> tau_grid;
  std::vector<double> epsilons;

  static ExperimentConfig from_json(const std::string& text);
  static ExperimentConfig from_file(const std::string& path);
  void validate() const;

  /** Build the configured truth model (seed must be resolved first). */
  model::HybridHamiltonian build_model() const;
  protocols::OracleOptions oracle_options() const;
};

/** Exit codes: 0 ok, 2 config error, 3 resource guard, 4 estimation failure. */
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitResource = 3;
inline constexpr int kExitEstimation = 4;

/**
 * Run one subcommand (learn-spin, learn-omega, learn-coupling, spectrum,
 * full, scaling, deviation), writing result files into cfg.out_dir. Throws
 * heislab errors; main() maps them to exit codes.
 */
void run_subcommand(const std::string& name, const ExperimentConfig& cfg);

/** Map a caught exception to the documented exit code. */
int exit_code_for_current_exception();

}  // namespace heislab::cli
