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

#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "cli.hpp"
#include "heislab/errors.hpp"

int main(int argc, char** argv) {
  CLI::App app{"heislab: Heisenberg-limited spin-boson Hamiltonian learning"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_override;
  std::string backend_override;
  std::uint64_t seed_override = 0;
  bool seed_given = false;
  std::size_t threads_override = 0;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "experiment config JSON")->required();
    sub->add_option("--seed", seed_override, "seed override")
        ->each([&](const std::string&) { seed_given = true; });
    sub->add_option("--out", out_override, "output directory override");
    sub->add_option("--threads", threads_override, "worker thread count");
    sub->add_option("--backend", backend_override, "gaussian | fock");
  };

  std::string scheme_override;
  for (const char* name : {"learn-spin", "learn-omega", "learn-coupling", "spectrum",
                           "full", "scaling", "deviation"}) {
    auto* sub = app.add_subcommand(name);
    add_common(sub);
    if (std::string(name) == "learn-coupling" || std::string(name) == "full")
      sub->add_option("--scheme", scheme_override, "trotter | dqs");
  }

  CLI11_PARSE(app, argc, argv);
  const std::string sub_name = app.get_subcommands().front()->get_name();

  try {
    auto cfg = heislab::cli::ExperimentConfig::from_file(config_path);
    if (seed_given) cfg.seed = seed_override;
    if (!cfg.seed) {
      if (const char* env = std::getenv("HEISLAB_SEED")) cfg.seed = std::stoull(env);
    }
    if (!out_override.empty()) cfg.out_dir = out_override;
    if (!backend_override.empty()) cfg.backend = backend_override;
    if (threads_override > 0) cfg.threads = threads_override;
    if (!scheme_override.empty()) cfg.scheme = scheme_override;
    heislab::cli::run_subcommand(sub_name, cfg);
    return heislab::cli::kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "heislab " << sub_name << ": " << e.what() << "\n";
    return heislab::cli::exit_code_for_current_exception();
  }
}
