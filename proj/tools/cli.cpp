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

#include "cli.hpp"

#include <filesystem>
#include <set>
#include <sstream>

#include "json.hpp"

#include "heislab/errors.hpp"
#include "heislab/estimators.hpp"
#include "heislab/fitting.hpp"
#include "heislab/report_io.hpp"
#include "heislab/rut.hpp"

namespace heislab::cli {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key()))
      throw ConfigError("unknown key '" + it.key() + "' in " + where);
  }
}

template <typename T>
void read_field(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) {
    try {
      out = obj.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
    }
  }
}

}  // namespace

gaussian::SpamNoise NoiseConfig::to_spam() const {
  gaussian::SpamNoise spam;
  spam.quad_sigma = quad_sigma;
  spam.qubit_flip_p = qubit_flip_p;
  spam.prep_offset = gaussian::Complex(prep_offset_re, prep_offset_im);
  spam.validate();
  return spam;
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  reject_unknown(j, {"schema_version", "model", "scheme", "backend", "estimator", "epsilon",
                     "delta", "tau", "k_max", "copies", "n_pt", "shots_per_copy", "noise",
                     "seed", "out", "trials", "threads", "cutoff", "target", "target_mode",
                     "total_times", "taus", "t_grid", "tau_grid", "epsilons"},
                 "config");
  ExperimentConfig cfg;
  if (!j.contains("schema_version"))
    throw ConfigError("config is missing 'schema_version'");
  read_field(j, "schema_version", cfg.schema_version);
  if (cfg.schema_version != 1)
    throw ConfigError("unsupported schema_version " + std::to_string(cfg.schema_version));

  if (!j.contains("model")) throw ConfigError("config is missing 'model'");
  const json& m = j.at("model");
  reject_unknown(m, {"name", "size", "file", "spectral"}, "model");
  int sources = 0;
  if (m.contains("name")) {
    cfg.model_name = m.at("name").get<std::string>();
    ++sources;
  }
  read_field(m, "size", cfg.model_size);
  if (m.contains("file")) {
    cfg.hamiltonian_file = m.at("file").get<std::string>();
    ++sources;
  }
  if (m.contains("spectral")) {
    const json& s = m.at("spectral");
    reject_unknown(s, {"eta", "gamma", "Omega", "omega_cut", "n_modes"}, "model.spectral");
    model::SpectralDensitySpec spec;
    read_field(s, "eta", spec.eta);
    read_field(s, "gamma", spec.gamma);
    read_field(s, "Omega", spec.big_omega);
    read_field(s, "omega_cut", spec.omega_cut);
    read_field(s, "n_modes", spec.n_modes);
    cfg.spectral = spec;
    ++sources;
  }
  if (sources != 1) throw ConfigError("config needs exactly one model source, got " +
                                      std::to_string(sources));

  read_field(j, "scheme", cfg.scheme);
  read_field(j, "backend", cfg.backend);
  read_field(j, "estimator", cfg.estimator);
  read_field(j, "epsilon", cfg.epsilon);
  read_field(j, "delta", cfg.delta);
  read_field(j, "tau", cfg.tau);
  read_field(j, "k_max", cfg.k_max);
  read_field(j, "copies", cfg.copies);
  read_field(j, "n_pt", cfg.n_pt);
  read_field(j, "shots_per_copy", cfg.shots_per_copy);
  if (j.contains("noise")) {
    const json& noise = j.at("noise");
    reject_unknown(noise, {"quad_sigma", "qubit_flip_p", "prep_offset_re", "prep_offset_im"},
                   "noise");
    read_field(noise, "quad_sigma", cfg.noise.quad_sigma);
    read_field(noise, "qubit_flip_p", cfg.noise.qubit_flip_p);
    read_field(noise, "prep_offset_re", cfg.noise.prep_offset_re);
    read_field(noise, "prep_offset_im", cfg.noise.prep_offset_im);
  }
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  read_field(j, "out", cfg.out_dir);
  read_field(j, "trials", cfg.trials);
  read_field(j, "threads", cfg.threads);
  read_field(j, "cutoff", cfg.cutoff);
  read_field(j, "target", cfg.target);
  read_field(j, "target_mode", cfg.target_mode);
  read_field(j, "total_times", cfg.total_times);
  read_field(j, "taus", cfg.taus);
  read_field(j, "t_grid", cfg.t_grid);
  read_field(j, "tau_grid", cfg.tau_grid);
  read_field(j, "epsilons", cfg.epsilons);
  return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  return from_json(report_io::read_file(path));
}

void ExperimentConfig::validate() const {
  if (!seed)
    throw ConfigError("no seed: provide --seed, config \"seed\", or HEISLAB_SEED");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (!(delta > 0.0) || delta >= 1.0) throw ConfigError("delta must be in (0, 1)");
  if (tau < 0.0) throw ConfigError("tau must be >= 0");
  if (trials < 1) throw ConfigError("trials must be >= 1");
  noise.to_spam();
  (void)protocols::backend_from_string(backend);
  (void)protocols::scheme_from_string(scheme);
  if (estimator != "single_shot" && estimator != "rfe")
    throw ConfigError("estimator must be single_shot or rfe");
  if (model_name && *model_name != "gdm" && *model_name != "sbm")
    (void)model::named_model_from_string(*model_name);
}

model::HybridHamiltonian ExperimentConfig::build_model() const {
  if (hamiltonian_file)
    return model::HybridHamiltonian::from_json(report_io::read_file(*hamiltonian_file));
  if (spectral) return model::build_sbm(*spectral, *seed);
  if (*model_name == "gdm") return model::build_gdm(*seed);
  if (*model_name == "sbm") return model::build_sbm(model::SpectralDensitySpec{}, *seed);
  return model::build_named_model(model::named_model_from_string(*model_name), model_size,
                                  model::NamedModelParams{}, *seed);
}

protocols::OracleOptions ExperimentConfig::oracle_options() const {
  protocols::OracleOptions opts;
  opts.backend = protocols::backend_from_string(backend);
  opts.noise = noise.to_spam();
  if (opts.backend == protocols::Backend::FockDense) {
    const auto truth = build_model();
    opts.fock_cutoffs.assign(truth.n_modes(), cutoff);
  }
  return opts;
}

namespace {

protocols::LearnOptions learn_options(const ExperimentConfig& cfg) {
  protocols::LearnOptions opts;
  opts.epsilon = cfg.epsilon;
  opts.delta = cfg.delta;
  opts.tau = cfg.tau;
  opts.k_max = cfg.k_max;
  opts.seed = *cfg.seed;
  opts.threads = cfg.threads;
  return opts;
}

void write_result(const std::filesystem::path& dir, const std::string& stem,
                  const protocols::LearningResult& result) {
  report_io::write_file((dir / (stem + ".json")).string(),
                        report_io::learning_result_json(result));
  report_io::write_file((dir / (stem + ".csv")).string(),
                        report_io::learning_result_csv(result));
}

std::string raw_scaling_csv(const protocols::ScalingStudy& study) {
  std::ostringstream out;
  out << "point,trial,total_time,error\n";
  for (const auto& row : study.raw) {
    out << row.point << ',' << row.trial << ',' << report_io::fmt(row.total_time) << ','
        << report_io::fmt(row.error) << '\n';
  }
  return out.str();
}

std::string raw_deviation_csv(const std::vector<rut::DeviationRaw>& raw) {
  std::ostringstream out;
  out << "point,trial,trace_distance\n";
  for (const auto& row : raw) {
    out << row.point << ',' << row.trial << ',' << report_io::fmt(row.trace_distance)
        << '\n';
  }
  return out.str();
}

std::vector<double> learned_frequencies(protocols::EvolutionOracle& oracle,
                                        const ExperimentConfig& cfg) {
  protocols::LearnOptions opts = learn_options(cfg);
  opts.epsilon = cfg.epsilon / 10.0;  // keep the omega bias an order below epsilon
  const auto freqs = protocols::learn_boson_frequencies(oracle, opts);
  std::vector<double> omega;
  for (const auto& c : freqs.coefficients) omega.push_back(c.estimate);
  return omega;
}

}  // namespace

void run_subcommand(const std::string& name, const ExperimentConfig& cfg) {
  cfg.validate();
  const std::filesystem::path dir(cfg.out_dir);
  std::filesystem::create_directories(dir);
  const auto truth = cfg.build_model();

  if (name == "learn-omega") {
    protocols::EvolutionOracle oracle(truth, cfg.oracle_options());
    auto result = protocols::learn_boson_frequencies(oracle, learn_options(cfg));
    protocols::attach_truth(result, truth);
    write_result(dir, "result", result);
    return;
  }
  if (name == "learn-spin") {
    protocols::EvolutionOracle oracle(truth, cfg.oracle_options());
    auto result = protocols::learn_spin_coefficients(oracle, truth.locality, learn_options(cfg));
    protocols::attach_truth(result, truth);
    write_result(dir, "result", result);
    return;
  }
  if (name == "learn-coupling") {
    protocols::EvolutionOracle oracle(truth, cfg.oracle_options());
    const auto omega = learned_frequencies(oracle, cfg);
    protocols::LearningResult result;
    if (protocols::scheme_from_string(cfg.scheme) == protocols::CouplingScheme::Trotter) {
      result = protocols::learn_couplings_trotter(oracle, omega, truth.locality,
                                                  learn_options(cfg));
    } else {
      protocols::DqsOptions dqs;
      dqs.copies = cfg.copies;
      dqs.n_pt = cfg.n_pt;
      dqs.shots_per_copy = cfg.shots_per_copy;
      dqs.delta = cfg.delta;
      dqs.tau = cfg.tau;
      dqs.seed = *cfg.seed;
      dqs.threads = cfg.threads;
      result = protocols::learn_couplings_dqs(oracle, omega, truth.locality, dqs);
    }
    protocols::attach_truth(result, truth);
    write_result(dir, "result", result);
    return;
  }
  if (name == "full") {
    protocols::EvolutionOracle oracle(truth, cfg.oracle_options());
    protocols::PipelineOptions opts;
    opts.learn = learn_options(cfg);
    opts.scheme = protocols::scheme_from_string(cfg.scheme);
    opts.dqs.copies = cfg.copies;
    opts.dqs.n_pt = cfg.n_pt;
    opts.dqs.shots_per_copy = cfg.shots_per_copy;
    opts.dqs.seed = *cfg.seed;
    auto result = protocols::full_pipeline(oracle, truth.locality, opts);
    protocols::attach_truth(result, truth);
    write_result(dir, "result", result);
    return;
  }
  if (name == "spectrum") {
    if (!cfg.spectral) throw ConfigError("spectrum needs a model.spectral block");
    protocols::EvolutionOracle oracle(truth, cfg.oracle_options());
    protocols::SpectrumOptions opts;
    opts.dqs.copies = cfg.copies;
    opts.dqs.n_pt = cfg.n_pt;
    opts.dqs.shots_per_copy = cfg.shots_per_copy;
    opts.dqs.threads = cfg.threads;
    opts.delta = cfg.delta;
    opts.seed = *cfg.seed;
    opts.omega_bound = cfg.spectral->omega_cut;
    const auto result = protocols::learn_spectrum(oracle, opts);
    // truth profile for the relative-error columns
    std::vector<double> truth_sq;
    const auto x = pauli::PauliString::from_string("X");
    for (std::size_t n = 0; n < truth.n_modes(); ++n) {
      const double l = truth.lambda_of(x, n);
      truth_sq.push_back(l * l);
    }
    report_io::write_file((dir / "spectrum.csv").string(),
                          report_io::spectrum_csv(result, truth_sq));
    return;
  }
  if (name == "scaling") {
    const auto target = pauli::PauliString::from_string(cfg.target);
    const std::vector<double> taus = cfg.taus.empty() ? std::vector<double>{cfg.tau}
                                                      : cfg.taus;
    if (cfg.estimator == "single_shot") {
      std::vector<double> times = cfg.total_times;
      if (times.empty()) times = {10, 31.6, 100, 316, 1000, 3160, 10000};
      for (std::size_t i = 0; i < taus.size(); ++i) {
        protocols::SingleShotScalingOptions opts;
        opts.target_eb = target;
        opts.mode = cfg.target_mode;
        opts.tau = taus[i];
        opts.total_times = times;
        opts.trials = cfg.trials;
        opts.seed = *cfg.seed;
        opts.noise = cfg.noise.to_spam();
        opts.threads = cfg.threads;
        const auto study = protocols::scaling_single_shot(truth, opts);
        const std::string tag = "tau" + std::to_string(i);
        std::vector<double> xs, ys;
        for (const auto& p : study.points) {
          xs.push_back(p.total_time);
          ys.push_back(p.rmse);
        }
        report_io::write_file((dir / ("scaling_" + tag + ".csv")).string(),
                              report_io::scaling_csv(study.points));
        report_io::write_file((dir / ("scaling_" + tag + "_raw.csv")).string(),
                              raw_scaling_csv(study));
        report_io::write_file(
            (dir / ("scaling_" + tag + "_fit.csv")).string(),
            fitting::scaling_fit_csv(fitting::fit_scaling(xs, ys, "total_time", "rmse")));
      }
    } else {
      protocols::RfeScalingOptions opts;
      opts.target_eb = target;
      opts.mode = cfg.target_mode;
      opts.tau = cfg.tau;
      opts.epsilons = cfg.epsilons.empty()
                          ? std::vector<double>{3e-2, 1e-2, 3e-3, 1e-3, 3e-4}
                          : cfg.epsilons;
      opts.k_max = cfg.k_max;
      opts.delta = cfg.delta;
      opts.trials = cfg.trials;
      opts.seed = *cfg.seed;
      opts.noise = cfg.noise.to_spam();
      opts.threads = cfg.threads;
      const auto study = protocols::scaling_rfe(truth, opts);
      std::vector<double> xs, ys;
      for (const auto& p : study.points) {
        xs.push_back(p.total_time);
        ys.push_back(p.rmse);
      }
      report_io::write_file((dir / "scaling_rfe.csv").string(),
                            report_io::scaling_csv(study.points));
      report_io::write_file((dir / "scaling_rfe_raw.csv").string(), raw_scaling_csv(study));
      report_io::write_file(
          (dir / "scaling_rfe_fit.csv").string(),
          fitting::scaling_fit_csv(fitting::fit_scaling(xs, ys, "total_time", "rmse")));
    }
    return;
  }
  if (name == "deviation") {
    rut::DeviationConfig dev;
    dev.cutoffs.assign(truth.n_modes(), cfg.cutoff);
    dev.e_b = pauli::PauliString::from_string(cfg.target);
    dev.trials = cfg.trials;
    dev.seed = *cfg.seed;
    dev.threads = cfg.threads;
    const std::vector<double> t_grid =
        cfg.t_grid.empty() ? std::vector<double>{1, 2, 3, 5, 7, 10} : cfg.t_grid;
    const std::vector<double> tau_grid =
        cfg.tau_grid.empty() ? std::vector<double>{1e-3} : cfg.tau_grid;
    std::vector<rut::DeviationRaw> raw;
    const auto table = rut::deviation_study(truth, t_grid, tau_grid, dev, &raw);
    report_io::write_file((dir / "deviation.csv").string(), report_io::deviation_csv(table));
    report_io::write_file((dir / "deviation_raw.csv").string(), raw_deviation_csv(raw));
    return;
  }
  throw ConfigError("unknown subcommand '" + name + "'");
}

int exit_code_for_current_exception() {
  try {
    throw;
  } catch (const ConfigError&) {
    return kExitConfig;
  } catch (const InvalidArgument&) {
    return kExitConfig;
  } catch (const ResourceGuardError&) {
    return kExitResource;
  } catch (const estimators::EstimationFailure&) {
    return kExitEstimation;
  } catch (...) {
    return 1;
  }
}

}  // namespace heislab::cli
