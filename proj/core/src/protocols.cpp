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

#include "heislab/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>

#include "heislab/errors.hpp"
#include "heislab/fock.hpp"
#include "heislab/parallel.hpp"

namespace heislab::protocols {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

std::string xi_name(const pauli::PauliString& op) { return "xi:" + op.str(); }
std::string lambda_name(const pauli::PauliString& op, std::size_t mode) {
  return "lambda:" + op.str() + ":" + std::to_string(mode);
}
std::string omega_name(std::size_t mode) { return "omega:" + std::to_string(mode); }

std::uint64_t double_bits(double v) {
  std::uint64_t bits;
  static_assert(sizeof(bits) == sizeof(v));
  std::memcpy(&bits, &v, sizeof(bits));
  return bits;
}

/** Inverse-variance accumulator keyed by coefficient name (insertion order kept). */
class MergeTable {
 public:
  void add(const std::string& name, double estimate, double variance) {
    auto it = index_.find(name);
    if (it == index_.end()) {
      index_[name] = entries_.size();
      entries_.push_back({name, {}});
      it = index_.find(name);
    }
    entries_[it->second].values.push_back({estimate, variance});
  }

  std::vector<CoefficientEstimate> merge(double consistency_scale,
                                         std::vector<std::string>& warnings) const {
    std::vector<CoefficientEstimate> out;
    for (const auto& entry : entries_) {
      double wsum = 0.0, mean = 0.0;
      double lo = entry.values.front().first, hi = lo;
      for (const auto& [est, var] : entry.values) {
        const double w = var > 0.0 ? 1.0 / var : 1e18;
        wsum += w;
        mean += w * est;
        lo = std::min(lo, est);
        hi = std::max(hi, est);
      }
      mean /= wsum;
      if (consistency_scale > 0.0 && entry.values.size() > 1 &&
          hi - lo > 10.0 * consistency_scale) {
        warnings.push_back("consistency: duplicate estimates of " + entry.name +
                           " spread " + std::to_string(hi - lo) + " beyond 10 epsilon");
      }
      out.push_back({entry.name, mean, 1.0 / wsum, std::nullopt, std::nullopt});
    }
    return out;
  }

 private:
  struct Entry {
    std::string name;
    std::vector<std::pair<double, double>> values;
  };
  std::map<std::string, std::size_t> index_;
  std::vector<Entry> entries_;
};

}  // namespace

Backend backend_from_string(const std::string& name) {
  if (name == "gaussian") return Backend::GaussianAnalytic;
  if (name == "fock") return Backend::FockDense;
  throw InvalidArgument("unknown backend '" + name + "'");
}

CouplingScheme scheme_from_string(const std::string& name) {
  if (name == "trotter") return CouplingScheme::Trotter;
  if (name == "dqs") return CouplingScheme::Dqs;
  throw InvalidArgument("unknown coupling scheme '" + name + "'");
}

BosonPrep BosonPrep::coherent(std::vector<gaussian::Complex> alpha) {
  BosonPrep prep;
  prep.kind = Kind::Coherent;
  prep.alpha = std::move(alpha);
  return prep;
}

BosonPrep BosonPrep::entangled_squeezed(std::size_t copies, gaussian::Complex z) {
  BosonPrep prep;
  prep.kind = Kind::EntangledSqueezed;
  prep.copies = copies;
  prep.z = z;
  return prep;
}

EvolutionOracle::EvolutionOracle(model::HybridHamiltonian hidden, OracleOptions opts)
    : hidden_(std::move(hidden)), opts_(std::move(opts)) {
  hidden_.validate();
  opts_.noise.validate();
  n_qubits_ = hidden_.n_qubits;
  n_modes_ = hidden_.n_modes();
  if (opts_.backend == Backend::FockDense && opts_.fock_cutoffs.size() != n_modes_)
    throw InvalidArgument("EvolutionOracle: fock backend needs one cutoff per mode");
}

Meters EvolutionOracle::meters() const {
  std::lock_guard<std::mutex> lock(meter_mutex_);
  return meters_;
}

void EvolutionOracle::add_meter(double time, std::uint64_t shots) {
  std::lock_guard<std::mutex> lock(meter_mutex_);
  meters_.evolution_time += time;
  meters_.shots += shots;
}

double EvolutionOracle::branch_eigenvalue_xi(const pauli::PauliString& e_b,
                                             std::size_t label) const {
  const auto k = pauli::support(e_b).size();
  const auto l = pauli::EigenstateLabel::from_index(label, k);
  double xi = 0.0;
  for (const auto& term : hidden_.spin_terms) {
    try {
      xi += term.xi * pauli::eigenvalue_gamma(term.op, e_b, l);
    } catch (const InvalidArgument&) {
      // terms outside S_b have no branch eigenvalue (cancelled by U2b)
    }
  }
  return xi;
}

std::vector<double> EvolutionOracle::branch_drive(const pauli::PauliString& e_b,
                                                  std::size_t label) const {
  const auto k = pauli::support(e_b).size();
  const rut::BranchDriveModel model(hidden_, e_b,
                                    pauli::EigenstateLabel::from_index(label, k));
  return model.mean_drive();
}

gaussian::GaussianBosonState EvolutionOracle::gaussian_prep(const BosonPrep& prep) const {
  gaussian::GaussianBosonState state;
  switch (prep.kind) {
    case BosonPrep::Kind::Vacuum:
      state = gaussian::GaussianBosonState::vacuum(n_modes_);
      break;
    case BosonPrep::Kind::Coherent:
      if (prep.alpha.size() != n_modes_)
        throw ShapeError("BosonPrep: alpha length does not match mode count");
      state = gaussian::GaussianBosonState::coherent(prep.alpha);
      break;
    case BosonPrep::Kind::EntangledSqueezed:
      state = gaussian::build_entangled_squeezed(n_modes_, prep.copies, prep.z);
      break;
  }
  for (auto& a : state.alpha) a += opts_.noise.prep_offset;
  return state;
}

gaussian::GaussianBosonState EvolutionOracle::gaussian_evolve(
    const gaussian::GaussianBosonState& state, const std::optional<SpinBranch>& branch,
    const rut::ReshapePlan& plan, double t, RngStream& rng) const {
  plan.validate();
  if (plan.kinds.u2b) {
    if (!branch)
      throw BackendUnsupported(
          "gaussian backend: U2b boson queries need a frozen spin branch");
    const auto k = pauli::support(*plan.e_b).size();
    const rut::BranchDriveModel drive(
        hidden_, *plan.e_b, pauli::EigenstateLabel::from_index(branch->label, k));
    if (plan.effective()) {
      if (plan.insert_u3) {
        std::vector<double> delta(n_modes_);
        for (std::size_t n = 0; n < n_modes_; ++n)
          delta[n] = hidden_.mode_freqs[n] - plan.omega_tilde[n];
        return gaussian::evolve_trotter_detuned(state, drive.mean_drive(), delta, t);
      }
      return gaussian::evolve_displaced_oscillators(state, drive.mean_drive(),
                                                    hidden_.mode_freqs, t);
    }
    // branch-frozen sampled-drive circuit
    const std::size_t segments = plan.segments(t);
    const double tau = plan.tau;
    std::vector<gaussian::Complex> rot(n_modes_), u3(n_modes_), zrot(n_modes_);
    for (std::size_t n = 0; n < n_modes_; ++n) {
      const double w = hidden_.mode_freqs[n];
      rot[n] = std::polar(1.0, -w * tau);
      const double wt = plan.insert_u3 ? plan.omega_tilde[n] : 0.0;
      u3[n] = std::polar(1.0, wt * tau);
      zrot[n] = std::polar(1.0, 2.0 * (wt - w) * tau);
    }
    gaussian::GaussianBosonState out = state;
    std::vector<double> lam(n_modes_);
    for (std::size_t i = 0; i < segments; ++i) {
      drive.sample_drive(rng, lam);
      for (std::size_t n = 0; n < n_modes_; ++n) {
        const double w = hidden_.mode_freqs[n];
        out.alpha[n] = out.alpha[n] * u3[n] * rot[n] + (lam[n] / w) * (rot[n] - 1.0);
        out.z[n] *= zrot[n];
      }
    }
    return out;
  }
  if (plan.kinds.u1) {
    if (!plan.effective())
      throw BackendUnsupported("gaussian backend: finite-tau U1 plans are not modeled");
    return gaussian::evolve_free(state, hidden_.mode_freqs, t);
  }
  throw BackendUnsupported("gaussian backend: unreshaped evolution is not modeled");
}

// ---- Fock-dense backend helpers ---------------------------------------------

struct EvolutionOracle::FockContext {
  static fock::DenseHybridState prepare(const EvolutionOracle& self,
                                        const Eigen::VectorXcd& spin, const BosonPrep& prep) {
    fock::HybridDims dims{self.n_qubits_, self.opts_.fock_cutoffs};
    std::vector<Eigen::VectorXcd> modes;
    for (std::size_t n = 0; n < self.n_modes_; ++n) {
      const std::size_t d = self.opts_.fock_cutoffs[n];
      const gaussian::Complex offset = self.opts_.noise.prep_offset;
      switch (prep.kind) {
        case BosonPrep::Kind::Vacuum:
          modes.push_back(fock::coherent_amplitudes(offset, d));
          break;
        case BosonPrep::Kind::Coherent:
          modes.push_back(fock::coherent_amplitudes(prep.alpha.at(n) + offset, d));
          break;
        case BosonPrep::Kind::EntangledSqueezed:
          if (prep.copies != 1)
            throw BackendUnsupported("fock backend: W > 1 entangled copies not representable");
          modes.push_back(fock::displaced_squeezed_amplitudes(offset, prep.z, d));
          break;
      }
    }
    return fock::product_state(dims, spin, modes);
  }

  static fock::DenseHybridState evolve(const EvolutionOracle& self,
                                       const fock::DenseHybridState& init,
                                       const rut::ReshapePlan& plan, double t,
                                       RngStream& rng) {
    plan.validate();
    fock::DenseHybridState out;
    if (plan.effective()) {
      const auto eff = rut::effective_hamiltonian(self.hidden_, plan.kinds, plan.e_b);
      if (plan.insert_u3) {
        const auto gen = rut::materialize_effective_trotter(self.hidden_, *plan.e_b,
                                                            plan.omega_tilde,
                                                            self.opts_.fock_cutoffs);
        out = fock::evolve(init, gen, t);
      } else {
        out = fock::evolve(init, fock::materialize(eff, self.opts_.fock_cutoffs), t);
      }
    } else {
      auto circuit =
          rut::build_finite_r_circuit(self.hidden_, plan, t, self.opts_.fock_cutoffs);
      circuit.leak_threshold = self.opts_.leak_threshold;
      out = circuit.run(init, rng);
    }
    if (out.max_top_level_population() > self.opts_.leak_threshold)
      throw ResourceGuardError("fock backend: truncation leakage above threshold");
    return out;
  }
};

// ---- Queries -----------------------------------------------------------------

double EvolutionOracle::pair_survival(const pauli::PauliString& e_b, std::size_t l1,
                                      std::size_t l2, int which, const rut::ReshapePlan& plan,
                                      double t, std::uint64_t shots, RngStream& rng) {
  if (which != 1 && which != 2) throw InvalidArgument("pair_survival: which must be 1 or 2");
  if (shots == 0) throw InvalidArgument("pair_survival: shots must be >= 1");
  const double flip = opts_.noise.qubit_flip_p;
  double p = 0.0;
  if (opts_.backend == Backend::GaussianAnalytic) {
    if (!plan.kinds.u1 || !plan.kinds.u2b || !plan.effective())
      throw BackendUnsupported(
          "gaussian backend: pair_survival needs the effective U1+U2b plan");
    const double delta_xi = branch_eigenvalue_xi(e_b, l1) - branch_eigenvalue_xi(e_b, l2);
    p = which == 1 ? 0.5 * (1.0 + std::cos(delta_xi * t))
                   : 0.5 * (1.0 + std::sin(delta_xi * t));
    const double p_obs = p * (1.0 - flip) + (1.0 - p) * flip;
    add_meter(t * static_cast<double>(shots), shots);
    if (opts_.exact_expectations) return p_obs;
    return static_cast<double>(rng.binomial(shots, p_obs)) / static_cast<double>(shots);
  }
  // fock backend
  const auto k = pauli::support(e_b).size();
  const auto la = pauli::EigenstateLabel::from_index(l1, k);
  const auto lb = pauli::EigenstateLabel::from_index(l2, k);
  const Eigen::VectorXcd va = fock::pauli_eigenstate(e_b, la);
  const Eigen::VectorXcd vb = fock::pauli_eigenstate(e_b, lb);
  const Eigen::VectorXcd prep_spin = (va + vb) / kSqrt2;
  const Eigen::VectorXcd meas_spin =
      which == 1 ? prep_spin
                 : ((va + gaussian::Complex(0.0, 1.0) * vb) / kSqrt2).eval();
  const fock::DenseHybridState init = FockContext::prepare(*this, prep_spin, BosonPrep::vacuum());
  add_meter(t * static_cast<double>(shots), shots);
  std::uint64_t hits = 0;
  if (plan.effective()) {
    const auto evolved = FockContext::evolve(*this, init, plan, t, rng);
    const double prob = fock::spin_outcome_probability(evolved, meas_spin);
    const double p_obs = prob * (1.0 - flip) + (1.0 - prob) * flip;
    hits = rng.binomial(shots, p_obs);
  } else {
    for (std::uint64_t s = 0; s < shots; ++s) {
      const auto evolved = FockContext::evolve(*this, init, plan, t, rng);
      const double prob = fock::spin_outcome_probability(evolved, meas_spin);
      const double p_obs = prob * (1.0 - flip) + (1.0 - prob) * flip;
      if (rng.bernoulli(p_obs)) ++hits;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(shots);
}

std::vector<double> EvolutionOracle::homodyne_samples(
    const std::optional<SpinBranch>& branch, const BosonPrep& prep,
    const rut::ReshapePlan& plan, double t, std::size_t mode, gaussian::Quadrature quad,
    std::uint64_t shots, RngStream& rng, RngStream* readout_rng) {
  if (mode >= n_modes_) throw ShapeError("homodyne_samples: mode out of range");
  if (shots == 0) throw InvalidArgument("homodyne_samples: shots must be >= 1");
  RngStream& readout = readout_rng ? *readout_rng : rng;
  std::vector<double> out;
  out.reserve(shots);
  add_meter(t * static_cast<double>(shots), shots);
  if (opts_.backend == Backend::GaussianAnalytic) {
    if (plan.effective() || !plan.kinds.u2b) {
      const auto state = gaussian_evolve(gaussian_prep(prep), branch, plan, t, rng);
      const double mean = state.quadrature_mean(mode, quad);
      const double sigma = std::sqrt(state.quadrature_variance(mode, quad) +
                                     opts_.noise.quad_sigma * opts_.noise.quad_sigma);
      for (std::uint64_t s = 0; s < shots; ++s)
        out.push_back(opts_.exact_expectations ? mean : readout.normal(mean, sigma));
    } else {
      const auto base = gaussian_prep(prep);
      for (std::uint64_t s = 0; s < shots; ++s) {
        const auto state = gaussian_evolve(base, branch, plan, t, rng);
        const double mean = state.quadrature_mean(mode, quad);
        const double sigma = std::sqrt(state.quadrature_variance(mode, quad) +
                                       opts_.noise.quad_sigma * opts_.noise.quad_sigma);
        out.push_back(opts_.exact_expectations ? mean : readout.normal(mean, sigma));
      }
    }
    return out;
  }
  // fock backend
  Eigen::VectorXcd spin;
  if (branch) {
    const auto k = pauli::support(branch->e_b).size();
    spin = fock::pauli_eigenstate(branch->e_b,
                                  pauli::EigenstateLabel::from_index(branch->label, k));
  } else {
    spin = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(std::size_t{1} << n_qubits_));
    spin[0] = 1.0;
  }
  const auto init = FockContext::prepare(*this, spin, prep);
  const double sig_extra = opts_.noise.quad_sigma;
  if (plan.effective()) {
    const auto evolved = FockContext::evolve(*this, init, plan, t, rng);
    const fock::QuadratureSampler sampler(evolved, mode, quad);
    for (std::uint64_t s = 0; s < shots; ++s) {
      double v = sampler.sample(readout);
      if (sig_extra > 0.0) v += readout.normal(0.0, sig_extra);
      out.push_back(v);
    }
  } else {
    for (std::uint64_t s = 0; s < shots; ++s) {
      const auto evolved = FockContext::evolve(*this, init, plan, t, rng);
      const fock::QuadratureSampler sampler(evolved, mode, quad);
      double v = sampler.sample(readout);
      if (sig_extra > 0.0) v += readout.normal(0.0, sig_extra);
      out.push_back(v);
    }
  }
  return out;
}

std::vector<double> EvolutionOracle::multimode_quadrature_means(
    const BosonPrep& prep, const rut::ReshapePlan& plan, double t, gaussian::Quadrature quad,
    std::uint64_t shots, RngStream& rng) {
  if (shots == 0) throw InvalidArgument("multimode_quadrature_means: shots must be >= 1");
  add_meter(t * static_cast<double>(shots), shots);
  std::vector<double> means(n_modes_, 0.0);
  if (opts_.backend == Backend::GaussianAnalytic) {
    const auto state = gaussian_evolve(gaussian_prep(prep), std::nullopt, plan, t, rng);
    for (std::size_t n = 0; n < n_modes_; ++n) {
      const double mean = state.quadrature_mean(n, quad);
      if (opts_.exact_expectations) {
        means[n] = mean;
        continue;
      }
      const double sigma = std::sqrt(state.quadrature_variance(n, quad) +
                                     opts_.noise.quad_sigma * opts_.noise.quad_sigma);
      double acc = 0.0;
      for (std::uint64_t s = 0; s < shots; ++s) acc += rng.normal(mean, sigma);
      means[n] = acc / static_cast<double>(shots);
    }
    return means;
  }
  Eigen::VectorXcd spin =
      Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(std::size_t{1} << n_qubits_));
  spin[0] = 1.0;
  const auto init = FockContext::prepare(*this, spin, prep);
  const auto evolved = FockContext::evolve(*this, init, plan, t, rng);
  for (std::size_t n = 0; n < n_modes_; ++n) {
    const fock::QuadratureSampler sampler(evolved, n, quad);
    double acc = 0.0;
    for (std::uint64_t s = 0; s < shots; ++s) {
      double v = sampler.sample(rng);
      if (opts_.noise.quad_sigma > 0.0) v += rng.normal(0.0, opts_.noise.quad_sigma);
      acc += v;
    }
    means[n] = acc / static_cast<double>(shots);
  }
  return means;
}

gaussian::DqsEstimate EvolutionOracle::dqs_xtilde(const SpinBranch& branch, std::size_t mode,
                                                  std::size_t copies, double n_pt,
                                                  const rut::ReshapePlan& plan, double t,
                                                  std::size_t shots_per_copy,
                                                  RngStream& rng) {
  if (copies < 1) throw InvalidArgument("dqs_xtilde: copies must be >= 1");
  if (n_pt < 0.0) throw InvalidArgument("dqs_xtilde: n_pt must be >= 0");
  const double z = std::asinh(std::sqrt(static_cast<double>(copies) * n_pt));
  add_meter(static_cast<double>(copies) * t * static_cast<double>(shots_per_copy),
            static_cast<std::uint64_t>(copies) * shots_per_copy);
  if (opts_.backend == Backend::GaussianAnalytic) {
    const auto prep = BosonPrep::entangled_squeezed(copies, gaussian::Complex(z, 0.0));
    const auto state = gaussian_evolve(gaussian_prep(prep), branch, plan, t, rng);
    if (opts_.exact_expectations) {
      gaussian::DqsEstimate est;
      est.x_tilde = state.quadrature_mean(mode, gaussian::Quadrature::X);
      est.predicted_rmse =
          gaussian::dqs_predicted_rmse(state, mode, shots_per_copy, opts_.noise);
      return est;
    }
    return gaussian::dqs_estimate(state, mode, copies, shots_per_copy, opts_.noise, rng);
  }
  if (copies != 1)
    throw BackendUnsupported("fock backend: distributed sensing limited to W = 1");
  const auto k = pauli::support(branch.e_b).size();
  const Eigen::VectorXcd spin = fock::pauli_eigenstate(
      branch.e_b, pauli::EigenstateLabel::from_index(branch.label, k));
  const auto init = FockContext::prepare(
      *this, spin, BosonPrep::entangled_squeezed(1, gaussian::Complex(z, 0.0)));
  const auto evolved = FockContext::evolve(*this, init, plan, t, rng);
  const fock::QuadratureSampler sampler(evolved, mode, gaussian::Quadrature::X);
  double acc = 0.0;
  for (std::size_t s = 0; s < shots_per_copy; ++s) {
    double v = sampler.sample(rng);
    if (opts_.noise.quad_sigma > 0.0) v += rng.normal(0.0, opts_.noise.quad_sigma);
    acc += v;
  }
  gaussian::DqsEstimate est;
  est.x_tilde = acc / static_cast<double>(shots_per_copy);
  est.predicted_rmse =
      std::sqrt((sampler.variance() + opts_.noise.quad_sigma * opts_.noise.quad_sigma) /
                static_cast<double>(shots_per_copy));
  return est;
}

// ---- Result plumbing ---------------------------------------------------------

const CoefficientEstimate* LearningResult::find(const std::string& name) const {
  for (const auto& c : coefficients) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

void attach_truth(LearningResult& result, const model::HybridHamiltonian& truth) {
  for (auto& c : result.coefficients) {
    double value = 0.0;
    if (c.name.rfind("xi:", 0) == 0) {
      value = truth.xi_of(pauli::PauliString::from_string(c.name.substr(3)));
    } else if (c.name.rfind("lambda:", 0) == 0) {
      const auto rest = c.name.substr(7);
      const auto colon = rest.find(':');
      value = truth.lambda_of(pauli::PauliString::from_string(rest.substr(0, colon)),
                              std::stoul(rest.substr(colon + 1)));
    } else if (c.name.rfind("omega:", 0) == 0) {
      value = truth.mode_freqs.at(std::stoul(c.name.substr(6)));
    }
    c.truth = value;
    c.abs_error = std::abs(c.estimate - value);
  }
}

// ---- Frequency learning ------------------------------------------------------

LearningResult learn_boson_frequencies(EvolutionOracle& oracle, const LearnOptions& opts) {
  if (oracle.n_modes() < 1)
    throw InvalidArgument("learn_boson_frequencies: oracle has no bosonic modes");
  if (opts.coherent_alpha == 0.0)
    throw InvalidArgument("learn_boson_frequencies: zero alpha has undefined phase");
  const std::size_t n = oracle.n_modes();
  rut::ReshapePlan plan;
  plan.kinds.u1 = true;
  plan.tau = opts.tau;
  const BosonPrep prep = BosonPrep::coherent(
      std::vector<gaussian::Complex>(n, gaussian::Complex(opts.coherent_alpha, 0.0)));

  // One multi-mode batch per distinct time, shared by all per-mode ladders;
  // X and P of different modes commute, so every shot reads all modes at once.
  struct Batch {
    std::vector<double> x, p;
    std::uint64_t shots = 0;
    double time = 0.0;
    bool charged = false;
  };
  std::map<double, Batch> batches;
  RngStream rng(derive_seed(opts.seed, {0x0f0e, 1}));
  const double alpha_abs = std::abs(opts.coherent_alpha);

  LearningResult result;
  result.scheme = "rfe-frequencies";
  std::vector<double> omega(n, 0.0);
  for (std::size_t mode = 0; mode < n; ++mode) {
    estimators::SignalOracle signal;
    signal.sample = [&, mode](double t, double eta, double delta) {
      Batch& b = batches[t];
      if (b.shots == 0) {
        // two-sided Gaussian tail bound for the quadrature-pair signal, with a
        // factor-two variance margin over the vacuum value
        const auto m = static_cast<std::uint64_t>(
            std::ceil(std::log(2.0 / delta) / (eta * eta * alpha_abs * alpha_abs)));
        b.x = oracle.multimode_quadrature_means(prep, plan, t, gaussian::Quadrature::X, m, rng);
        b.p = oracle.multimode_quadrature_means(prep, plan, t, gaussian::Quadrature::P, m, rng);
        b.shots = 2 * m;
        b.time = 2.0 * static_cast<double>(m) * t;
      }
      estimators::SignalSample out;
      out.z = estimators::signal_from_quadratures(b.x[mode], b.p[mode]).z;
      if (!b.charged) {
        out.shots = b.shots;
        out.evolution_time = b.time;
        b.charged = true;
      }
      return out;
    };
    const auto report = estimators::rfe(signal, opts.epsilon, opts.delta / static_cast<double>(n),
                                        opts.omega_bound, /*k_max=*/63);
    omega[mode] = report.estimate;
    result.total_shots += report.total_shots;
    result.total_evolution_time += report.total_evolution_time;
    CoefficientEstimate c;
    c.name = omega_name(mode);
    c.estimate = report.estimate;
    c.variance = report.achieved_epsilon * report.achieved_epsilon;
    result.coefficients.push_back(c);
  }
  model::HybridHamiltonian estimated;
  estimated.n_qubits = oracle.n_qubits();
  estimated.locality = 1;
  estimated.mode_freqs = omega;
  result.estimated = estimated;
  return result;
}

// ---- Spin learning -----------------------------------------------------------

LearningResult learn_spin_coefficients(EvolutionOracle& oracle, std::size_t k,
                                       const LearnOptions& opts) {
  const auto ebs = pauli::enumerate_eb(oracle.n_qubits(), k);
  const std::size_t branches = std::size_t{1} << k;
  const std::size_t runs = ebs.size() * (branches - 1);
  const double delta_each = opts.delta / static_cast<double>(runs);

  rut::ReshapePlan plan;
  plan.kinds.u1 = true;
  plan.kinds.u2b = true;
  plan.tau = opts.tau;

  struct EbOutput {
    std::vector<std::pair<std::string, std::pair<double, double>>> entries;
    double time = 0.0;
    std::uint64_t shots = 0;
  };
  std::vector<EbOutput> outputs(ebs.size());
  const auto gamma = pauli::gamma_matrix_of_order(k);

  parallel_for(ebs.size(), opts.threads, [&](std::size_t eb_idx) {
    const auto& e_b = ebs[eb_idx];
    rut::ReshapePlan eb_plan = plan;
    eb_plan.e_b = e_b;
    std::vector<double> xi(branches, 0.0);
    std::vector<double> var(branches, 0.0);
    for (std::size_t j = 1; j < branches; ++j) {
      const std::size_t parent = j & (j - 1);  // differs from j in exactly one bit
      RngStream rng(derive_seed(opts.seed, {0x59, eb_idx, j}));
      estimators::PhaseProbOracle prob = [&](double t, std::uint64_t shots) {
        const double p1 = oracle.pair_survival(e_b, parent, j, 1, eb_plan, t, shots, rng);
        const double p2 = oracle.pair_survival(e_b, parent, j, 2, eb_plan, t, shots, rng);
        return std::make_pair(p1, p2);
      };
      const auto report =
          estimators::rpe(prob, opts.epsilon, delta_each, opts.delta_xi_bound);
      xi[j] = xi[parent] - report.estimate;  // Delta = Xi_parent - Xi_j
      var[j] = var[parent] + report.achieved_epsilon * report.achieved_epsilon;
      outputs[eb_idx].time += report.total_evolution_time;
      outputs[eb_idx].shots += report.total_shots;
    }
    double mean = 0.0;
    for (double v : xi) mean += v;
    mean /= static_cast<double>(branches);
    for (double& v : xi) v -= mean;  // gauge: identity coefficient = 0
    const auto coeffs = pauli::solve_coefficients(gamma, xi);
    double var_sum = 0.0;
    for (double v : var) var_sum += v;
    const double var_coeff =
        std::max(var_sum / static_cast<double>(branches * branches), 1e-30);
    for (std::size_t s = 1; s < branches; ++s) {
      outputs[eb_idx].entries.push_back(
          {xi_name(pauli::sb_member(e_b, s)), {coeffs[s], var_coeff}});
    }
  });

  LearningResult result;
  result.scheme = "rpe-spin";
  MergeTable table;
  for (const auto& out : outputs) {
    for (const auto& [name, ev] : out.entries) table.add(name, ev.first, ev.second);
    result.total_evolution_time += out.time;
    result.total_shots += out.shots;
  }
  result.coefficients = table.merge(opts.epsilon, result.warnings);

  model::HybridHamiltonian estimated;
  estimated.n_qubits = oracle.n_qubits();
  estimated.locality = k;
  for (const auto& c : result.coefficients) {
    estimated.spin_terms.push_back(
        {pauli::PauliString::from_string(c.name.substr(3)), c.estimate});
  }
  result.estimated = estimated;
  return result;
}

// ---- Coupling learning -------------------------------------------------------

namespace {

LearningResult learn_couplings_common(
    EvolutionOracle& oracle, const std::vector<double>& omega_tilde, std::size_t k,
    const std::vector<pauli::PauliString>& ebs, std::size_t threads, std::uint64_t seed,
    const std::string& scheme, double consistency_scale,
    const std::function<std::pair<double, double>(const pauli::PauliString&, std::size_t eb_idx,
                                                  std::size_t label, std::size_t mode,
                                                  RngStream& rng, double& time,
                                                  std::uint64_t& shots)>& estimate_lambda) {
  if (omega_tilde.size() != oracle.n_modes())
    throw ShapeError("coupling learning: omega_tilde length mismatch");
  const std::size_t branches = std::size_t{1} << k;
  const auto gamma = pauli::gamma_matrix_of_order(k);

  struct EbOutput {
    std::vector<std::pair<std::string, std::pair<double, double>>> entries;
    double time = 0.0;
    std::uint64_t shots = 0;
  };
  std::vector<EbOutput> outputs(ebs.size());

  parallel_for(ebs.size(), threads, [&](std::size_t eb_idx) {
    const auto& e_b = ebs[eb_idx];
    for (std::size_t mode = 0; mode < oracle.n_modes(); ++mode) {
      std::vector<double> lambda_branch(branches, 0.0);
      std::vector<double> var_branch(branches, 0.0);
      for (std::size_t l = 0; l < branches; ++l) {
        RngStream rng(derive_seed(seed, {0x1a, eb_idx, l, mode}));
        const auto [lam, var] = estimate_lambda(e_b, eb_idx, l, mode, rng,
                                                outputs[eb_idx].time, outputs[eb_idx].shots);
        lambda_branch[l] = lam;
        var_branch[l] = var;
      }
      const auto coeffs = pauli::solve_coefficients(gamma, lambda_branch);
      double var_sum = 0.0;
      for (double v : var_branch) var_sum += v;
      const double var_coeff =
          std::max(var_sum / static_cast<double>(branches * branches), 1e-30);
      for (std::size_t s = 0; s < branches; ++s) {
        outputs[eb_idx].entries.push_back(
            {lambda_name(pauli::sb_member(e_b, s), mode), {coeffs[s], var_coeff}});
      }
    }
  });

  LearningResult result;
  result.scheme = scheme;
  MergeTable table;
  for (const auto& out : outputs) {
    for (const auto& [name, ev] : out.entries) table.add(name, ev.first, ev.second);
    result.total_evolution_time += out.time;
    result.total_shots += out.shots;
  }
  result.coefficients = table.merge(consistency_scale, result.warnings);

  model::HybridHamiltonian estimated;
  estimated.n_qubits = oracle.n_qubits();
  estimated.locality = k;
  estimated.mode_freqs = omega_tilde;
  for (const auto& c : result.coefficients) {
    const auto rest = c.name.substr(7);
    const auto colon = rest.find(':');
    const auto op = pauli::PauliString::from_string(rest.substr(0, colon));
    const auto mode = static_cast<std::size_t>(std::stoul(rest.substr(colon + 1)));
    estimated.couplings.push_back({estimated.term_index(op), mode, c.estimate});
  }
  result.estimated = estimated;
  return result;
}

}  // namespace

LearningResult learn_couplings_trotter(EvolutionOracle& oracle,
                                       const std::vector<double>& omega_tilde, std::size_t k,
                                       const LearnOptions& opts) {
  const auto ebs = pauli::enumerate_eb(oracle.n_qubits(), k);
  const std::size_t branches = std::size_t{1} << k;
  const double delta_each =
      opts.delta / static_cast<double>(ebs.size() * branches * oracle.n_modes());
  rut::ReshapePlan plan;
  plan.kinds.u2b = true;
  plan.insert_u3 = true;
  plan.omega_tilde = omega_tilde;
  plan.tau = opts.tau;

  return learn_couplings_common(
      oracle, omega_tilde, k, ebs, opts.threads, opts.seed, "trotter", opts.epsilon,
      [&](const pauli::PauliString& e_b, std::size_t, std::size_t label, std::size_t mode,
          RngStream& rng, double& time, std::uint64_t& shots) {
        rut::ReshapePlan eb_plan = plan;
        eb_plan.e_b = e_b;
        const SpinBranch branch{e_b, label};
        estimators::SignalOracle signal;
        signal.sample = [&](double t, double eta, double delta) {
          const std::uint64_t m = estimators::chernoff_shots(eta, delta);
          const auto samples =
              oracle.homodyne_samples(branch, BosonPrep::vacuum(), eb_plan, t, mode,
                                      gaussian::Quadrature::P, m, rng);
          estimators::SignalSample out;
          out.z = estimators::signal_from_p_mean(samples);
          out.shots = m;
          out.evolution_time = static_cast<double>(m) * t;
          return out;
        };
        const auto report = estimators::rfe(signal, opts.epsilon * kSqrt2, delta_each,
                                            opts.sqrt2_lambda_bound, opts.k_max);
        time += report.total_evolution_time;
        shots += report.total_shots;
        // <P> = -sqrt(2) Lambda t, so the ladder frequency is -sqrt(2) Lambda
        const double lambda = -report.estimate / kSqrt2;
        const double var =
            (report.achieved_epsilon / kSqrt2) * (report.achieved_epsilon / kSqrt2);
        return std::make_pair(lambda, var);
      });
}

LearningResult learn_couplings_dqs(EvolutionOracle& oracle,
                                   const std::vector<double>& omega_tilde, std::size_t k,
                                   const DqsOptions& opts) {
  const auto ebs = opts.eb_filter.empty() ? pauli::enumerate_eb(oracle.n_qubits(), k)
                                          : opts.eb_filter;
  rut::ReshapePlan plan;
  plan.kinds.u2b = true;
  plan.tau = opts.tau;

  return learn_couplings_common(
      oracle, omega_tilde, k, ebs, opts.threads, opts.seed, "dqs", 0.0,
      [&](const pauli::PauliString& e_b, std::size_t, std::size_t label, std::size_t mode,
          RngStream& rng, double& time, std::uint64_t& shots) {
        rut::ReshapePlan eb_plan = plan;
        eb_plan.e_b = e_b;
        const double t = std::numbers::pi / omega_tilde[mode];
        const auto est = oracle.dqs_xtilde({e_b, label}, mode, opts.copies, opts.n_pt,
                                           eb_plan, t, opts.shots_per_copy, rng);
        time += static_cast<double>(opts.copies) * t *
                static_cast<double>(opts.shots_per_copy);
        shots += static_cast<std::uint64_t>(opts.copies) * opts.shots_per_copy;
        const double scale = omega_tilde[mode] / (2.0 * kSqrt2);
        return std::make_pair(-scale * est.x_tilde,
                              scale * scale * est.predicted_rmse * est.predicted_rmse);
      });
}

SpectrumResult learn_spectrum(EvolutionOracle& oracle, const SpectrumOptions& opts) {
  if (oracle.n_qubits() != 1)
    throw InvalidArgument("learn_spectrum: expects a single-qubit (SBM-type) oracle");
  LearnOptions freq_opts;
  freq_opts.epsilon = opts.omega_epsilon;
  freq_opts.delta = opts.delta / 2.0;
  freq_opts.omega_bound = opts.omega_bound;
  freq_opts.seed = derive_seed(opts.seed, {0x0117});
  const auto freqs = learn_boson_frequencies(oracle, freq_opts);
  std::vector<double> omega_tilde;
  for (const auto& c : freqs.coefficients) omega_tilde.push_back(c.estimate);

  DqsOptions dqs = opts.dqs;
  dqs.delta = opts.delta / 2.0;
  dqs.seed = derive_seed(opts.seed, {0x0118});
  dqs.eb_filter = {pauli::PauliString::from_string("X")};
  const auto couplings = learn_couplings_dqs(oracle, omega_tilde, 1, dqs);

  SpectrumResult result;
  result.total_evolution_time = freqs.total_evolution_time + couplings.total_evolution_time;
  result.total_shots = freqs.total_shots + couplings.total_shots;
  const auto x = pauli::PauliString::from_string("X");
  for (std::size_t n = 0; n < omega_tilde.size(); ++n) {
    const auto* c = couplings.find(lambda_name(x, n));
    SpectrumRow row;
    row.mode = n;
    row.omega_tilde = omega_tilde[n];
    row.lambda_x = c ? c->estimate : 0.0;
    row.lambda_x_sq = row.lambda_x * row.lambda_x;
    row.variance = c ? c->variance : 0.0;
    result.rows.push_back(row);
  }
  return result;
}

LearningResult full_pipeline(EvolutionOracle& oracle, std::size_t k,
                             const PipelineOptions& opts) {
  LearnOptions freq = opts.learn;
  freq.epsilon = opts.learn.epsilon / 10.0;
  freq.delta = opts.learn.delta / 3.0;
  freq.seed = derive_seed(opts.learn.seed, {0xf1});
  const auto freqs = learn_boson_frequencies(oracle, freq);
  std::vector<double> omega_tilde;
  for (const auto& c : freqs.coefficients) omega_tilde.push_back(c.estimate);

  LearnOptions spin = opts.learn;
  spin.delta = opts.learn.delta / 3.0;
  spin.seed = derive_seed(opts.learn.seed, {0xf2});
  const auto spins = learn_spin_coefficients(oracle, k, spin);

  LearningResult couplings;
  if (opts.scheme == CouplingScheme::Trotter) {
    LearnOptions coup = opts.learn;
    coup.delta = opts.learn.delta / 3.0;
    coup.seed = derive_seed(opts.learn.seed, {0xf3});
    couplings = learn_couplings_trotter(oracle, omega_tilde, k, coup);
  } else {
    DqsOptions coup = opts.dqs;
    coup.delta = opts.learn.delta / 3.0;
    coup.seed = derive_seed(opts.learn.seed, {0xf3});
    coup.threads = opts.learn.threads;
    couplings = learn_couplings_dqs(oracle, omega_tilde, k, coup);
  }

  LearningResult result;
  result.scheme = opts.scheme == CouplingScheme::Trotter ? "full-trotter" : "full-dqs";
  for (const LearningResult* stage :
       std::initializer_list<const LearningResult*>{&freqs, &spins, &couplings}) {
    for (const auto& c : stage->coefficients) result.coefficients.push_back(c);
    for (const auto& w : stage->warnings) result.warnings.push_back(w);
    result.total_evolution_time += stage->total_evolution_time;
    result.total_shots += stage->total_shots;
  }

  model::HybridHamiltonian estimated;
  estimated.n_qubits = oracle.n_qubits();
  estimated.locality = k;
  estimated.mode_freqs = omega_tilde;
  for (const auto& c : spins.coefficients) {
    estimated.spin_terms.push_back(
        {pauli::PauliString::from_string(c.name.substr(3)), c.estimate});
  }
  for (const auto& c : couplings.coefficients) {
    const auto rest = c.name.substr(7);
    const auto colon = rest.find(':');
    const auto op = pauli::PauliString::from_string(rest.substr(0, colon));
    const auto mode = static_cast<std::size_t>(std::stoul(rest.substr(colon + 1)));
    estimated.couplings.push_back({estimated.term_index(op), mode, c.estimate});
  }
  result.estimated = estimated;
  return result;
}

// ---- Scaling studies ---------------------------------------------------------

ScalingStudy scaling_single_shot(const model::HybridHamiltonian& truth,
                                 const SingleShotScalingOptions& opts) {
  const std::size_t k = pauli::support(opts.target_eb).size();
  const std::size_t branches = std::size_t{1} << k;
  const double lambda_true = truth.lambda_of(opts.target_eb, opts.mode);
  const auto gamma = pauli::gamma_matrix_of_order(k);

  OracleOptions oracle_opts;
  oracle_opts.backend = Backend::GaussianAnalytic;
  oracle_opts.noise = opts.noise;
  EvolutionOracle oracle(truth, oracle_opts);

  rut::ReshapePlan plan;
  plan.kinds.u2b = true;
  plan.e_b = opts.target_eb;
  plan.insert_u3 = true;
  plan.omega_tilde = truth.mode_freqs;
  plan.tau = opts.tau;

  ScalingStudy study;
  for (std::size_t ti = 0; ti < opts.total_times.size(); ++ti) {
    const double total_t = opts.total_times[ti];
    const double t_branch = total_t / static_cast<double>(branches);
    std::vector<double> errors(opts.trials, 0.0);
    parallel_for(opts.trials, opts.threads, [&](std::size_t trial) {
      std::vector<double> lambda_branch(branches, 0.0);
      for (std::size_t l = 0; l < branches; ++l) {
        RngStream dyn(derive_seed(opts.seed, {0x5c, ti, trial, l, double_bits(opts.tau)}));
        RngStream readout(derive_seed(opts.seed, {0x4d, ti, trial, l}));
        RngStream* readout_ptr = opts.paired_readout ? &readout : nullptr;
        const auto samples = oracle.homodyne_samples(
            SpinBranch{opts.target_eb, l}, BosonPrep::vacuum(), plan, t_branch, opts.mode,
            gaussian::Quadrature::P, 1, dyn, readout_ptr);
        lambda_branch[l] = -samples[0] / (kSqrt2 * t_branch);
      }
      const auto coeffs = pauli::solve_coefficients(gamma, lambda_branch);
      errors[trial] = coeffs[branches - 1] - lambda_true;  // s = all-ones is E_b itself
    });
    double sq = 0.0;
    for (std::size_t trial = 0; trial < opts.trials; ++trial) {
      sq += errors[trial] * errors[trial];
      study.raw.push_back({ti, trial, total_t, errors[trial]});
    }
    study.points.push_back({total_t, std::sqrt(sq / static_cast<double>(opts.trials)),
                            opts.trials, 0.0});
  }
  return study;
}

ScalingStudy scaling_rfe(const model::HybridHamiltonian& truth,
                         const RfeScalingOptions& opts) {
  const std::size_t k = pauli::support(opts.target_eb).size();
  const std::size_t branches = std::size_t{1} << k;
  const double lambda_true = truth.lambda_of(opts.target_eb, opts.mode);
  const auto gamma = pauli::gamma_matrix_of_order(k);

  OracleOptions oracle_opts;
  oracle_opts.backend = Backend::GaussianAnalytic;
  oracle_opts.noise = opts.noise;
  EvolutionOracle oracle(truth, oracle_opts);

  rut::ReshapePlan plan;
  plan.kinds.u2b = true;
  plan.e_b = opts.target_eb;
  plan.insert_u3 = true;
  plan.omega_tilde = truth.mode_freqs;
  plan.tau = opts.tau;

  ScalingStudy study;
  for (std::size_t ei = 0; ei < opts.epsilons.size(); ++ei) {
    const double eps = opts.epsilons[ei];
    std::vector<double> errors(opts.trials, 0.0);
    std::vector<double> times(opts.trials, 0.0);
    std::vector<char> failed(opts.trials, 0);
    parallel_for(opts.trials, opts.threads, [&](std::size_t trial) {
      std::vector<double> lambda_branch(branches, 0.0);
      double total_time = 0.0;
      try {
        for (std::size_t l = 0; l < branches; ++l) {
          RngStream rng(derive_seed(opts.seed, {0x5f, ei, trial, l}));
          estimators::SignalOracle signal;
          signal.sample = [&](double t, double eta, double delta) {
            const std::uint64_t m = estimators::chernoff_shots(eta, delta);
            const auto samples = oracle.homodyne_samples(
                SpinBranch{opts.target_eb, l}, BosonPrep::vacuum(), plan, t, opts.mode,
                gaussian::Quadrature::P, m, rng);
            estimators::SignalSample out;
            out.z = estimators::signal_from_p_mean(samples);
            out.shots = m;
            out.evolution_time = static_cast<double>(m) * t;
            return out;
          };
          const auto report =
              estimators::rfe(signal, eps * kSqrt2, opts.delta / static_cast<double>(branches),
                              opts.sqrt2_lambda_bound, opts.k_max);
          lambda_branch[l] = -report.estimate / kSqrt2;
          total_time += report.total_evolution_time;
        }
        const auto coeffs = pauli::solve_coefficients(gamma, lambda_branch);
        errors[trial] = coeffs[branches - 1] - lambda_true;
        times[trial] = total_time;
      } catch (const estimators::EstimationFailure&) {
        failed[trial] = 1;  // within the delta budget; excluded from the RMSE
      }
    });
    double sq = 0.0, time_mean = 0.0;
    std::size_t good = 0;
    for (std::size_t i = 0; i < opts.trials; ++i) {
      if (failed[i]) continue;
      sq += errors[i] * errors[i];
      time_mean += times[i];
      study.raw.push_back({ei, i, times[i], errors[i]});
      ++good;
    }
    if (good == 0) throw Error("scaling_rfe: all trials failed the consistency window");
    study.points.push_back({time_mean / static_cast<double>(good),
                            std::sqrt(sq / static_cast<double>(good)), good, eps});
  }
  return study;
}

}  // namespace heislab::protocols
