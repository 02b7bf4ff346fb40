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

#include "heislab/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "json.hpp"

#include "heislab/errors.hpp"
#include "heislab/rng.hpp"

namespace heislab::model {

using pauli::Pauli;
using pauli::PauliString;

std::size_t HybridHamiltonian::term_index(const PauliString& op) {
  if (auto found = find_term(op)) return *found;
  spin_terms.push_back({op, 0.0});
  return spin_terms.size() - 1;
}

std::optional<std::size_t> HybridHamiltonian::find_term(const PauliString& op) const {
  for (std::size_t i = 0; i < spin_terms.size(); ++i) {
    if (spin_terms[i].op == op) return i;
  }
  return std::nullopt;
}

double HybridHamiltonian::xi_of(const PauliString& op) const {
  if (auto found = find_term(op)) return spin_terms[*found].xi;
  return 0.0;
}

double HybridHamiltonian::lambda_of(const PauliString& op, std::size_t mode) const {
  const auto found = find_term(op);
  if (!found) return 0.0;
  for (const auto& c : couplings) {
    if (c.term == *found && c.mode == mode) return c.lambda;
  }
  return 0.0;
}

void HybridHamiltonian::validate() const {
  if (n_qubits == 0) throw InvalidArgument("HybridHamiltonian: n_qubits must be >= 1");
  if (locality == 0 || locality > n_qubits)
    throw InvalidArgument("HybridHamiltonian: locality outside [1, n_qubits]");
  std::set<std::string> seen;
  for (const auto& term : spin_terms) {
    if (term.op.n_qubits() != n_qubits)
      throw ShapeError("HybridHamiltonian: Pauli string length != n_qubits");
    if (pauli::support(term.op).size() > locality)
      throw InvalidArgument("HybridHamiltonian: term " + term.op.str() +
                            " exceeds declared locality");
    if (!seen.insert(term.op.str()).second)
      throw InvalidArgument("HybridHamiltonian: duplicate Pauli term " + term.op.str());
  }
  for (double w : mode_freqs) {
    if (!(w > 0.0)) throw InvalidArgument("HybridHamiltonian: mode frequencies must be positive");
  }
  std::set<std::pair<std::size_t, std::size_t>> seen_couplings;
  for (const auto& c : couplings) {
    if (c.term >= spin_terms.size()) throw ShapeError("HybridHamiltonian: coupling term index out of range");
    if (c.mode >= mode_freqs.size()) throw ShapeError("HybridHamiltonian: coupling mode index out of range");
    if (!seen_couplings.insert({c.term, c.mode}).second)
      throw InvalidArgument("HybridHamiltonian: duplicate coupling entry");
  }
}

std::string HybridHamiltonian::to_json() const {
  nlohmann::json j;
  j["n_qubits"] = n_qubits;
  j["locality"] = locality;
  j["spin_terms"] = nlohmann::json::array();
  for (const auto& term : spin_terms) {
    j["spin_terms"].push_back({{"pauli", term.op.str()}, {"xi", term.xi}});
  }
  j["modes"] = mode_freqs;
  j["couplings"] = nlohmann::json::array();
  for (const auto& c : couplings) {
    j["couplings"].push_back(
        {{"pauli", spin_terms[c.term].op.str()}, {"mode", c.mode}, {"lambda", c.lambda}});
  }
  return j.dump(2);
}

namespace {

void reject_unknown_keys(const nlohmann::json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key()))
      throw ConfigError("unknown key '" + it.key() + "' in " + where);
  }
}

}  // namespace

HybridHamiltonian HybridHamiltonian::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("Hamiltonian JSON parse error: ") + e.what());
  }
  try {
    reject_unknown_keys(j, {"n_qubits", "locality", "spin_terms", "modes", "couplings"},
                        "Hamiltonian document");
    HybridHamiltonian h;
    h.n_qubits = j.at("n_qubits").get<std::size_t>();
    h.locality = j.at("locality").get<std::size_t>();
    for (const auto& entry : j.at("spin_terms")) {
      reject_unknown_keys(entry, {"pauli", "xi"}, "spin_terms entry");
      h.spin_terms.push_back(
          {PauliString::from_string(entry.at("pauli").get<std::string>()),
           entry.at("xi").get<double>()});
    }
    h.mode_freqs = j.at("modes").get<std::vector<double>>();
    for (const auto& entry : j.at("couplings")) {
      reject_unknown_keys(entry, {"pauli", "mode", "lambda"}, "couplings entry");
      const auto op = PauliString::from_string(entry.at("pauli").get<std::string>());
      const auto idx = h.find_term(op);
      if (!idx) throw ConfigError("coupling references Pauli '" + op.str() +
                                  "' absent from spin_terms");
      h.couplings.push_back(
          {*idx, entry.at("mode").get<std::size_t>(), entry.at("lambda").get<double>()});
    }
    h.validate();
    return h;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("Hamiltonian JSON field error: ") + e.what());
  }
}

double SpectralDensitySpec::density(double omega) const {
  const double d1 = omega * omega - big_omega * big_omega;
  return eta * omega / (d1 * d1 + gamma * gamma * omega * omega);
}

void SpectralDensitySpec::validate() const {
  if (!(eta > 0.0) || !(gamma > 0.0) || !(big_omega > 0.0) || !(omega_cut > 0.0) || n_modes < 1)
    throw InvalidArgument("SpectralDensitySpec: all parameters must be positive, n_modes >= 1");
}

std::vector<DiscretizedMode> discretize_spectral_density(const SpectralDensitySpec& spec) {
  spec.validate();
  using boost::math::quadrature::gauss_kronrod;
  std::vector<DiscretizedMode> modes;
  modes.reserve(spec.n_modes);
  const double width = spec.omega_cut / static_cast<double>(spec.n_modes);
  for (std::size_t n = 0; n < spec.n_modes; ++n) {
    const double lo = width * static_cast<double>(n);
    const double hi = lo + width;
    const auto j = [&spec](double w) { return spec.density(w); };
    const auto jw = [&spec](double w) { return spec.density(w) * w; };
    const double weight =
        gauss_kronrod<double, 31>::integrate(j, lo, hi, 15, 1e-10);
    const double first_moment =
        gauss_kronrod<double, 31>::integrate(jw, lo, hi, 15, 1e-10);
    modes.push_back({std::sqrt(weight), first_moment / weight});
  }
  return modes;
}

HybridHamiltonian build_gdm(std::uint64_t rng_seed) {
  RngStream rng(derive_seed(rng_seed, {'g', 'd', 'm'}));
  HybridHamiltonian h;
  h.n_qubits = 3;
  h.locality = 2;
  h.mode_freqs = {1.0};
  for (const auto& op : pauli::enumerate_eb(3, 2)) {
    const double xi = rng.uniform(0.5, 1.5);
    const double lambda = rng.uniform(0.01, 0.03);
    h.spin_terms.push_back({op, xi});
    h.couplings.push_back({h.spin_terms.size() - 1, 0, lambda});
  }
  h.validate();
  return h;
}

HybridHamiltonian build_sbm(const SpectralDensitySpec& spec, std::uint64_t rng_seed) {
  RngStream rng(derive_seed(rng_seed, {'s', 'b', 'm'}));
  HybridHamiltonian h;
  h.n_qubits = 1;
  h.locality = 1;
  const auto bath = discretize_spectral_density(spec);
  for (const auto& mode : bath) h.mode_freqs.push_back(mode.omega);
  for (Pauli p : {Pauli::X, Pauli::Y, Pauli::Z}) {
    const PauliString op(std::vector<Pauli>{p});
    const double xi = rng.uniform(0.5, 1.5);
    const double kappa = rng.uniform(0.5, 1.5);
    h.spin_terms.push_back({op, xi});
    for (std::size_t n = 0; n < bath.size(); ++n) {
      h.couplings.push_back({h.spin_terms.size() - 1, n, kappa * bath[n].lambda});
    }
  }
  h.validate();
  return h;
}

NamedModel named_model_from_string(const std::string& name) {
  if (name == "holstein") return NamedModel::Holstein;
  if (name == "ssh") return NamedModel::Ssh;
  if (name == "spin_peierls") return NamedModel::SpinPeierls;
  throw InvalidArgument("unsupported model name '" + name + "'");
}

namespace {

PauliString two_site(std::size_t n, std::size_t i, std::size_t j, Pauli p) {
  std::vector<Pauli> letters(n, Pauli::I);
  letters[i] = p;
  letters[j] = p;
  return PauliString(std::move(letters));
}

PauliString one_site(std::size_t n, std::size_t i, Pauli p) {
  std::vector<Pauli> letters(n, Pauli::I);
  letters[i] = p;
  return PauliString(std::move(letters));
}

HybridHamiltonian build_holstein(std::size_t size, const NamedModelParams& params,
                                 RngStream& rng) {
  HybridHamiltonian h;
  h.n_qubits = size;
  h.locality = 2;
  for (std::size_t i = 0; i < size; ++i)
    h.mode_freqs.push_back(rng.uniform(params.omega_range.first, params.omega_range.second));
  for (std::size_t i = 0; i + 1 < size; ++i) {
    const double xi = rng.uniform(params.xi_range.first, params.xi_range.second);
    h.spin_terms.push_back({two_site(size, i, i + 1, Pauli::X), xi});
    h.spin_terms.push_back({two_site(size, i, i + 1, Pauli::Y), xi});
  }
  // lambda_i (1 - Z_i)(b_i^dag + b_i): identity offset plus -Z_i.
  const std::size_t id = h.term_index(PauliString::identity(size));
  for (std::size_t i = 0; i < size; ++i) {
    const double lambda = rng.uniform(params.lambda_range.first, params.lambda_range.second);
    h.couplings.push_back({id, i, lambda});
    h.couplings.push_back({h.term_index(one_site(size, i, Pauli::Z)), i, -lambda});
  }
  return h;
}

HybridHamiltonian build_ssh(std::size_t size, const NamedModelParams& params, RngStream& rng) {
  HybridHamiltonian h;
  h.n_qubits = size;
  h.locality = 2;
  for (std::size_t b = 0; b + 1 < size; ++b)
    h.mode_freqs.push_back(rng.uniform(params.omega_range.first, params.omega_range.second));
  const std::size_t id = h.term_index(PauliString::identity(size));
  double id_total = 0.0;
  for (std::size_t i = 0; i < size; ++i) {
    const double xi = rng.uniform(params.xi_range.first, params.xi_range.second);
    id_total += xi;
    h.spin_terms.push_back({one_site(size, i, Pauli::Z), -xi});
  }
  h.spin_terms[id].xi = id_total;
  for (std::size_t b = 0; b + 1 < size; ++b) {
    const double lambda = rng.uniform(params.lambda_range.first, params.lambda_range.second);
    h.couplings.push_back({h.term_index(two_site(size, b, b + 1, Pauli::X)), b, lambda});
    h.couplings.push_back({h.term_index(two_site(size, b, b + 1, Pauli::Y)), b, lambda});
  }
  return h;
}

HybridHamiltonian build_spin_peierls(std::size_t size, const NamedModelParams& params,
                                     RngStream& rng) {
  HybridHamiltonian h;
  h.n_qubits = size;
  h.locality = 2;
  for (std::size_t i = 0; i < size; ++i)
    h.mode_freqs.push_back(rng.uniform(params.omega_range.first, params.omega_range.second));
  const double quarter = 0.25;           // S = sigma/2 on both factors
  const double quad = 1.0 / std::sqrt(2.0);  // X = (b^dag + b)/sqrt(2)
  for (std::size_t i = 0; i + 1 < size; ++i) {
    const double xi = rng.uniform(params.xi_range.first, params.xi_range.second);
    const double lambda = rng.uniform(params.lambda_range.first, params.lambda_range.second);
    for (Pauli p : {Pauli::X, Pauli::Y, Pauli::Z}) {
      const std::size_t term = h.term_index(two_site(size, i, i + 1, p));
      h.spin_terms[term].xi += xi * quarter;
      // lambda_i (X_{i+1} - X_i) S_i . S_{i+1}
      h.couplings.push_back({term, i + 1, lambda * quarter * quad});
      h.couplings.push_back({term, i, -lambda * quarter * quad});
    }
  }
  return h;
}

}  // namespace

HybridHamiltonian build_named_model(NamedModel which, std::size_t size,
                                    const NamedModelParams& params, std::uint64_t rng_seed) {
  if (size < 2) throw InvalidArgument("build_named_model: size must be >= 2");
  RngStream rng(derive_seed(rng_seed, {'z', 'o', 'o', static_cast<std::uint64_t>(which)}));
  HybridHamiltonian h;
  switch (which) {
    case NamedModel::Holstein: h = build_holstein(size, params, rng); break;
    case NamedModel::Ssh: h = build_ssh(size, params, rng); break;
    case NamedModel::SpinPeierls: h = build_spin_peierls(size, params, rng); break;
  }
  h.validate();
  return h;
}

}  // namespace heislab::model
