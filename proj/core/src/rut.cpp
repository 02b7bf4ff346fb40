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

#include "heislab/rut.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "heislab/errors.hpp"
#include "heislab/parallel.hpp"

namespace heislab::rut {

namespace {
constexpr std::complex<double> kI{0.0, 1.0};
}

std::size_t ReshapePlan::segments(double t) const {
  if (effective()) return 0;
  return static_cast<std::size_t>(std::llround(t / tau));
}

void ReshapePlan::validate() const {
  if (tau < 0.0) throw InvalidArgument("ReshapePlan: tau must be >= 0");
  if (kinds.u2b) {
    if (!e_b) throw InvalidArgument("ReshapePlan: U2b layers need a reference E_b");
    if (pauli::support(*e_b).empty())
      throw InvalidArgument("ReshapePlan: E_b must not be the identity");
  }
  if (insert_u3 && omega_tilde.empty())
    throw InvalidArgument("ReshapePlan: U3 insertion needs frequency estimates");
}

model::HybridHamiltonian effective_hamiltonian(const model::HybridHamiltonian& h,
                                               LayerKinds kinds,
                                               const std::optional<pauli::PauliString>& e_b) {
  if (!kinds.u1 && !kinds.u2b)
    throw InvalidArgument("effective_hamiltonian: at least one layer kind required");
  if (kinds.u2b && !e_b)
    throw InvalidArgument("effective_hamiltonian: U2b filter needs E_b");

  const auto in_sb = [&](const pauli::PauliString& op) {
    if (!kinds.u2b) return true;
    try {
      (void)pauli::sb_bits_of(op, *e_b);
      return true;
    } catch (const InvalidArgument&) {
      return false;
    }
  };

  model::HybridHamiltonian out;
  out.n_qubits = h.n_qubits;
  out.locality = h.locality;
  out.mode_freqs = h.mode_freqs;
  std::vector<std::optional<std::size_t>> remap(h.spin_terms.size());
  for (std::size_t i = 0; i < h.spin_terms.size(); ++i) {
    if (in_sb(h.spin_terms[i].op)) {
      remap[i] = out.spin_terms.size();
      out.spin_terms.push_back(h.spin_terms[i]);
    }
  }
  if (!kinds.u1) {
    for (const auto& c : h.couplings) {
      if (remap[c.term]) out.couplings.push_back({*remap[c.term], c.mode, c.lambda});
    }
  }
  return out;
}

UnitaryLayer sample_layer(LayerKind kind, const std::optional<pauli::PauliString>& e_b,
                          RngStream& rng) {
  UnitaryLayer layer;
  layer.kind = kind;
  switch (kind) {
    case LayerKind::U1:
      layer.theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
      break;
    case LayerKind::U2b: {
      if (!e_b) throw InvalidArgument("sample_layer: U2b needs E_b");
      layer.e_b = *e_b;
      for (std::size_t j = 0; j < e_b->n_qubits(); ++j) {
        if (e_b->letter(j) != pauli::Pauli::I) {
          layer.support_theta.push_back(rng.uniform(0.0, std::numbers::pi));
        } else {
          const double theta = rng.uniform(0.0, std::numbers::pi);
          const double phi = rng.uniform(0.0, std::numbers::pi);
          layer.off_support_angles.push_back({theta, phi});
        }
      }
      break;
    }
    case LayerKind::U3:
      throw InvalidArgument("sample_layer: U3 is deterministic, use make_u3");
  }
  return layer;
}

UnitaryLayer make_u3(const std::vector<double>& omega_tilde, double tau) {
  UnitaryLayer layer;
  layer.kind = LayerKind::U3;
  layer.omega_tilde = omega_tilde;
  layer.tau = tau;
  return layer;
}

namespace {

Eigen::Matrix2cd rotation_matrix(pauli::Pauli p, double theta) {
  // exp(-i theta P) = cos(theta) I - i sin(theta) P
  return std::cos(theta) * Eigen::Matrix2cd::Identity() -
         kI * std::sin(theta) * fock::pauli_matrix_1q(p);
}

}  // namespace

Eigen::Matrix2cd layer_qubit_matrix(const UnitaryLayer& layer, std::size_t qubit) {
  if (layer.kind != LayerKind::U2b)
    throw InvalidArgument("layer_qubit_matrix: only U2b layers act per qubit");
  std::size_t support_idx = 0;
  std::size_t off_idx = 0;
  for (std::size_t j = 0; j < layer.e_b.n_qubits(); ++j) {
    const bool on_support = layer.e_b.letter(j) != pauli::Pauli::I;
    if (j == qubit) {
      if (on_support)
        return rotation_matrix(layer.e_b.letter(j), layer.support_theta.at(support_idx));
      const auto [theta, phi] = layer.off_support_angles.at(off_idx);
      return rotation_matrix(pauli::Pauli::X, theta) * rotation_matrix(pauli::Pauli::Y, phi);
    }
    if (on_support) ++support_idx; else ++off_idx;
  }
  throw ShapeError("layer_qubit_matrix: qubit index out of range");
}

namespace {

Eigen::VectorXcd mode_phases(std::size_t cutoff, double angle_per_level) {
  Eigen::VectorXcd phases(static_cast<Eigen::Index>(cutoff));
  for (std::size_t m = 0; m < cutoff; ++m)
    phases[static_cast<Eigen::Index>(m)] =
        std::exp(kI * angle_per_level * static_cast<double>(m));
  return phases;
}

}  // namespace

void apply_layer_in_place(fock::DenseHybridState& state, const UnitaryLayer& layer,
                          bool dagger) {
  switch (layer.kind) {
    case LayerKind::U1: {
      const double angle = dagger ? layer.theta : -layer.theta;
      for (std::size_t n = 0; n < state.dims.n_modes(); ++n)
        fock::apply_mode_diagonal_in_place(state, n,
                                           mode_phases(state.dims.cutoffs[n], angle));
      break;
    }
    case LayerKind::U2b: {
      for (std::size_t j = 0; j < state.dims.n_qubits; ++j) {
        Eigen::Matrix2cd u = layer_qubit_matrix(layer, j);
        if (dagger) u = u.adjoint().eval();
        fock::apply_single_qubit_in_place(state, j, u);
      }
      break;
    }
    case LayerKind::U3: {
      for (std::size_t n = 0; n < state.dims.n_modes(); ++n) {
        const double angle = (dagger ? -1.0 : 1.0) * layer.omega_tilde.at(n) * layer.tau;
        fock::apply_mode_diagonal_in_place(state, n, mode_phases(state.dims.cutoffs[n], angle));
      }
      break;
    }
  }
}

void conjugate_by_layer_in_place(Eigen::MatrixXcd& m, const fock::HybridDims& dims,
                                 const UnitaryLayer& layer) {
  switch (layer.kind) {
    case LayerKind::U1: {
      for (std::size_t n = 0; n < dims.n_modes(); ++n)
        fock::conjugate_mode_diagonal_in_place(m, dims, n,
                                               mode_phases(dims.cutoffs[n], -layer.theta));
      break;
    }
    case LayerKind::U2b: {
      for (std::size_t j = 0; j < dims.n_qubits; ++j)
        fock::conjugate_single_qubit_in_place(m, dims, j, layer_qubit_matrix(layer, j));
      break;
    }
    case LayerKind::U3: {
      for (std::size_t n = 0; n < dims.n_modes(); ++n)
        fock::conjugate_mode_diagonal_in_place(
            m, dims, n, mode_phases(dims.cutoffs[n], layer.omega_tilde.at(n) * layer.tau));
      break;
    }
  }
}

fock::DenseHybridState FiniteRCircuit::run(const fock::DenseHybridState& init,
                                           RngStream& rng) const {
  if (init.dims != dims) throw ShapeError("FiniteRCircuit::run: state dims mismatch");
  fock::DenseHybridState state = init;
  const UnitaryLayer u3 =
      plan.insert_u3 ? make_u3(plan.omega_tilde, plan.tau) : UnitaryLayer{};
  for (std::size_t i = 0; i < r; ++i) {
    if (plan.insert_u3) apply_layer_in_place(state, u3, false);
    UnitaryLayer l1, l2b;
    if (plan.kinds.u1) {
      l1 = sample_layer(LayerKind::U1, std::nullopt, rng);
      apply_layer_in_place(state, l1, false);
    }
    if (plan.kinds.u2b) {
      l2b = sample_layer(LayerKind::U2b, plan.e_b, rng);
      apply_layer_in_place(state, l2b, false);
    }
    state.amplitudes = segment_propagator * state.amplitudes;
    if (plan.kinds.u2b) apply_layer_in_place(state, l2b, true);
    if (plan.kinds.u1) apply_layer_in_place(state, l1, true);
    if ((i & 0xff) == 0xff && state.max_top_level_population() > leak_threshold)
      throw ResourceGuardError("FiniteRCircuit: Fock truncation leakage above threshold");
  }
  if (state.max_top_level_population() > leak_threshold)
    throw ResourceGuardError("FiniteRCircuit: Fock truncation leakage above threshold");
  return state;
}

FiniteRCircuit build_finite_r_circuit(const model::HybridHamiltonian& h,
                                      const ReshapePlan& plan, double t,
                                      const std::vector<std::size_t>& cutoffs) {
  plan.validate();
  if (plan.effective())
    throw InvalidArgument("build_finite_r_circuit: plan requests the effective limit");
  const fock::DenseOperator op = fock::materialize(h, cutoffs);
  if (!op.has_matrix())
    throw ResourceGuardError("build_finite_r_circuit: dimension too large for dense segments");
  FiniteRCircuit circuit;
  circuit.dims = op.dims();
  circuit.plan = plan;
  circuit.r = plan.segments(t);
  fock::Propagator prop(op, plan.tau);
  circuit.segment_propagator = prop.matrix();
  return circuit;
}

fock::DenseOperator materialize_effective_trotter(const model::HybridHamiltonian& h,
                                                  const pauli::PauliString& e_b,
                                                  const std::vector<double>& omega_tilde,
                                                  const std::vector<std::size_t>& cutoffs) {
  if (omega_tilde.size() != h.n_modes())
    throw ShapeError("materialize_effective_trotter: omega_tilde length mismatch");
  const auto eff = effective_hamiltonian(h, LayerKinds{false, true}, e_b);
  const fock::DenseOperator base = fock::materialize(eff, cutoffs);
  Eigen::MatrixXcd mat = base.matrix();
  for (std::size_t n = 0; n < h.n_modes(); ++n) {
    mat -= omega_tilde[n] *
           fock::lift_mode_operator(base.dims(), n, fock::number_op(cutoffs[n])).matrix();
  }
  return fock::DenseOperator::from_matrix(base.dims(), std::move(mat), true);
}

std::vector<DeviationPoint> deviation_study(const model::HybridHamiltonian& h,
                                            const std::vector<double>& t_grid,
                                            const std::vector<double>& tau_grid,
                                            const DeviationConfig& cfg,
                                            std::vector<DeviationRaw>* raw) {
  if (cfg.trials < 100) throw InvalidArgument("deviation_study: needs trials >= 100");
  const std::vector<double> omega_tilde =
      cfg.omega_tilde.empty() ? h.mode_freqs : cfg.omega_tilde;
  ReshapePlan plan;
  plan.kinds.u2b = true;
  plan.e_b = cfg.e_b;
  plan.insert_u3 = true;
  plan.omega_tilde = omega_tilde;

  const auto label = pauli::EigenstateLabel::from_index(
      cfg.label_index, pauli::support(cfg.e_b).size());
  const fock::DenseOperator ideal_gen =
      materialize_effective_trotter(h, cfg.e_b, omega_tilde, cfg.cutoffs);
  const fock::HybridDims dims = ideal_gen.dims();
  std::vector<Eigen::VectorXcd> mode_vacua;
  for (std::size_t d : cfg.cutoffs) {
    Eigen::VectorXcd vac = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(d));
    vac[0] = 1.0;
    mode_vacua.push_back(vac);
  }
  const fock::DenseHybridState init =
      fock::product_state(dims, fock::pauli_eigenstate(cfg.e_b, label), mode_vacua);

  std::vector<DeviationPoint> table;
  std::size_t point_index = 0;
  for (double t : t_grid) {
    for (double tau : tau_grid) {
      const fock::DenseHybridState ideal = fock::evolve(init, ideal_gen, t);
      ReshapePlan point_plan = plan;
      point_plan.tau = tau;
      const FiniteRCircuit circuit = build_finite_r_circuit(h, point_plan, t, cfg.cutoffs);
      std::vector<double> tds(cfg.trials, 0.0);
      parallel_for(cfg.trials, cfg.threads, [&](std::size_t trial) {
        RngStream rng(derive_seed(cfg.seed, {0xd37u, point_index, trial}));
        const auto actual = circuit.run(init, rng);
        tds[trial] = fock::trace_distance_pure(ideal, actual);
      });
      double mean = 0.0;
      for (double v : tds) mean += v;
      mean /= static_cast<double>(cfg.trials);
      double var = 0.0;
      for (double v : tds) var += (v - mean) * (v - mean);
      var /= static_cast<double>(cfg.trials - 1);
      if (raw) {
        for (std::size_t trial = 0; trial < cfg.trials; ++trial)
          raw->push_back({point_index, trial, tds[trial]});
      }
      table.push_back({t, tau, circuit.r, mean, var,
                       std::sqrt(var / static_cast<double>(cfg.trials)), cfg.trials});
      ++point_index;
    }
  }
  return table;
}

BranchDriveModel::BranchDriveModel(const model::HybridHamiltonian& h,
                                   const pauli::PauliString& e_b,
                                   const pauli::EigenstateLabel& label) {
  const auto supp = pauli::support(e_b);
  if (label.k() != supp.size())
    throw ShapeError("BranchDriveModel: label length must equal |supp(E_b)|");
  n_support_ = supp.size();
  is_support_.resize(h.n_qubits);
  std::vector<std::optional<std::size_t>> off_index(h.n_qubits);
  for (std::size_t j = 0; j < h.n_qubits; ++j) {
    is_support_[j] = e_b.letter(j) != pauli::Pauli::I;
    if (!is_support_[j]) off_index[j] = n_off_++;
  }
  mean_drive_.assign(h.n_modes(), 0.0);
  for (const auto& c : h.couplings) {
    const auto& op = h.spin_terms[c.term].op;
    double sign = 1.0;
    bool vanishes = false;
    std::vector<std::pair<std::size_t, pauli::Pauli>> off_factors;
    std::size_t support_idx = 0;
    for (std::size_t j = 0; j < h.n_qubits; ++j) {
      const pauli::Pauli letter = op.letter(j);
      if (e_b.letter(j) != pauli::Pauli::I) {
        if (letter == e_b.letter(j)) {
          if (label.bits[support_idx]) sign = -sign;
        } else if (letter != pauli::Pauli::I) {
          vanishes = true;  // mismatched support letter has zero branch diagonal
          break;
        }
        ++support_idx;
      } else if (letter != pauli::Pauli::I) {
        off_factors.push_back({*off_index[j], letter});
      }
    }
    if (vanishes) continue;
    if (off_factors.empty()) {
      mean_drive_[c.mode] += sign * c.lambda;
    } else {
      noise_terms_.push_back({c.mode, sign * c.lambda, std::move(off_factors)});
    }
  }
}

void BranchDriveModel::sample_drive(RngStream& rng, std::vector<double>& out) const {
  out = mean_drive_;
  // draw in the same per-qubit order as sample_layer(U2b)
  std::vector<std::array<double, 3>> diag(n_off_);  // m(X), m(Y), m(Z) per off qubit
  std::size_t off = 0;
  for (bool on_support : is_support_) {
    if (on_support) {
      (void)rng.uniform();  // support angles never enter the branch diagonal
      continue;
    }
    const double theta = rng.uniform(0.0, std::numbers::pi);
    const double phi = rng.uniform(0.0, std::numbers::pi);
    const double c2t = std::cos(2.0 * theta);
    const double s2t = std::sin(2.0 * theta);
    const double c2p = std::cos(2.0 * phi);
    const double s2p = std::sin(2.0 * phi);
    diag[off++] = {s2p, -s2t * c2p, c2t * c2p};
  }
  for (const auto& term : noise_terms_) {
    double value = term.coeff;
    for (const auto& [idx, letter] : term.off_factors) {
      value *= diag[idx][static_cast<std::size_t>(letter) - 1];
    }
    out[term.mode] += value;
  }
}

}  // namespace heislab::rut
