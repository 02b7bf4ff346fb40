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

#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "heislab/errors.hpp"

using namespace heislab;
using pauli::PauliString;

namespace {

constexpr double kPi = std::numbers::pi;

model::HybridHamiltonian worked_example_spin() {
  // H_s = ZII + ZIX + YIX + ZZX with unit coefficients
  model::HybridHamiltonian h;
  h.n_qubits = 3;
  h.locality = 3;
  for (const char* word : {"ZII", "ZIX", "YIX", "ZZX"}) {
    h.spin_terms.push_back({PauliString::from_string(word), 1.0});
  }
  return h;
}

model::HybridHamiltonian one_qubit_one_mode(std::uint64_t seed) {
  RngStream rng(seed);
  model::HybridHamiltonian h;
  h.n_qubits = 1;
  h.locality = 1;
  h.mode_freqs = {1.0};
  std::size_t idx = 0;
  for (const char* word : {"X", "Y", "Z"}) {
    h.spin_terms.push_back({PauliString::from_string(word), rng.uniform(0.5, 1.5)});
    h.couplings.push_back({idx++, 0, rng.uniform(0.01, 0.03)});
  }
  return h;
}

}  // namespace

TEST_CASE("effective Hamiltonian filters") {
  SUBCASE("three-qubit worked example: ZII + ZIX + YIX + ZZX -> ZII + ZIX") {
    const auto h = worked_example_spin();
    const auto eff = rut::effective_hamiltonian(h, {false, true},
                                                PauliString::from_string("ZIX"));
    REQUIRE(eff.spin_terms.size() == 2);
    CHECK(eff.spin_terms[0].op.str() == "ZII");
    CHECK(eff.spin_terms[1].op.str() == "ZIX");
  }
  SUBCASE("U1 deletes every coupling and keeps the rest") {
    const auto h = one_qubit_one_mode(3);
    const auto eff = rut::effective_hamiltonian(h, {true, false}, std::nullopt);
    CHECK(eff.couplings.empty());
    CHECK(eff.spin_terms.size() == 3);
    CHECK(eff.mode_freqs == h.mode_freqs);
  }
  SUBCASE("U2b keeps exactly the S_b couplings") {
    const auto h = one_qubit_one_mode(4);
    const auto eff =
        rut::effective_hamiltonian(h, {false, true}, PauliString::from_string("X"));
    REQUIRE(eff.couplings.size() == 1);
    CHECK(eff.spin_terms[eff.couplings[0].term].op.str() == "X");
    CHECK(eff.mode_freqs == h.mode_freqs);
  }
  SUBCASE("idempotence per kind") {
    const auto h = one_qubit_one_mode(5);
    const auto e_b = PauliString::from_string("Y");
    const auto once = rut::effective_hamiltonian(h, {false, true}, e_b);
    const auto twice = rut::effective_hamiltonian(once, {false, true}, e_b);
    CHECK(twice.spin_terms.size() == once.spin_terms.size());
    CHECK(twice.couplings.size() == once.couplings.size());
    const auto u1_once = rut::effective_hamiltonian(h, {true, false}, std::nullopt);
    const auto u1_twice = rut::effective_hamiltonian(u1_once, {true, false}, std::nullopt);
    CHECK(u1_twice.spin_terms.size() == u1_once.spin_terms.size());
  }
  SUBCASE("survival iff the string is in S_b (exhaustive, 2 qubits)") {
    model::HybridHamiltonian h;
    h.n_qubits = 2;
    h.locality = 2;
    for (std::size_t k = 1; k <= 2; ++k) {
      for (const auto& op : pauli::enumerate_eb(2, k)) h.spin_terms.push_back({op, 1.0});
    }
    h.spin_terms.push_back({PauliString::identity(2), 1.0});
    for (std::size_t k = 1; k <= 2; ++k) {
      for (const auto& e_b : pauli::enumerate_eb(2, k)) {
        const auto eff = rut::effective_hamiltonian(h, {false, true}, e_b);
        const auto sb = pauli::build_sb_set(e_b);
        CHECK(eff.spin_terms.size() == sb.size());
        for (const auto& term : eff.spin_terms) {
          CHECK_NOTHROW((void)pauli::sb_bits_of(term.op, e_b));
        }
      }
    }
  }
}

TEST_CASE("layer sampling") {
  SUBCASE("U1 angles are uniform on [0, 2pi)") {
    RngStream rng(21);
    const std::size_t n = 100000;
    std::vector<double> thetas(n);
    double mean = 0.0;
    for (auto& th : thetas) {
      th = rut::sample_layer(rut::LayerKind::U1, std::nullopt, rng).theta;
      mean += th;
    }
    mean /= static_cast<double>(n);
    const double sigma = 2.0 * kPi / std::sqrt(12.0 * static_cast<double>(n));
    CHECK(std::abs(mean - kPi) < 3.0 * sigma);
    // Kolmogorov-Smirnov against the uniform CDF
    std::sort(thetas.begin(), thetas.end());
    double d_stat = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double cdf = thetas[i] / (2.0 * kPi);
      d_stat = std::max(d_stat, std::abs(cdf - static_cast<double>(i + 1) / n));
      d_stat = std::max(d_stat, std::abs(cdf - static_cast<double>(i) / n));
    }
    const double k_stat = d_stat * (std::sqrt(static_cast<double>(n)) + 0.12 +
                                    0.11 / std::sqrt(static_cast<double>(n)));
    double p_value = 0.0;  // asymptotic Kolmogorov tail
    for (int j = 1; j <= 100; ++j) {
      p_value += 2.0 * std::pow(-1.0, j - 1) * std::exp(-2.0 * j * j * k_stat * k_stat);
    }
    CHECK(p_value > 1e-3);
  }
  SUBCASE("U2b for ZIX draws {theta_1}, {theta_2, phi_2}, {theta_3}") {
    RngStream rng(2);
    const auto layer =
        rut::sample_layer(rut::LayerKind::U2b, PauliString::from_string("ZIX"), rng);
    CHECK(layer.support_theta.size() == 2);       // qubits 1 and 3
    CHECK(layer.off_support_angles.size() == 1);  // qubit 2
    for (double th : layer.support_theta) {
      CHECK(th >= 0.0);
      CHECK(th < kPi);
    }
  }
  SUBCASE("fixed seed reproduces the layer sequence") {
    RngStream a(9), b(9);
    for (int i = 0; i < 10; ++i) {
      const auto la = rut::sample_layer(rut::LayerKind::U2b, PauliString::from_string("XY"), a);
      const auto lb = rut::sample_layer(rut::LayerKind::U2b, PauliString::from_string("XY"), b);
      CHECK(la.support_theta == lb.support_theta);
      CHECK(la.off_support_angles == lb.off_support_angles);
    }
  }
  SUBCASE("U3 is deterministic") {
    RngStream rng(1);
    CHECK_THROWS_AS((void)rut::sample_layer(rut::LayerKind::U3, std::nullopt, rng),
                    InvalidArgument);
    const auto u3 = rut::make_u3({1.5}, 0.01);
    CHECK(u3.omega_tilde == std::vector<double>{1.5});
  }
}

TEST_CASE("zero-angle layers act as the identity segment") {
  rut::UnitaryLayer layer;
  layer.kind = rut::LayerKind::U2b;
  layer.e_b = PauliString::from_string("X");
  layer.support_theta = {0.0};
  fock::DenseHybridState state;
  state.dims = fock::HybridDims{1, {16}};
  state.amplitudes = Eigen::VectorXcd::Zero(32);
  state.amplitudes[0] = 1.0;
  auto before = state;
  rut::apply_layer_in_place(state, layer, false);
  CHECK((state.amplitudes - before.amplitudes).norm() < 1e-15);
}

TEST_CASE("finite-R circuit") {
  const auto h = one_qubit_one_mode(7);
  const std::vector<std::size_t> cutoffs{24};
  rut::ReshapePlan plan;
  plan.kinds.u2b = true;
  plan.e_b = PauliString::from_string("X");
  plan.insert_u3 = true;
  plan.omega_tilde = h.mode_freqs;
  SUBCASE("R follows t / tau") {
    plan.tau = 0.25;
    const auto circuit = rut::build_finite_r_circuit(h, plan, 2.0, cutoffs);
    CHECK(circuit.r == 8);
  }
  SUBCASE("one replayed segment equals the manual operator product") {
    plan.tau = 0.05;
    const auto circuit = rut::build_finite_r_circuit(h, plan, 0.05, cutoffs);
    REQUIRE(circuit.r == 1);
    fock::DenseHybridState init;
    init.dims = circuit.dims;
    init.amplitudes = Eigen::VectorXcd::Zero(48);
    init.amplitudes[0] = 1.0 / std::sqrt(2.0);
    init.amplitudes[24] = 1.0 / std::sqrt(2.0);
    RngStream run_rng(11);
    const auto out = circuit.run(init, run_rng);
    RngStream replay(11);
    auto manual = init;
    rut::apply_layer_in_place(manual, rut::make_u3(plan.omega_tilde, plan.tau), false);
    const auto layer = rut::sample_layer(rut::LayerKind::U2b, plan.e_b, replay);
    rut::apply_layer_in_place(manual, layer, false);
    manual.amplitudes = circuit.segment_propagator * manual.amplitudes;
    rut::apply_layer_in_place(manual, layer, true);
    CHECK((out.amplitudes - manual.amplitudes).norm() < 1e-13);
  }
  SUBCASE("trace distance to the effective state shrinks with R") {
    const double t = 2.0;
    const auto label = pauli::EigenstateLabel::from_index(0, 1);
    const auto ideal_gen =
        rut::materialize_effective_trotter(h, *plan.e_b, h.mode_freqs, cutoffs);
    Eigen::VectorXcd vac = Eigen::VectorXcd::Zero(24);
    vac[0] = 1.0;
    const auto init = fock::product_state(ideal_gen.dims(),
                                          fock::pauli_eigenstate(*plan.e_b, label), {vac});
    const auto ideal = fock::evolve(init, ideal_gen, t);
    std::vector<double> means;
    for (double tau : {0.1, 0.01, 0.001}) {
      rut::ReshapePlan p = plan;
      p.tau = tau;
      const auto circuit = rut::build_finite_r_circuit(h, p, t, cutoffs);
      double mean = 0.0;
      const int trials = 40;
      for (int i = 0; i < trials; ++i) {
        RngStream rng(derive_seed(100, {static_cast<std::uint64_t>(tau * 1e6),
                                        static_cast<std::uint64_t>(i)}));
        mean += fock::trace_distance_pure(ideal, circuit.run(init, rng));
      }
      means.push_back(mean / trials);
    }
    CHECK(means[1] < means[0]);
    CHECK(means[2] < means[1]);
    // mean ~ sqrt(tau) at fixed t: a decade in tau shrinks it by ~sqrt(10)
    CHECK(means[0] / means[1] > 2.0);
    CHECK(means[0] / means[1] < 5.0);
    CHECK(means[1] / means[2] > 2.0);
    CHECK(means[1] / means[2] < 5.0);
  }
}

TEST_CASE("Monte-Carlo layer average matches the symbolic effective Hamiltonian") {
  // compact version of the full acceptance check: 2 qubits, 1 mode, one E_b
  model::HybridHamiltonian h;
  h.n_qubits = 2;
  h.locality = 2;
  h.mode_freqs = {1.3};
  std::size_t idx = 0;
  RngStream coeff_rng(13);
  for (const char* word : {"XI", "ZI", "XY", "ZZ", "IY"}) {
    h.spin_terms.push_back({PauliString::from_string(word), coeff_rng.uniform(0.5, 1.5)});
    h.couplings.push_back({idx++, 0, coeff_rng.uniform(0.01, 0.03)});
  }
  const std::vector<std::size_t> cutoffs{6};
  const auto e_b = PauliString::from_string("XY");
  const auto full_op = fock::materialize(h, cutoffs);
  const auto& full = full_op.matrix();
  const auto expected =
      fock::materialize(rut::effective_hamiltonian(h, {false, true}, e_b), cutoffs).matrix();

  const std::size_t draws = 4000;
  Eigen::MatrixXcd mean = Eigen::MatrixXcd::Zero(full.rows(), full.cols());
  RngStream rng(17);
  for (std::size_t i = 0; i < draws; ++i) {
    Eigen::MatrixXcd sample = full;
    rut::conjugate_by_layer_in_place(sample, full_op.dims(),
                                     rut::sample_layer(rut::LayerKind::U2b, e_b, rng));
    mean += sample;
  }
  mean /= static_cast<double>(draws);
  Eigen::MatrixXd var = Eigen::MatrixXd::Zero(full.rows(), full.cols());
  RngStream rng2(17);
  for (std::size_t i = 0; i < draws; ++i) {
    Eigen::MatrixXcd sample = full;
    rut::conjugate_by_layer_in_place(sample, full_op.dims(),
                                     rut::sample_layer(rut::LayerKind::U2b, e_b, rng2));
    var += (sample - mean).cwiseAbs2();
  }
  var /= static_cast<double>(draws - 1);
  const Eigen::MatrixXd se = (var / static_cast<double>(draws)).cwiseSqrt();
  const Eigen::MatrixXd dev = (mean - expected).cwiseAbs();
  for (Eigen::Index i = 0; i < dev.rows(); ++i) {
    for (Eigen::Index j = 0; j < dev.cols(); ++j) {
      REQUIRE(dev(i, j) <= std::max(5.0 * se(i, j), 1e-10));
    }
  }
}

TEST_CASE("branch drive model") {
  const auto gdm = model::build_gdm(31);
  const auto e_b = PauliString::from_string("XXI");
  for (std::size_t li = 0; li < 4; ++li) {
    CAPTURE(li);
    const auto label = pauli::EigenstateLabel::from_index(li, 2);
    const rut::BranchDriveModel drive(gdm, e_b, label);
    // mean drive is the S_b gamma sum
    double expected = 0.0;
    for (const auto& c : gdm.couplings) {
      try {
        expected += c.lambda * pauli::eigenvalue_gamma(gdm.spin_terms[c.term].op, e_b, label);
      } catch (const InvalidArgument&) {
      }
    }
    CHECK(drive.mean_drive()[0] == doctest::Approx(expected).epsilon(1e-12));

    // one sampled drive agrees with a dense computation at the same angles
    std::vector<double> lam;
    RngStream sample_rng(41 + li);
    drive.sample_drive(sample_rng, lam);
    RngStream replay(41 + li);
    const auto layer = rut::sample_layer(rut::LayerKind::U2b, e_b, replay);
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(1, 1);
    for (std::size_t j = 0; j < 3; ++j) {
      const Eigen::Matrix2cd uj = rut::layer_qubit_matrix(layer, j);
      Eigen::MatrixXcd next(u.rows() * 2, u.cols() * 2);
      for (Eigen::Index r = 0; r < u.rows(); ++r)
        for (Eigen::Index c = 0; c < u.cols(); ++c)
          next.block(2 * r, 2 * c, 2, 2) = u(r, c) * uj;
      u = next;
    }
    const auto spin_state = fock::pauli_eigenstate(e_b, label);
    double dense = 0.0;
    for (const auto& c : gdm.couplings) {
      const auto op = fock::pauli_matrix(gdm.spin_terms[c.term].op);
      const std::complex<double> val = spin_state.dot(u.adjoint() * op * u * spin_state);
      dense += c.lambda * val.real();
    }
    CHECK(lam[0] == doctest::Approx(dense).epsilon(1e-10));

    // the Monte-Carlo mean of the sampled drive converges to mean_drive
    RngStream mc(77 + li);
    double acc = 0.0;
    const std::size_t draws = 20000;
    for (std::size_t i = 0; i < draws; ++i) {
      drive.sample_drive(mc, lam);
      acc += lam[0];
    }
    acc /= static_cast<double>(draws);
    CHECK(std::abs(acc - expected) < 5.0 * 0.03 / std::sqrt(static_cast<double>(draws)));
  }
}

TEST_CASE("deviation study basics") {
  const auto h = one_qubit_one_mode(55);
  rut::DeviationConfig cfg;
  cfg.cutoffs = {16};
  cfg.e_b = PauliString::from_string("X");
  cfg.trials = 100;
  cfg.seed = 5;
  cfg.threads = 2;
  SUBCASE("t = 0 has zero deviation") {
    const auto table = rut::deviation_study(h, {0.0}, {1e-2}, cfg);
    REQUIRE(table.size() == 1);
    CHECK(table[0].mean_td == doctest::Approx(0.0));
  }
  SUBCASE("trials precondition") {
    cfg.trials = 10;
    CHECK_THROWS_AS(rut::deviation_study(h, {1.0}, {1e-2}, cfg), InvalidArgument);
  }
  SUBCASE("raw rows cover every trial") {
    std::vector<rut::DeviationRaw> raw;
    const auto table = rut::deviation_study(h, {0.5}, {5e-3}, cfg, &raw);
    CHECK(raw.size() == cfg.trials);
    double mean = 0.0;
    for (const auto& r : raw) mean += r.trace_distance;
    CHECK(mean / cfg.trials == doctest::Approx(table[0].mean_td).epsilon(1e-12));
  }
}
