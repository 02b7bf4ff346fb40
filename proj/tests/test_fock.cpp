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

#include "heislab/fock.hpp"

#include <cmath>
#include <numbers>

#include "doctest.h"
#include "heislab/errors.hpp"
#include "heislab/model.hpp"

using namespace heislab;
using fock::Complex;
using fock::DenseHybridState;
using fock::HybridDims;
using pauli::PauliString;

namespace {

constexpr double kPi = std::numbers::pi;

DenseHybridState vacuum_state(const HybridDims& dims) {
  Eigen::VectorXcd spin = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(dims.qubit_dim()));
  spin[0] = 1.0;
  std::vector<Eigen::VectorXcd> modes;
  for (std::size_t d : dims.cutoffs) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(d));
    v[0] = 1.0;
    modes.push_back(v);
  }
  return fock::product_state(dims, spin, modes);
}

model::HybridHamiltonian boson_only(double omega) {
  model::HybridHamiltonian h;
  h.n_qubits = 1;
  h.locality = 1;
  h.mode_freqs = {omega};
  return h;
}

}  // namespace

TEST_CASE("materialize basic spectra") {
  SUBCASE("omega b^dag b alone is diag(0, w, 2w, 3w)") {
    const auto op = fock::materialize(boson_only(1.7), {4});
    // spin factor is a trivial qubit in |0>/|1>; the boson block repeats per spin index
    for (int q = 0; q < 2; ++q) {
      for (int m = 0; m < 4; ++m) {
        CHECK(op.matrix()(q * 4 + m, q * 4 + m).real() ==
              doctest::Approx(1.7 * m).epsilon(1e-14));
      }
    }
  }
  SUBCASE("xi Z alone is diag(xi, -xi)") {
    model::HybridHamiltonian h;
    h.n_qubits = 1;
    h.locality = 1;
    h.spin_terms.push_back({PauliString::from_string("Z"), 0.9});
    const auto op = fock::materialize(h, {});
    CHECK(op.matrix()(0, 0).real() == doctest::Approx(0.9));
    CHECK(op.matrix()(1, 1).real() == doctest::Approx(-0.9));
  }
  SUBCASE("GDM dense is Hermitian; S_b-filtered spin part is branch diagonal") {
    const auto gdm = model::build_gdm(12);
    const auto op = fock::materialize(gdm, {8});
    CHECK((op.matrix() - op.matrix().adjoint()).cwiseAbs().maxCoeff() < 1e-12);
    // the reshaped spin Hamiltonian (S_b terms only) acts on |E_b>_l as the
    // gamma-weighted xi sum; off-S_b terms are removed by the U2b average
    const auto e_b = PauliString::from_string("XXI");
    model::HybridHamiltonian filtered;
    filtered.n_qubits = 3;
    filtered.locality = 2;
    for (const auto& term : gdm.spin_terms) {
      try {
        (void)pauli::sb_bits_of(term.op, e_b);
        filtered.spin_terms.push_back(term);
      } catch (const InvalidArgument&) {
      }
    }
    const auto spin_op = fock::materialize(filtered, {});
    for (std::size_t li = 0; li < 4; ++li) {
      const auto l = pauli::EigenstateLabel::from_index(li, 2);
      DenseHybridState s;
      s.dims = HybridDims{3, {}};
      s.amplitudes = fock::pauli_eigenstate(e_b, l);
      double expected = 0.0;
      for (const auto& term : filtered.spin_terms) {
        expected += term.xi * pauli::eigenvalue_gamma(term.op, e_b, l);
      }
      CHECK(fock::expectation(s, spin_op) == doctest::Approx(expected).epsilon(1e-10));
      // and |E_b>_l is an exact eigenvector of the filtered spin part
      const Eigen::VectorXcd residual =
          spin_op.matrix() * s.amplitudes - expected * s.amplitudes;
      CHECK(residual.norm() < 1e-10);
    }
  }
  SUBCASE("composite dimension guard") {
    model::HybridHamiltonian h = boson_only(1.0);
    CHECK_THROWS_AS(fock::materialize(h, {std::size_t{1} << 19}), ResourceGuardError);
  }
}

TEST_CASE("evolve") {
  SUBCASE("t = 0 is the identity") {
    const auto op = fock::materialize(boson_only(1.0), {6});
    auto s = vacuum_state(op.dims());
    s.amplitudes[1] = 0.6;
    s.normalize();
    const auto out = fock::evolve(s, op, 0.0);
    CHECK((out.amplitudes - s.amplitudes).norm() < 1e-12);
  }
  SUBCASE("free rotation matches the gaussian engine to 1e-8 fidelity") {
    const double omega = 1.3, t = 2.1;
    const std::size_t cutoff = 40;
    const Complex alpha(0.8, -0.4);
    const auto op = fock::materialize(boson_only(omega), {cutoff});
    Eigen::VectorXcd spin(2);
    spin << 1.0, 0.0;
    const auto init =
        fock::product_state(op.dims(), spin, {fock::coherent_amplitudes(alpha, cutoff)});
    const auto evolved = fock::evolve(init, op, t);
    const auto expected = fock::product_state(
        op.dims(), spin,
        {fock::coherent_amplitudes(alpha * std::polar(1.0, -omega * t), cutoff)});
    CHECK(fock::trace_distance_pure(evolved, expected) < 1e-4);
    CHECK(std::norm(evolved.amplitudes.dot(expected.amplitudes)) > 1.0 - 1e-8);
  }
  SUBCASE("displaced oscillator reaches the coherent state alpha = -1") {
    const std::size_t cutoff = 40;
    model::HybridHamiltonian h = boson_only(2.0);
    h.spin_terms.push_back({PauliString::from_string("I"), 0.0});
    h.couplings.push_back({0, 0, 1.0});
    const auto op = fock::materialize(h, {cutoff});
    const auto init = vacuum_state(op.dims());
    const auto evolved = fock::evolve(init, op, kPi / 2.0);
    Eigen::VectorXcd spin(2);
    spin << 1.0, 0.0;
    const auto expected = fock::product_state(
        op.dims(), spin, {fock::coherent_amplitudes(Complex(-1.0, 0.0), cutoff)});
    CHECK(std::norm(evolved.amplitudes.dot(expected.amplitudes)) > 1.0 - 1e-6);
  }
  SUBCASE("norm preserved over random Hermitian draws") {
    RngStream rng(31);
    for (int trial = 0; trial < 1000; ++trial) {
      Eigen::MatrixXcd raw = Eigen::MatrixXcd::Zero(8, 8);
      for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) raw(i, j) = Complex(rng.uniform(-1, 1), rng.uniform(-1, 1));
      const Eigen::MatrixXcd herm = 0.5 * (raw + raw.adjoint());
      const auto op =
          fock::DenseOperator::from_matrix(HybridDims{3, {}}, herm, true);
      DenseHybridState s;
      s.dims = HybridDims{3, {}};
      s.amplitudes = Eigen::VectorXcd::Zero(8);
      for (int i = 0; i < 8; ++i) s.amplitudes[i] = Complex(rng.uniform(-1, 1), rng.uniform(-1, 1));
      s.normalize();
      const auto out = fock::evolve(s, op, rng.uniform(0.0, 5.0));
      REQUIRE(std::abs(out.norm() - 1.0) < 1e-10);
    }
  }
  SUBCASE("energy conserved along a trajectory") {
    const auto gdm = model::build_gdm(5);
    const auto op = fock::materialize(gdm, {6});
    auto s = vacuum_state(op.dims());
    const double e0 = fock::expectation(s, op);
    for (double t : {0.3, 0.9, 2.7}) {
      const auto out = fock::evolve(s, op, t);
      CHECK(fock::expectation(out, op) == doctest::Approx(e0).epsilon(1e-8));
    }
  }
  SUBCASE("non-Hermitian rejected") {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(2, 2);
    m(0, 1) = 1.0;
    CHECK_THROWS_AS(fock::DenseOperator::from_matrix(HybridDims{1, {}}, m, true),
                    InvalidArgument);
  }
}

TEST_CASE("krylov evolution matches dense on a mid-size operator") {
  RngStream rng(17);
  const int dim = 128;
  Eigen::MatrixXcd raw(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) raw(i, j) = Complex(rng.uniform(-1, 1), rng.uniform(-1, 1));
  const Eigen::MatrixXcd herm = 0.25 * (raw + raw.adjoint());
  Eigen::VectorXcd psi(dim);
  for (int i = 0; i < dim; ++i) psi[i] = Complex(rng.uniform(-1, 1), rng.uniform(-1, 1));
  psi.normalize();
  const double t = 0.7;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(herm);
  Eigen::VectorXcd phases(dim);
  for (int i = 0; i < dim; ++i)
    phases[i] = std::exp(Complex(0.0, -eig.eigenvalues()[i] * t));
  const Eigen::VectorXcd dense =
      eig.eigenvectors() * phases.asDiagonal() * eig.eigenvectors().adjoint() * psi;
  const Eigen::VectorXcd krylov = fock::evolve_krylov(
      [&herm](const Eigen::VectorXcd& v) { return (herm * v).eval(); }, psi, t);
  CHECK((dense - krylov).norm() < 1e-8);
}

TEST_CASE("large materializations fall back to the matrix-free action") {
  model::HybridHamiltonian h = boson_only(1.0);
  h.spin_terms.push_back({PauliString::from_string("X"), 0.7});
  h.couplings.push_back({0, 0, 0.1});
  const auto big = fock::materialize(h, {4096});  // dim 8192 > dense limit
  CHECK(!big.has_matrix());
  const auto small = fock::materialize(h, {16});
  // action and dense agree on the small instance
  auto s = vacuum_state(small.dims());
  const Eigen::VectorXcd via_matrix = small.matrix() * s.amplitudes;
  const Eigen::VectorXcd via_action = [&] {
    auto op = fock::materialize(h, {16});
    return op.apply(s.amplitudes);
  }();
  CHECK((via_matrix - via_action).norm() < 1e-12);
}

TEST_CASE("trace distance for pure states") {
  HybridDims dims{1, {}};
  DenseHybridState a, b;
  a.dims = b.dims = dims;
  a.amplitudes = Eigen::VectorXcd::Zero(2);
  b.amplitudes = Eigen::VectorXcd::Zero(2);
  a.amplitudes[0] = 1.0;
  SUBCASE("identical -> 0") {
    b.amplitudes = a.amplitudes;
    CHECK(fock::trace_distance_pure(a, b) == 0.0);
  }
  SUBCASE("orthogonal -> 1") {
    b.amplitudes[1] = 1.0;
    CHECK(fock::trace_distance_pure(a, b) == doctest::Approx(1.0));
  }
  SUBCASE("|0> vs |+> -> sqrt(1/2)") {
    b.amplitudes[0] = b.amplitudes[1] = 1.0 / std::sqrt(2.0);
    CHECK(fock::trace_distance_pure(a, b) ==
          doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
  }
}

TEST_CASE("expectation values") {
  SUBCASE("vacuum photon number is zero") {
    const HybridDims dims{1, {5}};
    const auto s = vacuum_state(dims);
    const auto n_op = fock::lift_mode_operator(dims, 0, fock::number_op(5));
    CHECK(fock::expectation(s, n_op) == doctest::Approx(0.0));
  }
  SUBCASE("coherent state quadrature mean") {
    const HybridDims dims{1, {40}};
    Eigen::VectorXcd spin(2);
    spin << 1.0, 0.0;
    const Complex alpha(0.6, -0.9);
    const auto s =
        fock::product_state(dims, spin, {fock::coherent_amplitudes(alpha, 40)});
    const auto x_op = fock::lift_mode_operator(
        dims, 0, fock::quadrature_op(40, gaussian::Quadrature::X));
    CHECK(fock::expectation(s, x_op) ==
          doctest::Approx(std::sqrt(2.0) * alpha.real()).epsilon(1e-8));
  }
}

TEST_CASE("squeezed state amplitudes reproduce Gaussian moments") {
  const std::size_t cutoff = 60;
  const double r = 0.8;
  const auto amps = fock::squeezed_amplitudes(Complex(r, 0.0), cutoff);
  CHECK(std::abs(amps.norm() - 1.0) < 1e-10);  // even-photon series converged
  const HybridDims dims{1, {cutoff}};
  Eigen::VectorXcd spin(2);
  spin << 1.0, 0.0;
  const auto s = fock::product_state(dims, spin, {amps});
  const auto x_op =
      fock::lift_mode_operator(dims, 0, fock::quadrature_op(cutoff, gaussian::Quadrature::X));
  const auto x2 = fock::DenseOperator::from_matrix(
      dims, (x_op.matrix() * x_op.matrix()).eval(), true);
  CHECK(fock::expectation(s, x2) == doctest::Approx(0.5 * std::exp(-2.0 * r)).epsilon(1e-8));
  SUBCASE("displaced squeezed keeps the displacement mean") {
    const Complex alpha(0.7, 0.2);
    const auto ds = fock::displaced_squeezed_amplitudes(alpha, Complex(r, 0.0), cutoff);
    const auto state = fock::product_state(dims, spin, {ds});
    CHECK(fock::expectation(state, x_op) ==
          doctest::Approx(std::sqrt(2.0) * alpha.real()).epsilon(1e-7));
  }
}

TEST_CASE("quadrature sampler distribution moments") {
  const HybridDims dims{1, {30}};
  Eigen::VectorXcd spin(2);
  spin << 1.0, 0.0;
  SUBCASE("vacuum: mean 0, variance 1/2") {
    const auto s = fock::product_state(
        dims, spin, {fock::coherent_amplitudes(Complex(0, 0), 30)});
    const fock::QuadratureSampler sampler(s, 0, gaussian::Quadrature::X);
    CHECK(std::abs(sampler.mean()) < 1e-6);
    CHECK(sampler.variance() == doctest::Approx(0.5).epsilon(1e-4));
  }
  SUBCASE("P quadrature of a purely imaginary displacement") {
    const Complex alpha(0.0, 0.9);
    const auto s =
        fock::product_state(dims, spin, {fock::coherent_amplitudes(alpha, 30)});
    const fock::QuadratureSampler sampler(s, 0, gaussian::Quadrature::P);
    CHECK(sampler.mean() == doctest::Approx(std::sqrt(2.0) * 0.9).epsilon(1e-4));
    RngStream rng(2);
    double mean = 0.0;
    const std::size_t shots = 20000;
    for (std::size_t i = 0; i < shots; ++i) mean += sampler.sample(rng);
    mean /= static_cast<double>(shots);
    CHECK(mean == doctest::Approx(std::sqrt(2.0) * 0.9).epsilon(0.02));
  }
}

TEST_CASE("leakage monitor") {
  const HybridDims dims{1, {6}};
  Eigen::VectorXcd spin(2);
  spin << 1.0, 0.0;
  // coherent |alpha| = 2 at cutoff 6 leaks visibly into the top level
  const auto s =
      fock::product_state(dims, spin, {fock::coherent_amplitudes(Complex(2.0, 0.0), 6)});
  CHECK(s.top_level_population(0) > 1e-3);
  const auto tight =
      fock::product_state(dims, spin, {fock::coherent_amplitudes(Complex(0.1, 0.0), 6)});
  CHECK(tight.max_top_level_population() < 1e-10);
}

TEST_CASE("truncation monotonicity: growing the cutoff leaves expectations fixed") {
  model::HybridHamiltonian h = boson_only(1.0);
  h.spin_terms.push_back({PauliString::from_string("X"), 0.8});
  h.couplings.push_back({0, 0, 0.15});
  double previous = 0.0;
  bool have_previous = false;
  for (const std::size_t cutoff : {24ul, 32ul}) {
    const auto op = fock::materialize(h, {cutoff});
    const auto init = vacuum_state(op.dims());
    const auto evolved = fock::evolve(init, op, 3.0);
    const auto x_op = fock::lift_mode_operator(
        op.dims(), 0, fock::quadrature_op(cutoff, gaussian::Quadrature::X));
    const double x = fock::expectation(evolved, x_op);
    if (have_previous) CHECK(std::abs(x - previous) < 1e-6);
    previous = x;
    have_previous = true;
  }
}

TEST_CASE("spin outcome probability marginalizes the bosons") {
  const HybridDims dims{1, {20}};
  Eigen::VectorXcd plus(2);
  plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  const auto s = fock::product_state(
      dims, plus, {fock::coherent_amplitudes(Complex(0.4, 0.1), 20)});
  Eigen::VectorXcd zero(2);
  zero << 1.0, 0.0;
  CHECK(fock::spin_outcome_probability(s, plus) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(fock::spin_outcome_probability(s, zero) == doctest::Approx(0.5).epsilon(1e-10));
}
