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

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "heislab/gaussian.hpp"
#include "heislab/model.hpp"
#include "heislab/pauli.hpp"
#include "heislab/rng.hpp"

namespace heislab::fock {

using Complex = std::complex<double>;

/**
 * Composite qubit (x) truncated-Fock space.
 *
 * Index layout (fixed, serialized states depend on it): the flat index is
 * q * boson_dim + m. The qubit index q holds qubit 0 in its most significant
 * bit (so qubit 0, the leftmost Pauli letter, varies slowest), and the mode
 * multi-index m holds mode 0 slowest: m = ((m_0 d_1 + m_1) d_2 + ...).
 */
struct HybridDims {
  std::size_t n_qubits = 0;
  std::vector<std::size_t> cutoffs;

  std::size_t qubit_dim() const { return std::size_t{1} << n_qubits; }
  std::size_t boson_dim() const;
  std::size_t total_dim() const { return qubit_dim() * boson_dim(); }
  std::size_t n_modes() const { return cutoffs.size(); }
  /** Stride of mode n within the boson block. */
  std::size_t mode_stride(std::size_t mode) const;
  /** Stride of qubit j within the full index. */
  std::size_t qubit_stride(std::size_t qubit) const;

  bool operator==(const HybridDims&) const = default;
};

/** Hard cap on the composite dimension accepted by materialize(). */
inline constexpr std::size_t kCompositeDimGuard = std::size_t{1} << 18;
/** Largest dimension for which dense matrices are stored and exponentiated. */
inline constexpr std::size_t kDenseDimLimit = std::size_t{1} << 12;

struct DenseHybridState {
  HybridDims dims;
  Eigen::VectorXcd amplitudes;

  double norm() const { return amplitudes.norm(); }
  void normalize();
  /** Probability mass in the top Fock level of the given mode (leakage monitor). */
  double top_level_population(std::size_t mode) const;
  double max_top_level_population() const;
};

/**
 * A Hermitian operator on the composite space. Dense-backed up to
 * kDenseDimLimit; above that it applies term-by-term from the Hamiltonian
 * (matrix-free), which is what the Krylov evolution path consumes.
 */
class DenseOperator {
 public:
  static DenseOperator from_matrix(HybridDims dims, Eigen::MatrixXcd matrix, bool hermitian);

  const HybridDims& dims() const { return dims_; }
  bool hermitian() const { return hermitian_; }
  bool has_matrix() const { return matrix_.has_value(); }
  const Eigen::MatrixXcd& matrix() const;
  Eigen::VectorXcd apply(const Eigen::VectorXcd& v) const;

 private:
  friend DenseOperator materialize(const model::HybridHamiltonian&,
                                   const std::vector<std::size_t>&);
  HybridDims dims_;
  bool hermitian_ = true;
  std::optional<Eigen::MatrixXcd> matrix_;
  std::shared_ptr<const model::HybridHamiltonian> action_;
};

/**
 * Assemble the Hamiltonian on the truncated space. Dense when the composite
 * dimension allows, matrix-free action otherwise; throws ResourceGuardError
 * beyond kCompositeDimGuard.
 */
DenseOperator materialize(const model::HybridHamiltonian& h,
                          const std::vector<std::size_t>& cutoffs);

/** e^{-i op t} |state>; dense eigendecomposition or Lanczos depending on backing. */
DenseHybridState evolve(const DenseHybridState& state, const DenseOperator& op, double t);

/** Lanczos action e^{-i H t}|psi> for a Hermitian matrix-free operator. */
Eigen::VectorXcd evolve_krylov(const std::function<Eigen::VectorXcd(const Eigen::VectorXcd&)>& h,
                               const Eigen::VectorXcd& psi, double t, double tol = 1e-10);

/** Cached e^{-i op t} for repeated application (dense backing only). */
class Propagator {
 public:
  Propagator(const DenseOperator& op, double t);
  const Eigen::MatrixXcd& matrix() const { return u_; }
  void apply_in_place(DenseHybridState& state) const;

 private:
  Eigen::MatrixXcd u_;
};

/** sqrt(1 - |<s1|s2>|^2) for normalized pure states. */
double trace_distance_pure(const DenseHybridState& s1, const DenseHybridState& s2);

/** <state| obs |state>; obs must be flagged Hermitian. */
double expectation(const DenseHybridState& state, const DenseOperator& obs);

// ---- Dense Pauli / state builders ------------------------------------------

Eigen::Matrix2cd pauli_matrix_1q(pauli::Pauli p);
Eigen::MatrixXcd pauli_matrix(const pauli::PauliString& p);
/** Eigenvector of a single Pauli letter with eigenvalue +1 (minus=false) or -1. */
Eigen::Vector2cd pauli_eigenvector_1q(pauli::Pauli p, bool minus);
/**
 * Product eigenstate |E_b>_l over the full register: labeled eigenvectors on
 * the support of e_b, |0> elsewhere.
 */
Eigen::VectorXcd pauli_eigenstate(const pauli::PauliString& e_b, const pauli::EigenstateLabel& l);

Eigen::MatrixXcd annihilation_op(std::size_t cutoff);
Eigen::MatrixXcd number_op(std::size_t cutoff);
/** (b^dag + b) (the sqrt(2)-scaled X quadrature). */
Eigen::MatrixXcd ladder_sum_op(std::size_t cutoff);
Eigen::MatrixXcd quadrature_op(std::size_t cutoff, gaussian::Quadrature q);

/** Single-mode amplitudes. */
Eigen::VectorXcd coherent_amplitudes(Complex alpha, std::size_t cutoff);
Eigen::VectorXcd squeezed_amplitudes(Complex z, std::size_t cutoff);
Eigen::VectorXcd displaced_squeezed_amplitudes(Complex alpha, Complex z, std::size_t cutoff);

/** Tensor product of a spin vector (dim 2^n_qubits) and per-mode vectors. */
DenseHybridState product_state(const HybridDims& dims, const Eigen::VectorXcd& spin,
                               const std::vector<Eigen::VectorXcd>& modes);

/** Lift a full-register spin observable to the composite space (identity on modes). */
DenseOperator lift_spin_operator(const HybridDims& dims, const Eigen::MatrixXcd& spin_op);
/** Lift a single-mode operator to the composite space. */
DenseOperator lift_mode_operator(const HybridDims& dims, std::size_t mode,
                                 const Eigen::MatrixXcd& mode_op);

// ---- In-place circuit primitives -------------------------------------------

void apply_single_qubit_in_place(DenseHybridState& state, std::size_t qubit,
                                 const Eigen::Matrix2cd& u);
/** Multiply amplitudes by phases[m_n] where m_n is the Fock level of `mode`. */
void apply_mode_diagonal_in_place(DenseHybridState& state, std::size_t mode,
                                  const Eigen::VectorXcd& phases);

/** Same transforms applied by similarity to a dense matrix (rows and columns). */
void conjugate_single_qubit_in_place(Eigen::MatrixXcd& m, const HybridDims& dims,
                                     std::size_t qubit, const Eigen::Matrix2cd& u);
void conjugate_mode_diagonal_in_place(Eigen::MatrixXcd& m, const HybridDims& dims,
                                      std::size_t mode, const Eigen::VectorXcd& phases);

// ---- Measurement ------------------------------------------------------------

/** Reduced density matrix of one mode. */
Eigen::MatrixXcd mode_reduced_density(const DenseHybridState& state, std::size_t mode);

/**
 * Exact homodyne sampler for one mode of a dense state: builds the marginal
 * quadrature distribution p(x) = <x| rho_mode |x> on a grid and samples by
 * inverse CDF. P-quadrature sampling rotates the mode by the Fock phase
 * (-i)^m first.
 */
class QuadratureSampler {
 public:
  QuadratureSampler(const DenseHybridState& state, std::size_t mode, gaussian::Quadrature q);
  double sample(RngStream& rng) const;
  double mean() const { return mean_; }
  double variance() const { return variance_; }

 private:
  std::vector<double> grid_;
  std::vector<double> cdf_;
  double mean_ = 0.0;
  double variance_ = 0.0;
};

/** Probability that a projective spin measurement returns the given spin state
 * (bosons traced out). */
double spin_outcome_probability(const DenseHybridState& state, const Eigen::VectorXcd& spin_bra);

}  // namespace heislab::fock
