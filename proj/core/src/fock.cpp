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

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "heislab/errors.hpp"

namespace heislab::fock {

namespace {
constexpr Complex kI{0.0, 1.0};
}

std::size_t HybridDims::boson_dim() const {
  std::size_t dim = 1;
  for (std::size_t d : cutoffs) dim *= d;
  return dim;
}

std::size_t HybridDims::mode_stride(std::size_t mode) const {
  std::size_t stride = 1;
  for (std::size_t n = mode + 1; n < cutoffs.size(); ++n) stride *= cutoffs[n];
  return stride;
}

std::size_t HybridDims::qubit_stride(std::size_t qubit) const {
  return (std::size_t{1} << (n_qubits - 1 - qubit)) * boson_dim();
}

void DenseHybridState::normalize() {
  const double n = norm();
  if (n <= 0.0) throw InvalidArgument("cannot normalize a zero state");
  amplitudes /= n;
}

double DenseHybridState::top_level_population(std::size_t mode) const {
  const std::size_t d = dims.cutoffs.at(mode);
  const std::size_t stride = dims.mode_stride(mode);
  const std::size_t boson_dim = dims.boson_dim();
  double total = 0.0;
  for (Eigen::Index idx = 0; idx < amplitudes.size(); ++idx) {
    const std::size_t m = (static_cast<std::size_t>(idx) % boson_dim) / stride % d;
    if (m == d - 1) total += std::norm(amplitudes[idx]);
  }
  return total;
}

double DenseHybridState::max_top_level_population() const {
  double worst = 0.0;
  for (std::size_t n = 0; n < dims.n_modes(); ++n)
    worst = std::max(worst, top_level_population(n));
  return worst;
}

DenseOperator DenseOperator::from_matrix(HybridDims dims, Eigen::MatrixXcd matrix,
                                         bool hermitian) {
  if (static_cast<std::size_t>(matrix.rows()) != dims.total_dim() ||
      matrix.rows() != matrix.cols())
    throw ShapeError("DenseOperator: matrix does not match composite dimension");
  if (hermitian) {
    const double asym = (matrix - matrix.adjoint()).cwiseAbs().maxCoeff();
    if (asym >= 1e-12)
      throw InvalidArgument("DenseOperator: matrix flagged Hermitian but max|A - A^dag| = " +
                            std::to_string(asym));
  }
  DenseOperator op;
  op.dims_ = std::move(dims);
  op.hermitian_ = hermitian;
  op.matrix_ = std::move(matrix);
  return op;
}

const Eigen::MatrixXcd& DenseOperator::matrix() const {
  if (!matrix_) throw ResourceGuardError("DenseOperator: no dense backing at this dimension");
  return *matrix_;
}

namespace {

// out += coef * (E_a (x) mode_op_n) |v>, all strides precomputed by caller.
void accumulate_pauli_mode_term(const HybridDims& dims, const pauli::PauliString& op,
                                std::optional<std::size_t> mode, bool number_not_ladder,
                                double coef, const Eigen::VectorXcd& v, Eigen::VectorXcd& out) {
  const std::size_t total = dims.total_dim();
  const std::size_t boson_dim = dims.boson_dim();
  const std::size_t n_qubits = dims.n_qubits;
  for (std::size_t idx = 0; idx < total; ++idx) {
    const Complex amp = v[static_cast<Eigen::Index>(idx)];
    if (amp == Complex(0.0, 0.0)) continue;
    const std::size_t q = idx / boson_dim;
    const std::size_t m = idx % boson_dim;
    // Pauli action on the bra side target index.
    std::size_t q_out = q;
    Complex factor(coef, 0.0);
    for (std::size_t j = 0; j < n_qubits; ++j) {
      const pauli::Pauli letter = op.letter(j);
      if (letter == pauli::Pauli::I) continue;
      const std::size_t bit = std::size_t{1} << (n_qubits - 1 - j);
      const bool one = (q & bit) != 0;
      switch (letter) {
        case pauli::Pauli::X:
          q_out ^= bit;
          break;
        case pauli::Pauli::Y:
          q_out ^= bit;
          factor *= one ? -kI : kI;  // Y|0> = i|1>, Y|1> = -i|0>
          break;
        case pauli::Pauli::Z:
          if (one) factor = -factor;
          break;
        default: break;
      }
    }
    if (!mode) {
      out[static_cast<Eigen::Index>(q_out * boson_dim + m)] += factor * amp;
      continue;
    }
    const std::size_t stride = dims.mode_stride(*mode);
    const std::size_t d = dims.cutoffs[*mode];
    const std::size_t level = (m / stride) % d;
    if (number_not_ladder) {
      out[static_cast<Eigen::Index>(q_out * boson_dim + m)] +=
          factor * static_cast<double>(level) * amp;
    } else {
      // (b^dag + b)|level> = sqrt(level+1)|level+1> + sqrt(level)|level-1>
      if (level + 1 < d) {
        out[static_cast<Eigen::Index>(q_out * boson_dim + m + stride)] +=
            factor * std::sqrt(static_cast<double>(level + 1)) * amp;
      }
      if (level > 0) {
        out[static_cast<Eigen::Index>(q_out * boson_dim + m - stride)] +=
            factor * std::sqrt(static_cast<double>(level)) * amp;
      }
    }
  }
}

}  // namespace

Eigen::VectorXcd DenseOperator::apply(const Eigen::VectorXcd& v) const {
  if (static_cast<std::size_t>(v.size()) != dims_.total_dim())
    throw ShapeError("DenseOperator::apply: state dimension mismatch");
  if (matrix_) return *matrix_ * v;
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(v.size());
  for (const auto& term : action_->spin_terms) {
    if (term.xi != 0.0)
      accumulate_pauli_mode_term(dims_, term.op, std::nullopt, false, term.xi, v, out);
  }
  for (std::size_t n = 0; n < action_->mode_freqs.size(); ++n) {
    accumulate_pauli_mode_term(dims_, pauli::PauliString::identity(dims_.n_qubits), n, true,
                               action_->mode_freqs[n], v, out);
  }
  for (const auto& c : action_->couplings) {
    accumulate_pauli_mode_term(dims_, action_->spin_terms[c.term].op, c.mode, false, c.lambda,
                               v, out);
  }
  return out;
}

Eigen::Matrix2cd pauli_matrix_1q(pauli::Pauli p) {
  Eigen::Matrix2cd m;
  switch (p) {
    case pauli::Pauli::I: m << 1, 0, 0, 1; break;
    case pauli::Pauli::X: m << 0, 1, 1, 0; break;
    case pauli::Pauli::Y: m << 0, -kI, kI, 0; break;
    case pauli::Pauli::Z: m << 1, 0, 0, -1; break;
  }
  return m;
}

namespace {

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace

Eigen::MatrixXcd pauli_matrix(const pauli::PauliString& p) {
  Eigen::MatrixXcd m = pauli_matrix_1q(p.letter(0));
  for (std::size_t j = 1; j < p.n_qubits(); ++j) m = kron(m, pauli_matrix_1q(p.letter(j)));
  return m;
}

Eigen::MatrixXcd annihilation_op(std::size_t cutoff) {
  Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(cutoff, cutoff);
  for (std::size_t m = 1; m < cutoff; ++m)
    b(m - 1, m) = std::sqrt(static_cast<double>(m));
  return b;
}

Eigen::MatrixXcd number_op(std::size_t cutoff) {
  Eigen::MatrixXcd n = Eigen::MatrixXcd::Zero(cutoff, cutoff);
  for (std::size_t m = 0; m < cutoff; ++m) n(m, m) = static_cast<double>(m);
  return n;
}

Eigen::MatrixXcd ladder_sum_op(std::size_t cutoff) {
  const Eigen::MatrixXcd b = annihilation_op(cutoff);
  return b + b.adjoint();
}

Eigen::MatrixXcd quadrature_op(std::size_t cutoff, gaussian::Quadrature q) {
  const Eigen::MatrixXcd b = annihilation_op(cutoff);
  if (q == gaussian::Quadrature::X) return (b + b.adjoint()) / std::sqrt(2.0);
  return kI * (b.adjoint() - b) / std::sqrt(2.0);
}

DenseOperator materialize(const model::HybridHamiltonian& h,
                          const std::vector<std::size_t>& cutoffs) {
  h.validate();
  if (cutoffs.size() != h.n_modes())
    throw ShapeError("materialize: cutoff list does not match mode count");
  HybridDims dims{h.n_qubits, cutoffs};
  const std::size_t dim = dims.total_dim();
  if (dim > kCompositeDimGuard)
    throw ResourceGuardError("materialize: composite dimension " + std::to_string(dim) +
                             " exceeds guard 2^18");
  DenseOperator op;
  op.dims_ = dims;
  op.hermitian_ = true;
  if (dim > kDenseDimLimit) {
    op.action_ = std::make_shared<model::HybridHamiltonian>(h);
    return op;
  }
  const std::size_t boson_dim = dims.boson_dim();
  Eigen::MatrixXcd mat = Eigen::MatrixXcd::Zero(dim, dim);
  const Eigen::MatrixXcd boson_identity = Eigen::MatrixXcd::Identity(boson_dim, boson_dim);
  // Per-mode lift of a single-mode matrix into the boson block.
  const auto lift_mode = [&](std::size_t mode, const Eigen::MatrixXcd& m) {
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Identity(1, 1);
    for (std::size_t n = 0; n < dims.n_modes(); ++n) {
      out = kron(out, n == mode
                          ? m
                          : Eigen::MatrixXcd::Identity(dims.cutoffs[n], dims.cutoffs[n]));
    }
    return out;
  };
  for (const auto& term : h.spin_terms) {
    if (term.xi != 0.0) mat += term.xi * kron(pauli_matrix(term.op), boson_identity);
  }
  const Eigen::MatrixXcd spin_identity =
      Eigen::MatrixXcd::Identity(dims.qubit_dim(), dims.qubit_dim());
  for (std::size_t n = 0; n < h.n_modes(); ++n) {
    mat += h.mode_freqs[n] * kron(spin_identity, lift_mode(n, number_op(cutoffs[n])));
  }
  for (const auto& c : h.couplings) {
    mat += c.lambda *
           kron(pauli_matrix(h.spin_terms[c.term].op), lift_mode(c.mode, ladder_sum_op(cutoffs[c.mode])));
  }
  op.matrix_ = std::move(mat);
  return op;
}

Propagator::Propagator(const DenseOperator& op, double t) {
  if (!op.hermitian()) throw InvalidArgument("Propagator: operator must be Hermitian");
  const Eigen::MatrixXcd& h = op.matrix();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(h);
  if (eig.info() != Eigen::Success) throw Error("Propagator: eigendecomposition failed");
  const Eigen::VectorXd& vals = eig.eigenvalues();
  Eigen::VectorXcd phases(vals.size());
  for (Eigen::Index i = 0; i < vals.size(); ++i) phases[i] = std::exp(-kI * vals[i] * t);
  u_ = eig.eigenvectors() * phases.asDiagonal() * eig.eigenvectors().adjoint();
}

void Propagator::apply_in_place(DenseHybridState& state) const {
  state.amplitudes = u_ * state.amplitudes;
}

Eigen::VectorXcd evolve_krylov(const std::function<Eigen::VectorXcd(const Eigen::VectorXcd&)>& h,
                               const Eigen::VectorXcd& psi, double t, double tol) {
  constexpr int kMaxBasis = 48;
  Eigen::VectorXcd current = psi;
  double remaining = std::abs(t);
  const double sign = t >= 0 ? 1.0 : -1.0;
  while (remaining > 0.0) {
    const double beta0 = current.norm();
    if (beta0 == 0.0) return current;
    std::vector<Eigen::VectorXcd> basis;
    basis.push_back(current / beta0);
    std::vector<double> alpha, beta;
    int m = 0;
    for (; m < kMaxBasis; ++m) {
      Eigen::VectorXcd w = h(basis[m]);
      const double a = std::real(basis[m].dot(w));
      alpha.push_back(a);
      w -= a * basis[m];
      if (m > 0) w -= beta[m - 1] * basis[m - 1];
      // one full reorthogonalization pass keeps the basis clean
      for (const auto& v : basis) w -= v.dot(w) * v;
      const double b = w.norm();
      if (b < 1e-14) { ++m; break; }
      beta.push_back(b);
      basis.push_back(w / b);
    }
    Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      tri(i, i) = alpha[i];
      if (i + 1 < m) tri(i, i + 1) = tri(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(tri);
    double dt = remaining;
    Eigen::VectorXcd y;
    while (true) {
      Eigen::VectorXcd phases(m);
      for (int i = 0; i < m; ++i)
        phases[i] = std::exp(-kI * sign * eig.eigenvalues()[i] * dt);
      const Eigen::VectorXd first_row = eig.eigenvectors().row(0).transpose();
      y = eig.eigenvectors() * (phases.array() * first_row.array().cast<Complex>()).matrix();
      const double err = m < kMaxBasis ? 0.0 : std::abs(y[m - 1]) * (beta.empty() ? 0.0 : beta.back()) * dt;
      if (err < tol || dt < 1e-12) break;
      dt *= 0.5;
    }
    Eigen::VectorXcd next = Eigen::VectorXcd::Zero(current.size());
    for (int i = 0; i < m; ++i) next += beta0 * y[i] * basis[i];
    current = next;
    remaining -= dt;
  }
  return current;
}

DenseHybridState evolve(const DenseHybridState& state, const DenseOperator& op, double t) {
  if (!op.hermitian()) throw InvalidArgument("evolve: operator must be Hermitian");
  if (state.dims != op.dims()) throw ShapeError("evolve: state and operator dims differ");
  DenseHybridState out = state;
  if (op.has_matrix()) {
    Propagator prop(op, t);
    prop.apply_in_place(out);
  } else {
    out.amplitudes =
        evolve_krylov([&op](const Eigen::VectorXcd& v) { return op.apply(v); },
                      state.amplitudes, t);
  }
  return out;
}

double trace_distance_pure(const DenseHybridState& s1, const DenseHybridState& s2) {
  if (s1.dims != s2.dims) throw ShapeError("trace_distance_pure: dimension mismatch");
  const double overlap = std::norm(s1.amplitudes.dot(s2.amplitudes));
  return std::sqrt(std::max(0.0, 1.0 - std::min(1.0, overlap)));
}

double expectation(const DenseHybridState& state, const DenseOperator& obs) {
  if (!obs.hermitian()) throw InvalidArgument("expectation: observable must be Hermitian");
  if (state.dims != obs.dims()) throw ShapeError("expectation: dimension mismatch");
  const Complex value = state.amplitudes.dot(obs.apply(state.amplitudes));
  return value.real();
}

Eigen::Vector2cd pauli_eigenvector_1q(pauli::Pauli p, bool minus) {
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  Eigen::Vector2cd v;
  switch (p) {
    case pauli::Pauli::Z: v = minus ? Eigen::Vector2cd(0, 1) : Eigen::Vector2cd(1, 0); break;
    case pauli::Pauli::X:
      v = Eigen::Vector2cd(inv_sqrt2, minus ? -inv_sqrt2 : inv_sqrt2);
      break;
    case pauli::Pauli::Y:
      v = Eigen::Vector2cd(inv_sqrt2, (minus ? -kI : kI) * inv_sqrt2);
      break;
    default:
      throw InvalidArgument("pauli_eigenvector_1q: identity has no labeled eigenbasis");
  }
  return v;
}

Eigen::VectorXcd pauli_eigenstate(const pauli::PauliString& e_b,
                                  const pauli::EigenstateLabel& l) {
  const auto supp = pauli::support(e_b);
  if (l.k() != supp.size())
    throw ShapeError("pauli_eigenstate: label length must equal |supp(E_b)|");
  Eigen::VectorXcd state = Eigen::VectorXcd::Ones(1);
  std::size_t bit = 0;
  for (std::size_t j = 0; j < e_b.n_qubits(); ++j) {
    Eigen::Vector2cd factor;
    if (e_b.letter(j) == pauli::Pauli::I) {
      factor = Eigen::Vector2cd(1, 0);  // off-support qubits prepared in |0>
    } else {
      factor = pauli_eigenvector_1q(e_b.letter(j), l.bits[bit]);
      ++bit;
    }
    // append qubit j as the least significant bit so far; qubit 0 ends up
    // most significant, matching the HybridDims layout
    Eigen::VectorXcd next(state.size() * 2);
    for (Eigen::Index i = 0; i < state.size(); ++i) {
      next[2 * i] = state[i] * factor[0];
      next[2 * i + 1] = state[i] * factor[1];
    }
    state = next;
  }
  return state;
}

Eigen::VectorXcd coherent_amplitudes(Complex alpha, std::size_t cutoff) {
  Eigen::VectorXcd c(cutoff);
  c[0] = std::exp(-0.5 * std::norm(alpha));
  for (std::size_t m = 1; m < cutoff; ++m)
    c[m] = c[m - 1] * alpha / std::sqrt(static_cast<double>(m));
  return c;
}

Eigen::VectorXcd squeezed_amplitudes(Complex z, std::size_t cutoff) {
  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(cutoff);
  const double r = std::abs(z);
  if (r == 0.0) {
    c[0] = 1.0;
    return c;
  }
  const Complex ratio_base = -std::polar(std::tanh(r), std::arg(z));
  c[0] = 1.0 / std::sqrt(std::cosh(r));
  // c_{2m} / c_{2m-2} = -e^{i phi} tanh(r) * sqrt((2m-1) 2m) / (2m)
  for (std::size_t m = 1; 2 * m < cutoff; ++m) {
    const double tm = static_cast<double>(2 * m);
    c[2 * m] = c[2 * (m - 1)] * ratio_base * std::sqrt((tm - 1.0) * tm) / tm;
  }
  return c;
}

Eigen::VectorXcd displaced_squeezed_amplitudes(Complex alpha, Complex z, std::size_t cutoff) {
  // D(alpha) = exp(-i H_D) with H_D = i(alpha b^dag - alpha^* b) Hermitian.
  const Eigen::MatrixXcd b = annihilation_op(cutoff);
  const Eigen::MatrixXcd h_d = kI * (alpha * b.adjoint() - std::conj(alpha) * b);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(h_d);
  Eigen::VectorXcd phases(static_cast<Eigen::Index>(cutoff));
  for (Eigen::Index i = 0; i < phases.size(); ++i)
    phases[i] = std::exp(-kI * eig.eigenvalues()[i]);
  const Eigen::MatrixXcd d =
      eig.eigenvectors() * phases.asDiagonal() * eig.eigenvectors().adjoint();
  return d * squeezed_amplitudes(z, cutoff);
}

DenseHybridState product_state(const HybridDims& dims, const Eigen::VectorXcd& spin,
                               const std::vector<Eigen::VectorXcd>& modes) {
  if (static_cast<std::size_t>(spin.size()) != dims.qubit_dim())
    throw ShapeError("product_state: spin vector dimension mismatch");
  if (modes.size() != dims.n_modes())
    throw ShapeError("product_state: mode vector count mismatch");
  Eigen::VectorXcd boson = Eigen::VectorXcd::Ones(1);
  for (std::size_t n = 0; n < modes.size(); ++n) {
    if (static_cast<std::size_t>(modes[n].size()) != dims.cutoffs[n])
      throw ShapeError("product_state: mode vector dimension mismatch");
    Eigen::VectorXcd next(boson.size() * modes[n].size());
    for (Eigen::Index i = 0; i < boson.size(); ++i)
      next.segment(i * modes[n].size(), modes[n].size()) = boson[i] * modes[n];
    boson = next;
  }
  DenseHybridState state;
  state.dims = dims;
  state.amplitudes.resize(static_cast<Eigen::Index>(dims.total_dim()));
  for (Eigen::Index q = 0; q < spin.size(); ++q)
    state.amplitudes.segment(q * boson.size(), boson.size()) = spin[q] * boson;
  return state;
}

DenseOperator lift_spin_operator(const HybridDims& dims, const Eigen::MatrixXcd& spin_op) {
  const Eigen::MatrixXcd id =
      Eigen::MatrixXcd::Identity(dims.boson_dim(), dims.boson_dim());
  const Eigen::MatrixXcd full = kron(spin_op, id);
  const bool herm = (spin_op - spin_op.adjoint()).cwiseAbs().maxCoeff() < 1e-12;
  return DenseOperator::from_matrix(dims, full, herm);
}

DenseOperator lift_mode_operator(const HybridDims& dims, std::size_t mode,
                                 const Eigen::MatrixXcd& mode_op) {
  Eigen::MatrixXcd boson = Eigen::MatrixXcd::Identity(1, 1);
  for (std::size_t n = 0; n < dims.n_modes(); ++n) {
    boson = kron(boson, n == mode ? mode_op
                                  : Eigen::MatrixXcd::Identity(dims.cutoffs[n], dims.cutoffs[n]));
  }
  const Eigen::MatrixXcd full =
      kron(Eigen::MatrixXcd::Identity(dims.qubit_dim(), dims.qubit_dim()), boson);
  const bool herm = (mode_op - mode_op.adjoint()).cwiseAbs().maxCoeff() < 1e-12;
  return DenseOperator::from_matrix(dims, full, herm);
}

void apply_single_qubit_in_place(DenseHybridState& state, std::size_t qubit,
                                 const Eigen::Matrix2cd& u) {
  const std::size_t stride = state.dims.qubit_stride(qubit);
  const std::size_t total = state.dims.total_dim();
  auto& a = state.amplitudes;
  for (std::size_t base = 0; base < total; base += 2 * stride) {
    for (std::size_t off = 0; off < stride; ++off) {
      const Eigen::Index i0 = static_cast<Eigen::Index>(base + off);
      const Eigen::Index i1 = static_cast<Eigen::Index>(base + off + stride);
      const Complex v0 = a[i0];
      const Complex v1 = a[i1];
      a[i0] = u(0, 0) * v0 + u(0, 1) * v1;
      a[i1] = u(1, 0) * v0 + u(1, 1) * v1;
    }
  }
}

void apply_mode_diagonal_in_place(DenseHybridState& state, std::size_t mode,
                                  const Eigen::VectorXcd& phases) {
  const std::size_t d = state.dims.cutoffs.at(mode);
  if (static_cast<std::size_t>(phases.size()) != d)
    throw ShapeError("apply_mode_diagonal_in_place: phase vector length mismatch");
  const std::size_t stride = state.dims.mode_stride(mode);
  const std::size_t boson_dim = state.dims.boson_dim();
  for (Eigen::Index idx = 0; idx < state.amplitudes.size(); ++idx) {
    const std::size_t m =
        (static_cast<std::size_t>(idx) % boson_dim) / stride % d;
    state.amplitudes[idx] *= phases[static_cast<Eigen::Index>(m)];
  }
}

void conjugate_single_qubit_in_place(Eigen::MatrixXcd& m, const HybridDims& dims,
                                     std::size_t qubit, const Eigen::Matrix2cd& u) {
  // m <- U^dag m U where U acts on `qubit` only.
  const Eigen::Index stride = static_cast<Eigen::Index>(dims.qubit_stride(qubit));
  const Eigen::Index total = static_cast<Eigen::Index>(dims.total_dim());
  const Eigen::Matrix2cd udag = u.adjoint();
  // column pass: m <- m U  (columns mix pairwise)
  for (Eigen::Index base = 0; base < total; base += 2 * stride) {
    for (Eigen::Index off = 0; off < stride; ++off) {
      const Eigen::Index c0 = base + off;
      const Eigen::Index c1 = base + off + stride;
      const Eigen::VectorXcd col0 = m.col(c0);
      m.col(c0) = col0 * u(0, 0) + m.col(c1) * u(1, 0);
      m.col(c1) = col0 * u(0, 1) + m.col(c1) * u(1, 1);
    }
  }
  // row pass: m <- U^dag m
  for (Eigen::Index base = 0; base < total; base += 2 * stride) {
    for (Eigen::Index off = 0; off < stride; ++off) {
      const Eigen::Index r0 = base + off;
      const Eigen::Index r1 = base + off + stride;
      const Eigen::RowVectorXcd row0 = m.row(r0);
      m.row(r0) = udag(0, 0) * row0 + udag(0, 1) * m.row(r1);
      m.row(r1) = udag(1, 0) * row0 + udag(1, 1) * m.row(r1);
    }
  }
}

void conjugate_mode_diagonal_in_place(Eigen::MatrixXcd& m, const HybridDims& dims,
                                      std::size_t mode, const Eigen::VectorXcd& phases) {
  const std::size_t d = dims.cutoffs.at(mode);
  const std::size_t stride = dims.mode_stride(mode);
  const std::size_t boson_dim = dims.boson_dim();
  const Eigen::Index total = static_cast<Eigen::Index>(dims.total_dim());
  Eigen::VectorXcd diag(total);
  for (Eigen::Index idx = 0; idx < total; ++idx) {
    const std::size_t level = (static_cast<std::size_t>(idx) % boson_dim) / stride % d;
    diag[idx] = phases[static_cast<Eigen::Index>(level)];
  }
  // m <- D^dag m D
  m = diag.conjugate().asDiagonal() * m * diag.asDiagonal();
}

Eigen::MatrixXcd mode_reduced_density(const DenseHybridState& state, std::size_t mode) {
  const std::size_t d = state.dims.cutoffs.at(mode);
  const std::size_t stride = state.dims.mode_stride(mode);
  const std::size_t boson_dim = state.dims.boson_dim();
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(d, d);
  const std::size_t total = state.dims.total_dim();
  for (std::size_t idx = 0; idx < total; ++idx) {
    const Complex amp = state.amplitudes[static_cast<Eigen::Index>(idx)];
    if (amp == Complex(0.0, 0.0)) continue;
    const std::size_t m = idx % boson_dim;
    const std::size_t level = (m / stride) % d;
    // partner indices share everything except this mode's level
    for (std::size_t other = 0; other < d; ++other) {
      const std::size_t partner = idx + (other - level) * stride;
      rho(static_cast<Eigen::Index>(level), static_cast<Eigen::Index>(other)) +=
          amp * std::conj(state.amplitudes[static_cast<Eigen::Index>(partner)]);
    }
  }
  return rho;
}

QuadratureSampler::QuadratureSampler(const DenseHybridState& state, std::size_t mode,
                                     gaussian::Quadrature q) {
  DenseHybridState working = state;
  if (q == gaussian::Quadrature::P) {
    // sample X of e^{-i (pi/2) N} psi
    const std::size_t d = state.dims.cutoffs.at(mode);
    Eigen::VectorXcd phases(static_cast<Eigen::Index>(d));
    for (std::size_t m = 0; m < d; ++m)
      phases[static_cast<Eigen::Index>(m)] =
          std::exp(-kI * (std::numbers::pi / 2.0) * static_cast<double>(m));
    apply_mode_diagonal_in_place(working, mode, phases);
  }
  const Eigen::MatrixXcd rho = mode_reduced_density(working, mode);
  const std::size_t d = static_cast<std::size_t>(rho.rows());
  const double span = std::max(8.0, 1.6 * std::sqrt(2.0 * static_cast<double>(d)));
  constexpr std::size_t kPoints = 4096;
  grid_.resize(kPoints);
  cdf_.resize(kPoints);
  std::vector<double> pdf(kPoints);
  std::vector<double> hermite(d);
  for (std::size_t i = 0; i < kPoints; ++i) {
    const double x = -span + 2.0 * span * static_cast<double>(i) / (kPoints - 1);
    grid_[i] = x;
    // Hermite functions h_m(x), vacuum variance 1/2 convention
    hermite[0] = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * x * x);
    if (d > 1) hermite[1] = std::sqrt(2.0) * x * hermite[0];
    for (std::size_t m = 2; m < d; ++m) {
      const double dm = static_cast<double>(m);
      hermite[m] = std::sqrt(2.0 / dm) * x * hermite[m - 1] -
                   std::sqrt((dm - 1.0) / dm) * hermite[m - 2];
    }
    Complex val(0.0, 0.0);
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b)
        val += hermite[a] * rho(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) *
               hermite[b];
    pdf[i] = std::max(0.0, val.real());
  }
  // trapezoid CDF + moments
  const double dx = grid_[1] - grid_[0];
  double acc = 0.0;
  double m1 = 0.0, m2 = 0.0;
  cdf_[0] = 0.0;
  for (std::size_t i = 1; i < kPoints; ++i) {
    const double cell = 0.5 * (pdf[i] + pdf[i - 1]) * dx;
    acc += cell;
    cdf_[i] = acc;
    const double xm = 0.5 * (grid_[i] + grid_[i - 1]);
    m1 += xm * cell;
    m2 += xm * xm * cell;
  }
  if (acc <= 0.0) throw Error("QuadratureSampler: degenerate distribution");
  for (double& c : cdf_) c /= acc;
  mean_ = m1 / acc;
  variance_ = m2 / acc - mean_ * mean_;
}

double QuadratureSampler::sample(RngStream& rng) const {
  const double u = rng.uniform();
  const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.begin()) return grid_.front();
  if (it == cdf_.end()) return grid_.back();
  const std::size_t hi = static_cast<std::size_t>(it - cdf_.begin());
  const std::size_t lo = hi - 1;
  const double span = cdf_[hi] - cdf_[lo];
  const double frac = span > 0.0 ? (u - cdf_[lo]) / span : 0.5;
  return grid_[lo] + frac * (grid_[hi] - grid_[lo]);
}

double spin_outcome_probability(const DenseHybridState& state, const Eigen::VectorXcd& spin_bra) {
  if (static_cast<std::size_t>(spin_bra.size()) != state.dims.qubit_dim())
    throw ShapeError("spin_outcome_probability: spin vector dimension mismatch");
  const std::size_t boson_dim = state.dims.boson_dim();
  double total = 0.0;
  for (std::size_t m = 0; m < boson_dim; ++m) {
    Complex amp(0.0, 0.0);
    for (std::size_t q = 0; q < state.dims.qubit_dim(); ++q) {
      amp += std::conj(spin_bra[static_cast<Eigen::Index>(q)]) *
             state.amplitudes[static_cast<Eigen::Index>(q * boson_dim + m)];
    }
    total += std::norm(amp);
  }
  return total;
}

}  // namespace heislab::fock
