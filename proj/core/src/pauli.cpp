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

#include "heislab/pauli.hpp"

#include <algorithm>
#include <bit>

#include "heislab/errors.hpp"

namespace heislab::pauli {

char to_char(Pauli p) {
  switch (p) {
    case Pauli::I: return 'I';
    case Pauli::X: return 'X';
    case Pauli::Y: return 'Y';
    case Pauli::Z: return 'Z';
  }
  throw InvalidArgument("corrupt Pauli letter");
}

Pauli from_char(char c) {
  switch (c) {
    case 'I': return Pauli::I;
    case 'X': return Pauli::X;
    case 'Y': return Pauli::Y;
    case 'Z': return Pauli::Z;
    default: throw InvalidArgument(std::string("not a Pauli letter: '") + c + "'");
  }
}

PauliString::PauliString(std::vector<Pauli> letters) : letters_(std::move(letters)) {
  if (letters_.empty()) throw InvalidArgument("PauliString needs at least one qubit");
}

PauliString PauliString::from_string(const std::string& word) {
  std::vector<Pauli> letters;
  letters.reserve(word.size());
  for (char c : word) letters.push_back(from_char(c));
  return PauliString(std::move(letters));
}

PauliString PauliString::identity(std::size_t n_qubits) {
  return PauliString(std::vector<Pauli>(n_qubits, Pauli::I));
}

bool PauliString::is_identity() const {
  return std::all_of(letters_.begin(), letters_.end(),
                     [](Pauli p) { return p == Pauli::I; });
}

std::string PauliString::str() const {
  std::string out;
  out.reserve(letters_.size());
  for (Pauli p : letters_) out.push_back(to_char(p));
  return out;
}

std::vector<std::size_t> support(const PauliString& p) {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < p.n_qubits(); ++j) {
    if (p.letter(j) != Pauli::I) out.push_back(j);
  }
  return out;
}

namespace {

void enumerate_rec(std::size_t n_qubits, std::size_t k, std::size_t qubit,
                   std::vector<Pauli>& word, std::vector<PauliString>& out) {
  const std::size_t placed = word.size() - std::count(word.begin(), word.end(), Pauli::I);
  const std::size_t remaining = n_qubits - qubit;
  if (placed + remaining < k) return;
  if (qubit == n_qubits) {
    if (placed == k) out.emplace_back(word);
    return;
  }
  for (Pauli p : {Pauli::I, Pauli::X, Pauli::Y, Pauli::Z}) {
    if (p != Pauli::I && placed == k) continue;
    word[qubit] = p;
    enumerate_rec(n_qubits, k, qubit + 1, word, out);
  }
  word[qubit] = Pauli::I;
}

}  // namespace

std::vector<PauliString> enumerate_eb(std::size_t n_qubits, std::size_t k) {
  if (n_qubits == 0) throw InvalidArgument("enumerate_eb: n_qubits must be >= 1");
  if (k < 1 || k > n_qubits) throw InvalidArgument("enumerate_eb: locality k outside [1, n_qubits]");
  std::vector<PauliString> out;
  std::vector<Pauli> word(n_qubits, Pauli::I);
  enumerate_rec(n_qubits, k, 0, word, out);
  return out;
}

EigenstateLabel EigenstateLabel::from_index(std::size_t index, std::size_t k) {
  EigenstateLabel l;
  l.bits.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    // bit 0 of the label is the first support position = most significant.
    l.bits[i] = ((index >> (k - 1 - i)) & 1u) != 0;
  }
  return l;
}

std::size_t EigenstateLabel::to_index() const {
  std::size_t index = 0;
  for (bool b : bits) index = (index << 1) | (b ? 1u : 0u);
  return index;
}

PauliString sb_member(const PauliString& e_b, std::size_t s_bits) {
  const auto supp = support(e_b);
  std::vector<Pauli> letters(e_b.n_qubits(), Pauli::I);
  for (std::size_t i = 0; i < supp.size(); ++i) {
    const bool retained = ((s_bits >> (supp.size() - 1 - i)) & 1u) != 0;
    if (retained) letters[supp[i]] = e_b.letter(supp[i]);
  }
  return PauliString(std::move(letters));
}

std::vector<PauliString> build_sb_set(const PauliString& e_b) {
  const auto supp = support(e_b);
  if (supp.empty()) throw InvalidArgument("build_sb_set: E_b must not be the identity");
  const std::size_t size = std::size_t{1} << supp.size();
  std::vector<PauliString> out;
  out.reserve(size);
  for (std::size_t s = size; s-- > 0;) out.push_back(sb_member(e_b, s));
  return out;
}

std::size_t sb_bits_of(const PauliString& e_s, const PauliString& e_b) {
  if (e_s.n_qubits() != e_b.n_qubits())
    throw ShapeError("sb_bits_of: qubit count mismatch");
  const auto supp = support(e_b);
  std::size_t bits = 0;
  for (std::size_t i = 0; i < supp.size(); ++i) {
    const Pauli letter = e_s.letter(supp[i]);
    bits <<= 1;
    if (letter == e_b.letter(supp[i])) {
      bits |= 1u;
    } else if (letter != Pauli::I) {
      throw InvalidArgument("Pauli string " + e_s.str() + " is not in S_b of " + e_b.str());
    }
  }
  for (std::size_t j = 0; j < e_s.n_qubits(); ++j) {
    if (e_s.letter(j) != Pauli::I &&
        std::find(supp.begin(), supp.end(), j) == supp.end()) {
      throw InvalidArgument("Pauli string " + e_s.str() + " is not in S_b of " + e_b.str());
    }
  }
  return bits;
}

int eigenvalue_gamma(const PauliString& e_s, const PauliString& e_b, const EigenstateLabel& l) {
  const auto supp = support(e_b);
  if (l.k() != supp.size())
    throw ShapeError("eigenvalue_gamma: label length must equal |supp(E_b)|");
  const std::size_t s_bits = sb_bits_of(e_s, e_b);
  int parity = 0;
  for (std::size_t i = 0; i < supp.size(); ++i) {
    const bool s_i = ((s_bits >> (supp.size() - 1 - i)) & 1u) != 0;
    if (s_i && l.bits[i]) parity ^= 1;
  }
  return parity ? -1 : +1;
}

GammaMatrix gamma_matrix_of_order(std::size_t k) {
  if (k < 1 || k > 24) throw InvalidArgument("gamma_matrix: k outside [1, 24]");
  GammaMatrix gamma;
  gamma.k = k;
  const std::size_t dim = gamma.dim();
  gamma.entries.resize(dim * dim);
  for (std::size_t l = 0; l < dim; ++l) {
    for (std::size_t s = 0; s < dim; ++s) {
      gamma.entries[l * dim + s] = std::popcount(l & s) % 2 ? -1 : +1;
    }
  }
  return gamma;
}

GammaMatrix gamma_matrix(const PauliString& e_b) {
  const auto supp = support(e_b);
  if (supp.empty()) throw InvalidArgument("gamma_matrix: E_b must not be the identity");
  return gamma_matrix_of_order(supp.size());
}

void fwht(std::vector<double>& data) {
  const std::size_t n = data.size();
  if (n == 0 || (n & (n - 1)) != 0) throw ShapeError("fwht: length must be a power of two");
  for (std::size_t h = 1; h < n; h <<= 1) {
    for (std::size_t i = 0; i < n; i += h << 1) {
      for (std::size_t j = i; j < i + h; ++j) {
        const double a = data[j];
        const double b = data[j + h];
        data[j] = a + b;
        data[j + h] = a - b;
      }
    }
  }
}

std::vector<double> solve_coefficients(const GammaMatrix& gamma,
                                       const std::vector<double>& branch_values) {
  const std::size_t dim = gamma.dim();
  if (branch_values.size() != dim)
    throw ShapeError("solve_coefficients: vector length does not match 2^k");
  // Gamma is the 2^k Hadamard matrix under this module's index convention,
  // so Gamma^T * C is a Walsh-Hadamard transform.
  std::vector<double> c = branch_values;
  fwht(c);
  const double scale = 1.0 / static_cast<double>(dim);
  for (double& v : c) v *= scale;
  return c;
}

}  // namespace heislab::pauli
