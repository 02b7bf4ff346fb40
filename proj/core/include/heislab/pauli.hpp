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

#include <cstdint>
#include <string>
#include <vector>

namespace heislab::pauli {

/** Single-qubit Pauli letters. */
enum class Pauli : std::uint8_t { I = 0, X = 1, Y = 2, Z = 3 };

char to_char(Pauli p);
Pauli from_char(char c);

/**
 * A fixed-length word over {I, X, Y, Z}, one letter per qubit.
 *
 * Letter 0 is qubit 0 and prints leftmost, e.g. "ZIX" puts Z on qubit 0
 * and X on qubit 2. Immutable in spirit: all operations below are pure.
 */
class PauliString {
 public:
  PauliString() = default;
  explicit PauliString(std::vector<Pauli> letters);
  /** Parse from an uppercase word such as "ZIX". */
  static PauliString from_string(const std::string& word);
  static PauliString identity(std::size_t n_qubits);

  std::size_t n_qubits() const { return letters_.size(); }
  Pauli letter(std::size_t qubit) const { return letters_.at(qubit); }
  const std::vector<Pauli>& letters() const { return letters_; }
  bool is_identity() const;
  std::string str() const;

  bool operator==(const PauliString& other) const = default;
  /** Lexicographic order with I < X < Y < Z, used everywhere ordering matters. */
  bool operator<(const PauliString& other) const { return letters_ < other.letters_; }

 private:
  std::vector<Pauli> letters_;
};

/** Non-identity positions of `p`, ascending. */
std::vector<std::size_t> support(const PauliString& p);

/**
 * All N_q-qubit strings with |support| exactly k, lexicographically ascending
 * (I < X < Y < Z). There are 3^k * C(N_q, k) of them.
 */
std::vector<PauliString> enumerate_eb(std::size_t n_qubits, std::size_t k);

/**
 * Bit labels over the support of a reference string E_b, one bit per support
 * position in ascending qubit order; the first support position is the most
 * significant bit.
 *
 * EigenstateLabel: bit = 1 means the local eigenvalue of the E_b letter on
 * that qubit is -1.  SbLabel (the `s` strings below): bit = 1 means the E_b
 * letter is retained, bit = 0 means it is replaced by identity.
 */
struct EigenstateLabel {
  std::vector<bool> bits;

  static EigenstateLabel from_index(std::size_t index, std::size_t k);
  std::size_t to_index() const;
  std::size_t k() const { return bits.size(); }
};

/**
 * The 2^k mutually commuting strings obtained from E_b by replacing subsets
 * of its letters with identity. Ordered by the retain-bitstring s descending
 * from all-ones, so element 0 is E_b itself and the last is the identity.
 */
std::vector<PauliString> build_sb_set(const PauliString& e_b);

/** The member of S_b whose retain-bitstring is `s_bits` (MSB = first support position). */
PauliString sb_member(const PauliString& e_b, std::size_t s_bits);

/** Retain-bitstring of e_s relative to e_b; throws if e_s is not in S_b. */
std::size_t sb_bits_of(const PauliString& e_s, const PauliString& e_b);

/**
 * Eigenvalue gamma_l^s = (-1)^(l . s) of E_s on the labeled E_b eigenstate.
 * Throws if e_s is not in S_b (not simultaneously diagonal).
 */
int eigenvalue_gamma(const PauliString& e_s, const PauliString& e_b, const EigenstateLabel& l);

/**
 * The 2^k x 2^k sign matrix entries[l][s] = (-1)^(l . s) with both row index
 * l and column index s ascending from the all-zeros bitstring. This is the
 * standard 2^k Hadamard matrix, so Gamma * Gamma^T = 2^k * I exactly.
 *
 * Note the S_b list above is ordered by s DESCENDING (E_b first); column s of
 * this matrix corresponds to build_sb_set(e_b)[2^k - 1 - s].
 */
struct GammaMatrix {
  std::size_t k = 0;
  std::vector<std::int8_t> entries;  // row-major, dim = 2^k

  std::size_t dim() const { return std::size_t{1} << k; }
  int at(std::size_t l, std::size_t s) const {
    return entries[l * dim() + s];
  }
};

GammaMatrix gamma_matrix(const PauliString& e_b);
GammaMatrix gamma_matrix_of_order(std::size_t k);

/** In-place Walsh-Hadamard transform; data.size() must be a power of two. */
void fwht(std::vector<double>& data);

/**
 * Solve Gamma * c = C for c, i.e. c = Gamma^T * C / 2^k. Exploits the
 * Hadamard structure (fast Walsh-Hadamard transform). Indexing follows the
 * GammaMatrix convention: entry s of the result is the coefficient of
 * sb_member(e_b, s), so index 0 is the identity string's coefficient.
 */
std::vector<double> solve_coefficients(const GammaMatrix& gamma,
                                       const std::vector<double>& branch_values);

}  // namespace heislab::pauli
