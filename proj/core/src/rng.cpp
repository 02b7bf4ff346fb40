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

#include "heislab/rng.hpp"

#include <cmath>
#include <numbers>

#include "heislab/errors.hpp"

namespace heislab {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> tags) {
  std::uint64_t state = root;
  std::uint64_t mixed = splitmix64(state);
  for (std::uint64_t tag : tags) {
    state ^= tag + 0x9e3779b97f4a7c15ULL + (mixed << 6) + (mixed >> 2);
    mixed = splitmix64(state);
  }
  return mixed;
}

RngStream::RngStream(std::uint64_t seed) : engine_(seed), root_seed_(seed) {}

RngStream RngStream::derive(std::initializer_list<std::uint64_t> tags) const {
  return RngStream(derive_seed(root_seed_, tags));
}

double RngStream::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double RngStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_normal_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

double RngStream::normal(double mean, double stddev) { return mean + stddev * normal(); }

bool RngStream::bernoulli(double p) {
  if (p < 0.0 || p > 1.0) throw InvalidArgument("bernoulli probability outside [0, 1]");
  return uniform() < p;
}

std::uint64_t RngStream::binomial(std::uint64_t n, double p) {
  if (p < 0.0 || p > 1.0) throw InvalidArgument("binomial probability outside [0, 1]");
  std::uint64_t count = 0;
  for (std::uint64_t i = 0; i < n; ++i) count += uniform() < p ? 1 : 0;
  return count;
}

}  // namespace heislab
