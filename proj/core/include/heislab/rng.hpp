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
#include <initializer_list>
#include <random>

namespace heislab {

// Deterministic, platform-independent randomness. All distributions are
// produced from the standardized mt19937_64 output stream with explicit
// transforms; std::uniform_real_distribution and friends are
// implementation-defined and must not appear in any seeded code path.

/** SplitMix64 step, used to mix seeds and derive named substreams. */
std::uint64_t splitmix64(std::uint64_t& state);

/** Hash a (seed, tag...) tuple into a substream seed. */
std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> tags);

/** A seeded random stream. Cheap to construct, one per independent task. */
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed);

  /** Substream keyed by integer tags; identical tags give identical streams. */
  RngStream derive(std::initializer_list<std::uint64_t> tags) const;

  /** Uniform on [0, 1) with 53-bit resolution. */
  double uniform();

  /** Uniform on [lo, hi). */
  double uniform(double lo, double hi);

  /** Standard normal via Box-Muller (cached spare). */
  double normal();

  /** Normal with the given mean and standard deviation. */
  double normal(double mean, double stddev);

  /** Bernoulli trial. */
  bool bernoulli(double p);

  /** Binomial count as `n` explicit Bernoulli trials (portable, n small). */
  std::uint64_t binomial(std::uint64_t n, double p);

  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  std::uint64_t root_seed_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace heislab
