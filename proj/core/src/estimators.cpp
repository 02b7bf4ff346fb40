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

#include "heislab/estimators.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace heislab::estimators {

namespace {

constexpr double kPi = std::numbers::pi;

std::size_t ladder_depth(double epsilon, double t0) {
  // K = ceil(log2(pi / (2 epsilon t0))), at least one stage.
  const double raw = std::log2(kPi / (2.0 * epsilon * t0));
  const auto k = static_cast<long long>(std::ceil(raw - 1e-12));
  return static_cast<std::size_t>(std::max(1ll, k));
}

/** Candidate for the true value nearest `anchor` among phase/t + 2 pi m / t. */
double unwrap_to_anchor(double phase, double t, double anchor) {
  const double wraps = std::round((anchor * t - phase) / (2.0 * kPi));
  return (phase + 2.0 * kPi * wraps) / t;
}

}  // namespace

std::uint64_t chernoff_shots(double eta, double delta) {
  if (!(eta > 0.0) || eta >= 1.0) throw InvalidArgument("chernoff_shots: eta must be in (0, 1)");
  if (!(delta > 0.0) || delta >= 1.0)
    throw InvalidArgument("chernoff_shots: delta must be in (0, 1)");
  return static_cast<std::uint64_t>(std::ceil((2.0 / (eta * eta)) * std::log(2.0 / delta)));
}

EstimationReport rpe(const PhaseProbOracle& oracle, double epsilon, double delta,
                     double prior_bound) {
  if (!(epsilon > 0.0)) throw InvalidArgument("rpe: epsilon must be positive");
  if (!(delta > 0.0) || delta >= 1.0) throw InvalidArgument("rpe: delta must be in (0, 1)");
  if (!(prior_bound > 0.0)) throw InvalidArgument("rpe: prior_bound must be positive");
  const double t0 = 1.0 / (2.0 * prior_bound);
  const std::size_t stages = ladder_depth(epsilon, t0);
  const std::uint64_t shots_per_obs =
      chernoff_shots(0.25, delta / (2.0 * static_cast<double>(stages)));

  EstimationReport report;
  report.target_epsilon = epsilon;
  double estimate = 0.0;
  for (std::size_t j = 0; j < stages; ++j) {
    const double t = std::ldexp(t0, static_cast<int>(j));
    const auto [p1, p2] = oracle(t, shots_per_obs);
    const double phase = std::atan2(2.0 * p2 - 1.0, 2.0 * p1 - 1.0);
    report.total_shots += 2 * shots_per_obs;
    report.total_evolution_time += 2.0 * static_cast<double>(shots_per_obs) * t;

    StageLog log;
    log.stage = j;
    log.t = t;
    log.shots = 2 * shots_per_obs;
    log.raw_phase = phase;
    const double window = kPi / (3.0 * t);
    if (j == 0) {
      // prior |Delta| <= prior_bound = pi/(2 t0) keeps stage 0 unwrapped
      estimate = phase / t;
      log.window_lo = -prior_bound;
      log.window_hi = prior_bound;
      log.accepted = true;
    } else {
      const double candidate = unwrap_to_anchor(phase, t, estimate);
      log.window_lo = estimate - window;
      log.window_hi = estimate + window;
      if (std::abs(candidate - estimate) > window) {
        log.accepted = false;
        log.estimate = candidate;
        report.stages.push_back(log);
        throw EstimationFailure("rpe: stage " + std::to_string(j) +
                                    " phase outside consistency window",
                                report.stages);
      }
      log.accepted = true;
      estimate = candidate;
    }
    log.estimate = estimate;
    report.stages.push_back(log);
    report.achieved_epsilon = window;
  }
  report.estimate = estimate;
  return report;
}

EstimationReport rfe(const SignalOracle& oracle, double epsilon, double delta,
                     double prior_bound, std::size_t k_max) {
  if (!(epsilon > 0.0)) throw InvalidArgument("rfe: epsilon must be positive");
  if (!(delta > 0.0) || delta >= 1.0) throw InvalidArgument("rfe: delta must be in (0, 1)");
  if (!(prior_bound > 0.0)) throw InvalidArgument("rfe: prior_bound must be positive");
  const double t0 = 1.0 / (2.0 * prior_bound);
  const std::size_t wanted = ladder_depth(epsilon, t0);
  const std::size_t stages = std::min(wanted, k_max + 1);

  EstimationReport report;
  report.target_epsilon = epsilon;
  report.capped = stages < wanted;
  double estimate = 0.0;
  for (std::size_t j = 0; j < stages; ++j) {
    const double t = std::ldexp(t0, static_cast<int>(j));
    const SignalSample sample =
        oracle.sample(t, 0.25, delta / (2.0 * static_cast<double>(stages)));
    const double phase = -std::arg(sample.z);
    report.total_shots += sample.shots;
    report.total_evolution_time += sample.evolution_time;

    StageLog log;
    log.stage = j;
    log.t = t;
    log.shots = sample.shots;
    log.raw_phase = phase;
    const double window = kPi / (3.0 * t);
    if (j == 0) {
      estimate = phase / t;
      log.window_lo = -prior_bound;
      log.window_hi = prior_bound;
      log.accepted = true;
    } else {
      const double candidate = unwrap_to_anchor(phase, t, estimate);
      log.window_lo = estimate - window;
      log.window_hi = estimate + window;
      if (std::abs(candidate - estimate) > window) {
        log.accepted = false;
        log.estimate = candidate;
        report.stages.push_back(log);
        throw EstimationFailure("rfe: stage " + std::to_string(j) +
                                    " phase outside consistency window",
                                report.stages);
      }
      log.accepted = true;
      estimate = candidate;
    }
    log.estimate = estimate;
    report.stages.push_back(log);
    report.achieved_epsilon = window;
  }
  report.estimate = estimate;
  return report;
}

Complex signal_from_p_mean(const std::vector<double>& p_samples) {
  if (p_samples.empty()) throw InvalidArgument("signal_from_p_mean: no samples");
  double mean = 0.0;
  for (double v : p_samples) mean += v;
  mean /= static_cast<double>(p_samples.size());
  return std::polar(1.0, -mean);
}

QuadratureSignal signal_from_quadratures(double x_mean, double p_mean) {
  const Complex raw(x_mean, p_mean);
  const double modulus = std::abs(raw);
  if (modulus == 0.0)
    throw InvalidArgument("signal_from_quadratures: zero vector has undefined phase");
  return {raw / modulus, modulus};
}

std::string stage_log_csv(const std::vector<StageLog>& stages) {
  std::ostringstream out;
  out << "stage,t,shots,raw_phase,window_lo,window_hi,accepted\n";
  char buf[256];
  for (const auto& s : stages) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%llu,%.17g,%.17g,%.17g,%d\n", s.stage, s.t,
                  static_cast<unsigned long long>(s.shots), s.raw_phase, s.window_lo,
                  s.window_hi, s.accepted ? 1 : 0);
    out << buf;
  }
  return out.str();
}

}  // namespace heislab::estimators
