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

#include "doctest.h"
#include "heislab/fitting.hpp"
#include "heislab/rng.hpp"

using namespace heislab;
using estimators::EstimationReport;

namespace {

constexpr double kPi = std::numbers::pi;

/** Binomially sampled pair-probability oracle for a known Delta. */
estimators::PhaseProbOracle binomial_oracle(double delta_true, RngStream& rng) {
  return [delta_true, &rng](double t, std::uint64_t shots) {
    const double p1 = 0.5 * (1.0 + std::cos(delta_true * t));
    const double p2 = 0.5 * (1.0 + std::sin(delta_true * t));
    return std::make_pair(
        static_cast<double>(rng.binomial(shots, p1)) / static_cast<double>(shots),
        static_cast<double>(rng.binomial(shots, p2)) / static_cast<double>(shots));
  };
}

estimators::PhaseProbOracle exact_oracle(double delta_true) {
  return [delta_true](double t, std::uint64_t) {
    return std::make_pair(0.5 * (1.0 + std::cos(delta_true * t)),
                          0.5 * (1.0 + std::sin(delta_true * t)));
  };
}

estimators::SignalOracle exact_signal(double theta) {
  estimators::SignalOracle oracle;
  oracle.sample = [theta](double t, double eta, double delta) {
    estimators::SignalSample out;
    out.z = std::polar(1.0, -theta * t);
    out.shots = estimators::chernoff_shots(eta, delta);
    out.evolution_time = static_cast<double>(out.shots) * t;
    return out;
  };
  return oracle;
}

}  // namespace

TEST_CASE("chernoff_shots") {
  CHECK(estimators::chernoff_shots(0.1, 0.01) == 1060);
  CHECK(estimators::chernoff_shots(0.999, 0.99) == 2);
  // eta^-2 law: halving eta quadruples the count (up to ceil rounding)
  const auto base = estimators::chernoff_shots(0.2, 0.05);
  const auto fine = estimators::chernoff_shots(0.1, 0.05);
  CHECK(fine >= 4 * base - 4);
  CHECK(fine <= 4 * base + 4);
  CHECK_THROWS_AS(estimators::chernoff_shots(0.0, 0.1), InvalidArgument);
  CHECK_THROWS_AS(estimators::chernoff_shots(0.1, 1.5), InvalidArgument);
}

TEST_CASE("rpe") {
  SUBCASE("Delta = 0 noiseless gives zero everywhere") {
    const auto report = estimators::rpe(exact_oracle(0.0), 1e-4, 0.05, 1.0);
    CHECK(report.estimate == 0.0);
    for (const auto& s : report.stages) CHECK(s.raw_phase == doctest::Approx(0.0));
  }
  SUBCASE("Delta = 0.7 with binomial sampling: 200 seeded runs, >= 95% within 1e-4") {
    std::size_t hits = 0;
    for (std::uint64_t run = 0; run < 200; ++run) {
      RngStream rng(derive_seed(1234, {run}));
      try {
        const auto report = estimators::rpe(binomial_oracle(0.7, rng), 1e-4, 0.05, 1.0);
        if (std::abs(report.estimate - 0.7) < 1e-4) ++hits;
      } catch (const estimators::EstimationFailure&) {
      }
    }
    CHECK(hits >= 190);
  }
  SUBCASE("total evolution time is Heisenberg limited") {
    std::vector<double> inv_eps, times;
    for (double eps : {1e-2, 1e-3, 1e-4, 1e-5}) {
      const auto report = estimators::rpe(exact_oracle(0.42), eps, 0.05, 1.0);
      inv_eps.push_back(1.0 / eps);
      times.push_back(report.total_evolution_time);
    }
    const auto fit = fitting::fit_scaling(inv_eps, times);
    CHECK(std::abs(fit.slope - 1.0) < 0.1);
    // accounting: T(eps) * eps bounded above and below across three decades
    double lo = 1e300, hi = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
      const double ratio = times[i] / inv_eps[i];
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
    CHECK(hi / lo < 3.0);
  }
  SUBCASE("bias-freeness over 1000 seeded runs") {
    const double truth = -0.318;
    const double eps = 1e-3;
    double sum = 0.0;
    std::size_t good = 0;
    for (std::uint64_t run = 0; run < 1000; ++run) {
      RngStream rng(derive_seed(777, {run}));
      try {
        sum += estimators::rpe(binomial_oracle(truth, rng), eps, 0.05, 1.0).estimate - truth;
        ++good;
      } catch (const estimators::EstimationFailure&) {
      }
    }
    CHECK(good >= 990);
    CHECK(std::abs(sum / static_cast<double>(good)) < eps / 3.0);
  }
  SUBCASE("accepted stages stay inside their inherited windows (random truths)") {
    for (std::uint64_t run = 0; run < 1000; ++run) {
      RngStream rng(derive_seed(31337, {run}));
      const double truth = rng.uniform(-0.95, 0.95);
      RngStream oracle_rng(derive_seed(31338, {run}));
      try {
        const auto report =
            estimators::rpe(binomial_oracle(truth, oracle_rng), 1e-3, 0.05, 1.0);
        for (const auto& s : report.stages) {
          REQUIRE(s.accepted);
          if (s.stage == 0) continue;  // stage 0 is bounded by the prior, not a window
          REQUIRE(s.estimate >= s.window_lo - 1e-12);
          REQUIRE(s.estimate <= s.window_hi + 1e-12);
        }
      } catch (const estimators::EstimationFailure&) {
      }
    }
  }
}

TEST_CASE("rfe") {
  SUBCASE("noiseless exponential signal is recovered exactly") {
    const auto report = estimators::rfe(exact_signal(0.7), 1e-6, 0.05, 1.0, 40);
    CHECK(report.estimate == doctest::Approx(0.7).epsilon(1e-9));
    CHECK(!report.capped);
  }
  SUBCASE("stage cap marks the report and floors the accuracy") {
    const auto report = estimators::rfe(exact_signal(0.7), 1e-9, 0.05, 1.0, 6);
    CHECK(report.capped);
    CHECK(report.stages.size() == 7);
    CHECK(report.achieved_epsilon ==
          doctest::Approx(kPi / (3.0 * 64.0 * 0.5)).epsilon(1e-12));
  }
  SUBCASE("Heisenberg slope survives Gaussian phase noise") {
    const double sigma = 0.05;
    std::vector<double> inv_eps, rmses;
    for (double eps : {3e-2, 1e-2, 3e-3, 1e-3}) {
      double sq = 0.0;
      std::size_t good = 0;
      for (std::uint64_t run = 0; run < 120; ++run) {
        RngStream rng(derive_seed(555, {run, static_cast<std::uint64_t>(1.0 / eps)}));
        estimators::SignalOracle noisy;
        noisy.sample = [&rng, sigma](double t, double eta, double delta) {
          estimators::SignalSample out;
          out.shots = estimators::chernoff_shots(eta, delta);
          out.evolution_time = static_cast<double>(out.shots) * t;
          const double phase_noise =
              rng.normal(0.0, sigma / std::sqrt(static_cast<double>(out.shots)));
          out.z = std::polar(1.0, -0.9 * t + phase_noise);
          return out;
        };
        try {
          const auto report = estimators::rfe(noisy, eps, 0.05, 1.0, 40);
          sq += (report.estimate - 0.9) * (report.estimate - 0.9);
          ++good;
        } catch (const estimators::EstimationFailure&) {
        }
      }
      REQUIRE(good > 100);
      inv_eps.push_back(1.0 / eps);
      rmses.push_back(std::sqrt(sq / static_cast<double>(good)));
    }
    const auto fit = fitting::fit_scaling(inv_eps, rmses);
    CHECK(std::abs(fit.slope + 1.0) < 0.2);
    CHECK(rmses.back() < sigma);
  }
  SUBCASE("shot count is polylog: ln^2 beats any power law by AIC") {
    std::vector<double> inv_eps, shots;
    for (double eps : {1e-2, 1e-3, 1e-4, 1e-5}) {
      const auto report = estimators::rfe(exact_signal(0.5), eps, 0.05, 1.0, 63);
      inv_eps.push_back(1.0 / eps);
      shots.push_back(static_cast<double>(report.total_shots));
    }
    CHECK(fitting::aic_log_squared(inv_eps, shots) <
          fitting::aic_power_law(inv_eps, shots, 0.5));
  }
  SUBCASE("window violation raises EstimationFailure with the stage log") {
    estimators::SignalOracle adversarial;
    adversarial.sample = [](double t, double, double) {
      estimators::SignalSample out;
      // stage 0 says theta ~ 0, later stages report a far-off phase
      out.z = t < 1.0 ? std::polar(1.0, 0.0) : std::polar(1.0, -2.5);
      out.shots = 1;
      out.evolution_time = t;
      return out;
    };
    try {
      (void)estimators::rfe(adversarial, 1e-4, 0.05, 1.0, 40);
      FAIL("expected EstimationFailure");
    } catch (const estimators::EstimationFailure& e) {
      CHECK(e.stages.size() >= 2);
      CHECK(!e.stages.back().accepted);
    }
  }
}

TEST_CASE("signal construction") {
  SUBCASE("signal_from_p_mean basics") {
    CHECK(std::abs(estimators::signal_from_p_mean({0.0, 0.0}) -
                   estimators::Complex(1.0, 0.0)) < 1e-15);
    CHECK(std::abs(estimators::signal_from_p_mean({kPi}) -
                   estimators::Complex(-1.0, 0.0)) < 1e-12);
    CHECK_THROWS_AS(estimators::signal_from_p_mean({}), InvalidArgument);
  }
  SUBCASE("Chernoff-sized averages honor the (eta, delta) promise") {
    const double eta = 0.15, delta = 0.05;
    const double lambda = 0.02, t = 30.0;
    const double p_mean = -std::sqrt(2.0) * lambda * t;
    const auto shots = estimators::chernoff_shots(eta, delta);
    std::size_t violations = 0;
    const std::size_t trials = 500;
    RngStream rng(99);
    for (std::size_t trial = 0; trial < trials; ++trial) {
      std::vector<double> samples;
      samples.reserve(shots);
      for (std::uint64_t i = 0; i < shots; ++i)
        samples.push_back(rng.normal(p_mean, std::sqrt(0.5)));
      const auto z = estimators::signal_from_p_mean(samples);
      if (std::abs(z - std::polar(1.0, -p_mean)) > eta) ++violations;
    }
    CHECK(static_cast<double>(violations) / trials <= delta);
  }
  SUBCASE("signal_from_quadratures") {
    const auto sig = estimators::signal_from_quadratures(0.7, 0.0);
    CHECK(std::arg(sig.z) == doctest::Approx(0.0));
    CHECK(sig.modulus == doctest::Approx(0.7));
    CHECK(std::abs(estimators::signal_from_quadratures(-3.0, 4.0).z) ==
          doctest::Approx(1.0));
    CHECK_THROWS_AS(estimators::signal_from_quadratures(0.0, 0.0), InvalidArgument);
  }
  SUBCASE("free-rotation phase: omega = 1, r = 0, t = pi/2 -> -pi/2") {
    // <X> + i<P> of a coherent state alpha = e^{-i omega t}
    const double t = kPi / 2.0;
    const std::complex<double> alpha = std::polar(1.0, -t);
    const auto sig = estimators::signal_from_quadratures(std::sqrt(2.0) * alpha.real(),
                                                         std::sqrt(2.0) * alpha.imag());
    CHECK(std::arg(sig.z) == doctest::Approx(-kPi / 2.0).epsilon(1e-12));
  }
}

TEST_CASE("stage log CSV") {
  const auto report = estimators::rfe(exact_signal(0.3), 1e-3, 0.05, 1.0, 40);
  const auto csv = estimators::stage_log_csv(report.stages);
  CHECK(csv.rfind("stage,t,shots,raw_phase,window_lo,window_hi,accepted\n", 0) == 0);
  std::size_t lines = 0;
  for (char c : csv)
    if (c == '\n') ++lines;
  CHECK(lines == report.stages.size() + 1);
}

TEST_CASE("fit_scaling") {
  SUBCASE("exact inverse law") {
    std::vector<double> x{1, 2, 4, 8, 16}, y;
    for (double v : x) y.push_back(1.0 / v);
    const auto fit = fitting::fit_scaling(x, y);
    CHECK(fit.slope == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(fit.r_squared == doctest::Approx(1.0));
  }
  SUBCASE("noisy half-power law") {
    RngStream rng(8);
    std::vector<double> x, y;
    for (double v = 1.0; v <= 1e4; v *= 4.0) {
      x.push_back(v);
      y.push_back(3.0 * std::pow(v, -0.5) * (1.0 + rng.normal(0.0, 0.05)));
    }
    const auto fit = fitting::fit_scaling(x, y);
    CHECK(std::abs(fit.slope + 0.5) < 0.05);
  }
  SUBCASE("guards") {
    CHECK_THROWS_AS(fitting::fit_scaling({1, 2, 3}, {1, 2, 3}), InvalidArgument);
    CHECK_THROWS_AS(fitting::fit_scaling({1, 2, 3, -4}, {1, 2, 3, 4}), InvalidArgument);
  }
}
