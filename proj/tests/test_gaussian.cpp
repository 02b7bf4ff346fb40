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

#include "heislab/gaussian.hpp"

#include <cmath>
#include <numbers>

#include "doctest.h"
#include "heislab/errors.hpp"

using namespace heislab;
using gaussian::Complex;
using gaussian::GaussianBosonState;
using gaussian::Quadrature;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("displaced oscillator closed form") {
  SUBCASE("Lambda=1, omega=2, t=pi/2 drives vacuum to alpha = -1") {
    const auto out = gaussian::evolve_displaced_oscillators(
        GaussianBosonState::vacuum(1), {1.0}, {2.0}, kPi / 2.0);
    CHECK(std::abs(out.alpha[0] - Complex(-1.0, 0.0)) < 1e-14);
  }
  SUBCASE("full period returns to vacuum") {
    const auto out = gaussian::evolve_displaced_oscillators(
        GaussianBosonState::vacuum(1), {0.7}, {1.3}, 2.0 * kPi / 1.3);
    CHECK(std::abs(out.alpha[0]) < 1e-13);
  }
  SUBCASE("half period gives <X> = -2 sqrt(2) Lambda / omega") {
    const double lambda = 0.02, omega = 1.7;
    const auto out = gaussian::evolve_displaced_oscillators(
        GaussianBosonState::vacuum(1), {lambda}, {omega}, kPi / omega);
    CHECK(out.quadrature_mean(0, Quadrature::X) ==
          doctest::Approx(-2.0 * std::sqrt(2.0) * lambda / omega).epsilon(1e-12));
  }
  SUBCASE("semigroup property: evolve(t1+t2) = evolve(t2) o evolve(t1)") {
    GaussianBosonState s = GaussianBosonState::vacuum(2);
    s.alpha = {Complex(0.3, -0.2), Complex(-1.0, 0.4)};
    s.z = {Complex(0.5, 0.1), Complex(0.0, -0.3)};
    const std::vector<double> lam{0.8, -0.5};
    const std::vector<double> om{1.1, 2.3};
    const auto direct = gaussian::evolve_displaced_oscillators(s, lam, om, 0.9);
    const auto steps = gaussian::evolve_displaced_oscillators(
        gaussian::evolve_displaced_oscillators(s, lam, om, 0.35), lam, om, 0.55);
    for (std::size_t n = 0; n < 2; ++n) {
      CHECK(std::abs(direct.alpha[n] - steps.alpha[n]) < 1e-12);
      CHECK(std::abs(direct.z[n] - steps.z[n]) < 1e-12);
    }
  }
  SUBCASE("shape errors") {
    CHECK_THROWS_AS(gaussian::evolve_displaced_oscillators(GaussianBosonState::vacuum(2),
                                                           {1.0}, {1.0, 1.0}, 0.1),
                    ShapeError);
  }
}

TEST_CASE("trotter effective evolution") {
  SUBCASE("<P> = -sqrt(2) Lambda t") {
    const auto out =
        gaussian::evolve_trotter_effective(GaussianBosonState::vacuum(1), {0.02}, 10.0);
    CHECK(out.quadrature_mean(0, Quadrature::P) ==
          doctest::Approx(-std::sqrt(2.0) * 0.2).epsilon(1e-12));
  }
  SUBCASE("zero coupling leaves vacuum unchanged") {
    const auto out =
        gaussian::evolve_trotter_effective(GaussianBosonState::vacuum(1), {0.0}, 123.0);
    CHECK(std::abs(out.alpha[0]) == 0.0);
  }
  SUBCASE("Var[P] stays 1/2 for any drive") {
    const auto out =
        gaussian::evolve_trotter_effective(GaussianBosonState::vacuum(1), {0.37}, 55.0);
    CHECK(out.quadrature_variance(0, Quadrature::P) == doctest::Approx(0.5));
  }
  SUBCASE("detuned form reduces to the effective limit") {
    const auto exact =
        gaussian::evolve_trotter_effective(GaussianBosonState::vacuum(1), {0.31}, 7.0);
    const auto detuned = gaussian::evolve_trotter_detuned(GaussianBosonState::vacuum(1),
                                                          {0.31}, {0.0}, 7.0);
    CHECK(std::abs(exact.alpha[0] - detuned.alpha[0]) < 1e-14);
    // small detuning: displacement matches (Lambda/delta)(e^{-i delta t} - 1)
    const double delta = 1e-4;
    const auto small = gaussian::evolve_trotter_detuned(GaussianBosonState::vacuum(1),
                                                        {0.31}, {delta}, 7.0);
    const Complex expected =
        (0.31 / delta) * (std::polar(1.0, -delta * 7.0) - 1.0);
    CHECK(std::abs(small.alpha[0] - expected) < 1e-12);
  }
}

TEST_CASE("free evolution rotates the complex displacement") {
  SUBCASE("arg(<X> + i<P>) = r - omega t") {
    const double r = 0.8, omega = 1.4, t = 0.6;
    GaussianBosonState s = GaussianBosonState::coherent({std::polar(1.0, r)});
    const auto out = gaussian::evolve_free(s, {omega}, t);
    const Complex signal(out.quadrature_mean(0, Quadrature::X),
                         out.quadrature_mean(0, Quadrature::P));
    CHECK(std::arg(signal) == doctest::Approx(r - omega * t).epsilon(1e-12));
  }
  SUBCASE("t = 0 and full rotations are the identity") {
    GaussianBosonState s = GaussianBosonState::coherent({Complex(0.4, 0.3)});
    s.z = {Complex(0.2, 0.1)};
    const auto id0 = gaussian::evolve_free(s, {1.0}, 0.0);
    CHECK(std::abs(id0.alpha[0] - s.alpha[0]) == 0.0);
    const auto id2pi = gaussian::evolve_free(s, {1.0}, 2.0 * kPi);
    CHECK(std::abs(id2pi.alpha[0] - s.alpha[0]) < 1e-12);
    CHECK(std::abs(id2pi.z[0] - s.z[0]) < 1e-12);
  }
}

TEST_CASE("entangled squeezed construction") {
  SUBCASE("z = 0 is the product vacuum for any W") {
    const auto s = gaussian::build_entangled_squeezed(3, 64, Complex(0.0, 0.0));
    CHECK(s.copies == 64);
    for (std::size_t n = 0; n < 3; ++n) CHECK(s.mean_photons(n) == 0.0);
  }
  SUBCASE("N_pt = 1000 needs |z| = arcsinh(sqrt(1000))") {
    const double z = std::asinh(std::sqrt(1000.0));
    CHECK(z == doctest::Approx(4.1473).epsilon(1e-4));
    CHECK(std::pow(std::sinh(z), 2) == doctest::Approx(1000.0).epsilon(1e-12));
    const auto s = gaussian::build_entangled_squeezed(1, 10, Complex(z, 0.0));
    CHECK(s.mean_photons(0) == doctest::Approx(1000.0).epsilon(1e-10));
  }
  SUBCASE("W = 1 is an ordinary squeezed vacuum") {
    const auto s = gaussian::build_entangled_squeezed(1, 1, Complex(1.0, 0.0));
    CHECK(s.quadrature_variance(0, Quadrature::X) ==
          doctest::Approx(0.5 * std::exp(-2.0)).epsilon(1e-12));
    CHECK(s.quadrature_variance(0, Quadrature::P) ==
          doctest::Approx(0.5 * std::exp(2.0)).epsilon(1e-12));
  }
}

TEST_CASE("homodyne sampling moments") {
  RngStream rng(77);
  gaussian::SpamNoise quiet;
  SUBCASE("vacuum: mean 0, variance 1/2 at 1e5 shots") {
    const auto samples = gaussian::sample_homodyne(GaussianBosonState::vacuum(1), 0,
                                                   Quadrature::X, 100000, quiet, rng);
    double mean = 0.0, sq = 0.0;
    for (const auto& s : samples) mean += s.value;
    mean /= 1e5;
    for (const auto& s : samples) sq += (s.value - mean) * (s.value - mean);
    const double var = sq / (1e5 - 1.0);
    CHECK(std::abs(mean) < 3.0 * std::sqrt(0.5 / 1e5));
    CHECK(std::abs(var - 0.5) < 3.0 * 0.5 * std::sqrt(2.0 / 1e5));
  }
  SUBCASE("alpha = -1 gives mean -sqrt(2)") {
    const auto state = GaussianBosonState::coherent({Complex(-1.0, 0.0)});
    const auto samples =
        gaussian::sample_homodyne(state, 0, Quadrature::X, 100000, quiet, rng);
    double mean = 0.0;
    for (const auto& s : samples) mean += s.value;
    mean /= 1e5;
    CHECK(mean == doctest::Approx(-std::sqrt(2.0)).epsilon(0.01));
  }
  SUBCASE("readout noise adds variance") {
    gaussian::SpamNoise noisy;
    noisy.quad_sigma = 0.1;
    const auto samples = gaussian::sample_homodyne(GaussianBosonState::vacuum(1), 0,
                                                   Quadrature::P, 200000, noisy, rng);
    double mean = 0.0, sq = 0.0;
    for (const auto& s : samples) mean += s.value;
    mean /= 2e5;
    for (const auto& s : samples) sq += (s.value - mean) * (s.value - mean);
    CHECK(sq / (2e5 - 1.0) == doctest::Approx(0.51).epsilon(0.02));
  }
  SUBCASE("minimal uncertainty for coherent states") {
    GaussianBosonState s = GaussianBosonState::coherent({Complex(0.4, -1.2)});
    const auto evolved = gaussian::evolve_displaced_oscillators(
        gaussian::evolve_free(s, {1.3}, 0.7), {0.5}, {1.3}, 2.1);
    CHECK(evolved.quadrature_variance(0, Quadrature::X) *
              evolved.quadrature_variance(0, Quadrature::P) ==
          doctest::Approx(0.25).epsilon(1e-12));
  }
}

TEST_CASE("DQS estimator") {
  gaussian::SpamNoise quiet;
  SUBCASE("W=1, z=0 prediction is 1/sqrt(2)") {
    RngStream rng(3);
    const auto s = gaussian::build_entangled_squeezed(1, 1, Complex(0.0, 0.0));
    const auto est = gaussian::dqs_estimate(s, 0, 1, 1, quiet, rng);
    CHECK(est.predicted_rmse == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  }
  SUBCASE("W=1000, N_pt=1000 prediction near 3.54e-4") {
    const double z = std::asinh(std::sqrt(1000.0));
    const auto s = gaussian::build_entangled_squeezed(1, 1000, Complex(z, 0.0));
    const double predicted = gaussian::dqs_predicted_rmse(s, 0, 1, quiet);
    const double formula =
        std::sqrt(1.0 / (2.0 * 1000.0 *
                         std::pow(std::sqrt(1001.0) + std::sqrt(1000.0), 2.0)));
    CHECK(predicted == doctest::Approx(formula).epsilon(1e-12));
    CHECK(predicted == doctest::Approx(3.54e-4).epsilon(0.01));
  }
  SUBCASE("z=0: rmse = 1/sqrt(2W)") {
    const auto s = gaussian::build_entangled_squeezed(2, 50, Complex(0.0, 0.0));
    CHECK(gaussian::dqs_predicted_rmse(s, 1, 1, quiet) ==
          doctest::Approx(1.0 / std::sqrt(100.0)).epsilon(1e-12));
  }
  SUBCASE("empirical rmse matches prediction within 5% (module invariant)") {
    for (const std::size_t w : {1ul, 10ul, 100ul}) {
      for (const double n_pt : {0.0, 1.0}) {
        const double n_total = static_cast<double>(w) * n_pt;
        const double z = std::asinh(std::sqrt(n_total));
        auto s = gaussian::build_entangled_squeezed(1, w, Complex(z, 0.0));
        s.alpha[0] = Complex(0.3, 0.0);
        RngStream rng(1000 + w + static_cast<std::uint64_t>(n_pt));
        const std::size_t trials = 20000;
        double sq = 0.0;
        double predicted = 0.0;
        for (std::size_t i = 0; i < trials; ++i) {
          const auto est = gaussian::dqs_estimate(s, 0, w, 1, quiet, rng);
          const double err = est.x_tilde - s.quadrature_mean(0, Quadrature::X);
          sq += err * err;
          predicted = est.predicted_rmse;
        }
        const double empirical = std::sqrt(sq / static_cast<double>(trials));
        CHECK(empirical == doctest::Approx(predicted).epsilon(0.05));
      }
    }
  }
  SUBCASE("squeezing factor rmse(N_pt)/rmse(0) = 1/(sqrt(1+N)+sqrt(N))") {
    RngStream rng(9);
    const std::size_t w = 10;
    const double n_total = 25.0;
    const double z = std::asinh(std::sqrt(n_total));
    const auto squeezed = gaussian::build_entangled_squeezed(1, w, Complex(z, 0.0));
    const auto flat = gaussian::build_entangled_squeezed(1, w, Complex(0.0, 0.0));
    const std::size_t trials = 20000;
    double sq_s = 0.0, sq_f = 0.0;
    for (std::size_t i = 0; i < trials; ++i) {
      sq_s += std::pow(gaussian::dqs_estimate(squeezed, 0, w, 1, quiet, rng).x_tilde, 2);
      sq_f += std::pow(gaussian::dqs_estimate(flat, 0, w, 1, quiet, rng).x_tilde, 2);
    }
    const double ratio = std::sqrt(sq_s / sq_f);
    CHECK(ratio == doctest::Approx(1.0 / (std::sqrt(26.0) + 5.0)).epsilon(0.05));
  }
  SUBCASE("copy-count mismatch") {
    RngStream rng(4);
    const auto s = gaussian::build_entangled_squeezed(1, 10, Complex(0.0, 0.0));
    CHECK_THROWS_AS(gaussian::dqs_estimate(s, 0, 20, 1, quiet, rng), ShapeError);
  }
}
