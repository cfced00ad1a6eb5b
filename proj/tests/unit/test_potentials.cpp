#include <doctest.h>

#include <cmath>
#include <numbers>

#include "../oracles/gaussian.hpp"
#include "fnls/asymptotics.hpp"
#include "fnls/errors.hpp"
#include "fnls/potentials.hpp"

using namespace fnls;

TEST_SUITE("potentials") {
  TEST_CASE("pointwise values") {
    const TrapPotential ring = TrapPotential::ring(1.0, 1.0, 2.0);
    CHECK(ring({2.0, 0.0, 0.0}) == 0.0);
    CHECK(TrapPotential::ring(1.0, 4.0, 2.0)({0.0, 0.0, 1.0}) == doctest::Approx(8.0));
    CHECK(TrapPotential::harmonic({1.0, 2.0, 3.0}, {1.0, 0.0, 0.0})({2.0, 1.0, 1.0}) == doctest::Approx(6.0));
    const ScalarField z = sample_potential(TrapPotential::zero(), make_grid(4.0, 8));
    for (double v : z.values) CHECK(v == 0.0);
  }

  TEST_CASE("invalid parameters") {
    CHECK_THROWS_AS(TrapPotential::ring(0.0, 1.0, 2.0), ConfigError);
    CHECK_THROWS_AS(TrapPotential::ring(1.0, -1.0, 2.0), ConfigError);
    CHECK_THROWS_AS(TrapPotential::ring(1.0, 1.0, 0.0), ConfigError);
    CHECK_THROWS_AS(TrapPotential::harmonic({1.0, 0.0, 1.0}), ConfigError);
    CHECK_THROWS_AS(sample_potential(TrapPotential::ring(1.0, 1.0, 5.0), make_grid(8.0, 16)), ConfigError);
    CHECK_NOTHROW(sample_potential(TrapPotential::ring(1.0, 1.0, 3.9), make_grid(8.0, 16)));
  }

  TEST_CASE("sampled values are nonnegative") {
    const GridSpec g = make_grid(6.0, 16);
    for (const TrapPotential& v : {TrapPotential::ring(1.0, 2.0, 2.0), TrapPotential::harmonic({1.0, 1.0, 1.0})}) {
      for (double x : sample_potential(v, g).values) CHECK(x >= 0.0);
    }
  }

  TEST_CASE("ring is invariant under rotation about the vertical axis") {
    const TrapPotential v = TrapPotential::ring(1.3, 0.7, 2.0);
    for (double r : {0.5, 2.0, 3.1}) {
      for (double z : {-1.0, 0.0, 0.4}) {
        const double ref = v({r, 0.0, z});
        for (int k = 1; k < 24; ++k) {
          const double th = 2.0 * std::numbers::pi * k / 24.0;
          CHECK(std::abs(v({r * std::cos(th), r * std::sin(th), z}) - ref) <= 1e-12);
        }
      }
    }
  }

  TEST_CASE("beta level integral") {
    const GridSpec g = make_grid(4.5, 64);
    const TrapPotential ring = TrapPotential::ring(1.0, 1.0, 2.0);
    CHECK_THROWS_AS(beta_level_integral(ring, 0.0, g), DomainError);
    CHECK_THROWS_AS(beta_level_integral(ring, -1.0, g), DomainError);
    // Harmonic trap centered between nodes: V > 1e-2 everywhere on the grid.
    const GridSpec coarse = make_grid(4.0, 16);
    const TrapPotential off = TrapPotential::harmonic({1.0, 1.0, 1.0}, {0.25, 0.25, 0.25});
    CHECK(beta_level_integral(off, 0.1, coarse) == 0.0);
    double prev = 0.0;
    for (double b = 0.01; b < 0.2; b *= 1.3) {
      const double q = beta_level_integral(ring, b, g);
      CHECK(q >= prev);
      prev = q;
    }
  }

  TEST_CASE("harmonic beta law matches the radial oracle") {
    const GridSpec g = make_grid(2.0, 128);
    const TrapPotential v = TrapPotential::harmonic({1.0, 1.0, 1.0});
    std::vector<double> beta, val;
    for (int k = 0; k < 6; ++k) {
      const double b = 0.25 * std::pow(4.0, k / 5.0);
      beta.push_back(b);
      val.push_back(beta_level_integral(v, b, g));
      CHECK(val.back() == doctest::Approx(oracle::harmonic_beta_integral(b)).epsilon(0.02));
    }
    CHECK(std::abs(fit_power_law(beta, val).exponent - 4.0) < 0.1);
  }
}
