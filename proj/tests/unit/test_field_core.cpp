#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "../oracles/gaussian.hpp"
#include "fnls/errors.hpp"
#include "fnls/grid.hpp"
#include "fnls/resample.hpp"
#include "fnls/snapshot.hpp"
#include "fnls/spectral.hpp"

using namespace fnls;
using std::numbers::pi;

namespace {

// Sum of a few low Fourier modes with random amplitudes.
ScalarField band_limited(const GridSpec& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ud(-1.0, 1.0);
  std::vector<std::array<double, 7>> modes;
  for (int m = 0; m < 6; ++m) {
    modes.push_back({ud(rng), std::round(2.0 * ud(rng)), std::round(2.0 * ud(rng)), std::round(2.0 * ud(rng)),
                     ud(rng), 0.0, 0.0});
  }
  const double k0 = pi / g.half_length;
  return ScalarField::from_function(g, [&](const Vec3& x) {
    double s = 0.0;
    for (const auto& m : modes) s += m[0] * std::cos(k0 * (m[1] * x[0] + m[2] * x[1] + m[3] * x[2]) + m[4]);
    return s;
  });
}

}  // namespace

TEST_SUITE("field_core") {
  TEST_CASE("make_grid spacing and preconditions") {
    CHECK(make_grid(8.0, 32).spacing == 0.5);
    CHECK(make_grid(12.0, 64).spacing == 0.375);
    CHECK_THROWS_AS(make_grid(8.0, 30), ConfigError);
    CHECK_THROWS_AS(make_grid(8.0, 4), ConfigError);
    CHECK_THROWS_AS(make_grid(0.0, 32), ConfigError);
    CHECK_THROWS_AS(make_grid(-1.0, 32), ConfigError);
  }

  TEST_CASE("integrate") {
    const GridSpec g = make_grid(8.0, 32);
    CHECK(integrate(ScalarField::from_function(g, [](const Vec3&) { return 1.0; })) == doctest::Approx(4096.0).epsilon(1e-14));
    CHECK(integrate(ScalarField(g)) == 0.0);
    const ScalarField u2 = ScalarField::from_function(g, [](const Vec3& x) {
      const double u = oracle::gaussian(x);
      return u * u;
    });
    CHECK(std::abs(integrate(u2) - 1.0) < 1e-10);
    // Linear and positive.
    const ScalarField f = band_limited(g, 1), h = band_limited(g, 2);
    ScalarField lin(g);
    for (std::size_t i = 0; i < g.size(); ++i) lin.values[i] = 2.0 * f.values[i] - 3.0 * h.values[i];
    CHECK(integrate(lin) == doctest::Approx(2.0 * integrate(f) - 3.0 * integrate(h)).epsilon(1e-12));
    CHECK(integrate(u2) > 0.0);
  }

  TEST_CASE("laplacian of a Fourier mode and a constant") {
    const GridSpec g = make_grid(8.0, 32);
    const double k = pi / g.half_length;
    const ScalarField f = ScalarField::from_function(g, [&](const Vec3& x) { return std::sin(k * x[0]); });
    const ScalarField lf = laplacian_apply(f);
    double err = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) err = std::max(err, std::abs(lf.values[i] - k * k * f.values[i]));
    CHECK(err < 1e-10);
    const ScalarField c = laplacian_apply(ScalarField::from_function(g, [](const Vec3&) { return 3.0; }));
    double cmax = 0.0;
    for (double v : c.values) cmax = std::max(cmax, std::abs(v));
    CHECK(cmax < 1e-12);
  }

  TEST_CASE("laplacian against the second-order finite-difference oracle") {
    // The FD error of a band-limited field is h^2/12 * sum |d^4 f / dx_i^4|;
    // its ratio between h and h/2 must approach 4.
    double prev = 0.0;
    for (std::size_t n : {16u, 32u, 64u}) {
      const GridSpec g = make_grid(4.0, n);
      const ScalarField f = band_limited(g, 5);
      const ScalarField lf = laplacian_apply(f);
      const double h = g.spacing;
      double err = 0.0, scale = 0.0;
      for (std::size_t k = 0; k < n; ++k)
        for (std::size_t j = 0; j < n; ++j)
          for (std::size_t i = 0; i < n; ++i) {
            auto at = [&](long a, long b, long c) {
              auto w = [n](long q) { return static_cast<std::size_t>((q + static_cast<long>(n)) % static_cast<long>(n)); };
              return f.values[g.index(w(a), w(b), w(c))];
            };
            const long I = static_cast<long>(i), J = static_cast<long>(j), K = static_cast<long>(k);
            const double fd = (6.0 * at(I, J, K) - at(I + 1, J, K) - at(I - 1, J, K) - at(I, J + 1, K) -
                               at(I, J - 1, K) - at(I, J, K + 1) - at(I, J, K - 1)) / (h * h);
            err = std::max(err, std::abs(fd - lf.values[g.index(i, j, k)]));
            scale = std::max(scale, std::abs(lf.values[g.index(i, j, k)]));
          }
      const double bound = h * h / 12.0 * 3.0 * std::pow(2.0 * pi / g.half_length, 2) * scale;
      CHECK(err <= bound);
      if (prev > 0.0) CHECK(prev / err == doctest::Approx(4.0).epsilon(0.1));
      prev = err;
    }
  }

  TEST_CASE("laplacian linearity") {
    const GridSpec g = make_grid(6.0, 32);
    const ScalarField f = band_limited(g, 7), h = band_limited(g, 8);
    ScalarField comb(g);
    for (std::size_t i = 0; i < g.size(); ++i) comb.values[i] = 1.5 * f.values[i] - 0.25 * h.values[i];
    const ScalarField a = laplacian_apply(comb), lf = laplacian_apply(f), lh = laplacian_apply(h);
    double err = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      err = std::max(err, std::abs(a.values[i] - (1.5 * lf.values[i] - 0.25 * lh.values[i])));
      scale = std::max(scale, std::abs(a.values[i]));
    }
    CHECK(err <= 1e-12 * scale);
  }

  TEST_CASE("kinetic quadratic form") {
    const GridSpec g = make_grid(8.0, 32);
    CHECK(kinetic_quadratic_form(ScalarField::from_function(g, [](const Vec3&) { return 2.0; })) ==
          doctest::Approx(0.0));
    const double k = pi / g.half_length;
    const ScalarField s = ScalarField::from_function(g, [&](const Vec3& x) { return std::sin(k * x[0]); });
    CHECK(std::abs(kinetic_quadratic_form(s) - k * k * std::pow(2.0 * g.half_length, 3) / 2.0) < 1e-9);
    const ScalarField u = ScalarField::from_function(g, [](const Vec3& x) { return oracle::gaussian(x); });
    CHECK(std::abs(kinetic_quadratic_form(u) - oracle::gaussian_kinetic()) < 1e-6);
    // Parseval consistency with integrate(f * (-Laplacian f)).
    const ScalarField f = band_limited(g, 3);
    const ScalarField lf = laplacian_apply(f);
    const double q = kinetic_quadratic_form(f);
    CHECK(q >= 0.0);
    CHECK(std::abs(inner(g, f.span(), lf.span()) - q) <= 1e-10 * q);
  }

  TEST_CASE("kinetic dilation covariance") {
    const GridSpec g = make_grid(8.0, 32);
    const ScalarField u = ScalarField::from_function(g, [](const Vec3& x) { return oracle::gaussian(x, 1.0, {0.3, -0.2, 0.1}); });
    const double base = kinetic_quadratic_form(u);
    for (double t : {0.5, 0.75, 1.5, 2.0}) {
      const GridSpec target = t < 1.0 ? make_grid(16.0, 64) : make_grid(8.0, 64);
      const ScalarField ut = AffineResampler(g, target, t, {0.0, 0.0, 0.0}).apply(u, std::pow(t, 1.5));
      CHECK(std::abs(kinetic_quadratic_form(ut) - t * t * base) <= 1e-4 * t * t * base);
    }
  }

  TEST_CASE("field snapshot round trip and corruption") {
    const GridSpec g = make_grid(5.0, 8);
    const ScalarField f = band_limited(g, 4);
    std::stringstream ss;
    write_field(ss, f);
    const std::string bytes = ss.str();
    CHECK(bytes.substr(0, 4) == "FNLS");
    std::stringstream in(bytes);
    const ScalarField r = read_field(in);
    CHECK(r.grid == g);
    CHECK(r.values == f.values);
    std::string bad = bytes;
    bad[0] = 'X';
    std::stringstream bin(bad);
    CHECK_THROWS_AS(read_field(bin), FormatError);
    std::stringstream cut(bytes.substr(0, bytes.size() - 8));
    CHECK_THROWS_AS(read_field(cut), FormatError);
  }
}
