#include <doctest.h>

#include <cmath>
#include <random>

#include "../oracles/dense_spectral.hpp"
#include "../oracles/radial_shooting.hpp"
#include "fnls/eigensolve.hpp"
#include "fnls/potentials.hpp"

using namespace fnls;

namespace {

ScalarField random_potential(const GridSpec& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ud(-2.0, 2.0);
  ScalarField w(g);
  for (double& v : w.values) v = ud(rng);
  return w;
}

}  // namespace

TEST_SUITE("eigensolve") {
  TEST_CASE("free Laplacian ground mode") {
    const GridSpec g = make_grid(4.0, 16);
    const EigenResult r = lowest_eigenpairs(ScalarField(g), 1, 1e-10, 1);
    CHECK(std::abs(r.eigenvalues[0]) < 1e-10);
    const auto v = r.eigenfield(0);
    double lo = 1e300, hi = -1e300;
    for (double x : v.values) {
      lo = std::min(lo, std::abs(x));
      hi = std::max(hi, std::abs(x));
    }
    CHECK(hi - lo < 1e-8);
  }

  TEST_CASE("agreement with dense diagonalization on 8^3") {
    const GridSpec g = make_grid(3.0, 8);
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const ScalarField w = random_potential(g, seed);
      const EigenResult r = lowest_eigenpairs(w, 4, 1e-11, seed);
      const Eigen::VectorXd dense = oracle::dense_lowest(8, 3.0, w.values);
      for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(r.eigenvalues[i] - dense[static_cast<Eigen::Index>(i)]) < 1e-8);
      const Eigen::MatrixXd G = g.cell_volume() * r.eigenfields.transpose() * r.eigenfields;
      CHECK((G - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-8);
      for (std::size_t i = 1; i < 4; ++i) CHECK(r.eigenvalues[i - 1] <= r.eigenvalues[i]);
      for (std::size_t i = 0; i < 4; ++i) CHECK(r.residual_norms[i] <= 1e-11 * std::max(1.0, std::abs(r.eigenvalues[i])));
    }
  }

  TEST_CASE("harmonic spectrum") {
    const GridSpec g = make_grid(10.0, 64);
    const ScalarField w = sample_potential(TrapPotential::harmonic({1.0, 1.0, 1.0}), g);
    const EigenResult r = lowest_eigenpairs(w, 4, 1e-8, 3);
    CHECK(std::abs(r.eigenvalues[0] - 3.0) < 1e-3);
    for (std::size_t i = 1; i < 4; ++i) CHECK(std::abs(r.eigenvalues[i] - 5.0) < 1e-3);
  }

  TEST_CASE("monotonicity in the potential") {
    const GridSpec g = make_grid(3.0, 8);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    for (std::uint64_t seed = 10; seed < 13; ++seed) {
      const ScalarField w1 = random_potential(g, seed);
      ScalarField w2 = w1;
      for (double& v : w2.values) v += ud(rng);
      const EigenResult r1 = lowest_eigenpairs(w1, 3, 1e-9, 1), r2 = lowest_eigenpairs(w2, 3, 1e-9, 1);
      for (std::size_t i = 0; i < 3; ++i) CHECK(r1.eigenvalues[i] <= r2.eigenvalues[i] + 1e-9);
    }
  }

  TEST_CASE("negative eigenvalue sums") {
    const GridSpec g = make_grid(8.0, 32);
    CHECK(neg_eigenvalue_sum(ScalarField(g), 2, 1e-8) == 0.0);
    // Square well of radius 1 and depth 1: below the 3D binding threshold pi^2/4.
    const ScalarField shallow =
        ScalarField::from_function(g, [](const Vec3& x) { return std::exp(-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])); });
    CHECK(neg_eigenvalue_sum(shallow, 1, 1e-8) == 0.0);
    // Deep Gaussian well against the radial shooting oracle.
    auto A = [](double r) { return 6.0 * std::exp(-r * r); };
    const ScalarField deep = ScalarField::from_function(g, [&](const Vec3& x) { return A(std::hypot(x[0], x[1], x[2])); });
    const double lambda = oracle::radial_ground_eigenvalue(A, -6.0);
    const double s1 = neg_eigenvalue_sum(deep, 1, 1e-9);
    CHECK(lambda < 0.0);
    CHECK(std::abs(s1 - std::abs(lambda)) < 1e-3);
    const double s3 = neg_eigenvalue_sum(deep, 3, 1e-9);
    CHECK(s3 >= s1 - 1e-9);
    ScalarField deeper = deep;
    for (double& v : deeper.values) v *= 1.2;
    CHECK(neg_eigenvalue_sum(deeper, 1, 1e-9) >= s1 - 1e-9);
  }

  TEST_CASE("outer mass fraction") {
    const GridSpec g = make_grid(4.0, 16);
    std::vector<double> c(g.size(), 1.0 / std::sqrt(g.size() * g.cell_volume()));
    const double f = outer_mass_fraction(g, c);
    CHECK(f > 0.8);
    CHECK(f < 0.88);
  }
}
