#include <doctest.h>

#include <cmath>
#include <sstream>

#include "../oracles/gaussian.hpp"
#include "fnls/errors.hpp"
#include "fnls/orbitals.hpp"

using namespace fnls;

namespace {

Eigen::VectorXd sample(const GridSpec& g, const std::function<double(const Vec3&)>& f) {
  const ScalarField s = ScalarField::from_function(g, f);
  return Eigen::Map<const Eigen::VectorXd>(s.values.data(), static_cast<Eigen::Index>(s.values.size()));
}

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_SUITE("orbitals") {
  TEST_CASE("gram of simple frames") {
    const GridSpec g = make_grid(8.0, 32);
    const Eigen::VectorXd u = sample(g, [](const Vec3& x) { return oracle::gaussian(x); });
    CHECK(std::abs(gram(OrbitalSet(g, u))(0, 0) - 1.0) < 1e-10);
    Eigen::MatrixXd two(u.size(), 2);
    two << u, u;
    const GramMatrix G = gram(OrbitalSet(g, two));
    CHECK(max_abs(G - Eigen::MatrixXd::Ones(2, 2)) < 1e-10);
    CHECK_THROWS_AS(loewdin(OrbitalSet(g, two)), DegenerateFrameError);
  }

  TEST_CASE("loewdin fixed point and idempotence") {
    const GridSpec g = make_grid(6.0, 16);
    const OrbitalSet s = random_init(g, 3, 5, 1.0);
    CHECK(max_abs(gram(s) - Eigen::MatrixXd::Identity(3, 3)) < 1e-10);
    const OrbitalSet t = loewdin(s);
    CHECK(max_abs(t.orbitals - s.orbitals) < 1e-10);
    OrbitalSet skew = s;
    skew.orbitals.col(1) += 0.3 * s.orbitals.col(0);
    const OrbitalSet once = loewdin(skew);
    CHECK(max_abs(gram(once) - Eigen::MatrixXd::Identity(3, 3)) < 1e-10);
    CHECK(max_abs(loewdin(once).orbitals - once.orbitals) < 1e-10);
    // Span preserved: projector onto the span is unchanged.
    const double dv = g.cell_volume();
    const Eigen::MatrixXd P = dv * once.orbitals * once.orbitals.transpose();
    CHECK(max_abs(P * skew.orbitals - skew.orbitals) < 1e-10);
  }

  TEST_CASE("loewdin of nearly orthogonal Gaussians follows the first-order expansion") {
    const GridSpec g = make_grid(8.0, 64);
    const double sigma = 0.5, d = 10.0 * sigma;
    Eigen::MatrixXd m(static_cast<Eigen::Index>(g.size()), 2);
    m.col(0) = sample(g, [&](const Vec3& x) { return oracle::gaussian(x, sigma, {-d / 2, 0.0, 0.0}); });
    m.col(1) = sample(g, [&](const Vec3& x) { return oracle::gaussian(x, sigma, {d / 2, 0.0, 0.0}); });
    const OrbitalSet s(g, m);
    const double overlap = gram(s)(0, 1);
    CHECK(overlap == doctest::Approx(std::exp(-25.0)).epsilon(1e-6));
    const OrbitalSet t = loewdin(s);
    // (1 + X)^{-1/2} = 1 - X / 2 + O(X^2)
    const Eigen::MatrixXd predicted = m - 0.5 * overlap * m.rowwise().reverse();
    CHECK(max_abs(t.orbitals - predicted) < (10.0 * overlap * overlap + 1e-14) * m.cwiseAbs().maxCoeff());
    CHECK(max_abs(t.orbitals - m) < 2.0 * overlap * m.cwiseAbs().maxCoeff());
  }

  TEST_CASE("density mass and rotation invariance") {
    const GridSpec g = make_grid(8.0, 32);
    const OrbitalSet one(g, sample(g, [](const Vec3& x) { return oracle::gaussian(x); }));
    CHECK(integrate(density(one)) == doctest::Approx(1.0).epsilon(1e-8));
    const OrbitalSet s = random_init(g, 3, 2, 1.0);
    const ScalarField rho = density(s);
    CHECK(integrate(rho) == doctest::Approx(3.0).epsilon(1e-8));
    for (double v : rho.values) CHECK(v >= 0.0);
    const Eigen::MatrixXd R = Eigen::HouseholderQR<Eigen::MatrixXd>(Eigen::MatrixXd::Random(3, 3)).householderQ();
    OrbitalSet r = s;
    r.orbitals = s.orbitals * R;
    const ScalarField rr = density(r);
    double err = 0.0, peak = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      err = std::max(err, std::abs(rr.values[i] - rho.values[i]));
      peak = std::max(peak, rho.values[i]);
    }
    CHECK(err <= 1e-12 * std::max(1.0, peak));
    OrbitalSet zero = s;
    zero.orbitals.setZero();
    for (double v : density(zero).values) CHECK(v == 0.0);
  }

  TEST_CASE("random_init determinism, orthonormality and decay") {
    const GridSpec g = make_grid(8.0, 32);
    const OrbitalSet a = random_init(g, 2, 7, 1.0), b = random_init(g, 2, 7, 1.0);
    CHECK(a.orbitals == b.orbitals);
    CHECK(random_init(g, 2, 8, 1.0).orbitals != a.orbitals);
    const OrbitalSet c = random_init(g, 4, 3, 1.0);
    CHECK(max_abs(gram(c) - Eigen::MatrixXd::Identity(4, 4)) < 1e-10);
    for (std::size_t i = 0; i < 4; ++i) CHECK(boundary_leak(c.orbital(i)) < 1e-6);
  }

  TEST_CASE("transform_frame identity and mass preservation") {
    const GridSpec g = make_grid(8.0, 32);
    const OrbitalSet s = random_init(g, 2, 4, 1.0);
    CHECK(max_abs(transform_frame(s, g, 1.0, {0.0, 0.0, 0.0}).orbitals - s.orbitals) < 1e-10);
    const OrbitalSet w = transform_frame(s, make_grid(8.0, 64), 1.6, {0.2, 0.0, -0.1});
    CHECK(max_abs(gram(w) - Eigen::MatrixXd::Identity(2, 2)) < 1e-6);
  }

  TEST_CASE("orbital snapshot round trip") {
    const GridSpec g = make_grid(4.0, 8);
    OrbitalSet s = random_init(g, 2, 1, 1.0);
    s.occupations = {1.0, 0.5};
    std::stringstream ss;
    write_orbitals(ss, s);
    const OrbitalSet r = read_orbitals(ss);
    CHECK(r.grid == g);
    CHECK(r.orbitals == s.orbitals);
    CHECK(r.occupations == s.occupations);
    std::string bad = ss.str();
    bad[1] = '?';
    std::stringstream bin(bad);
    CHECK_THROWS_AS(read_orbitals(bin), FormatError);
  }
}
