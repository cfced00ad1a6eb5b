#include <doctest.h>

#include <cmath>

#include "../oracles/gaussian.hpp"
#include "fnls/asymptotics.hpp"
#include "fnls/errors.hpp"
#include "fnls/solvers.hpp"

using namespace fnls;

namespace {

Eigen::VectorXd sample(const GridSpec& g, const std::function<double(const Vec3&)>& f) {
  const ScalarField s = ScalarField::from_function(g, f);
  return Eigen::Map<const Eigen::VectorXd>(s.values.data(), static_cast<Eigen::Index>(s.values.size()));
}

SweepRecord record(double a_star, double gap, double mu1) {
  SweepRecord r;
  r.a = a_star - gap;
  r.gap = gap;
  r.eps = std::pow(gap, 0.25);
  r.energy = 0.85 * std::sqrt(gap);
  r.rho53 = 1.3 / std::sqrt(gap);
  r.x_max = {2.0 - 0.01 * r.eps, 0.0, 0.0};
  r.mu = {mu1 / (r.eps * r.eps)};
  r.converged = true;
  return r;
}

}  // namespace

TEST_SUITE("asymptotics") {
  TEST_CASE("power law fits") {
    std::vector<double> x, y, z;
    for (int k = 0; k < 5; ++k) {
      x.push_back(std::pow(10.0, -k * 0.5));
      y.push_back(2.0 * std::sqrt(x.back()));
      z.push_back(1.0 / std::sqrt(x.back()));
    }
    const PowerLawFit f = fit_power_law(x, y);
    CHECK(std::abs(f.exponent - 0.5) < 1e-12);
    CHECK(std::abs(f.prefactor - 2.0) < 1e-12);
    CHECK(std::abs(f.r2 - 1.0) < 1e-12);
    CHECK(fit_power_law(x, z).exponent == doctest::Approx(-0.5).epsilon(1e-12));
    std::vector<double> bad = y;
    bad[2] = 0.0;
    CHECK_THROWS_AS(fit_power_law(x, bad), DomainError);
    CHECK_THROWS_AS(fit_power_law({1.0, 2.0}, {1.0, 2.0}), DomainError);
    const LinearFit l = fit_linear({0.0, 1.0, 2.0}, {1.0, 3.0, 5.0});
    CHECK(l.slope == doctest::Approx(2.0));
    CHECK(l.intercept == doctest::Approx(1.0));
  }

  TEST_CASE("concentration point") {
    const GridSpec g = make_grid(8.0, 32);
    const ScalarField rho = ScalarField::from_function(g, [](const Vec3& x) {
      const double u = oracle::gaussian(x, 1.0, {1.25, 0.0, 0.0});
      return u * u;
    });
    const ConcentrationPoint c = concentration_point(rho);
    CHECK_FALSE(c.tie);
    CHECK(std::abs(c.point[0] - 1.25) < 0.05);
    CHECK(std::abs(c.point[1]) < 0.05);
    CHECK(std::abs(c.point[2]) < 0.05);
    const ConcentrationPoint flat = concentration_point(ScalarField::from_function(g, [](const Vec3&) { return 1.0; }));
    CHECK(flat.tie);
    CHECK(flat.point == Vec3{-8.0, -8.0, -8.0});
    const ScalarField edge = ScalarField::from_function(g, [](const Vec3& x) {
      const double u = oracle::gaussian(x, 1.0, {-8.0, 0.0, 0.0});
      return u * u;
    });
    CHECK_THROWS_AS(concentration_point(edge), DomainError);
  }

  TEST_CASE("rescale_profile identity, mass and inverse") {
    const GridSpec g = make_grid(8.0, 32);
    const OrbitalSet s = random_init(g, 2, 3, 1.0);
    CHECK((rescale_profile(s, 1.0, {0.0, 0.0, 0.0}, g).orbitals - s.orbitals).cwiseAbs().maxCoeff() < 1e-10);
    const GridSpec fine = make_grid(8.0, 64);
    const Vec3 xc{0.4, -0.2, 0.1};
    const OrbitalSet w = rescale_profile(s, 0.8, xc, fine);
    const Eigen::MatrixXd G0 = gram(s), G1 = gram(w);
    for (Eigen::Index i = 0; i < 2; ++i) CHECK(std::abs(G1(i, i) - G0(i, i)) < 1e-6);
    const OrbitalSet back = rescale_profile(w, 1.25, {-xc[0] / 0.8, -xc[1] / 0.8, -xc[2] / 0.8}, g);
    CHECK((back.orbitals - s.orbitals).cwiseAbs().maxCoeff() < 1e-8);
    CHECK_THROWS_AS(rescale_profile(s, 0.2, xc, g), ConfigError);
  }

  TEST_CASE("aligned distance removes frame rotations") {
    const GridSpec g = make_grid(6.0, 32);
    const OrbitalSet s = random_init(g, 2, 8, 1.0);
    OrbitalSet r = s;
    const double th = 0.7;
    Eigen::Matrix2d R;
    R << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
    r.orbitals = s.orbitals * R;
    const AlignedDistance d = aligned_distance(r, s);
    CHECK(d.density < 1e-12);
    CHECK(d.frame < 1e-10);
  }

  TEST_CASE("multiplier limit check") {
    const double mu_hat = -2.7;
    std::vector<SweepRecord> rec;
    for (double gap : {1e-1, 1e-2, 1e-3, 1e-4}) rec.push_back(record(9.5, gap, mu_hat * (1.0 + 0.1 * std::sqrt(gap))));
    const MultiplierLimitReport m = multiplier_limit_check(rec, {mu_hat});
    CHECK(m.negative_tail);
    CHECK(m.relative_distance < 0.01);
    CHECK(m.pass);
    for (std::size_t k = 0; k < rec.size(); ++k) CHECK(m.scaled_mu1[k] < 0.0);
    // a <= 0 records are filtered, leaving too few.
    std::vector<SweepRecord> few(rec.begin(), rec.begin() + 2);
    SweepRecord zero = record(9.5, 9.5, mu_hat);
    zero.a = 0.0;
    few.insert(few.begin(), zero);
    CHECK_THROWS_AS(multiplier_limit_check(few, {mu_hat}), DomainError);
  }

  TEST_CASE("limit energy right-hand side with vanishing constants") {
    const GridSpec g = make_grid(6.0, 32);
    const OrbitalSet w(g, sample(g, [](const Vec3& x) { return oracle::gaussian(x, 0.8); }));
    const RingTrap ring{1.0, 2.0, 2.0};
    const double rhs = limit_energy_rhs(w, ring, {1.0, 0.0, 0.0}, 0.0, 0.0);
    const double expected = oracle::gaussian_rho53(0.8) + oracle::gaussian_harmonic({1.0, 0.0, 2.0}, 0.8);
    CHECK(rhs == doctest::Approx(expected).epsilon(1e-6));
    const double shifted = limit_energy_rhs(w, ring, {1.0, 0.0, 0.0}, 0.1, 0.0);
    CHECK(shifted == doctest::Approx(expected + 0.01).epsilon(1e-6));
  }

  TEST_CASE("limit energy check on synthetic records") {
    const GridSpec g = make_grid(6.0, 32);
    const OrbitalSet w(g, sample(g, [](const Vec3& x) { return oracle::gaussian(x, 0.8); }));
    const double rhs = limit_energy_rhs(w, RingTrap{1.0, 1.0, 2.0}, {1.0, 0.0, 0.0}, 0.0, 0.0);
    std::vector<SweepRecord> rec;
    for (double gap : {1e-1, 1e-2, 1e-3, 1e-4}) {
      SweepRecord r = record(9.5, gap, -2.7);
      r.energy = rhs * std::sqrt(gap) * (1.0 + 0.01 * r.eps);
      r.x_max = {2.0, 0.0, 0.0};
      rec.push_back(r);
    }
    const LimitEnergyReport rep = limit_energy_check(rec, w, TrapPotential::ring(1.0, 1.0, 2.0));
    CHECK(std::abs(rep.c0) < 1e-12);
    CHECK(std::abs(rep.c1) < 1e-12);
    CHECK(rep.relative_difference < 1e-3);
    CHECK(rep.pass);
    CHECK_THROWS_AS(limit_energy_check(rec, w, TrapPotential::harmonic({1.0, 1.0, 1.0})), DomainError);
  }

  TEST_CASE("decay check separates Gaussian and exponential tails") {
    const GridSpec g = make_grid(10.0, 64);
    const OrbitalSet gauss(g, sample(g, [](const Vec3& x) { return oracle::gaussian(x); }));
    const DecayReport gr = decay_check(gauss, {-1.0});
    CHECK_FALSE(gr.exponential);
    CHECK(gr.r2_linear < gr.r2_quadratic);
    // Yukawa-type orbital exp(-k r) / r, smoothed at the origin.
    const double k = 1.5;
    Eigen::VectorXd u = sample(g, [&](const Vec3& x) {
      const double r = std::hypot(x[0], x[1], x[2]);
      return std::exp(-k * std::sqrt(r * r + 0.25)) / std::sqrt(r * r + 0.25);
    });
    u /= std::sqrt(g.cell_volume() * u.squaredNorm());
    const DecayReport er = decay_check(OrbitalSet(g, u), {-k * k});
    CHECK(er.exponential);
    CHECK(er.samples > 100);
    CHECK(er.rate == doctest::Approx(er.expected_rate).epsilon(0.05));
    CHECK(er.expected_rate == doctest::Approx(2.0 * k));
    CHECK(er.bound_rate == doctest::Approx(std::sqrt(2.0) * k));
  }

  TEST_CASE("sweep input validation") {
    const GridSpec g = make_grid(7.0, 16);
    const OrbitalSet q = random_init(g, 1, 1, 1.0);
    const TrapPotential v = TrapPotential::ring(1.0, 1.0, 2.0);
    const SolverConfig cfg;
    CHECK_THROWS_AS(sweep(cfg, TrapPotential::zero(), 1, 9.5, {0.1}, q), ConfigError);
    CHECK_THROWS_AS(sweep(cfg, v, 1, 9.5, {}, q), DomainError);
    CHECK_THROWS_AS(sweep(cfg, v, 1, 9.5, {0.1, 0.2}, q), DomainError);
    CHECK_THROWS_AS(sweep(cfg, v, 1, 9.5, {0.1, -0.01}, q), DomainError);
    CHECK_THROWS_AS(sweep(cfg, v, 2, 9.5, {0.1}, q), DomainError);
    CHECK_THROWS_AS(sweep(cfg, v, 1, 9.5, {10.0}, q), DomainError);
  }
}
