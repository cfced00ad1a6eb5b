#include "invariants.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>

#include "fnls/energy.hpp"
#include "fnls/orbitals.hpp"
#include "fnls/potentials.hpp"
#include "fnls/solvers.hpp"

namespace fnls::invariants {
namespace {

Check make(double value, double tol, std::string detail) { return {value <= tol, value, tol, std::move(detail)}; }

Eigen::MatrixXd random_orthogonal(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd M(n, n);
  for (Eigen::Index i = 0; i < M.size(); ++i) M.data()[i] = nd(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(M);
  return qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
}

}  // namespace

Check loewdin_gram_identity() {
  const GridSpec g = make_grid(6.0, 16);
  OrbitalSet s = random_init(g, 4, 11, 1.0);
  // Mix the columns so the frame is far from orthonormal.
  Eigen::MatrixXd mix = Eigen::MatrixXd::Identity(4, 4);
  mix(0, 1) = 0.7;
  mix(2, 3) = -0.4;
  mix(3, 0) = 0.25;
  s.orbitals = s.orbitals * mix * 1.3;
  const OrbitalSet once = loewdin(s);
  const OrbitalSet twice = loewdin(once);
  const double e1 = (gram(once) - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff();
  const double e2 = (twice.orbitals - once.orbitals).cwiseAbs().maxCoeff();
  return make(std::max(e1, e2), 1e-10, "max |G - I| and Loewdin idempotence");
}

Check energy_rotation_invariance() {
  const GridSpec g = make_grid(6.0, 32);
  const OrbitalSet s = random_init(g, 3, 5, 1.0);
  const TrapPotential v = TrapPotential::ring(1.0, 2.0, 1.0);
  const double e0 = energy(s, 4.0, v).total;
  OrbitalSet r = s;
  r.orbitals = s.orbitals * random_orthogonal(3, 9);
  const double e1 = energy(r, 4.0, v).total;
  return make(std::abs(e1 - e0) / std::abs(e0), 1e-10, "relative energy change under frame rotation");
}

Check gradient_finite_differences() {
  const GridSpec g = make_grid(6.0, 32);
  const OrbitalSet s = random_init(g, 2, 3, 1.0);
  const TrapPotential v = TrapPotential::ring(1.0, 1.0, 1.0);
  const double a = 3.0;
  const auto r = projected_gradient(s, a, v);
  const double dv = g.cell_volume();
  std::mt19937_64 rng(17);
  std::normal_distribution<double> nd;
  double worst = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    // Smooth random direction: random polynomial times a Gaussian, projected
    // onto the tangent space of the frame.
    const OrbitalSet dir = random_init(g, 2, 100 + static_cast<std::uint64_t>(trial), 1.2);
    Eigen::MatrixXd D = dir.orbitals * Eigen::Vector2d(nd(rng), nd(rng)).asDiagonal();
    D -= s.orbitals * (dv * (s.orbitals.transpose() * D));
    double slope = 0.0;
    for (std::size_t i = 0; i < 2; ++i) {
      slope += 2.0 * dv * D.col(static_cast<Eigen::Index>(i)).dot(Eigen::Map<const Eigen::VectorXd>(
                             r[i].values.data(), static_cast<Eigen::Index>(g.size())));
    }
    const double step = 1e-5;
    auto energy_at = [&](double t) {
      OrbitalSet x = s;
      x.orbitals += t * D;
      return energy(loewdin(x), a, v).total;
    };
    const double fd = (energy_at(step) - energy_at(-step)) / (2.0 * step);
    worst = std::max(worst, std::abs(fd - slope) / std::abs(slope));
  }
  return make(worst, 1e-4, "relative mismatch of 2<r, D> against central differences");
}

Check lt_ratio_invariance() {
  const GridSpec g = make_grid(8.0, 32);
  const OrbitalSet s = random_init(g, 2, 21, 1.0);
  const double base = lt_ratio(s);
  double worst_dilation = 0.0;
  const OrbitalSet narrow = transform_frame(s, make_grid(8.0, 64), 2.0, {0.0, 0.0, 0.0});
  const OrbitalSet wide = transform_frame(s, make_grid(16.0, 64), 0.5, {0.0, 0.0, 0.0});
  for (const OrbitalSet* t : {&narrow, &wide}) {
    worst_dilation = std::max(worst_dilation, std::abs(lt_ratio(*t) - base) / base);
  }
  double worst_occ = 0.0;
  for (double c : {0.5, 2.0}) {
    OrbitalSet o = s;
    o.occupations.assign(2, c);
    worst_occ = std::max(worst_occ, std::abs(lt_ratio(o) - base) / base);
  }
  Check ch;
  ch.value = std::max(worst_dilation, worst_occ * 1e6);
  ch.tolerance = 1e-4;
  ch.pass = worst_dilation <= 1e-4 && worst_occ <= 1e-10;
  ch.detail = "dilation change " + std::to_string(worst_dilation) + ", occupation change " + std::to_string(worst_occ);
  return ch;
}

Check descent_trace_monotone() {
  const GridSpec g = make_grid(6.0, 32);
  const TrapPotential v = TrapPotential::ring(1.0, 1.0, 1.5);
  SolverConfig cfg;
  cfg.energy_tol = 1e-8;
  cfg.residual_tol = 1e-5;
  const OrbitalSet init = random_init(g, 2, 4, 1.0);
  const SolveReport rep = minimize_direct(cfg, 2.0, v, 2, init);
  double worst = 0.0;
  for (std::size_t k = 1; k < rep.trace.size(); ++k) {
    const double slack = 1e-12 * std::max(1.0, std::abs(rep.trace[k - 1]));
    worst = std::max(worst, (rep.trace[k] - rep.trace[k - 1]) / slack);
  }
  return make(worst, 1.0, "largest trace increase in units of the 1e-12 slack");
}

}  // namespace fnls::invariants
