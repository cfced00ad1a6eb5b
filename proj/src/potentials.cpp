#include "fnls/potentials.hpp"

#include <cmath>

#include "fnls/errors.hpp"

namespace fnls {

TrapPotential TrapPotential::zero() { return TrapPotential(ZeroTrap{}); }

TrapPotential TrapPotential::harmonic(const Vec3& omega, const Vec3& center) {
  for (double w : omega) {
    if (!(w > 0.0)) throw ConfigError("harmonic trap frequencies must be positive");
  }
  return TrapPotential(HarmonicTrap{omega, center});
}

TrapPotential TrapPotential::ring(double omega1, double omega2, double radius) {
  if (!(omega1 > 0.0) || !(omega2 > 0.0)) throw ConfigError("ring trap frequencies must be positive");
  if (!(radius > 0.0)) throw ConfigError("ring radius must be positive");
  return TrapPotential(RingTrap{omega1, omega2, radius});
}

double TrapPotential::operator()(const Vec3& x) const {
  struct Eval {
    const Vec3& x;
    double operator()(const ZeroTrap&) const { return 0.0; }
    double operator()(const HarmonicTrap& h) const {
      double s = 0.0;
      for (int i = 0; i < 3; ++i) s += h.omega[i] * (x[i] - h.center[i]) * (x[i] - h.center[i]);
      return s;
    }
    double operator()(const RingTrap& r) const {
      const double rho = std::hypot(x[0], x[1]) - r.radius;
      return r.omega1 * rho * rho + r.omega2 * x[2] * x[2];
    }
  };
  return std::visit(Eval{x}, v_);
}

std::string TrapPotential::kind() const {
  switch (v_.index()) {
    case 0: return "zero";
    case 1: return "harmonic";
    default: return "ring";
  }
}

Vec3 TrapPotential::minimum_point() const {
  if (auto* h = std::get_if<HarmonicTrap>(&v_)) return h->center;
  if (auto* r = std::get_if<RingTrap>(&v_)) return {r->radius, 0.0, 0.0};
  return {0.0, 0.0, 0.0};
}

ScalarField sample_potential(const TrapPotential& v, const GridSpec& grid) {
  if (auto* r = std::get_if<RingTrap>(&v.variant())) {
    if (!(r->radius < 0.5 * grid.half_length)) {
      throw ConfigError("ring radius A must satisfy A < L/2 for the ring to fit in the box");
    }
  }
  if (v.is_zero()) return ScalarField(grid);
  return ScalarField::from_function(grid, [&](const Vec3& x) { return v(x); });
}

ScalarField sample_potential(const TrapPotential& v, const GridSpec& grid, const Vec3& origin) {
  return ScalarField::from_function(grid, [&](const Vec3& y) {
    return v({origin[0] + y[0], origin[1] + y[1], origin[2] + y[2]});
  });
}

double beta_level_integral(const TrapPotential& v, double beta, const GridSpec& grid) {
  if (!(beta > 0.0)) throw DomainError("beta must be positive");
  const ScalarField samples = sample_potential(v, grid);
  double s = 0.0;
  for (double value : samples.values) {
    const double gap = beta - value;
    if (gap > 0.0) s += gap * gap * std::sqrt(gap);
  }
  return s * grid.cell_volume();
}

}  // namespace fnls
