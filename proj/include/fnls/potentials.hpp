#pragma once

#include <string>
#include <variant>

#include "fnls/grid.hpp"

namespace fnls {

struct ZeroTrap {};

/// V(x) = sum_i omega_i (x_i - c_i)^2.
struct HarmonicTrap {
  Vec3 omega{1.0, 1.0, 1.0};
  Vec3 center{0.0, 0.0, 0.0};
};

/// V(x) = omega1 (r - A)^2 + omega2 x3^2 with r = sqrt(x1^2 + x2^2).
/// The minimum set is the circle r = A, x3 = 0.
struct RingTrap {
  double omega1 = 1.0;
  double omega2 = 1.0;
  double radius = 1.0;
};

/// Nonnegative trapping potential with minimum value 0.
class TrapPotential {
 public:
  using Variant = std::variant<ZeroTrap, HarmonicTrap, RingTrap>;

  TrapPotential() = default;
  static TrapPotential zero();
  static TrapPotential harmonic(const Vec3& omega, const Vec3& center = {0.0, 0.0, 0.0});
  static TrapPotential ring(double omega1, double omega2, double radius);

  double operator()(const Vec3& x) const;
  const Variant& variant() const { return v_; }
  std::string kind() const;
  bool is_zero() const { return std::holds_alternative<ZeroTrap>(v_); }

  /// One point where V = 0 (for the ring, (A, 0, 0)).
  Vec3 minimum_point() const;

 private:
  explicit TrapPotential(Variant v) : v_(std::move(v)) {}
  Variant v_{ZeroTrap{}};
};

/// Node values of V. For a ring trap the ring must satisfy A < L/2.
ScalarField sample_potential(const TrapPotential& v, const GridSpec& grid);

/// Values V(origin + y) at the nodes y of a box centered on origin. No fit
/// check is made; used for local boxes around a point of interest.
ScalarField sample_potential(const TrapPotential& v, const GridSpec& grid, const Vec3& origin);

/// h^3 * sum max(beta - V, 0)^{5/2}; nondecreasing in beta.
double beta_level_integral(const TrapPotential& v, double beta, const GridSpec& grid);

}  // namespace fnls
