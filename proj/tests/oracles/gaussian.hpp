#pragma once

#include <cmath>
#include <numbers>

#include "fnls/grid.hpp"

namespace fnls::oracle {

// u(x) = exp(-|x - c|^2 / (2 s^2)) / (pi^{3/4} s^{3/2}), unit L2 norm.
inline double gaussian(const Vec3& x, double s = 1.0, const Vec3& c = {0.0, 0.0, 0.0}) {
  const double r2 = (x[0] - c[0]) * (x[0] - c[0]) + (x[1] - c[1]) * (x[1] - c[1]) + (x[2] - c[2]) * (x[2] - c[2]);
  return std::exp(-r2 / (2.0 * s * s)) / (std::pow(std::numbers::pi, 0.75) * std::pow(s, 1.5));
}

// int |grad u|^2 = 3 / (2 s^2)
inline double gaussian_kinetic(double s = 1.0) { return 1.5 / (s * s); }

// int sum_i omega_i x_i^2 u^2 = s^2 / 2 * sum omega_i
inline double gaussian_harmonic(const Vec3& omega, double s = 1.0) {
  return 0.5 * s * s * (omega[0] + omega[1] + omega[2]);
}

// int (u^2)^{5/3} = (3/5)^{3/2} / (pi s^2)
inline double gaussian_rho53(double s = 1.0) { return std::pow(0.6, 1.5) / (std::numbers::pi * s * s); }

// Sum of the N lowest levels of -Laplacian + c |x|^2: levels (2k + 3) sqrt(c)
// with degeneracy (k + 1)(k + 2) / 2.
inline double oscillator_level_sum(std::size_t N, double c) {
  double s = 0.0;
  std::size_t k = 0, taken = 0;
  while (taken < N) {
    const std::size_t deg = (k + 1) * (k + 2) / 2;
    for (std::size_t d = 0; d < deg && taken < N; ++d, ++taken) s += (2.0 * k + 3.0) * std::sqrt(c);
    ++k;
  }
  return s;
}

// int_{R^3} (beta - |x|^2)_+^{5/2} = (5 pi^2 / 64) beta^4
inline double harmonic_beta_integral(double beta) { return 5.0 * std::numbers::pi * std::numbers::pi / 64.0 * std::pow(beta, 4.0); }

}  // namespace fnls::oracle
