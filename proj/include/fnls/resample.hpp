#pragma once

#include <Eigen/Dense>
#include <array>
#include <span>

#include "fnls/grid.hpp"

namespace fnls {

/// Evaluates out(x) = amplitude * f(scale * x + shift) at the nodes of a
/// target grid, where f is the trigonometric interpolant of samples on a
/// source grid. Points that map outside the source box give zero.
///
/// The map is separable, so the interpolation is three 1D matrix products.
class AffineResampler {
 public:
  AffineResampler(const GridSpec& source, const GridSpec& target, double scale, const Vec3& shift);

  void apply(std::span<const double> src, std::span<double> out, double amplitude = 1.0) const;
  ScalarField apply(const ScalarField& src, double amplitude = 1.0) const;

  const GridSpec& source() const { return source_; }
  const GridSpec& target() const { return target_; }

 private:
  GridSpec source_;
  GridSpec target_;
  std::array<Eigen::MatrixXd, 3> axis_;
};

/// Periodic band-limited interpolation weight between a point and a node
/// offset theta apart, for n nodes on a period of length 2L.
double periodic_sinc(double theta, std::size_t n, double half_length);

}  // namespace fnls
