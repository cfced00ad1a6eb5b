#include "fnls/resample.hpp"

#include <cmath>
#include <numbers>

#include "fnls/errors.hpp"

namespace fnls {

double periodic_sinc(double theta, std::size_t n, double half_length) {
  const double h = 2.0 * half_length / static_cast<double>(n);
  const double q = theta / h;
  const double nearest = std::round(q);
  if (std::abs(q - nearest) < 1e-12) {
    const long m = static_cast<long>(nearest) % static_cast<long>(n);
    return m == 0 ? 1.0 : 0.0;
  }
  const double x = std::numbers::pi * theta / (2.0 * half_length);
  return std::sin(static_cast<double>(n) * x) / (static_cast<double>(n) * std::tan(x));
}

AffineResampler::AffineResampler(const GridSpec& source, const GridSpec& target, double scale, const Vec3& shift)
    : source_(source), target_(target) {
  if (!(scale > 0.0)) throw DomainError("resampling scale must be positive");
  const std::size_t ns = source.points_per_dim;
  const std::size_t nt = target.points_per_dim;
  const double L = source.half_length;
  for (int a = 0; a < 3; ++a) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nt), static_cast<Eigen::Index>(ns));
    for (std::size_t t = 0; t < nt; ++t) {
      const double s = scale * target.coordinate(t) + shift[a];
      if (s < -L || s >= L) continue;
      for (std::size_t j = 0; j < ns; ++j) {
        m(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) = periodic_sinc(s - source.coordinate(j), ns, L);
      }
    }
    axis_[a] = std::move(m);
  }
}

void AffineResampler::apply(std::span<const double> src, std::span<double> out, double amplitude) const {
  using Eigen::Index;
  using Eigen::Map;
  using Eigen::MatrixXd;
  const Index ns = static_cast<Index>(source_.points_per_dim);
  const Index nt = static_cast<Index>(target_.points_per_dim);
  if (static_cast<std::size_t>(ns * ns * ns) != src.size() || static_cast<std::size_t>(nt * nt * nt) != out.size()) {
    throw DomainError("resampler given arrays of the wrong size");
  }

  Map<const MatrixXd> s(src.data(), ns, ns * ns);
  MatrixXd t1 = axis_[0] * s;  // nt x (ns*ns), layout i_t + nt*(j + ns*k)

  MatrixXd t2(nt * nt, ns);  // layout i_t + nt*(j_t + nt*k)
  const MatrixXd m1t = axis_[1].transpose();
  for (Index k = 0; k < ns; ++k) {
    Map<const MatrixXd> slice(t1.data() + k * nt * ns, nt, ns);
    Map<MatrixXd> dst(t2.data() + k * nt * nt, nt, nt);
    dst.noalias() = slice * m1t;
  }

  Map<MatrixXd> o(out.data(), nt * nt, nt);
  o.noalias() = t2 * axis_[2].transpose();
  if (amplitude != 1.0) o *= amplitude;
}

ScalarField AffineResampler::apply(const ScalarField& src, double amplitude) const {
  ScalarField out(target_);
  apply(src.values, out.values, amplitude);
  return out;
}

}  // namespace fnls
