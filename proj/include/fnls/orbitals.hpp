#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "fnls/grid.hpp"

namespace fnls {

/// N real orbitals sampled on one grid, stored as the columns of a
/// (n^3 x N) matrix, with nonnegative occupations (default 1).
struct OrbitalSet {
  GridSpec grid;
  Eigen::MatrixXd orbitals;
  std::vector<double> occupations;

  OrbitalSet() = default;
  OrbitalSet(const GridSpec& g, Eigen::MatrixXd columns);
  OrbitalSet(const GridSpec& g, Eigen::MatrixXd columns, std::vector<double> occ);
  static OrbitalSet from_fields(const std::vector<ScalarField>& fields);

  std::size_t count() const { return static_cast<std::size_t>(orbitals.cols()); }
  ScalarField orbital(std::size_t i) const;
  std::span<const double> column(std::size_t i) const {
    return {orbitals.col(static_cast<Eigen::Index>(i)).data(), grid.size()};
  }
  std::span<double> column(std::size_t i) {
    return {orbitals.col(static_cast<Eigen::Index>(i)).data(), grid.size()};
  }
  double max_occupation() const;
};

/// G_ij = integral of u_i u_j, symmetrized.
using GramMatrix = Eigen::MatrixXd;

inline constexpr double kDefaultSigmaMin = 1e-8;

GramMatrix gram(const OrbitalSet& s);
GramMatrix gram(const GridSpec& grid, const Eigen::MatrixXd& columns);

/// Symmetric orthonormalization (u_1..u_N) G^{-1/2}.
///
/// Throws DegenerateFrameError when the smallest Gram eigenvalue is below
/// sigma_min. Near-degenerate frames (smallest eigenvalue below 1e-6) are
/// orthonormalized by two passes of modified Gram-Schmidt instead.
OrbitalSet loewdin(const OrbitalSet& s, double sigma_min = kDefaultSigmaMin);
void loewdin_in_place(const GridSpec& grid, Eigen::MatrixXd& columns, double sigma_min = kDefaultSigmaMin);

/// rho(x) = sum_i n_i u_i(x)^2.
ScalarField density(const OrbitalSet& s);
void density_into(const OrbitalSet& s, std::span<double> rho);

/// Gaussian envelope exp(-|x|^2 / (2 width^2)) times seeded random quadratic
/// polynomials, then Loewdin. Retries up to 5 sub-seeds on a degenerate frame.
OrbitalSet random_init(const GridSpec& grid, std::size_t count, std::uint64_t seed, double width);

/// w_i(x) = scale^{3/2} u_i(scale * x + shift), sampled on target by
/// trigonometric interpolation. Not re-orthonormalized.
OrbitalSet transform_frame(const OrbitalSet& s, const GridSpec& target, double scale, const Vec3& shift);

struct DensityMoments {
  double mass = 0.0;
  Vec3 center{0.0, 0.0, 0.0};
  /// sqrt of the mean of |x - center|^2 under rho.
  double rms_radius = 0.0;
};
/// Moments in box coordinates; meaningful for densities localized away from
/// the boundary.
DensityMoments density_moments(const ScalarField& rho);

/// Snapshot layout: "FNLO" | u32 version | u32 N | N f64 occupations |
/// N field snapshots.
void write_orbitals(std::ostream& os, const OrbitalSet& s);
OrbitalSet read_orbitals(std::istream& is);
void save_orbitals(const std::filesystem::path& path, const OrbitalSet& s);
OrbitalSet load_orbitals(const std::filesystem::path& path);

}  // namespace fnls
