#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fnls/energy.hpp"
#include "fnls/orbitals.hpp"
#include "fnls/potentials.hpp"
#include "fnls/solvers.hpp"

namespace fnls {

/// Diagnostics of one converged solve at coupling a = a_star - gap.
struct SweepRecord {
  double a = 0.0;
  double gap = 0.0;
  /// gap^{1/4}
  double eps = 0.0;
  double energy = 0.0;
  /// int rho^{5/3}
  double rho53 = 0.0;
  /// Refined global maximum of the density, in absolute coordinates.
  Vec3 x_max{0.0, 0.0, 0.0};
  std::vector<double> mu;
  double boundary_leak = 0.0;
  /// Grid spacing of the local box.
  double spacing = 0.0;
  bool converged = false;
  int iterations = 0;

  bool operator==(const SweepRecord&) const = default;
};

/// Converged frame of one sweep point on its local box. Local coordinates y
/// relate to absolute ones by x = origin + y.
struct SweepProfile {
  OrbitalSet frame;
  Vec3 origin{0.0, 0.0, 0.0};
};

struct SweepOptions {
  /// Nodes per axis of every local box.
  std::size_t points_per_dim = 128;
  /// Local box half-length in units of eps.
  double box_scale = 7.0;
};

struct SweepResult {
  std::vector<SweepRecord> records;
  std::vector<SweepProfile> profiles;
};

/// Solves I_a(N) for a = a_star - gap along a decreasing list of gaps. Each
/// point is solved on a box of half-length box_scale * eps centered on the
/// previous concentration point (initially V.minimum_point()), warm-started
/// from the previous frame dilated by the ratio of eps values. The first
/// point starts from the optimizer dilated by 1/eps; optimizer must be
/// centered at the origin of its grid. A failure at the first gap throws;
/// later failures are flagged in the record.
SweepResult sweep(const SolverConfig& cfg, const TrapPotential& v, std::size_t N, double a_star,
                  const std::vector<double>& gaps, const OrbitalSet& optimizer, const SweepOptions& opt = {});

struct PowerLawFit {
  double exponent = 0.0;
  double prefactor = 0.0;
  double r2 = 0.0;
};

/// Least squares fit of log y against log x. Needs at least 3 positive pairs.
PowerLawFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

LinearFit fit_linear(const std::vector<double>& x, const std::vector<double>& y);

struct ConcentrationPoint {
  Vec3 point{0.0, 0.0, 0.0};
  /// The maximum is attained at more than one node; point is the
  /// lexicographically smallest of them and no refinement is made.
  bool tie = false;
};

/// Grid argmax refined by a quadratic least-squares fit (of log rho when
/// positive) over the 3^3 neighborhood. Throws DomainError when the argmax
/// lies on the outermost layer of nodes.
ConcentrationPoint concentration_point(const ScalarField& rho);

/// w_i(y) = eps^{3/2} u_i(eps y + x_c) on the reference grid. Throws
/// ConfigError when the support of s does not fit the mapped box.
OrbitalSet rescale_profile(const OrbitalSet& s, double eps, const Vec3& x_c, const GridSpec& reference);

struct AlignedDistance {
  /// L2 distance of the two densities.
  double density = 0.0;
  /// L2 distance of the frames after the best orthogonal rotation of s.
  double frame = 0.0;
  Eigen::MatrixXd rotation;
};

/// s and reference share a grid and are both centered on their concentration
/// points.
AlignedDistance aligned_distance(const OrbitalSet& s, const OrbitalSet& reference);

/// Sweep frame rescaled around its own concentration point onto the
/// reference grid.
OrbitalSet rescaled_sweep_profile(const SweepProfile& p, const SweepRecord& r, const GridSpec& reference);

/// Translates s so that its density maximum sits at the origin.
OrbitalSet center_on_maximum(const OrbitalSet& s);

/// Second-order part q(y) = y^T H y / 2 of V at x0, from central differences.
Eigen::Matrix3d quadratic_form_at(const TrapPotential& v, const Vec3& x0);

/// int q(y) rho(y) dy for the quadratic part of V at x0.
double quadratic_moment(const TrapPotential& v, const Vec3& x0, const OrbitalSet& s);

struct LimitProfile {
  /// Dilation factor t with t^4 = P / S.
  double scale = 1.0;
  OrbitalSet frame;
  /// int rho^{5/3} of frame
  double rho53 = 0.0;
  /// quadratic trap moment of frame
  double trap_moment = 0.0;
};

/// Dilates the a_N* optimizer Q to Q_t(y) = t^{3/2} Q(t y), the dilation that
/// minimizes int rho^{5/3} + int q rho with q the quadratic part of V at x0.
/// Q must be centered at the origin.
LimitProfile limit_scaled_optimizer(const OrbitalSet& optimizer, const TrapPotential& v, const Vec3& x0);

struct MultiplierLimitReport {
  std::vector<double> gap;
  /// eps^2 mu_1 per record
  std::vector<double> scaled_mu1;
  bool negative_tail = false;
  double relative_distance = 0.0;
  bool pass = false;
};

/// eps^2 mu_1 along the records; checks negativity at the three smallest
/// gaps and the relative distance to mu_hat_1 at the smallest gap against
/// tolerance. Records with a <= 0 are skipped.
MultiplierLimitReport multiplier_limit_check(const std::vector<SweepRecord>& records,
                                             const std::vector<double>& mu_hat, double tolerance = 0.05);

struct LimitEnergyReport {
  double c0 = 0.0;
  double c1 = 0.0;
  /// Unit radial direction p0 / |p0| from the smallest-gap record.
  Vec3 direction{1.0, 0.0, 0.0};
  double rhs = 0.0;
  /// Extrapolated lim I_a / gap^{1/2}.
  double limit = 0.0;
  double relative_difference = 0.0;
  bool pass = false;
};

/// Evaluates int rho^{5/3} + int [omega1 (y.p0/|p0| + C0)^2 + omega2 (y3 + C1)^2] rho
/// for the limit profile w (centered at its maximum) given explicit C0 and C1.
double limit_energy_rhs(const OrbitalSet& w, const RingTrap& ring, const Vec3& direction, double c0, double c1);

/// Fits C0, C1 as slopes of (|p_n| - A) and z_n against eps, extrapolates
/// I_a / gap^{1/2} linearly in eps over the `tail` smallest gaps and compares
/// with the right-hand side. Needs a ring trap and at least 3 records.
LimitEnergyReport limit_energy_check(const std::vector<SweepRecord>& records, const OrbitalSet& w,
                                     const TrapPotential& v, double tolerance = 0.10, std::size_t tail = 4);

struct DecayReport {
  /// Fitted rate k in rho ~ |x|^{-2} exp(-k |x|).
  double rate = 0.0;
  /// 2 sqrt(|mu_N|), the asymptotic rate of the density.
  double expected_rate = 0.0;
  /// sqrt(2 |mu_N|)
  double bound_rate = 0.0;
  double r2_linear = 0.0;
  double r2_quadratic = 0.0;
  /// Linear fit explains the shell nearly as well as a quadratic one.
  bool exponential = false;
  bool reliable = false;
  std::size_t samples = 0;
  std::string diagnostic;
};

/// Fits log(|x|^2 rho) against |x| over nodes where rho / max lies in
/// [1e-10, 1e-3] and |x| < 0.9 L, with |x| measured from the density
/// maximum. Reliable only if the boundary leak of rho is below 1e-8.
DecayReport decay_check(const OrbitalSet& s, const std::vector<double>& mu);

}  // namespace fnls
