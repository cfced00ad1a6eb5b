#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fnls/energy.hpp"
#include "fnls/errors.hpp"
#include "fnls/orbitals.hpp"
#include "fnls/potentials.hpp"

namespace fnls {

struct SolverConfig {
  int max_outer = 5000;
  /// Relative energy change below which a direct solve may stop; also the
  /// SCF density tolerance (L1 change per orbital).
  double energy_tol = 1e-9;
  double residual_tol = 1e-6;
  /// First trial step of the line search.
  double step0 = 0.5;
  double backtrack = 0.5;
  /// SCF density mixing weight.
  double mixing = 0.3;
  std::uint64_t seed = 1;
  /// rms radius the a_N* iterate is dilated to.
  double rescale_radius = 1.0;
  bool dealias = false;

  /// Throws ConfigError on a nonpositive tolerance or out-of-range factor.
  void validate() const;
};

struct SolveReport {
  bool converged = false;
  OrbitalSet orbitals;
  EnergyBreakdown energy;
  MultiplierSet multipliers;
  std::vector<double> residual_norms;
  /// Objective value after every accepted step (energy, or the ratio for a_N*).
  std::vector<double> trace;
  double boundary_leak = 0.0;
  int iterations = 0;
  std::string message;
};

class SolverConvergenceError : public ConvergenceError {
 public:
  SolverConvergenceError(const std::string& what, SolveReport best)
      : ConvergenceError(what), best_(std::move(best)) {}
  const SolveReport& best() const noexcept { return best_; }

 private:
  SolveReport best_;
};

/// Preconditioned Riemannian conjugate gradient on orthonormal frames with
/// Armijo line search and Loewdin retraction. The energy trace is
/// non-increasing. Stops when the relative energy change is below
/// energy_tol and every residual norm r_i is below residual_tol * max(1, |Lambda_ii|).
SolveReport minimize_direct(const SolverConfig& cfg, double a, const ScalarField& v, std::size_t N,
                            const OrbitalSet& init);
SolveReport minimize_direct(const SolverConfig& cfg, double a, const TrapPotential& v, std::size_t N,
                            const OrbitalSet& init);

/// Self-consistent field iteration with linear density mixing. The returned
/// frame holds the N lowest eigenfields of H_V at the final density and the
/// multipliers are their eigenvalues.
SolveReport scf(const SolverConfig& cfg, double a, const ScalarField& v, std::size_t N, const OrbitalSet& init);
SolveReport scf(const SolverConfig& cfg, double a, const TrapPotential& v, std::size_t N, const OrbitalSet& init);

struct AStarResult {
  double a_star = 0.0;
  OrbitalSet optimizer;
  /// Eigenvalues of -Laplacian - (5/3) a_star rho^{2/3} on the optimizer span.
  std::vector<double> mu_hat;
  std::vector<double> residual_norms;
  std::vector<double> trace;
  bool converged = false;
  /// Some mu_hat is not negative or some orbital is not bound to the bulk.
  bool rank_deficient = false;
  int iterations = 0;
};

/// Minimizes lt_ratio over orthonormal N-frames with V = 0, recentering and
/// dilating the frame to rms radius cfg.rescale_radius whenever it drifts.
AStarResult estimate_aN_star(const SolverConfig& cfg, std::size_t N, const GridSpec& grid,
                             const std::optional<OrbitalSet>& init = std::nullopt);

/// Same iteration with an explicit pin radius and pin tolerance.
AStarResult minimize_ratio(const SolverConfig& cfg, const OrbitalSet& init, double pin_radius,
                           double pin_tolerance = 1e-3);

struct LStarResult {
  double dual = 0.0;
  double direct = 0.0;
};

/// (3/5) (2/5)^{2/3}
inline constexpr double kDualityConstant = 0.3257301139913888;

/// dual = (kDualityConstant / a_star)^{3/2}; direct = neg_eigenvalue_sum(A, N)
/// / int A^{5/2} with A = (5/3) a_star rho^{2/3} of the optimizer.
LStarResult estimate_LN_star(const SolverConfig& cfg, std::size_t N, const OrbitalSet& optimizer, double a_star);

/// direct quotient for a given well A.
double lt_dual_quotient(const ScalarField& A, std::size_t N, double tol, std::uint64_t seed = 1);

struct VerifyReport {
  bool pass = false;
  /// Largest principal angle between the frame and the N lowest eigenfields.
  double subspace_angle = 0.0;
  std::vector<double> eigenvalues;  ///< N+1 lowest of H_V
  std::vector<double> mu;           ///< multipliers of the frame
  bool first_simple = true;
  bool degenerate_top = false;
  std::string diagnostic;
};

VerifyReport verify_groundstate(const OrbitalSet& s, double a, const ScalarField& v, double tol,
                                std::uint64_t seed = 1);
VerifyReport verify_groundstate(const OrbitalSet& s, double a, const TrapPotential& v, double tol,
                                std::uint64_t seed = 1);

/// Energy of the Loewdin-orthonormalized trial frame
/// tau^{3/2} Q_i(tau (x - y0)) chi(x - y0) on grid, where chi is a smooth
/// cutoff to the largest ball around y0 inside the box. Grid nodes y stand
/// for the points x = origin + y. Throws ConfigError when the dilated support
/// of Q does not fit that ball.
EnergyBreakdown trial_energy(double tau, const Vec3& y0, double a, const TrapPotential& v, const OrbitalSet& optimizer,
                             const GridSpec& grid, const Vec3& origin = {0.0, 0.0, 0.0});

/// The trial frame itself, in grid coordinates.
OrbitalSet trial_state(double tau, const Vec3& y0, const OrbitalSet& optimizer, const GridSpec& grid,
                       const Vec3& origin = {0.0, 0.0, 0.0});

}  // namespace fnls
