#pragma once

#include <optional>
#include <vector>

#include "fnls/asymptotics.hpp"
#include "fnls/solvers.hpp"

namespace fnls {

/// Free-space optimizer prepared for a sweep: a_N* estimated on the grid
/// (box_scale, points_per_dim) that every rescaled local box reproduces,
/// pinned at the dilation selected by the trap at its minimum point.
struct SweepOptimizer {
  double a_star = 0.0;
  AStarResult estimate;
  /// Limit profile, centered on its density maximum.
  OrbitalSet profile;
  double rho53 = 0.0;
  double trap_moment = 0.0;
};

SweepOptimizer prepare_sweep_optimizer(const SolverConfig& cfg, const TrapPotential& v, std::size_t N,
                                       const SweepOptions& opt = {});

struct ConcentrationCheck {
  double radial_offset = 0.0;  ///< |p_n| - A
  double vertical_offset = 0.0;
  double spacing = 0.0;
  bool pass = false;
};

struct SweepAnalysis {
  PowerLawFit energy_fit;
  PowerLawFit rho53_fit;
  /// Fits with a_N* shifted by -delta and +delta, delta = half the smallest gap.
  double sensitivity_delta = 0.0;
  PowerLawFit energy_fit_minus, energy_fit_plus, rho53_fit_minus, rho53_fit_plus;
  std::vector<double> profile_distance;
  bool profile_decreasing = false;
  MultiplierLimitReport multipliers;
  std::optional<ConcentrationCheck> concentration;
  std::optional<LimitEnergyReport> limit_energy;
  bool energy_monotone = false;
};

/// All sweep diagnostics. The ring-only checks are left empty for other traps.
/// `tail` is the number of smallest gaps used by the profile and limit checks.
SweepAnalysis analyze_sweep(const SweepResult& sweep, const SweepOptimizer& optimizer, const TrapPotential& v,
                            std::size_t tail = 4);

}  // namespace fnls
