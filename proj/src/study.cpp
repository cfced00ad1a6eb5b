#include "fnls/study.hpp"

#include <algorithm>
#include <cmath>

#include "fnls/errors.hpp"
#include "fnls/log.hpp"

namespace fnls {

SweepOptimizer prepare_sweep_optimizer(const SolverConfig& cfg, const TrapPotential& v, std::size_t N,
                                       const SweepOptions& opt) {
  if (v.is_zero()) throw ConfigError("sweep needs a trapping potential");
  const GridSpec grid = make_grid(opt.box_scale, opt.points_per_dim);
  const Vec3 x0 = v.minimum_point();
  const AStarResult first = estimate_aN_star(cfg, N, grid);
  const LimitProfile scaled = limit_scaled_optimizer(first.optimizer, v, x0);
  const double radius = density_moments(density(scaled.frame)).rms_radius;

  SweepOptimizer out;
  out.estimate = minimize_ratio(cfg, scaled.frame, radius);
  if (!out.estimate.converged) throw ConvergenceError("a_N* estimate at the limit scale did not converge");
  out.a_star = out.estimate.a_star;
  out.profile = center_on_maximum(out.estimate.optimizer);
  loewdin_in_place(out.profile.grid, out.profile.orbitals);
  const LimitProfile check = limit_scaled_optimizer(out.profile, v, x0);
  out.rho53 = check.rho53;
  out.trap_moment = check.trap_moment;
  log::info("sweep optimizer a*={:.12g} rms={:.6g} residual scale t={:.8f}", out.a_star, radius, check.scale);
  return out;
}

SweepAnalysis analyze_sweep(const SweepResult& sweep, const SweepOptimizer& optimizer, const TrapPotential& v,
                            std::size_t tail) {
  const auto& rec = sweep.records;
  if (rec.size() < 3) throw DomainError("sweep analysis needs at least 3 records");
  SweepAnalysis an;

  std::vector<double> gap, energy, rho53;
  for (const auto& r : rec) {
    gap.push_back(r.gap);
    energy.push_back(r.energy);
    rho53.push_back(r.rho53);
  }
  an.energy_fit = fit_power_law(gap, energy);
  an.rho53_fit = fit_power_law(gap, rho53);

  an.sensitivity_delta = 0.5 * *std::min_element(gap.begin(), gap.end());
  auto shifted = [&](double d) {
    std::vector<double> g;
    for (double x : gap) g.push_back(x + d);
    return g;
  };
  an.energy_fit_minus = fit_power_law(shifted(-an.sensitivity_delta), energy);
  an.energy_fit_plus = fit_power_law(shifted(an.sensitivity_delta), energy);
  an.rho53_fit_minus = fit_power_law(shifted(-an.sensitivity_delta), rho53);
  an.rho53_fit_plus = fit_power_law(shifted(an.sensitivity_delta), rho53);

  an.energy_monotone = true;
  for (std::size_t k = 1; k < rec.size(); ++k) {
    if (rec[k].a > rec[k - 1].a && rec[k].energy > rec[k - 1].energy) an.energy_monotone = false;
  }

  for (std::size_t k = 0; k < rec.size(); ++k) {
    const OrbitalSet w = rescaled_sweep_profile(sweep.profiles[k], rec[k], optimizer.profile.grid);
    an.profile_distance.push_back(aligned_distance(w, optimizer.profile).density);
  }
  const std::size_t m = std::min(tail, an.profile_distance.size());
  an.profile_decreasing = true;
  for (std::size_t k = an.profile_distance.size() - m + 1; k < an.profile_distance.size(); ++k) {
    if (!(an.profile_distance[k] < an.profile_distance[k - 1])) an.profile_decreasing = false;
  }

  an.multipliers = multiplier_limit_check(rec, optimizer.estimate.mu_hat);

  if (const auto* ring = std::get_if<RingTrap>(&v.variant())) {
    const SweepRecord& last = rec.back();
    ConcentrationCheck cc;
    cc.radial_offset = std::hypot(last.x_max[0], last.x_max[1]) - ring->radius;
    cc.vertical_offset = last.x_max[2];
    cc.spacing = last.spacing;
    cc.pass = std::abs(cc.radial_offset) < 2.0 * cc.spacing && std::abs(cc.vertical_offset) < 2.0 * cc.spacing;
    an.concentration = cc;
    an.limit_energy = limit_energy_check(rec, optimizer.profile, v, 0.10, tail);
  }
  return an;
}

}  // namespace fnls
