#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fnls/asymptotics.hpp"
#include "fnls/errors.hpp"
#include "fnls/io.hpp"
#include "fnls/log.hpp"
#include "fnls/snapshot.hpp"
#include "fnls/spectral.hpp"
#include "fnls/study.hpp"

namespace fs = std::filesystem;
using namespace fnls;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitVerifyFailed = 3;

// Collects every output in memory and writes them only once the command has
// succeeded, each through a temporary file and rename.
class Outputs {
 public:
  explicit Outputs(fs::path dir) : dir_(std::move(dir)) {}
  void add(const std::string& name, std::string bytes) { files_.emplace_back(name, std::move(bytes)); }
  void add_orbitals(const std::string& name, const OrbitalSet& s) {
    std::ostringstream os(std::ios::binary);
    write_orbitals(os, s);
    add(name, os.str());
  }
  void add_field(const std::string& name, const ScalarField& f) {
    std::ostringstream os(std::ios::binary);
    write_field(os, f);
    add(name, os.str());
  }
  void commit() const {
    for (const auto& [name, bytes] : files_) {
      const fs::path p = dir_ / name;
      fs::create_directories(p.parent_path());
      write_file_atomic(p, bytes);
    }
    log::info("wrote {} files to {}", files_.size(), dir_.string());
  }

 private:
  fs::path dir_;
  std::vector<std::pair<std::string, std::string>> files_;
};

struct Common {
  std::string config;
  std::string out;
  std::int64_t seed = -1;
  int threads = 0;
};

RunConfig load(const Common& c, bool need_config) {
  RunConfig rc;
  if (!c.config.empty()) {
    rc = load_config(c.config);
  } else if (need_config) {
    throw ConfigError("--config is required for this command");
  }
  if (!c.out.empty()) rc.output_dir = c.out;
  if (c.seed >= 0) {
    rc.seed = static_cast<std::uint64_t>(c.seed);
    rc.solver.seed = rc.seed;
  }
  return rc;
}

std::string bool_str(bool b) { return b ? "1" : "0"; }

int cmd_solve(const RunConfig& rc) {
  if (!rc.a) throw ConfigError("problem.a: required by solve");
  const double width = std::min(1.0, rc.grid.half_length / 3.5);
  const OrbitalSet init = random_init(rc.grid, rc.N, rc.seed, width);
  const SolveReport rep = rc.method == SolverMethod::Scf ? scf(rc.solver, *rc.a, rc.potential, rc.N, init)
                                                         : minimize_direct(rc.solver, *rc.a, rc.potential, rc.N, init);
  Outputs out(rc.output_dir);
  out.add("energy.csv", energy_csv({rep.energy}));
  out.add("trace.csv", trace_csv(rep.trace, "energy"));
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < rep.multipliers.mu.size(); ++i) {
    rows.push_back({static_cast<double>(i + 1), rep.multipliers.mu[i], rep.residual_norms[i]});
  }
  out.add("multipliers.csv", table_csv({"index", "mu", "residual"}, rows));
  out.add("summary.csv", named_values_to_csv({{"converged", rep.converged ? 1.0 : 0.0},
                                              {"iterations", static_cast<double>(rep.iterations)},
                                              {"boundary_leak", rep.boundary_leak},
                                              {"total", rep.energy.total}}));
  out.add_orbitals("orbitals.fnlo", rep.orbitals);
  out.add_field("density.fnls", density(rep.orbitals));
  out.commit();
  std::printf("E = %.12g (kinetic %.10g, potential %.10g, interaction %.10g)\n", rep.energy.total,
              rep.energy.kinetic, rep.energy.potential, rep.energy.interaction);
  return 0;
}

int cmd_astar(const RunConfig& rc) {
  const AStarResult res = estimate_aN_star(rc.solver, rc.N, rc.astar_grid);
  const LStarResult ls = estimate_LN_star(rc.solver, rc.N, res.optimizer, res.a_star);
  NamedValues v{{"N", static_cast<double>(rc.N)},
                {"a_star", res.a_star},
                {"L_star_dual", ls.dual},
                {"L_star_direct", ls.direct},
                {"duality_product_direct", res.a_star * std::pow(ls.direct, 2.0 / 3.0)},
                {"duality_constant", kDualityConstant},
                {"rank_deficient", res.rank_deficient ? 1.0 : 0.0},
                {"iterations", static_cast<double>(res.iterations)}};
  for (std::size_t i = 0; i < res.mu_hat.size(); ++i) {
    v.emplace_back("mu_hat_" + std::to_string(i + 1), res.mu_hat[i]);
    v.emplace_back("residual_" + std::to_string(i + 1), res.residual_norms[i]);
  }
  Outputs out(rc.output_dir);
  out.add("astar.csv", named_values_to_csv(v));
  out.add("trace.csv", trace_csv(res.trace, "ratio"));
  out.add_orbitals("optimizer.fnlo", res.optimizer);
  out.commit();
  std::printf("a_%zu* = %.12g  L_dual = %.10g  L_direct = %.10g\n", rc.N, res.a_star, ls.dual, ls.direct);
  return 0;
}

void add_fit(NamedValues& v, const std::string& name, const PowerLawFit& f) {
  v.emplace_back(name + ".exponent", f.exponent);
  v.emplace_back(name + ".prefactor", f.prefactor);
  v.emplace_back(name + ".r2", f.r2);
}

int cmd_sweep(const RunConfig& rc) {
  if (rc.gaps.size() < 3) throw ConfigError("problem.gaps: sweep needs at least 3 gaps");
  const SweepOptimizer opt = prepare_sweep_optimizer(rc.solver, rc.potential, rc.N, rc.sweep);
  const double a_star = rc.a_star.value_or(opt.a_star);
  const SweepResult sr = sweep(rc.solver, rc.potential, rc.N, a_star, rc.gaps, opt.profile, rc.sweep);
  const SweepAnalysis an = analyze_sweep(sr, opt, rc.potential);

  NamedValues v{{"a_star", a_star}, {"a_star_estimate", opt.a_star}};
  add_fit(v, "energy_vs_gap", an.energy_fit);
  add_fit(v, "rho53_vs_gap", an.rho53_fit);
  v.emplace_back("sensitivity.delta", an.sensitivity_delta);
  add_fit(v, "energy_vs_gap.minus", an.energy_fit_minus);
  add_fit(v, "energy_vs_gap.plus", an.energy_fit_plus);
  add_fit(v, "rho53_vs_gap.minus", an.rho53_fit_minus);
  add_fit(v, "rho53_vs_gap.plus", an.rho53_fit_plus);
  for (std::size_t k = 0; k < an.profile_distance.size(); ++k) {
    v.emplace_back("profile_distance." + std::to_string(k), an.profile_distance[k]);
  }
  v.emplace_back("profile_decreasing", an.profile_decreasing ? 1.0 : 0.0);
  v.emplace_back("mu_hat_1", opt.estimate.mu_hat[0]);
  v.emplace_back("scaled_mu1.relative_distance", an.multipliers.relative_distance);
  v.emplace_back("scaled_mu1.negative_tail", an.multipliers.negative_tail ? 1.0 : 0.0);
  v.emplace_back("energy_monotone", an.energy_monotone ? 1.0 : 0.0);
  if (an.concentration) {
    v.emplace_back("concentration.radial_offset", an.concentration->radial_offset);
    v.emplace_back("concentration.vertical_offset", an.concentration->vertical_offset);
    v.emplace_back("concentration.spacing", an.concentration->spacing);
  }
  if (an.limit_energy) {
    v.emplace_back("C0", an.limit_energy->c0);
    v.emplace_back("C1", an.limit_energy->c1);
    v.emplace_back("limit_energy.rhs", an.limit_energy->rhs);
    v.emplace_back("limit_energy.limit", an.limit_energy->limit);
    v.emplace_back("limit_energy.relative_difference", an.limit_energy->relative_difference);
  }
  if (std::holds_alternative<RingTrap>(rc.potential.variant())) {
    std::vector<double> beta, integral;
    for (int k = 0; k < 9; ++k) {
      beta.push_back(std::pow(10.0, -2.0 + k / 8.0));
      integral.push_back(beta_level_integral(rc.potential, beta.back(), rc.grid));
    }
    try {
      add_fit(v, "beta_level", fit_power_law(beta, integral));
    } catch (const DomainError&) {
      log::warn("beta-level integral vanishes on this grid; fit skipped");
    }
  }

  Outputs out(rc.output_dir);
  out.add("records.csv", records_to_csv(sr.records));
  out.add("fits.csv", named_values_to_csv(v));
  out.add_orbitals("optimizer.fnlo", opt.profile);
  for (std::size_t k = 0; k < sr.records.size(); ++k) {
    char name[64];
    std::snprintf(name, sizeof name, "profiles/profile_%02zu.fnlo", k);
    out.add_orbitals(name, rescaled_sweep_profile(sr.profiles[k], sr.records[k], opt.profile.grid));
  }
  out.commit();
  std::printf("I_a ~ gap^%.4f (r2 %.6f), rho53 ~ gap^%.4f (r2 %.6f)\n", an.energy_fit.exponent, an.energy_fit.r2,
              an.rho53_fit.exponent, an.rho53_fit.r2);
  return 0;
}

int cmd_verify(const RunConfig& rc, const std::string& snapshot_flag) {
  const fs::path snap = snapshot_flag.empty() ? rc.snapshot : fs::path(snapshot_flag);
  if (snap.empty()) throw ConfigError("verify.snapshot: required by verify (or pass --snapshot)");
  const OrbitalSet s = load_orbitals(snap);
  const double a = rc.a.value_or(0.0);
  const VerifyReport rep = verify_groundstate(s, a, rc.potential, rc.verify_tol, rc.seed);
  NamedValues v{{"pass", rep.pass ? 1.0 : 0.0},
                {"subspace_angle", rep.subspace_angle},
                {"first_simple", rep.first_simple ? 1.0 : 0.0},
                {"degenerate_top", rep.degenerate_top ? 1.0 : 0.0}};
  for (std::size_t i = 0; i < rep.mu.size(); ++i) v.emplace_back("mu_" + std::to_string(i + 1), rep.mu[i]);
  for (std::size_t i = 0; i < rep.eigenvalues.size(); ++i) {
    v.emplace_back("lambda_" + std::to_string(i + 1), rep.eigenvalues[i]);
  }
  Outputs out(rc.output_dir);
  out.add("verify.csv", named_values_to_csv(v));
  out.commit();
  std::printf("%s: %s (subspace angle %.3e)\n", rep.pass ? "pass" : "fail", rep.diagnostic.c_str(),
              rep.subspace_angle);
  return rep.pass ? 0 : kExitVerifyFailed;
}

int cmd_report(const RunConfig& rc) {
  const fs::path dir = rc.output_dir;
  const std::vector<SweepRecord> rec = read_records(dir / "records.csv");
  if (rec.empty()) throw FormatError("records.csv holds no records");
  std::map<std::string, double> fits;
  if (fs::exists(dir / "fits.csv")) {
    for (const auto& [k, x] : named_values_from_csv(read_file(dir / "fits.csv"))) fits[k] = x;
  }
  double radius = 0.0;
  if (const auto* ring = std::get_if<RingTrap>(&rc.potential.variant())) radius = ring->radius;

  std::vector<std::vector<double>> energy, rho53, mu, conc, ratio, dist;
  for (std::size_t k = 0; k < rec.size(); ++k) {
    const SweepRecord& r = rec[k];
    const double fe = fits.count("energy_vs_gap.prefactor")
                          ? fits["energy_vs_gap.prefactor"] * std::pow(r.gap, fits["energy_vs_gap.exponent"])
                          : NAN;
    const double fr = fits.count("rho53_vs_gap.prefactor")
                          ? fits["rho53_vs_gap.prefactor"] * std::pow(r.gap, fits["rho53_vs_gap.exponent"])
                          : NAN;
    energy.push_back({r.gap, r.energy, fe});
    rho53.push_back({r.gap, r.rho53, fr});
    if (!r.mu.empty()) mu.push_back({r.eps, r.eps * r.eps * r.mu[0]});
    conc.push_back({r.eps, std::hypot(r.x_max[0], r.x_max[1]) - radius, r.x_max[2]});
    ratio.push_back({r.eps, r.energy / std::sqrt(r.gap)});
    const std::string key = "profile_distance." + std::to_string(k);
    if (fits.count(key)) dist.push_back({r.gap, fits[key]});
  }
  Outputs out(dir / "report");
  out.add("energy_vs_gap.csv", table_csv({"gap", "energy", "fit"}, energy));
  out.add("rho53_vs_gap.csv", table_csv({"gap", "rho53", "fit"}, rho53));
  out.add("scaled_multiplier.csv", table_csv({"eps", "eps2_mu1"}, mu));
  out.add("concentration.csv", table_csv({"eps", "radial_offset", "z"}, conc));
  out.add("energy_ratio.csv", table_csv({"eps", "energy_over_sqrt_gap"}, ratio));
  if (!dist.empty()) out.add("profile_distance.csv", table_csv({"gap", "distance"}, dist));
  out.commit();
  std::printf("report written to %s\n", (dir / "report").string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ground states of N-orbital mass-critical fermionic NLS systems in a periodic box"};
  app.require_subcommand(1);
  Common c;
  app.add_option("--config", c.config, "key=value configuration file");
  app.add_option("--out", c.out, "output directory (overrides output.dir)");
  app.add_option("--seed", c.seed, "random seed (overrides seed)")->check(CLI::NonNegativeNumber);
  app.add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber);

  auto* solve = app.add_subcommand("solve", "minimize the energy for one coupling");
  auto* astar = app.add_subcommand("aNstar", "estimate a_N* and L_N* in free space");
  auto* sweep_cmd = app.add_subcommand("sweep", "solve along a list of gaps a_N* - a and fit scaling laws");
  auto* verify = app.add_subcommand("verify", "check that a saved frame is a ground state");
  auto* report = app.add_subcommand("report", "turn sweep outputs into plot-ready tables");
  std::string snapshot;
  verify->add_option("--snapshot", snapshot, "orbital snapshot (overrides verify.snapshot)");
  for (auto* sub : {solve, astar, sweep_cmd, verify, report}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    log::level_from_env();
    if (c.threads > 0) set_thread_count(c.threads);
    if (*solve) return cmd_solve(load(c, true));
    if (*astar) return cmd_astar(load(c, true));
    if (*sweep_cmd) return cmd_sweep(load(c, true));
    if (*verify) return cmd_verify(load(c, true), snapshot);
    if (*report) return cmd_report(load(c, false));
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitRuntime;
}
