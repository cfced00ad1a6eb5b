#include "fnls/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fnls/eigensolve.hpp"
#include "fnls/log.hpp"
#include "fnls/spectral.hpp"

namespace fnls {
namespace {

using Mat = Eigen::MatrixXd;

enum class Objective { Energy, Ratio };

struct Problem {
  GridSpec grid;
  Objective objective = Objective::Energy;
  double a = 0.0;
  const std::vector<double>* v = nullptr;
  InteractionOptions iopt;
};

struct Point {
  Mat U, LU, R;
  Mat lambda;
  std::vector<double> rho, rho23, res;
  double T = 0.0, P = 0.0, S = 0.0, f = 0.0, gscale = 2.0;
  double max_res() const { return *std::max_element(res.begin(), res.end()); }
  /// Every residual below tol * max(1, |Lambda_ii|).
  bool residual_ok(double tol) const {
    for (std::size_t i = 0; i < res.size(); ++i) {
      const auto d = static_cast<Eigen::Index>(i);
      if (!(res[i] < tol * std::max(1.0, std::abs(lambda(d, d))))) return false;
    }
    return true;
  }
};

Mat neg_lap_block(const GridSpec& g, const Mat& X) {
  Mat out(X.rows(), X.cols());
  for (Eigen::Index c = 0; c < X.cols(); ++c) {
    neg_laplacian(g, {X.col(c).data(), g.size()}, {out.col(c).data(), g.size()});
  }
  return out;
}

void unit_density(const Mat& U, std::vector<double>& rho) {
  rho.assign(static_cast<std::size_t>(U.rows()), 0.0);
  for (Eigen::Index c = 0; c < U.cols(); ++c) {
    const double* u = U.col(c).data();
    for (std::size_t p = 0; p < rho.size(); ++p) rho[p] += u[p] * u[p];
  }
}

double objective_value(const Problem& pb, double T, double P, double S) {
  if (pb.objective == Objective::Energy) return T + P - pb.a * S;
  return T / S;
}

Point evaluate(const Problem& pb, Mat U) {
  const GridSpec& g = pb.grid;
  const double dv = g.cell_volume();
  Point pt;
  pt.U = std::move(U);
  pt.LU = neg_lap_block(g, pt.U);
  unit_density(pt.U, pt.rho);
  pt.rho23.resize(pt.rho.size());
  pt.S = interaction_terms(g, pt.rho, pt.rho23, pb.iopt);
  pt.P = pb.v ? inner(g, *pb.v, pt.rho) : 0.0;
  pt.T = dv * pt.U.cwiseProduct(pt.LU).sum();
  pt.f = objective_value(pb, pt.T, pt.P, pt.S);

  const double c = pb.objective == Objective::Energy ? pb.a : pt.T / pt.S;
  pt.gscale = pb.objective == Objective::Energy ? 2.0 : 2.0 / pt.S;
  Mat HU = pt.LU;
  const double k = 5.0 * c / 3.0;
  for (Eigen::Index col = 0; col < HU.cols(); ++col) {
    double* h = HU.col(col).data();
    const double* u = pt.U.col(col).data();
    for (std::size_t p = 0; p < g.size(); ++p) {
      const double w = (pb.v ? (*pb.v)[p] : 0.0) - k * pt.rho23[p];
      h[p] += w * u[p];
    }
  }
  Mat lam = dv * (pt.U.transpose() * HU);
  pt.lambda = 0.5 * (lam + lam.transpose());
  pt.R = HU - pt.U * pt.lambda;
  pt.res.resize(static_cast<std::size_t>(pt.U.cols()));
  for (Eigen::Index col = 0; col < pt.U.cols(); ++col) {
    pt.res[static_cast<std::size_t>(col)] = std::sqrt(dv * pt.R.col(col).squaredNorm());
  }
  return pt;
}

// Kinetic blocks of the line U + s D, which make the trial kinetic energy a
// small-matrix computation.
struct LineData {
  Mat D, LD;
  Mat Kuu, Kud, Kdd, Guu, Gud, Gdd;
  /// <D, (H - Lambda) D>, the curvature of the linearized objective.
  double curvature = 0.0;
};

LineData make_line(const Problem& pb, const Point& pt, Mat D) {
  const double dv = pb.grid.cell_volume();
  LineData ln;
  ln.D = std::move(D);
  ln.LD = neg_lap_block(pb.grid, ln.D);
  ln.Kuu = dv * (pt.U.transpose() * pt.LU);
  ln.Kud = dv * (pt.U.transpose() * ln.LD);
  ln.Kdd = dv * (ln.D.transpose() * ln.LD);
  ln.Guu = dv * (pt.U.transpose() * pt.U);
  ln.Gud = dv * (pt.U.transpose() * ln.D);
  ln.Gdd = dv * (ln.D.transpose() * ln.D);
  const double c = pb.objective == Objective::Energy ? pb.a : pt.T / pt.S;
  double wdd = 0.0;
  for (Eigen::Index col = 0; col < ln.D.cols(); ++col) {
    const double* d = ln.D.col(col).data();
    for (std::size_t p = 0; p < pb.grid.size(); ++p) {
      const double w = (pb.v ? (*pb.v)[p] : 0.0) - (5.0 * c / 3.0) * pt.rho23[p];
      wdd += w * d[p] * d[p];
    }
  }
  ln.curvature = ln.Kdd.trace() + dv * wdd - (pt.lambda * ln.Gdd).trace();
  if (pb.objective == Objective::Ratio) ln.curvature /= pt.S;
  return ln;
}

double trial_value(const Problem& pb, const Point& pt, const LineData& ln, double s, Mat* out) {
  Mat G = ln.Guu + s * (ln.Gud + ln.Gud.transpose()) + s * s * ln.Gdd;
  G = 0.5 * (G + G.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(G);
  if (!(es.eigenvalues().minCoeff() > 1e-10)) return std::numeric_limits<double>::infinity();
  const Mat C =
      es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
  Mat K = ln.Kuu + s * (ln.Kud + ln.Kud.transpose()) + s * s * ln.Kdd;
  K = 0.5 * (K + K.transpose());
  const double T = (C.transpose() * K * C).trace();
  Mat Us = (pt.U + s * ln.D) * C;
  std::vector<double> rho, rho23;
  unit_density(Us, rho);
  rho23.resize(rho.size());
  const double S = interaction_terms(pb.grid, rho, rho23, pb.iopt);
  const double P = pb.v ? inner(pb.grid, *pb.v, rho) : 0.0;
  if (out) *out = std::move(Us);
  return objective_value(pb, T, P, S);
}

struct LineResult {
  bool ok = false;
  double step = 0.0;
  double f = 0.0;
  Mat U;
};

LineResult line_search(const Problem& pb, const Point& pt, const LineData& ln, double g0, double s_try,
                       double backtrack) {
  constexpr double c1 = 1e-4;
  // Reference value from the same formula as the trials.
  const double f0 = trial_value(pb, pt, ln, 0.0, nullptr);
  // Roundoff level of the objective; near convergence the predicted decrease
  // drops below it and steps within this band are accepted.
  const double scale = pb.objective == Objective::Energy ? pt.T + pt.P + pb.a * pt.S : std::abs(pt.f);
  const double noise = 64.0 * std::numeric_limits<double>::epsilon() * scale;
  auto armijo = [&](double s, double f) { return std::isfinite(f) && f <= f0 + c1 * s * g0 && f < f0; };
  LineResult best;
  best.f = f0;
  auto consider = [&](double s) {
    Mat U;
    const double f = trial_value(pb, pt, ln, s, &U);
    if (armijo(s, f) && (!best.ok || f < best.f)) {
      best.ok = true;
      best.step = s;
      best.f = f;
      best.U = std::move(U);
    }
    return f;
  };
  const double f1 = consider(s_try);
  double s_min = s_try;
  if (std::isfinite(f1)) {
    const double c2 = (f1 - f0 - g0 * s_try) / (s_try * s_try);
    if (c2 > 0.0) {
      const double s2 = std::clamp(-g0 / (2.0 * c2), 0.05 * s_try, 20.0 * s_try);
      if (std::abs(s2 - s_try) > 1e-3 * s_try) consider(s2);
      s_min = std::min(s_min, s2);
    }
  }
  if (best.ok) return best;
  if (-g0 * s_try < 100.0 * noise || -g0 * s_min < 100.0 * noise) {
    const double s_model = ln.curvature > 0.0 ? -g0 / (2.0 * ln.curvature) : s_try;
    Mat U;
    const double f = trial_value(pb, pt, ln, s_model, &U);
    if (std::isfinite(f) && f <= f0 + noise) {
      best.ok = true;
      best.step = s_model;
      best.f = f;
      best.U = std::move(U);
      return best;
    }
  }
  double s = s_min * backtrack;
  for (int k = 0; k < 60 && s > 1e-14 * s_try; ++k, s *= backtrack) {
    consider(s);
    if (best.ok) return best;
  }
  return best;
}

Mat project_tangent(const GridSpec& g, const Mat& U, Mat X) {
  const double dv = g.cell_volume();
  for (int pass = 0; pass < 2; ++pass) X -= U * (dv * (U.transpose() * X));
  return X;
}

// S (-Laplacian + shift)^{-1} S with S = (1 + V / shift)^{-1/2}, which
// approximates (-Laplacian + V + shift)^{-1} at both ends of the spectrum.
Mat precondition_block(const GridSpec& g, const Mat& X, double shift, const std::vector<double>* v) {
  Mat out(X.rows(), X.cols());
  std::vector<double> scale;
  if (v) {
    scale.resize(g.size());
    for (std::size_t p = 0; p < g.size(); ++p) scale[p] = 1.0 / std::sqrt(1.0 + std::max((*v)[p], 0.0) / shift);
  }
  std::vector<double> tmp(g.size());
  for (Eigen::Index c = 0; c < X.cols(); ++c) {
    const double* x = X.col(c).data();
    double* o = out.col(c).data();
    if (scale.empty()) {
      apply_inverse_shifted(g, {x, g.size()}, {o, g.size()}, shift);
      continue;
    }
    for (std::size_t p = 0; p < g.size(); ++p) tmp[p] = scale[p] * x[p];
    apply_inverse_shifted(g, tmp, {o, g.size()}, shift);
    for (std::size_t p = 0; p < g.size(); ++p) o[p] *= scale[p];
  }
  return out;
}

struct PinSpec {
  double radius = 0.0;
  double tolerance = 1e-3;
};

struct EngineResult {
  Point pt;
  std::vector<double> trace;
  int iterations = 0;
  bool converged = false;
  std::string message;
};

// Returns the frame re-centered and dilated to the pin radius, or nothing when
// it is already within tolerance.
std::optional<Mat> pin_frame(const GridSpec& g, const Point& pt, const PinSpec& pin) {
  const ScalarField rho(g, pt.rho);
  const DensityMoments m = density_moments(rho);
  const double dev = std::abs(m.rms_radius / pin.radius - 1.0);
  const double off = std::sqrt(m.center[0] * m.center[0] + m.center[1] * m.center[1] + m.center[2] * m.center[2]);
  if (dev <= pin.tolerance && off <= pin.tolerance * pin.radius) return std::nullopt;
  OrbitalSet s(g, pt.U);
  OrbitalSet t = transform_frame(s, g, m.rms_radius / pin.radius, m.center);
  loewdin_in_place(g, t.orbitals);
  return t.orbitals;
}

EngineResult run_engine(const Problem& pb, const SolverConfig& cfg, Mat U0, const std::optional<PinSpec>& pin) {
  const GridSpec& g = pb.grid;
  const double dv = g.cell_volume();
  loewdin_in_place(g, U0);
  EngineResult er;
  er.pt = evaluate(pb, std::move(U0));
  if (pin) {
    if (auto p = pin_frame(g, er.pt, *pin)) er.pt = evaluate(pb, std::move(*p));
  }
  er.trace.push_back(er.pt.f);

  Mat D_prev, PG_prev;
  double gpg_prev = 0.0;
  bool have_prev = false;
  double step = cfg.step0;
  double last_change = std::numeric_limits<double>::infinity();

  for (int it = 0; it < cfg.max_outer; ++it) {
    er.iterations = it;
    const double scale = std::max(std::abs(er.pt.f), 1e-300);
    if (it > 0 && last_change < cfg.energy_tol * scale && er.pt.residual_ok(cfg.residual_tol)) {
      er.converged = true;
      return er;
    }
    const Mat G = er.pt.gscale * er.pt.R;
    double shift = 1.0;
    for (Eigen::Index i = 0; i < er.pt.lambda.rows(); ++i) shift = std::max(shift, std::abs(er.pt.lambda(i, i)));
    const Mat PG = project_tangent(g, er.pt.U, precondition_block(g, G, shift, pb.v));
    const double gpg = dv * G.cwiseProduct(PG).sum();

    LineResult lr;
    bool used_cg = false;
    for (int attempt = 0; attempt < 2 && !lr.ok; ++attempt) {
      Mat D = -PG;
      used_cg = false;
      if (attempt == 0 && have_prev && gpg_prev > 0.0) {
        const double beta = std::max(0.0, dv * G.cwiseProduct(PG - PG_prev).sum() / gpg_prev);
        if (beta > 0.0) {
          D += beta * project_tangent(g, er.pt.U, D_prev);
          used_cg = true;
        }
      }
      double g0 = dv * G.cwiseProduct(D).sum();
      if (!(g0 < 0.0)) {
        D = -PG;
        used_cg = false;
        g0 = -gpg;
      }
      if (!(g0 < 0.0)) break;
      const LineData ln = make_line(pb, er.pt, D);
      lr = line_search(pb, er.pt, ln, g0, step, cfg.backtrack);
      if (lr.ok) {
        D_prev = std::move(D);
      } else if (!used_cg) {
        break;
      }
    }
    if (!lr.ok) {
      er.converged = er.pt.residual_ok(cfg.residual_tol);
      er.message = "line search made no progress";
      return er;
    }
    PG_prev = PG;
    gpg_prev = gpg;
    have_prev = true;
    step = lr.step * (used_cg ? 1.0 : 1.5);
    last_change = er.pt.f - lr.f;
    er.pt = evaluate(pb, std::move(lr.U));
    if (pin) {
      if (auto p = pin_frame(g, er.pt, *pin)) {
        er.pt = evaluate(pb, std::move(*p));
        have_prev = false;
      }
    }
    er.trace.push_back(er.pt.f);
    if (it % 50 == 0) {
      log::debug("iter {} f={:.15g} res={:.3e} step={:.3e}", it, er.pt.f, er.pt.max_res(), step);
    }
  }
  er.iterations = cfg.max_outer;
  er.message = "iteration limit reached";
  return er;
}

void fix_rotation_signs(Mat& R) {
  for (Eigen::Index c = 0; c < R.cols(); ++c) {
    Eigen::Index imax = 0;
    R.col(c).cwiseAbs().maxCoeff(&imax);
    if (R(imax, c) < 0.0) R.col(c) *= -1.0;
  }
}

SolveReport finish_report(const Problem& pb, const EngineResult& er) {
  SolveReport rep;
  rep.converged = er.converged;
  rep.trace = er.trace;
  rep.iterations = er.iterations;
  rep.message = er.message;
  Eigen::SelfAdjointEigenSolver<Mat> es(er.pt.lambda);
  Mat rot = es.eigenvectors();
  fix_rotation_signs(rot);
  rep.multipliers.mu.assign(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  rep.multipliers.rotation = rot;
  rep.orbitals = OrbitalSet(pb.grid, er.pt.U * rot);
  rep.energy.a = pb.a;
  rep.energy.kinetic = er.pt.T;
  rep.energy.potential = er.pt.P;
  rep.energy.interaction = pb.a * er.pt.S;
  rep.energy.total = rep.energy.kinetic + rep.energy.potential - rep.energy.interaction;
  const Mat Rrot = er.pt.R * rot;
  const double dv = pb.grid.cell_volume();
  for (Eigen::Index c = 0; c < Rrot.cols(); ++c) rep.residual_norms.push_back(std::sqrt(dv * Rrot.col(c).squaredNorm()));
  rep.boundary_leak = boundary_leak(ScalarField(pb.grid, er.pt.rho));
  return rep;
}

void check_frame(const OrbitalSet& init, std::size_t N) {
  if (N < 1) throw DomainError("orbital count must be at least 1");
  if (init.count() != N) throw DomainError("initial frame does not have N orbitals");
}

}  // namespace

void SolverConfig::validate() const {
  if (max_outer < 1) throw ConfigError("solver.max_outer must be at least 1");
  if (!(energy_tol > 0.0)) throw ConfigError("solver.energy_tol must be positive");
  if (!(residual_tol > 0.0)) throw ConfigError("solver.residual_tol must be positive");
  if (!(step0 > 0.0)) throw ConfigError("solver.step0 must be positive");
  if (!(backtrack > 0.0 && backtrack < 1.0)) throw ConfigError("solver.backtrack must lie in (0, 1)");
  if (!(mixing > 0.0 && mixing <= 1.0)) throw ConfigError("solver.mixing must lie in (0, 1]");
  if (!(rescale_radius > 0.0)) throw ConfigError("solver.rescale_radius must be positive");
}

SolveReport minimize_direct(const SolverConfig& cfg, double a, const ScalarField& v, std::size_t N,
                            const OrbitalSet& init) {
  cfg.validate();
  check_frame(init, N);
  if (!(a >= 0.0)) throw DomainError("coupling a must be nonnegative");
  if (!(v.grid == init.grid)) throw DomainError("potential and frame live on different grids");
  Problem pb{init.grid, Objective::Energy, a, &v.values, {cfg.dealias}};
  const EngineResult er = run_engine(pb, cfg, init.orbitals, std::nullopt);
  SolveReport rep = finish_report(pb, er);
  log::info("minimize_direct a={:.10g} N={} E={:.12g} iters={} res={:.2e}", a, N, rep.energy.total, rep.iterations,
            er.pt.max_res());
  if (!rep.converged) {
    const std::string what = "minimize_direct: " + rep.message;
    throw SolverConvergenceError(what, std::move(rep));
  }
  return rep;
}

SolveReport minimize_direct(const SolverConfig& cfg, double a, const TrapPotential& v, std::size_t N,
                            const OrbitalSet& init) {
  return minimize_direct(cfg, a, sample_potential(v, init.grid), N, init);
}

SolveReport scf(const SolverConfig& cfg, double a, const ScalarField& v, std::size_t N, const OrbitalSet& init) {
  cfg.validate();
  check_frame(init, N);
  if (!(a >= 0.0)) throw DomainError("coupling a must be nonnegative");
  const GridSpec& g = init.grid;
  if (!(v.grid == g)) throw DomainError("potential and frame live on different grids");
  const double dv = g.cell_volume();
  const InteractionOptions iopt{cfg.dealias};

  std::vector<double> rho(g.size()), rho23(g.size());
  density_into(OrbitalSet(g, init.orbitals), rho);
  Mat guess = init.orbitals * std::sqrt(dv);
  SolveReport rep;
  double eig_tol = 1e-6;
  std::vector<double> diffs;
  ScalarField W(g);

  for (int it = 0; it < cfg.max_outer; ++it) {
    interaction_terms(g, rho, rho23, iopt);
    for (std::size_t p = 0; p < g.size(); ++p) W.values[p] = v.values[p] - (5.0 * a / 3.0) * rho23[p];
    EigenResult er;
    EigenOptions eo;
    eo.initial = &guess;
    try {
      er = lowest_eigenpairs(W, N, eig_tol, cfg.seed, eo);
    } catch (const EigenConvergenceError& e) {
      er = e.best();
    }
    guess = er.eigenfields * std::sqrt(dv);
    OrbitalSet frame(g, er.eigenfields);
    std::vector<double> rho_new(g.size());
    density_into(frame, rho_new);
    double diff = 0.0;
    for (std::size_t p = 0; p < g.size(); ++p) diff += std::abs(rho_new[p] - rho[p]);
    diff *= dv;
    const EnergyBreakdown e = energy(frame, a, v, iopt);
    rep.trace.push_back(e.total);
    rep.iterations = it + 1;
    rep.orbitals = frame;
    rep.energy = e;
    rep.multipliers.mu = er.eigenvalues;
    rep.multipliers.rotation = Mat::Identity(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
    rep.residual_norms = er.residual_norms;

    if (a == 0.0) {
      rep.converged = true;
      break;
    }
    const double step_change = cfg.mixing * diff;
    diffs.push_back(diff);
    log::debug("scf iter {} E={:.15g} density change {:.3e} eig_tol {:.1e}", it, e.total, diff, eig_tol);
    if (step_change < cfg.energy_tol * static_cast<double>(N) && eig_tol <= 1e-9) {
      rep.converged = true;
      break;
    }
    const double next_tol = std::clamp(0.01 * diff, 1e-12, 1e-6);
    const bool stalled = diffs.size() >= 2 && diff > 0.9 * diffs[diffs.size() - 2];
    eig_tol = stalled ? std::max(1e-12, 0.1 * std::min(eig_tol, next_tol)) : next_tol;
    for (std::size_t p = 0; p < g.size(); ++p) rho[p] = (1.0 - cfg.mixing) * rho[p] + cfg.mixing * rho_new[p];

    if (diffs.size() >= 40) {
      const std::size_t k = diffs.size();
      const double recent = *std::min_element(diffs.end() - 10, diffs.end());
      const double earlier = *std::min_element(diffs.end() - 40, diffs.end() - 30);
      if (recent > 0.9 * earlier && k % 10 == 0) {
        int flips = 0;
        for (std::size_t j = rep.trace.size() - 9; j + 1 < rep.trace.size(); ++j) {
          const double d1 = rep.trace[j + 1] - rep.trace[j], d0 = rep.trace[j] - rep.trace[j - 1];
          const double noise = 1e-12 * std::max(1.0, std::abs(rep.trace[j]));
          if (d1 * d0 < 0.0 && std::abs(d1) > noise && std::abs(d0) > noise) ++flips;
        }
        rep.message = flips >= 4 ? "energy cycling detected; reduce solver.mixing" : "density change stagnated";
        const std::string what = "scf: " + rep.message;
        throw SolverConvergenceError(what, rep);
      }
    }
  }
  rep.boundary_leak = boundary_leak(density(rep.orbitals));
  log::info("scf a={:.10g} N={} E={:.12g} iters={}", a, N, rep.energy.total, rep.iterations);
  if (!rep.converged) {
    rep.message = "iteration limit reached";
    const std::string what = "scf: " + rep.message;
    throw SolverConvergenceError(what, rep);
  }
  return rep;
}

SolveReport scf(const SolverConfig& cfg, double a, const TrapPotential& v, std::size_t N, const OrbitalSet& init) {
  return scf(cfg, a, sample_potential(v, init.grid), N, init);
}

AStarResult minimize_ratio(const SolverConfig& cfg, const OrbitalSet& init, double pin_radius, double pin_tolerance) {
  cfg.validate();
  const GridSpec& g = init.grid;
  Problem pb{g, Objective::Ratio, 0.0, nullptr, {cfg.dealias}};
  const EngineResult er = run_engine(pb, cfg, init.orbitals, PinSpec{pin_radius, pin_tolerance});
  AStarResult res;
  res.a_star = er.pt.f;
  res.trace = er.trace;
  res.iterations = er.iterations;
  res.converged = er.converged;
  Eigen::SelfAdjointEigenSolver<Mat> es(er.pt.lambda);
  Mat rot = es.eigenvectors();
  fix_rotation_signs(rot);
  res.optimizer = OrbitalSet(g, er.pt.U * rot);
  res.mu_hat.assign(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  const Mat Rrot = er.pt.R * rot;
  for (Eigen::Index c = 0; c < Rrot.cols(); ++c) {
    res.residual_norms.push_back(std::sqrt(g.cell_volume() * Rrot.col(c).squaredNorm()));
  }
  for (std::size_t i = 0; i < res.mu_hat.size(); ++i) {
    const double frac = outer_mass_fraction(g, res.optimizer.column(i));
    if (!(res.mu_hat[i] < 0.0) || frac > 0.05) res.rank_deficient = true;
  }
  log::info("ratio minimization N={} value={:.12g} iters={} res={:.2e}", init.count(), res.a_star, res.iterations,
            er.pt.max_res());
  if (res.rank_deficient) log::warn("a_N* optimizer looks rank deficient (some orbital is not bound)");
  return res;
}

AStarResult estimate_aN_star(const SolverConfig& cfg, std::size_t N, const GridSpec& grid,
                             const std::optional<OrbitalSet>& init) {
  cfg.validate();
  if (N < 1) throw DomainError("orbital count must be at least 1");
  OrbitalSet start = init ? *init : random_init(grid, N, cfg.seed, std::min(cfg.rescale_radius, grid.half_length / 3.5));
  if (start.count() != N || !(start.grid == grid)) throw DomainError("initial frame does not match N and grid");
  AStarResult res = minimize_ratio(cfg, start, cfg.rescale_radius);
  if (!res.converged) throw ConvergenceError("estimate_aN_star did not converge");
  return res;
}

double lt_dual_quotient(const ScalarField& A, std::size_t N, double tol, std::uint64_t seed) {
  double denom = 0.0;
  for (double x : A.values) denom += std::pow(std::max(x, 0.0), 2.5);
  denom *= A.grid.cell_volume();
  if (!(denom > 0.0)) throw DomainError("dual quotient of a zero well");
  return neg_eigenvalue_sum(A, N, tol, seed) / denom;
}

LStarResult estimate_LN_star(const SolverConfig& cfg, std::size_t N, const OrbitalSet& optimizer, double a_star) {
  if (!(a_star > 0.0)) throw DomainError("a_star must be positive");
  if (optimizer.count() != N) throw DomainError("optimizer does not have N orbitals");
  LStarResult r;
  r.dual = std::pow(kDualityConstant / a_star, 1.5);
  ScalarField A(optimizer.grid);
  std::vector<double> rho(optimizer.grid.size());
  density_into(OrbitalSet(optimizer.grid, optimizer.orbitals), rho);
  for (std::size_t p = 0; p < rho.size(); ++p) {
    const double c = std::cbrt(rho[p]);
    A.values[p] = (5.0 / 3.0) * a_star * c * c;
  }
  r.direct = lt_dual_quotient(A, N, std::min(1e-8, cfg.residual_tol), cfg.seed);
  return r;
}

VerifyReport verify_groundstate(const OrbitalSet& s, double a, const ScalarField& v, double tol, std::uint64_t seed) {
  const GridSpec& g = s.grid;
  const double dv = g.cell_volume();
  const std::size_t N = s.count();
  VerifyReport rep;
  std::vector<double> rho(g.size()), rho23(g.size());
  density_into(OrbitalSet(g, s.orbitals), rho);
  interaction_terms(g, rho, rho23);
  ScalarField W(g);
  for (std::size_t p = 0; p < g.size(); ++p) W.values[p] = v.values[p] - (5.0 * a / 3.0) * rho23[p];

  const SubspaceResult sub = subspace_hamiltonian(OrbitalSet(g, s.orbitals), a, v);
  rep.mu = sub.multipliers.mu;

  EigenResult er;
  Mat guess = s.orbitals * std::sqrt(dv);
  EigenOptions eo;
  eo.initial = &guess;
  try {
    er = lowest_eigenpairs(W, N + 1, 1e-9, seed, eo);
  } catch (const EigenConvergenceError& e) {
    er = e.best();
  }
  rep.eigenvalues = er.eigenvalues;
  const double lam_scale = std::max(1.0, std::abs(er.eigenvalues[N]));
  rep.degenerate_top = er.eigenvalues[N] - er.eigenvalues[N - 1] <= tol * lam_scale;
  if (N >= 2) rep.first_simple = er.eigenvalues[1] - er.eigenvalues[0] > tol * std::max(1.0, std::abs(er.eigenvalues[0]));

  // Principal angles against the N lowest eigenfields, or against the first
  // N+1 when the top level is degenerate.
  const Eigen::Index k = static_cast<Eigen::Index>(rep.degenerate_top ? N + 1 : N);
  const Mat O = dv * (s.orbitals.transpose() * er.eigenfields.leftCols(k));
  Eigen::JacobiSVD<Mat> svd(O);
  const double smin = std::min(1.0, svd.singularValues().minCoeff());
  rep.subspace_angle = std::acos(smin);

  rep.pass = rep.subspace_angle < tol && rep.first_simple;
  if (rep.subspace_angle >= tol) {
    rep.diagnostic = "subspace mismatch: frame is not spanned by the lowest eigenfields";
  } else if (!rep.first_simple) {
    rep.diagnostic = "first eigenvalue is not simple";
  } else if (rep.degenerate_top) {
    rep.diagnostic = "degenerate top level: mu_N = lambda_{N+1}";
  } else {
    rep.diagnostic = "ok";
  }
  return rep;
}

VerifyReport verify_groundstate(const OrbitalSet& s, double a, const TrapPotential& v, double tol,
                                std::uint64_t seed) {
  return verify_groundstate(s, a, sample_potential(v, s.grid), tol, seed);
}

OrbitalSet trial_state(double tau, const Vec3& y0, const OrbitalSet& optimizer, const GridSpec& grid,
                       const Vec3& origin) {
  if (!(tau >= 1.0)) throw DomainError("trial scale tau must be at least 1");
  const Vec3 c{y0[0] - origin[0], y0[1] - origin[1], y0[2] - origin[2]};
  double reach = grid.half_length;
  for (int i = 0; i < 3; ++i) reach = std::min(reach, grid.half_length - std::abs(c[i]));
  if (!(reach > 0.0)) throw ConfigError("trial center lies outside the box");
  // Support radius of the optimizer: where its density exceeds 1e-6 of the peak.
  const ScalarField rho = density(optimizer);
  const double peak = *std::max_element(rho.values.begin(), rho.values.end());
  double support = 0.0;
  for (std::size_t p = 0; p < rho.values.size(); ++p) {
    if (rho.values[p] > 1e-6 * peak) {
      const Vec3 x = optimizer.grid.node(p);
      support = std::max(support, std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]));
    }
  }
  if (support / tau > reach) throw ConfigError("dilated optimizer does not fit in the box around y0");

  const Vec3 shift{-tau * c[0], -tau * c[1], -tau * c[2]};
  OrbitalSet t = transform_frame(optimizer, grid, tau, shift);
  const double r0 = 0.8 * reach;
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const Vec3 x = grid.node(p);
    const double r = std::sqrt((x[0] - c[0]) * (x[0] - c[0]) + (x[1] - c[1]) * (x[1] - c[1]) +
                               (x[2] - c[2]) * (x[2] - c[2]));
    double chi = 1.0;
    if (r >= reach) {
      chi = 0.0;
    } else if (r > r0) {
      const double q = (r - r0) / (reach - r0);
      chi = 0.5 * (1.0 + std::cos(3.14159265358979323846 * q));
    }
    if (chi != 1.0) t.orbitals.row(static_cast<Eigen::Index>(p)) *= chi;
  }
  t.occupations.assign(t.count(), 1.0);
  loewdin_in_place(grid, t.orbitals);
  return t;
}

EnergyBreakdown trial_energy(double tau, const Vec3& y0, double a, const TrapPotential& v, const OrbitalSet& optimizer,
                             const GridSpec& grid, const Vec3& origin) {
  return energy(trial_state(tau, y0, optimizer, grid, origin), a, sample_potential(v, grid, origin));
}

}  // namespace fnls
