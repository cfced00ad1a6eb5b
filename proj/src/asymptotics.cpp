#include "fnls/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fnls/errors.hpp"
#include "fnls/log.hpp"

namespace fnls {
namespace {

double norm3(const Vec3& x) { return std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]); }

double rho53_of(const OrbitalSet& s) {
  const ScalarField rho = density(s);
  std::vector<double> rho23(rho.values.size());
  return interaction_terms(s.grid, rho.values, rho23);
}

std::vector<std::size_t> by_gap_descending(const std::vector<SweepRecord>& records) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].a > 0.0) idx.push_back(i);
  }
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) { return records[x].gap > records[y].gap; });
  return idx;
}

}  // namespace

SweepResult sweep(const SolverConfig& cfg, const TrapPotential& v, std::size_t N, double a_star,
                  const std::vector<double>& gaps, const OrbitalSet& optimizer, const SweepOptions& opt) {
  cfg.validate();
  if (v.is_zero()) throw ConfigError("sweep needs a trapping potential");
  if (gaps.empty()) throw DomainError("sweep needs at least one gap");
  if (optimizer.count() != N) throw DomainError("optimizer does not have N orbitals");
  if (!(a_star > 0.0)) throw DomainError("a_star must be positive");
  for (std::size_t k = 0; k < gaps.size(); ++k) {
    if (!(gaps[k] > 0.0)) throw DomainError("gaps must be positive");
    if (k > 0 && !(gaps[k] < gaps[k - 1])) throw DomainError("gaps must be strictly decreasing");
  }
  if (!(gaps.front() < a_star)) throw DomainError("gap exceeds a_star");
  if (!(opt.box_scale > 0.0)) throw ConfigError("box_scale must be positive");

  SweepResult out;
  Vec3 center = v.minimum_point();
  for (std::size_t k = 0; k < gaps.size(); ++k) {
    const double gap = gaps[k];
    const double eps = std::pow(gap, 0.25);
    const double a = a_star - gap;
    const GridSpec grid = make_grid(opt.box_scale * eps, opt.points_per_dim);
    const ScalarField vk = sample_potential(v, grid, center);

    OrbitalSet init;
    if (k == 0) {
      init = transform_frame(optimizer, grid, 1.0 / eps, {0.0, 0.0, 0.0});
    } else {
      const SweepProfile& prev = out.profiles.back();
      const Vec3 shift{center[0] - prev.origin[0], center[1] - prev.origin[1], center[2] - prev.origin[2]};
      init = transform_frame(prev.frame, grid, out.records.back().eps / eps, shift);
    }
    init.occupations.assign(N, 1.0);
    loewdin_in_place(grid, init.orbitals);

    SolveReport rep;
    bool ok = true;
    try {
      rep = minimize_direct(cfg, a, vk, N, init);
      ok = rep.converged;
    } catch (const SolverConvergenceError& e) {
      if (k == 0) throw;
      rep = e.best();
      ok = false;
    }
    if (!ok && k == 0) throw ConvergenceError("sweep failed at the first gap");

    SweepRecord r;
    r.a = a;
    r.gap = gap;
    r.eps = eps;
    r.energy = rep.energy.total;
    r.rho53 = a > 0.0 ? rep.energy.interaction / a : rho53_of(rep.orbitals);
    const ConcentrationPoint cp = concentration_point(density(rep.orbitals));
    r.x_max = {center[0] + cp.point[0], center[1] + cp.point[1], center[2] + cp.point[2]};
    r.mu = rep.multipliers.mu;
    r.boundary_leak = rep.boundary_leak;
    r.spacing = grid.spacing;
    r.converged = ok;
    r.iterations = rep.iterations;
    log::info("sweep gap={:.4g} eps={:.4g} I={:.10g} rho53={:.6g} mu1={:.6g} iters={}{}", gap, eps, r.energy,
              r.rho53, r.mu.empty() ? 0.0 : r.mu[0], r.iterations, ok ? "" : " (not converged)");
    out.records.push_back(r);
    out.profiles.push_back({rep.orbitals, center});
    center = r.x_max;
  }
  return out;
}

LinearFit fit_linear(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("linear fit needs at least 2 paired points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw DomainError("linear fit needs distinct abscissae");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0.0 ? std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0) : 1.0;
  return f;
}

PowerLawFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw DomainError("power law fit needs paired data");
  if (x.size() < 3) throw DomainError("power law fit needs at least 3 points");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw DomainError("power law fit needs positive data");
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  const LinearFit lf = fit_linear(lx, ly);
  return {lf.slope, std::exp(lf.intercept), lf.r2};
}

ConcentrationPoint concentration_point(const ScalarField& rho) {
  const GridSpec& g = rho.grid;
  const std::size_t n = g.points_per_dim;
  if (rho.values.empty()) throw DomainError("concentration point of an empty field");
  const double peak = *std::max_element(rho.values.begin(), rho.values.end());
  if (!(peak > 0.0)) throw DomainError("concentration point of a zero density");

  const double level = peak * (1.0 - 1e-12);
  std::array<std::size_t, 3> best{n, n, n};
  std::vector<std::array<std::size_t, 3>> maxima;
  for (std::size_t p = 0; p < g.size(); ++p) {
    if (rho.values[p] < level) continue;
    const std::array<std::size_t, 3> ijk{p % n, (p / n) % n, p / (n * n)};
    maxima.push_back(ijk);
    if (ijk < best) best = ijk;
  }
  auto periodic_gap = [n](std::size_t x, std::size_t y) {
    const std::size_t d = x > y ? x - y : y - x;
    return std::min(d, n - d);
  };
  ConcentrationPoint cp;
  for (const auto& m : maxima) {
    for (int c = 0; c < 3; ++c) {
      if (periodic_gap(m[c], best[c]) > 1) cp.tie = true;
    }
  }
  cp.point = {g.coordinate(best[0]), g.coordinate(best[1]), g.coordinate(best[2])};
  if (cp.tie) return cp;
  for (int c = 0; c < 3; ++c) {
    if (best[c] == 0 || best[c] + 1 == n) throw DomainError("density maximum touches the box boundary");
  }

  Eigen::Matrix<double, 27, 10> A;
  Eigen::Matrix<double, 27, 1> b;
  bool positive = true;
  int row = 0;
  for (int dk = -1; dk <= 1; ++dk) {
    for (int dj = -1; dj <= 1; ++dj) {
      for (int di = -1; di <= 1; ++di, ++row) {
        const double val = rho.values[g.index(best[0] + di, best[1] + dj, best[2] + dk)];
        positive = positive && val > 0.0;
        b(row) = val;
        A.row(row) << 1.0, di, dj, dk, di * di, dj * dj, dk * dk, di * dj, dj * dk, di * dk;
      }
    }
  }
  if (positive) b = b.array().log().matrix();
  const Eigen::Matrix<double, 10, 1> c = A.colPivHouseholderQr().solve(b);
  Eigen::Matrix3d H;
  H << 2 * c(4), c(7), c(9), c(7), 2 * c(5), c(8), c(9), c(8), 2 * c(6);
  const Eigen::Vector3d grad(c(1), c(2), c(3));
  Eigen::Vector3d d = Eigen::Vector3d::Zero();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(H);
  if (es.eigenvalues().maxCoeff() < 0.0) d = -H.ldlt().solve(grad);
  if (!(d.cwiseAbs().maxCoeff() <= 1.0)) {
    for (int a = 0; a < 3; ++a) {
      const double curv = H(a, a);
      d(a) = curv < 0.0 ? std::clamp(-grad(a) / curv, -0.5, 0.5) : 0.0;
    }
  }
  for (int a = 0; a < 3; ++a) cp.point[a] += d(a) * g.spacing;
  return cp;
}

OrbitalSet rescale_profile(const OrbitalSet& s, double eps, const Vec3& x_c, const GridSpec& reference) {
  if (!(eps > 0.0)) throw DomainError("eps must be positive");
  const ScalarField rho = density(s);
  const double peak = *std::max_element(rho.values.begin(), rho.values.end());
  const double reach = eps * reference.half_length;
  for (std::size_t p = 0; p < rho.values.size(); ++p) {
    if (rho.values[p] <= 1e-6 * peak) continue;
    const Vec3 x = s.grid.node(p);
    for (int c = 0; c < 3; ++c) {
      if (std::abs(x[c] - x_c[c]) >= reach) throw ConfigError("rescaled profile does not fit the reference grid");
    }
  }
  return transform_frame(s, reference, eps, x_c);
}

AlignedDistance aligned_distance(const OrbitalSet& s, const OrbitalSet& reference) {
  if (!(s.grid == reference.grid) || s.count() != reference.count()) {
    throw DomainError("aligned distance needs frames of equal size on one grid");
  }
  const GridSpec& g = s.grid;
  const double dv = g.cell_volume();
  AlignedDistance d;
  const ScalarField r1 = density(s);
  const ScalarField r2 = density(reference);
  double acc = 0.0;
  for (std::size_t p = 0; p < g.size(); ++p) acc += (r1.values[p] - r2.values[p]) * (r1.values[p] - r2.values[p]);
  d.density = std::sqrt(acc * dv);

  const Eigen::MatrixXd M = dv * (s.orbitals.transpose() * reference.orbitals);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  d.rotation = svd.matrixU() * svd.matrixV().transpose();
  d.frame = std::sqrt(dv * (s.orbitals * d.rotation - reference.orbitals).squaredNorm());
  return d;
}

OrbitalSet rescaled_sweep_profile(const SweepProfile& p, const SweepRecord& r, const GridSpec& reference) {
  const Vec3 local{r.x_max[0] - p.origin[0], r.x_max[1] - p.origin[1], r.x_max[2] - p.origin[2]};
  return rescale_profile(p.frame, r.eps, local, reference);
}

OrbitalSet center_on_maximum(const OrbitalSet& s) {
  const ConcentrationPoint cp = concentration_point(density(s));
  return transform_frame(s, s.grid, 1.0, cp.point);
}

Eigen::Matrix3d quadratic_form_at(const TrapPotential& v, const Vec3& x0) {
  const double h = 1e-4;
  Eigen::Matrix3d H;
  auto at = [&](int i, double si, int j, double sj) {
    Vec3 x = x0;
    x[i] += si;
    x[j] += sj;
    return v(x);
  };
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      H(i, j) = (at(i, h, j, h) - at(i, h, j, -h) - at(i, -h, j, h) + at(i, -h, j, -h)) / (4.0 * h * h);
    }
  }
  return 0.25 * (H + H.transpose());
}

double quadratic_moment(const TrapPotential& v, const Vec3& x0, const OrbitalSet& s) {
  const Eigen::Matrix3d Q = quadratic_form_at(v, x0);
  const ScalarField rho = density(s);
  double acc = 0.0;
  for (std::size_t p = 0; p < rho.values.size(); ++p) {
    const Vec3 y = s.grid.node(p);
    const Eigen::Vector3d e(y[0], y[1], y[2]);
    acc += rho.values[p] * e.dot(Q * e);
  }
  return acc * s.grid.cell_volume();
}

LimitProfile limit_scaled_optimizer(const OrbitalSet& optimizer, const TrapPotential& v, const Vec3& x0) {
  const double S = rho53_of(optimizer);
  const double P = quadratic_moment(v, x0, optimizer);
  if (!(P > 0.0) || !(S > 0.0)) throw DomainError("limit scaling needs a confining quadratic part");
  LimitProfile lp;
  lp.scale = std::pow(P / S, 0.25);
  lp.frame = transform_frame(optimizer, optimizer.grid, lp.scale, {0.0, 0.0, 0.0});
  loewdin_in_place(lp.frame.grid, lp.frame.orbitals);
  lp.rho53 = rho53_of(lp.frame);
  lp.trap_moment = quadratic_moment(v, x0, lp.frame);
  return lp;
}

MultiplierLimitReport multiplier_limit_check(const std::vector<SweepRecord>& records,
                                             const std::vector<double>& mu_hat, double tolerance) {
  const std::vector<std::size_t> idx = by_gap_descending(records);
  if (idx.size() < 3) throw DomainError("multiplier limit check needs at least 3 records with a > 0");
  if (mu_hat.empty()) throw DomainError("optimizer multipliers are empty");
  MultiplierLimitReport rep;
  for (std::size_t i : idx) {
    const SweepRecord& r = records[i];
    if (r.mu.empty()) throw DomainError("record without multipliers");
    rep.gap.push_back(r.gap);
    rep.scaled_mu1.push_back(r.eps * r.eps * r.mu[0]);
  }
  const std::size_t m = rep.scaled_mu1.size();
  rep.negative_tail = rep.scaled_mu1[m - 1] < 0.0 && rep.scaled_mu1[m - 2] < 0.0 && rep.scaled_mu1[m - 3] < 0.0;
  rep.relative_distance = std::abs(rep.scaled_mu1[m - 1] - mu_hat[0]) / std::abs(mu_hat[0]);
  rep.pass = rep.negative_tail && rep.relative_distance < tolerance;
  return rep;
}

double limit_energy_rhs(const OrbitalSet& w, const RingTrap& ring, const Vec3& direction, double c0, double c1) {
  const ScalarField rho = density(w);
  std::vector<double> rho23(rho.values.size());
  const double S = interaction_terms(w.grid, rho.values, rho23);
  double acc = 0.0;
  for (std::size_t p = 0; p < rho.values.size(); ++p) {
    const Vec3 y = w.grid.node(p);
    const double radial = y[0] * direction[0] + y[1] * direction[1] + y[2] * direction[2] + c0;
    const double vertical = y[2] + c1;
    acc += rho.values[p] * (ring.omega1 * radial * radial + ring.omega2 * vertical * vertical);
  }
  return S + acc * w.grid.cell_volume();
}

LimitEnergyReport limit_energy_check(const std::vector<SweepRecord>& records, const OrbitalSet& w,
                                     const TrapPotential& v, double tolerance, std::size_t tail) {
  const auto* ring = std::get_if<RingTrap>(&v.variant());
  if (!ring) throw DomainError("limit energy check needs a ring trap");
  const std::vector<std::size_t> idx = by_gap_descending(records);
  if (idx.size() < 3) throw DomainError("limit energy check needs at least 3 records with a > 0");
  tail = std::clamp<std::size_t>(tail, 3, idx.size());

  LimitEnergyReport rep;
  const SweepRecord& last = records[idx.back()];
  const double pr = std::hypot(last.x_max[0], last.x_max[1]);
  if (!(pr > 0.0)) throw DomainError("concentration point on the ring axis");
  rep.direction = {last.x_max[0] / pr, last.x_max[1] / pr, 0.0};

  std::vector<double> eps, dp, dz, ratio;
  for (std::size_t k = idx.size() - tail; k < idx.size(); ++k) {
    const SweepRecord& r = records[idx[k]];
    eps.push_back(r.eps);
    dp.push_back(std::hypot(r.x_max[0], r.x_max[1]) - ring->radius);
    dz.push_back(r.x_max[2]);
    ratio.push_back(r.energy / std::sqrt(r.gap));
  }
  rep.c0 = fit_linear(eps, dp).slope;
  rep.c1 = fit_linear(eps, dz).slope;
  rep.limit = fit_linear(eps, ratio).intercept;
  rep.rhs = limit_energy_rhs(w, *ring, rep.direction, rep.c0, rep.c1);
  rep.relative_difference = std::abs(rep.limit - rep.rhs) / std::abs(rep.rhs);
  rep.pass = rep.relative_difference < tolerance;
  return rep;
}

DecayReport decay_check(const OrbitalSet& s, const std::vector<double>& mu) {
  if (mu.empty()) throw DomainError("decay check needs multipliers");
  DecayReport rep;
  const double muN = *std::max_element(mu.begin(), mu.end());
  rep.expected_rate = 2.0 * std::sqrt(std::abs(muN));
  rep.bound_rate = std::sqrt(2.0 * std::abs(muN));

  const ScalarField rho = density(s);
  const double peak = *std::max_element(rho.values.begin(), rho.values.end());
  Vec3 c{0.0, 0.0, 0.0};
  try {
    c = concentration_point(rho).point;
  } catch (const DomainError&) {
    rep.diagnostic = "density maximum on the boundary";
    return rep;
  }
  const double rmax = 0.9 * s.grid.half_length;
  std::vector<double> r, z;
  for (std::size_t p = 0; p < rho.values.size(); ++p) {
    const double q = rho.values[p] / peak;
    if (q < 1e-10 || q > 1e-3) continue;
    const Vec3 x = s.grid.node(p);
    const double d = norm3({x[0] - c[0], x[1] - c[1], x[2] - c[2]});
    if (d >= rmax || d <= 0.0) continue;
    r.push_back(d);
    z.push_back(std::log(q) + 2.0 * std::log(d));
  }
  rep.samples = r.size();
  if (r.size() < 10) {
    rep.diagnostic = "decay shell is empty: box too small";
    return rep;
  }
  const LinearFit lf = fit_linear(r, z);
  rep.rate = -lf.slope;
  rep.r2_linear = lf.r2;

  Eigen::MatrixXd A(static_cast<Eigen::Index>(r.size()), 3);
  Eigen::VectorXd b(static_cast<Eigen::Index>(r.size()));
  for (std::size_t i = 0; i < r.size(); ++i) {
    A.row(static_cast<Eigen::Index>(i)) << 1.0, r[i], r[i] * r[i];
    b(static_cast<Eigen::Index>(i)) = z[i];
  }
  const Eigen::VectorXd coef = A.colPivHouseholderQr().solve(b);
  const double mean = b.mean();
  const double ss_tot = (b.array() - mean).square().sum();
  const double ss_res = (A * coef - b).squaredNorm();
  rep.r2_quadratic = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  rep.exponential = (1.0 - rep.r2_linear) < 3.0 * (1.0 - rep.r2_quadratic) + 1e-4;
  rep.reliable = boundary_leak(rho) < 1e-8;
  rep.diagnostic = rep.reliable ? "ok" : "boundary leak above 1e-8";
  return rep;
}

}  // namespace fnls
