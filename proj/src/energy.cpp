#include "fnls/energy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fnls/errors.hpp"
#include "fnls/spectral.hpp"

namespace fnls {

double interaction_terms(const GridSpec& grid, std::span<const double> rho, std::span<double> rho23,
                         const InteractionOptions& opt) {
  std::vector<double> filtered;
  std::span<const double> r = rho;
  if (opt.dealias) {
    filtered.assign(rho.begin(), rho.end());
    dealias_two_thirds(grid, filtered);
    for (double& x : filtered) x = std::max(x, 0.0);
    r = filtered;
  }
  double s = 0.0;
  for (std::size_t p = 0; p < r.size(); ++p) {
    const double c = std::cbrt(r[p]);
    const double r23 = c * c;
    rho23[p] = r23;
    s += r[p] * r23;
  }
  if (opt.dealias) dealias_two_thirds(grid, rho23);
  return s * grid.cell_volume();
}

Eigen::MatrixXd apply_schrodinger(const GridSpec& grid, std::span<const double> W, const Eigen::MatrixXd& U) {
  Eigen::MatrixXd out(U.rows(), U.cols());
  for (Eigen::Index c = 0; c < U.cols(); ++c) {
    std::span<const double> in(U.col(c).data(), grid.size());
    std::span<double> dst(out.col(c).data(), grid.size());
    neg_laplacian(grid, in, dst);
    for (std::size_t p = 0; p < grid.size(); ++p) dst[p] += W[p] * in[p];
  }
  return out;
}

std::vector<double> orbital_kinetic(const OrbitalSet& s) {
  std::vector<double> t(s.count());
  for (std::size_t i = 0; i < s.count(); ++i) t[i] = kinetic_quadratic_form(s.grid, s.column(i));
  return t;
}

EnergyBreakdown energy(const OrbitalSet& s, double a, const ScalarField& v, const InteractionOptions& opt) {
  if (!(a >= 0.0)) throw DomainError("coupling a must be nonnegative");
  EnergyBreakdown e;
  e.a = a;
  const auto t = orbital_kinetic(s);
  for (std::size_t i = 0; i < s.count(); ++i) e.kinetic += s.occupations[i] * t[i];
  std::vector<double> rho(s.grid.size());
  density_into(s, rho);
  e.potential = inner(s.grid, v.values, rho);
  std::vector<double> rho23(rho.size());
  e.interaction = a * interaction_terms(s.grid, rho, rho23, opt);
  e.total = e.kinetic + e.potential - e.interaction;
  return e;
}

EnergyBreakdown energy(const OrbitalSet& s, double a, const TrapPotential& v, const InteractionOptions& opt) {
  return energy(s, a, sample_potential(v, s.grid), opt);
}

double lt_ratio(const OrbitalSet& s) {
  const double occ0 = s.occupations.front();
  for (double n : s.occupations) {
    if (std::abs(n - occ0) > 1e-12 * std::max(1.0, occ0)) {
      throw DomainError("lt_ratio requires equal occupations");
    }
  }
  std::vector<double> rho(s.grid.size());
  density_into(s, rho);
  std::vector<double> rho23(rho.size());
  const double s53 = interaction_terms(s.grid, rho, rho23);
  if (!(s53 > 0.0)) throw DomainError("lt_ratio of a zero density");
  const auto t = orbital_kinetic(s);
  double kin = 0.0;
  for (std::size_t i = 0; i < s.count(); ++i) kin += s.occupations[i] * t[i];
  return std::cbrt(s.max_occupation() * s.max_occupation()) * kin / s53;
}

FrameResidual frame_residual(const OrbitalSet& s, double a, const ScalarField& v, const InteractionOptions& opt) {
  const GridSpec& g = s.grid;
  std::vector<double> rho(g.size());
  density_into(s, rho);
  std::vector<double> w(g.size());
  interaction_terms(g, rho, w, opt);
  const double c = 5.0 * a / 3.0;
  for (std::size_t p = 0; p < w.size(); ++p) w[p] = v.values[p] - c * w[p];

  FrameResidual r;
  r.h_u = apply_schrodinger(g, w, s.orbitals);
  Eigen::MatrixXd lam = g.cell_volume() * (s.orbitals.transpose() * r.h_u);
  r.lambda = 0.5 * (lam + lam.transpose());
  r.residual = r.h_u - s.orbitals * r.lambda;
  r.residual_norms.resize(s.count());
  for (std::size_t i = 0; i < s.count(); ++i) {
    r.residual_norms[i] = std::sqrt(g.cell_volume() * r.residual.col(static_cast<Eigen::Index>(i)).squaredNorm());
  }
  return r;
}

SubspaceResult subspace_hamiltonian(const OrbitalSet& s, double a, const ScalarField& v,
                                    const InteractionOptions& opt) {
  const FrameResidual fr = frame_residual(s, a, v, opt);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(fr.lambda);
  SubspaceResult out;
  out.multipliers.mu.assign(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  out.multipliers.rotation = es.eigenvectors();
  out.rotated = OrbitalSet(s.grid, s.orbitals * es.eigenvectors(), s.occupations);
  return out;
}

SubspaceResult subspace_hamiltonian(const OrbitalSet& s, double a, const TrapPotential& v,
                                    const InteractionOptions& opt) {
  return subspace_hamiltonian(s, a, sample_potential(v, s.grid), opt);
}

std::vector<ScalarField> projected_gradient(const OrbitalSet& s, double a, const TrapPotential& v,
                                            const InteractionOptions& opt) {
  const FrameResidual fr = frame_residual(s, a, sample_potential(v, s.grid), opt);
  std::vector<ScalarField> out;
  out.reserve(s.count());
  for (std::size_t i = 0; i < s.count(); ++i) {
    const auto col = fr.residual.col(static_cast<Eigen::Index>(i));
    out.emplace_back(s.grid, std::vector<double>(col.data(), col.data() + col.size()));
  }
  return out;
}

}  // namespace fnls
