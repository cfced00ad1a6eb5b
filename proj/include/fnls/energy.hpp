#pragma once

#include <Eigen/Dense>
#include <vector>

#include "fnls/grid.hpp"
#include "fnls/orbitals.hpp"
#include "fnls/potentials.hpp"

namespace fnls {

/// E_a = kinetic + potential - interaction, with interaction = a * int rho^{5/3}.
struct EnergyBreakdown {
  double kinetic = 0.0;
  double potential = 0.0;
  double interaction = 0.0;
  double total = 0.0;
  double a = 0.0;
};

/// Sorted Lagrange multipliers and the orthogonal rotation that diagonalizes
/// the subspace Hamiltonian.
struct MultiplierSet {
  std::vector<double> mu;
  Eigen::MatrixXd rotation;
};

struct InteractionOptions {
  /// Apply the 2/3-rule filter to the density before the nonlinear terms.
  bool dealias = false;
};

/// Returns int rho^{5/3} and writes rho^{2/3} (the derivative of
/// (3/5) rho^{5/3}) into rho23.
double interaction_terms(const GridSpec& grid, std::span<const double> rho, std::span<double> rho23,
                         const InteractionOptions& opt = {});

/// Applies -Laplacian + W to every column of U.
Eigen::MatrixXd apply_schrodinger(const GridSpec& grid, std::span<const double> W, const Eigen::MatrixXd& U);

EnergyBreakdown energy(const OrbitalSet& s, double a, const TrapPotential& v, const InteractionOptions& opt = {});
EnergyBreakdown energy(const OrbitalSet& s, double a, const ScalarField& v, const InteractionOptions& opt = {});

/// ||gamma||^{2/3} Tr(-Laplacian gamma) / int rho^{5/3}. Requires equal
/// occupations; throws DomainError for a zero density.
double lt_ratio(const OrbitalSet& s);

/// Per-orbital kinetic energies (without occupations).
std::vector<double> orbital_kinetic(const OrbitalSet& s);

struct SubspaceResult {
  MultiplierSet multipliers;
  OrbitalSet rotated;
};

/// Diagonalizes Lambda_ij = <u_i, H_V u_j> with
/// H_V = -Laplacian + V - (5a/3) rho^{2/3}.
SubspaceResult subspace_hamiltonian(const OrbitalSet& s, double a, const TrapPotential& v,
                                    const InteractionOptions& opt = {});
SubspaceResult subspace_hamiltonian(const OrbitalSet& s, double a, const ScalarField& v,
                                    const InteractionOptions& opt = {});

/// Residual of the orbital equations and its ingredients.
struct FrameResidual {
  Eigen::MatrixXd h_u;       ///< H_V u_j
  Eigen::MatrixXd lambda;    ///< symmetrized <u_i, H_V u_j>
  Eigen::MatrixXd residual;  ///< H_V u_i - sum_j Lambda_ij u_j
  std::vector<double> residual_norms;
};
FrameResidual frame_residual(const OrbitalSet& s, double a, const ScalarField& v, const InteractionOptions& opt = {});

/// r_i = H_V u_i - sum_j Lambda_ij u_j, orthogonal to span{u}. The energy
/// gradient along the frame manifold is 2 r.
std::vector<ScalarField> projected_gradient(const OrbitalSet& s, double a, const TrapPotential& v,
                                            const InteractionOptions& opt = {});

}  // namespace fnls
