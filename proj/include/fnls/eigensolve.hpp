#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "fnls/errors.hpp"
#include "fnls/grid.hpp"

namespace fnls {

/// Lowest eigenpairs of -Laplacian + W, sorted ascending.
struct EigenResult {
  GridSpec grid;
  std::vector<double> eigenvalues;
  /// L2-orthonormal eigenfields as columns (n^3 x M).
  Eigen::MatrixXd eigenfields;
  std::vector<double> residual_norms;
  int iterations = 0;

  std::size_t count() const { return eigenvalues.size(); }
  ScalarField eigenfield(std::size_t i) const;
};

class EigenConvergenceError : public ConvergenceError {
 public:
  EigenConvergenceError(const std::string& what, EigenResult best)
      : ConvergenceError(what), best_(std::move(best)) {}
  const EigenResult& best() const noexcept { return best_; }

 private:
  EigenResult best_;
};

struct EigenOptions {
  int max_iterations = 1000;
  /// Extra trailing vectors iterated alongside the requested ones.
  int guard_vectors = -1;
  /// Optional starting block (n^3 x k); missing columns are drawn at random.
  const Eigen::MatrixXd* initial = nullptr;
};

/// Block preconditioned conjugate gradient (LOBPCG) with Rayleigh-Ritz over
/// [X, T R, P] and preconditioner T = (|k|^2 + shift)^{-1}. Meets
/// ||(-Laplacian + W) v_i - lambda_i v_i|| <= tol * max(1, |lambda_i|) or throws
/// EigenConvergenceError carrying the best iterate.
EigenResult lowest_eigenpairs(const ScalarField& W, std::size_t M, double tol, std::uint64_t seed,
                              const EigenOptions& opt = {});

/// Fraction of the mass of a unit field lying where max_i |x_i| > L/2.
double outer_mass_fraction(const GridSpec& grid, std::span<const double> v);

/// sum_j max(-lambda_j, 0) over the M lowest eigenvalues of -Laplacian - A.
/// A negative level counts only if its eigenfield is bound: on the periodic
/// box any A > 0 pulls the constant mode slightly below zero, and such
/// box-filling states (outer mass fraction >= 1/2) are counted as zero.
double neg_eigenvalue_sum(const ScalarField& A, std::size_t M, double tol, std::uint64_t seed = 1);

}  // namespace fnls
