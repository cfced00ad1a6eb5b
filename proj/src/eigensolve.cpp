#include "fnls/eigensolve.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "fnls/energy.hpp"
#include "fnls/spectral.hpp"

namespace fnls {
namespace {

using Mat = Eigen::MatrixXd;

Mat apply_op(const GridSpec& g, std::span<const double> W, const Mat& X) { return apply_schrodinger(g, W, X); }

Mat precondition(const GridSpec& g, const Mat& R, double shift) {
  Mat out(R.rows(), R.cols());
  for (Eigen::Index c = 0; c < R.cols(); ++c) {
    apply_inverse_shifted(g, {R.col(c).data(), g.size()}, {out.col(c).data(), g.size()}, shift);
  }
  return out;
}

// Orthonormal basis (Euclidean) for the columns of S, dropping directions
// whose Gram eigenvalue falls below drop * max eigenvalue.
Mat gram_basis(const Mat& S, double drop) {
  Mat G = S.transpose() * S;
  G = 0.5 * (G + G.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(G);
  const auto& ev = es.eigenvalues();
  const double top = ev.maxCoeff();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) > drop * top) keep.push_back(i);
  }
  Mat B(S.cols(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) {
    B.col(static_cast<Eigen::Index>(j)) = es.eigenvectors().col(keep[j]) / std::sqrt(ev(keep[j]));
  }
  return B;
}

Mat random_block(const GridSpec& g, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Mat X(static_cast<Eigen::Index>(g.size()), cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < X.rows(); ++r) X(r, c) = nd(rng);
  }
  return precondition(g, X, 1.0);
}

void normalize_columns(Mat& A, Mat* B) {
  for (Eigen::Index c = 0; c < A.cols(); ++c) {
    const double nrm = A.col(c).norm();
    if (nrm > 0.0) {
      A.col(c) /= nrm;
      if (B) B->col(c) /= nrm;
    }
  }
}

void fix_signs(Mat& X) {
  for (Eigen::Index c = 0; c < X.cols(); ++c) {
    Eigen::Index imax = 0;
    X.col(c).cwiseAbs().maxCoeff(&imax);
    if (X(imax, c) < 0.0) X.col(c) *= -1.0;
  }
}

}  // namespace

ScalarField EigenResult::eigenfield(std::size_t i) const {
  const auto col = eigenfields.col(static_cast<Eigen::Index>(i));
  return ScalarField(grid, std::vector<double>(col.data(), col.data() + col.size()));
}

EigenResult lowest_eigenpairs(const ScalarField& W, std::size_t M, double tol, std::uint64_t seed,
                              const EigenOptions& opt) {
  const GridSpec& g = W.grid;
  const auto dim = static_cast<Eigen::Index>(g.size());
  if (M < 1) throw DomainError("eigenpair count must be at least 1");
  if (!(tol > 0.0)) throw DomainError("eigensolver tolerance must be positive");
  const auto req = static_cast<Eigen::Index>(M);
  if (req > dim) throw DomainError("more eigenpairs requested than grid points");
  const Eigen::Index guard = opt.guard_vectors >= 0 ? opt.guard_vectors : std::max<Eigen::Index>(2, req / 2);
  const Eigen::Index m = std::min(dim, req + guard);

  Mat X = random_block(g, m, seed);
  if (opt.initial) {
    const Eigen::Index k = std::min(m, opt.initial->cols());
    X.leftCols(k) = opt.initial->leftCols(k);
  }
  normalize_columns(X, nullptr);
  X = X * gram_basis(X, 1e-14);
  if (X.cols() < m) {
    Mat extra = random_block(g, m - X.cols(), seed ^ 0x9e3779b97f4a7c15ULL);
    Mat S(dim, m);
    S << X, extra;
    X = S * gram_basis(S, 1e-14);
  }

  Mat AX = apply_op(g, W.values, X);
  Eigen::VectorXd lam;
  {
    Mat H = X.transpose() * AX;
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (H + H.transpose()));
    X = X * es.eigenvectors();
    AX = AX * es.eigenvectors();
    lam = es.eigenvalues();
  }
  Mat P(dim, 0), AP(dim, 0);
  std::vector<double> norms(static_cast<std::size_t>(m));

  auto pack = [&](int iters) {
    EigenResult r;
    r.grid = g;
    r.iterations = iters;
    r.eigenvalues.assign(lam.data(), lam.data() + req);
    Mat V = X.leftCols(req);
    fix_signs(V);
    r.eigenfields = V / std::sqrt(g.cell_volume());
    r.residual_norms.assign(norms.begin(), norms.begin() + req);
    return r;
  };

  for (int it = 0; it <= opt.max_iterations; ++it) {
    if (it > 0 && it % 20 == 0) AX = apply_op(g, W.values, X);
    Mat R = AX - X * lam.asDiagonal();
    std::vector<Eigen::Index> active;
    bool done = true;
    for (Eigen::Index j = 0; j < m; ++j) {
      norms[static_cast<std::size_t>(j)] = R.col(j).norm();
      const bool ok = norms[static_cast<std::size_t>(j)] <= tol * std::max(1.0, std::abs(lam(j)));
      if (j < req && !ok) done = false;
      if (!ok) active.push_back(j);
    }
    if (done) {
      // Confirm against a freshly applied operator.
      AX = apply_op(g, W.values, X);
      R = AX - X * lam.asDiagonal();
      bool confirmed = true;
      for (Eigen::Index j = 0; j < req; ++j) {
        norms[static_cast<std::size_t>(j)] = R.col(j).norm();
        if (norms[static_cast<std::size_t>(j)] > tol * std::max(1.0, std::abs(lam(j)))) confirmed = false;
      }
      if (confirmed) return pack(it);
      active.clear();
      for (Eigen::Index j = 0; j < m; ++j) active.push_back(j);
    }
    if (it == opt.max_iterations) break;

    const auto na = static_cast<Eigen::Index>(active.size());
    Mat Ra(dim, na);
    for (Eigen::Index j = 0; j < na; ++j) Ra.col(j) = R.col(active[static_cast<std::size_t>(j)]);
    Mat Wb = precondition(g, Ra, std::max(1.0, std::abs(lam(0))));
    for (int pass = 0; pass < 2; ++pass) Wb -= X * (X.transpose() * Wb);
    normalize_columns(Wb, nullptr);
    Mat AW = apply_op(g, W.values, Wb);

    Mat Pa(dim, 0), APa(dim, 0);
    if (P.cols() > 0) {
      Pa.resize(dim, na);
      APa.resize(dim, na);
      for (Eigen::Index j = 0; j < na; ++j) {
        Pa.col(j) = P.col(active[static_cast<std::size_t>(j)]);
        APa.col(j) = AP.col(active[static_cast<std::size_t>(j)]);
      }
      normalize_columns(Pa, &APa);
    }

    const Eigen::Index ns = m + na + Pa.cols();
    Mat S(dim, ns), AS(dim, ns);
    S << X, Wb, Pa;
    AS << AX, AW, APa;
    const Mat B = gram_basis(S, 1e-13);
    Mat H = B.transpose() * (S.transpose() * AS) * B;
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (H + H.transpose()));
    if (es.eigenvalues().size() < m) break;
    const Mat C = B * es.eigenvectors().leftCols(m);
    lam = es.eigenvalues().head(m);
    const Mat Cr = C.bottomRows(ns - m);
    P = S.rightCols(ns - m) * Cr;
    AP = AS.rightCols(ns - m) * Cr;
    X = S * C;
    AX = AS * C;
  }
  throw EigenConvergenceError("eigensolver did not reach the residual tolerance", pack(opt.max_iterations));
}

double outer_mass_fraction(const GridSpec& grid, std::span<const double> v) {
  const std::size_t n = grid.points_per_dim;
  double outer = 0.0, total = 0.0;
  const double half = 0.5 * grid.half_length;
  for (std::size_t k = 0; k < n; ++k) {
    const bool ok = std::abs(grid.coordinate(k)) > half;
    for (std::size_t j = 0; j < n; ++j) {
      const bool oj = ok || std::abs(grid.coordinate(j)) > half;
      for (std::size_t i = 0; i < n; ++i) {
        const double w = v[grid.index(i, j, k)] * v[grid.index(i, j, k)];
        total += w;
        if (oj || std::abs(grid.coordinate(i)) > half) outer += w;
      }
    }
  }
  return total > 0.0 ? outer / total : 0.0;
}

double neg_eigenvalue_sum(const ScalarField& A, std::size_t M, double tol, std::uint64_t seed) {
  double amax = 0.0;
  for (double x : A.values) amax = std::max(amax, std::abs(x));
  for (double x : A.values) {
    if (x < -1e-14 * amax) throw DomainError("neg_eigenvalue_sum requires A >= 0");
  }
  if (amax == 0.0) return 0.0;
  ScalarField W(A.grid);
  for (std::size_t p = 0; p < W.values.size(); ++p) W.values[p] = -A.values[p];
  const EigenResult r = lowest_eigenpairs(W, M, tol, seed);
  double s = 0.0;
  for (std::size_t j = 0; j < r.count(); ++j) {
    if (r.eigenvalues[j] >= 0.0) continue;
    const auto col = r.eigenfields.col(static_cast<Eigen::Index>(j));
    if (outer_mass_fraction(A.grid, {col.data(), A.grid.size()}) >= 0.5) continue;
    s -= r.eigenvalues[j];
  }
  return s;
}

}  // namespace fnls
