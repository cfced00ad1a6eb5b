#pragma once

#include <complex>
#include <memory>
#include <span>
#include <vector>

#include "fnls/grid.hpp"

namespace fnls {

/// Half-spectrum (real-to-complex) Fourier coefficients of a real field.
using Spectrum = std::vector<std::complex<double>>;

/// FFT plans and wavenumber tables for one periodic grid.
///
/// Transforms use FFTW's new-array interface, so the const methods may be
/// called concurrently on distinct arrays. Plans are built with
/// FFTW_ESTIMATE, which keeps results bit-reproducible from run to run.
class Spectral {
 public:
  explicit Spectral(const GridSpec& grid);
  ~Spectral();
  Spectral(const Spectral&) = delete;
  Spectral& operator=(const Spectral&) = delete;

  /// Shared instance for a grid; plans are created once per (L, n).
  static std::shared_ptr<const Spectral> for_grid(const GridSpec& grid);

  const GridSpec& grid() const { return grid_; }
  std::size_t mode_count() const { return k2_.size(); }
  /// |k|^2 of each stored mode.
  std::span<const double> k2() const { return k2_; }
  /// Multiplicity of each stored mode in the full spectrum (1 or 2).
  std::span<const double> weight() const { return weight_; }
  /// Per-axis integer frequency of each stored mode.
  std::array<int, 3> frequency(std::size_t mode) const;

  void forward(std::span<const double> in, Spectrum& out) const;
  /// Inverse transform including the 1/n^3 normalization.
  void backward(const Spectrum& in, std::span<double> out) const;

  /// h^3 * sum_x a(x) b(x), evaluated from the coefficients.
  double inner(const Spectrum& a, const Spectrum& b) const;
  /// h^3 * sum_x a(x) (-Laplacian b)(x), evaluated from the coefficients.
  double kinetic_inner(const Spectrum& a, const Spectrum& b) const;

  /// Multiplies every coefficient by symbol(|k|^2).
  template <class Symbol>
  void apply_symbol(Spectrum& s, Symbol&& symbol) const {
    for (std::size_t m = 0; m < s.size(); ++m) s[m] *= symbol(k2_[m]);
  }

 private:
  GridSpec grid_;
  std::vector<double> k2_;
  std::vector<double> weight_;
  void* forward_plan_ = nullptr;
  void* backward_plan_ = nullptr;
};

/// Returns -Laplacian f, computed spectrally with periodic boundary.
ScalarField laplacian_apply(const ScalarField& f);
void neg_laplacian(const GridSpec& grid, std::span<const double> in, std::span<double> out);

/// Integral of |grad f|^2 via Parseval; always >= 0.
double kinetic_quadratic_form(const ScalarField& f);
double kinetic_quadratic_form(const GridSpec& grid, std::span<const double> f);

/// out = (-Laplacian + shift)^{-1} in, for shift > 0.
void apply_inverse_shifted(const GridSpec& grid, std::span<const double> in, std::span<double> out, double shift);

/// Zeroes every mode whose per-axis frequency exceeds 2/3 of Nyquist.
void dealias_two_thirds(const GridSpec& grid, std::span<double> f);

/// Worker threads for OpenMP regions, Eigen products and FFT plans created
/// after the call.
void set_thread_count(int threads);

}  // namespace fnls
