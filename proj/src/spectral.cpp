#include "fnls/spectral.hpp"

#include <fftw3.h>

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <utility>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fnls {
namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// Per-thread SIMD-aligned work arrays; every transform runs through them so
// the plans can be created without FFTW_UNALIGNED.
struct AlignedScratch {
  double* real = nullptr;
  fftw_complex* cplx = nullptr;
  std::size_t real_size = 0;
  std::size_t cplx_size = 0;
  ~AlignedScratch() {
    fftw_free(real);
    fftw_free(cplx);
  }
  void reserve(std::size_t nr, std::size_t nc) {
    if (nr > real_size) {
      fftw_free(real);
      real = fftw_alloc_real(nr);
      real_size = nr;
    }
    if (nc > cplx_size) {
      fftw_free(cplx);
      cplx = fftw_alloc_complex(nc);
      cplx_size = nc;
    }
  }
};

std::mutex& cache_mutex() {
  static std::mutex m;
  return m;
}

std::map<std::pair<std::size_t, double>, std::shared_ptr<const Spectral>>& plan_cache() {
  static std::map<std::pair<std::size_t, double>, std::shared_ptr<const Spectral>> cache;
  return cache;
}

AlignedScratch& scratch() {
  thread_local AlignedScratch s;
  return s;
}

int signed_frequency(std::size_t i, std::size_t n) {
  // The Nyquist index keeps +n/2 so that its symbol is (pi/h)^2.
  return i <= n / 2 ? static_cast<int>(i) : static_cast<int>(i) - static_cast<int>(n);
}

}  // namespace

Spectral::Spectral(const GridSpec& grid) : grid_(grid) {
  const std::size_t n = grid.points_per_dim;
  const std::size_t nh = n / 2 + 1;
  k2_.resize(n * n * nh);
  weight_.resize(k2_.size());
  const double dk = std::numbers::pi / grid.half_length;
  std::size_t m = 0;
  for (std::size_t i3 = 0; i3 < n; ++i3) {
    const double k3 = dk * signed_frequency(i3, n);
    for (std::size_t i2 = 0; i2 < n; ++i2) {
      const double k2 = dk * signed_frequency(i2, n);
      for (std::size_t i1 = 0; i1 < nh; ++i1, ++m) {
        const double k1 = dk * static_cast<double>(i1);
        k2_[m] = k1 * k1 + k2 * k2 + k3 * k3;
        weight_[m] = (i1 == 0 || i1 == n / 2) ? 1.0 : 2.0;
      }
    }
  }

  std::lock_guard lock(planner_mutex());
  const int dim = static_cast<int>(n);
  double* real = fftw_alloc_real(grid.size());
  fftw_complex* cplx = fftw_alloc_complex(k2_.size());
  const unsigned flags = FFTW_ESTIMATE;
  forward_plan_ = fftw_plan_dft_r2c_3d(dim, dim, dim, real, cplx, flags);
  backward_plan_ = fftw_plan_dft_c2r_3d(dim, dim, dim, cplx, real, flags);
  fftw_free(real);
  fftw_free(cplx);
}

Spectral::~Spectral() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(backward_plan_));
}

std::shared_ptr<const Spectral> Spectral::for_grid(const GridSpec& grid) {
  std::lock_guard lock(cache_mutex());
  auto& cache = plan_cache();
  auto key = std::make_pair(grid.points_per_dim, grid.half_length);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto inst = std::make_shared<const Spectral>(grid);
  cache.emplace(key, inst);
  return inst;
}

std::array<int, 3> Spectral::frequency(std::size_t mode) const {
  const std::size_t n = grid_.points_per_dim;
  const std::size_t nh = n / 2 + 1;
  const std::size_t i1 = mode % nh;
  const std::size_t i2 = (mode / nh) % n;
  const std::size_t i3 = mode / (nh * n);
  return {static_cast<int>(i1), signed_frequency(i2, n), signed_frequency(i3, n)};
}

void Spectral::forward(std::span<const double> in, Spectrum& out) const {
  AlignedScratch& w = scratch();
  w.reserve(grid_.size(), k2_.size());
  std::copy(in.begin(), in.end(), w.real);
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_plan_), w.real, w.cplx);
  out.resize(k2_.size());
  std::copy_n(reinterpret_cast<const std::complex<double>*>(w.cplx), k2_.size(), out.data());
}

void Spectral::backward(const Spectrum& in, std::span<double> out) const {
  AlignedScratch& w = scratch();
  w.reserve(grid_.size(), k2_.size());
  std::copy(in.begin(), in.end(), reinterpret_cast<std::complex<double>*>(w.cplx));
  fftw_execute_dft_c2r(static_cast<fftw_plan>(backward_plan_), w.cplx, w.real);
  const double scale = 1.0 / static_cast<double>(grid_.size());
  for (std::size_t p = 0; p < out.size(); ++p) out[p] = w.real[p] * scale;
}

double Spectral::inner(const Spectrum& a, const Spectrum& b) const {
  double s = 0.0;
  for (std::size_t m = 0; m < a.size(); ++m) {
    s += weight_[m] * (a[m].real() * b[m].real() + a[m].imag() * b[m].imag());
  }
  return s * grid_.cell_volume() / static_cast<double>(grid_.size());
}

double Spectral::kinetic_inner(const Spectrum& a, const Spectrum& b) const {
  double s = 0.0;
  for (std::size_t m = 0; m < a.size(); ++m) {
    s += weight_[m] * k2_[m] * (a[m].real() * b[m].real() + a[m].imag() * b[m].imag());
  }
  return s * grid_.cell_volume() / static_cast<double>(grid_.size());
}

void neg_laplacian(const GridSpec& grid, std::span<const double> in, std::span<double> out) {
  auto sp = Spectral::for_grid(grid);
  Spectrum c;
  sp->forward(in, c);
  auto k2 = sp->k2();
  for (std::size_t m = 0; m < c.size(); ++m) c[m] *= k2[m];
  sp->backward(c, out);
}

void apply_inverse_shifted(const GridSpec& grid, std::span<const double> in, std::span<double> out, double shift) {
  auto sp = Spectral::for_grid(grid);
  Spectrum c;
  sp->forward(in, c);
  auto k2 = sp->k2();
  for (std::size_t m = 0; m < c.size(); ++m) c[m] /= k2[m] + shift;
  sp->backward(c, out);
}

ScalarField laplacian_apply(const ScalarField& f) {
  ScalarField out(f.grid);
  neg_laplacian(f.grid, f.values, out.values);
  return out;
}

double kinetic_quadratic_form(const GridSpec& grid, std::span<const double> f) {
  auto sp = Spectral::for_grid(grid);
  Spectrum c;
  sp->forward(f, c);
  return sp->kinetic_inner(c, c);
}

double kinetic_quadratic_form(const ScalarField& f) { return kinetic_quadratic_form(f.grid, f.values); }

void dealias_two_thirds(const GridSpec& grid, std::span<double> f) {
  auto sp = Spectral::for_grid(grid);
  Spectrum c;
  sp->forward(f, c);
  const int cutoff = static_cast<int>(grid.points_per_dim) / 3;
  for (std::size_t m = 0; m < c.size(); ++m) {
    auto q = sp->frequency(m);
    if (std::abs(q[0]) > cutoff || std::abs(q[1]) > cutoff || std::abs(q[2]) > cutoff) c[m] = 0.0;
  }
  sp->backward(c, f);
}

void set_thread_count(int threads) {
  if (threads < 1) threads = 1;
#ifdef _OPENMP
  omp_set_num_threads(threads);
#endif
  Eigen::setNbThreads(threads);
#ifdef FNLS_HAVE_FFTW_OMP
  {
    std::lock_guard lock(planner_mutex());
    static const bool initialized = fftw_init_threads() != 0;
    if (initialized) fftw_plan_with_nthreads(threads);
  }
  std::lock_guard lock(cache_mutex());
  plan_cache().clear();
#endif
}

}  // namespace fnls
