#include "fnls/orbitals.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include "fnls/errors.hpp"
#include "fnls/resample.hpp"
#include "fnls/snapshot.hpp"

namespace fnls {

namespace {
constexpr char kOrbitalMagic[4] = {'F', 'N', 'L', 'O'};
constexpr double kNearDegenerate = 1e-6;

void gram_schmidt_twice(const GridSpec& grid, Eigen::MatrixXd& u) {
  const double dv = grid.cell_volume();
  for (int pass = 0; pass < 2; ++pass) {
    for (Eigen::Index i = 0; i < u.cols(); ++i) {
      for (Eigen::Index j = 0; j < i; ++j) u.col(i) -= (dv * u.col(j).dot(u.col(i))) * u.col(j);
      const double nrm = std::sqrt(dv * u.col(i).squaredNorm());
      if (!(nrm > 0.0)) throw DegenerateFrameError("zero column during Gram-Schmidt", 0.0);
      u.col(i) /= nrm;
    }
  }
}
}  // namespace

OrbitalSet::OrbitalSet(const GridSpec& g, Eigen::MatrixXd columns)
    : OrbitalSet(g, std::move(columns), {}) {}

OrbitalSet::OrbitalSet(const GridSpec& g, Eigen::MatrixXd columns, std::vector<double> occ)
    : grid(g), orbitals(std::move(columns)), occupations(std::move(occ)) {
  if (static_cast<std::size_t>(orbitals.rows()) != grid.size()) {
    throw DomainError("orbital columns do not match the grid size");
  }
  if (orbitals.cols() < 1) throw DomainError("an orbital set needs at least one orbital");
  if (occupations.empty()) occupations.assign(count(), 1.0);
  if (occupations.size() != count()) throw DomainError("occupation count does not match orbital count");
  for (double n : occupations) {
    if (!(n >= 0.0)) throw DomainError("occupations must be nonnegative");
  }
}

OrbitalSet OrbitalSet::from_fields(const std::vector<ScalarField>& fields) {
  if (fields.empty()) throw DomainError("an orbital set needs at least one orbital");
  const GridSpec g = fields.front().grid;
  Eigen::MatrixXd m(static_cast<Eigen::Index>(g.size()), static_cast<Eigen::Index>(fields.size()));
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (!(fields[i].grid == g)) throw DomainError("orbitals live on different grids");
    m.col(static_cast<Eigen::Index>(i)) = Eigen::Map<const Eigen::VectorXd>(fields[i].values.data(), m.rows());
  }
  return OrbitalSet(g, std::move(m));
}

ScalarField OrbitalSet::orbital(std::size_t i) const {
  auto c = column(i);
  return ScalarField(grid, std::vector<double>(c.begin(), c.end()));
}

double OrbitalSet::max_occupation() const { return *std::max_element(occupations.begin(), occupations.end()); }

GramMatrix gram(const GridSpec& grid, const Eigen::MatrixXd& columns) {
  Eigen::MatrixXd g = grid.cell_volume() * (columns.transpose() * columns);
  return 0.5 * (g + g.transpose());
}

GramMatrix gram(const OrbitalSet& s) { return gram(s.grid, s.orbitals); }

void loewdin_in_place(const GridSpec& grid, Eigen::MatrixXd& columns, double sigma_min) {
  const GramMatrix g = gram(grid, columns);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double smallest = ev.minCoeff();
  if (!(smallest >= sigma_min)) {
    throw DegenerateFrameError("Gram matrix is numerically singular (smallest eigenvalue " +
                                   std::to_string(smallest) + ")",
                               smallest);
  }
  if (smallest < kNearDegenerate) {
    gram_schmidt_twice(grid, columns);
    return;
  }
  const Eigen::MatrixXd inv_sqrt =
      es.eigenvectors() * ev.cwiseSqrt().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
  columns = columns * inv_sqrt;
}

OrbitalSet loewdin(const OrbitalSet& s, double sigma_min) {
  OrbitalSet out = s;
  loewdin_in_place(out.grid, out.orbitals, sigma_min);
  return out;
}

void density_into(const OrbitalSet& s, std::span<double> rho) {
  std::fill(rho.begin(), rho.end(), 0.0);
  for (std::size_t i = 0; i < s.count(); ++i) {
    const double occ = s.occupations[i];
    auto u = s.column(i);
    for (std::size_t p = 0; p < rho.size(); ++p) rho[p] += occ * u[p] * u[p];
  }
}

ScalarField density(const OrbitalSet& s) {
  ScalarField rho(s.grid);
  density_into(s, rho.values);
  return rho;
}

OrbitalSet random_init(const GridSpec& grid, std::size_t count, std::uint64_t seed, double width) {
  if (count < 1) throw DomainError("orbital count must be at least 1");
  if (!(width > 0.0) || !(width < grid.half_length / 3.0)) {
    throw DomainError("initial width must lie in (0, L/3)");
  }
  for (int attempt = 0; attempt <= 5; ++attempt) {
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(attempt) * 0x9E3779B97F4A7C15ULL);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    Eigen::MatrixXd u(static_cast<Eigen::Index>(grid.size()), static_cast<Eigen::Index>(count));
    for (std::size_t c = 0; c < count; ++c) {
      // Quadratic polynomial in x / width: 1 + 3 linear + 6 quadratic terms.
      double p0 = coef(rng);
      Vec3 p1{coef(rng), coef(rng), coef(rng)};
      std::array<double, 6> p2{};
      for (double& v : p2) v = coef(rng);
      std::size_t idx = 0;
      const std::size_t n = grid.points_per_dim;
      for (std::size_t k = 0; k < n; ++k) {
        const double z = grid.coordinate(k) / width;
        for (std::size_t j = 0; j < n; ++j) {
          const double y = grid.coordinate(j) / width;
          for (std::size_t i = 0; i < n; ++i, ++idx) {
            const double x = grid.coordinate(i) / width;
            const double poly = p0 + p1[0] * x + p1[1] * y + p1[2] * z + p2[0] * x * x + p2[1] * y * y +
                                p2[2] * z * z + p2[3] * x * y + p2[4] * y * z + p2[5] * x * z;
            u(static_cast<Eigen::Index>(idx), static_cast<Eigen::Index>(c)) =
                poly * std::exp(-0.5 * (x * x + y * y + z * z));
          }
        }
      }
    }
    try {
      loewdin_in_place(grid, u);
      return OrbitalSet(grid, std::move(u));
    } catch (const DegenerateFrameError&) {
      if (attempt == 5) throw;
    }
  }
  throw DegenerateFrameError("random_init exhausted its retries", 0.0);
}

void write_orbitals(std::ostream& os, const OrbitalSet& s) {
  os.write(kOrbitalMagic, 4);
  detail::write_u32(os, kSnapshotVersion);
  detail::write_u32(os, static_cast<std::uint32_t>(s.count()));
  for (double n : s.occupations) detail::write_f64(os, n);
  for (std::size_t i = 0; i < s.count(); ++i) write_field(os, s.orbital(i));
}

OrbitalSet read_orbitals(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4)) throw FormatError("orbital snapshot truncated before magic");
  if (std::memcmp(magic, kOrbitalMagic, 4) != 0) throw FormatError("bad orbital snapshot magic");
  const auto version = detail::read_u32(is);
  if (version != kSnapshotVersion) {
    throw FormatError("unsupported orbital snapshot version " + std::to_string(version));
  }
  const auto count = detail::read_u32(is);
  if (count < 1 || count > 4096) throw FormatError("implausible orbital count in snapshot");
  std::vector<double> occ(count);
  for (double& n : occ) n = detail::read_f64(is);
  std::vector<ScalarField> fields;
  fields.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) fields.push_back(read_field(is));
  OrbitalSet s = OrbitalSet::from_fields(fields);
  s.occupations = std::move(occ);
  return s;
}

void save_orbitals(const std::filesystem::path& path, const OrbitalSet& s) {
  std::ostringstream os(std::ios::binary);
  write_orbitals(os, s);
  write_file_atomic(path, os.str());
}

OrbitalSet load_orbitals(const std::filesystem::path& path) {
  std::istringstream is(read_file(path), std::ios::binary);
  return read_orbitals(is);
}

OrbitalSet transform_frame(const OrbitalSet& s, const GridSpec& target, double scale, const Vec3& shift) {
  const AffineResampler rs(s.grid, target, scale, shift);
  const double amp = scale * std::sqrt(scale);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(target.size()), s.orbitals.cols());
  for (std::size_t i = 0; i < s.count(); ++i) {
    rs.apply(s.column(i), {out.col(static_cast<Eigen::Index>(i)).data(), target.size()}, amp);
  }
  return OrbitalSet(target, std::move(out), s.occupations);
}

DensityMoments density_moments(const ScalarField& rho) {
  const GridSpec& g = rho.grid;
  DensityMoments m;
  double sx[3] = {0.0, 0.0, 0.0};
  double s2 = 0.0;
  for (std::size_t p = 0; p < g.size(); ++p) {
    const Vec3 x = g.node(p);
    const double w = rho.values[p];
    m.mass += w;
    for (int a = 0; a < 3; ++a) sx[a] += w * x[a];
    s2 += w * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
  }
  if (!(m.mass > 0.0)) throw DomainError("moments of a zero density");
  for (int a = 0; a < 3; ++a) m.center[a] = sx[a] / m.mass;
  const double c2 = m.center[0] * m.center[0] + m.center[1] * m.center[1] + m.center[2] * m.center[2];
  m.rms_radius = std::sqrt(std::max(0.0, s2 / m.mass - c2));
  m.mass *= g.cell_volume();
  return m;
}

}  // namespace fnls
