#include "fnls/snapshot.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "fnls/errors.hpp"

namespace fnls {
namespace detail {
namespace {

template <class T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    std::memcpy(&v, b, sizeof(T));
    return v;
  }
}

template <class T>
void put(std::ostream& os, T v) {
  v = to_little(v);
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v;
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) throw FormatError("snapshot truncated");
  return to_little(v);
}

}  // namespace

void write_u32(std::ostream& os, std::uint32_t v) { put(os, v); }
void write_u64(std::ostream& os, std::uint64_t v) { put(os, v); }
void write_f64(std::ostream& os, double v) { put(os, std::bit_cast<std::uint64_t>(v)); }
std::uint32_t read_u32(std::istream& is) { return get<std::uint32_t>(is); }
std::uint64_t read_u64(std::istream& is) { return get<std::uint64_t>(is); }
double read_f64(std::istream& is) { return std::bit_cast<double>(get<std::uint64_t>(is)); }

}  // namespace detail

void write_field(std::ostream& os, const ScalarField& f) {
  os.write(kFieldMagic, 4);
  detail::write_u32(os, kSnapshotVersion);
  detail::write_u32(os, static_cast<std::uint32_t>(f.grid.points_per_dim));
  detail::write_f64(os, f.grid.half_length);
  detail::write_u64(os, static_cast<std::uint64_t>(f.values.size() * sizeof(double)));
  if constexpr (std::endian::native == std::endian::little) {
    os.write(reinterpret_cast<const char*>(f.values.data()), static_cast<std::streamsize>(f.values.size() * sizeof(double)));
  } else {
    for (double v : f.values) detail::write_f64(os, v);
  }
}

ScalarField read_field(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4)) throw FormatError("snapshot truncated before magic");
  if (std::memcmp(magic, kFieldMagic, 4) != 0) throw FormatError("bad field snapshot magic");
  const auto version = detail::read_u32(is);
  if (version != kSnapshotVersion) {
    throw FormatError("unsupported field snapshot version " + std::to_string(version));
  }
  const auto n = detail::read_u32(is);
  const double L = detail::read_f64(is);
  const auto bytes = detail::read_u64(is);
  GridSpec grid;
  try {
    grid = make_grid(L, n);
  } catch (const ConfigError& e) {
    throw FormatError(std::string("snapshot header describes an invalid grid: ") + e.what());
  }
  if (bytes != grid.size() * sizeof(double)) throw FormatError("snapshot payload length does not match n^3");
  std::vector<double> values(grid.size());
  if constexpr (std::endian::native == std::endian::little) {
    if (!is.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(bytes))) {
      throw FormatError("snapshot payload truncated");
    }
  } else {
    for (double& v : values) v = detail::read_f64(is);
  }
  return ScalarField(grid, std::move(values));
}

void write_file_atomic(const std::filesystem::path& path, const std::string& bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open " + tmp.string() + " for writing");
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!os) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot rename temporary file onto " + path.string());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void save_field(const std::filesystem::path& path, const ScalarField& f) {
  std::ostringstream os(std::ios::binary);
  write_field(os, f);
  write_file_atomic(path, os.str());
}

ScalarField load_field(const std::filesystem::path& path) {
  std::istringstream is(read_file(path), std::ios::binary);
  return read_field(is);
}

}  // namespace fnls
