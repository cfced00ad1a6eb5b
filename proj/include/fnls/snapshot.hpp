#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "fnls/grid.hpp"

namespace fnls {

/// Field snapshot layout (little-endian):
///   "FNLS" | u32 version | u32 n | f64 L | u64 payload bytes | n^3 f64
inline constexpr char kFieldMagic[4] = {'F', 'N', 'L', 'S'};
inline constexpr std::uint32_t kSnapshotVersion = 1;

void write_field(std::ostream& os, const ScalarField& f);
/// Throws FormatError on bad magic, version or payload length; nothing is
/// returned on a partial read.
ScalarField read_field(std::istream& is);

void save_field(const std::filesystem::path& path, const ScalarField& f);
ScalarField load_field(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& bytes);
std::string read_file(const std::filesystem::path& path);

namespace detail {
void write_u32(std::ostream& os, std::uint32_t v);
void write_u64(std::ostream& os, std::uint64_t v);
void write_f64(std::ostream& os, double v);
std::uint32_t read_u32(std::istream& is);
std::uint64_t read_u64(std::istream& is);
double read_f64(std::istream& is);
}  // namespace detail

}  // namespace fnls
