#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fnls/asymptotics.hpp"
#include "fnls/energy.hpp"
#include "fnls/grid.hpp"
#include "fnls/potentials.hpp"
#include "fnls/solvers.hpp"

namespace fnls {

enum class SolverMethod { Direct, Scf };

struct RunConfig {
  GridSpec grid = make_grid(8.0, 32);
  TrapPotential potential;
  std::size_t N = 1;
  /// Single coupling for `solve`.
  std::optional<double> a;
  /// Gap list a_N* - a for `sweep`, strictly decreasing.
  std::vector<double> gaps;
  /// Known a_N*; estimated when absent.
  std::optional<double> a_star;
  SolverConfig solver;
  SolverMethod method = SolverMethod::Direct;
  /// Grid of the free-space a_N* estimate.
  GridSpec astar_grid = make_grid(7.0, 64);
  SweepOptions sweep;
  double verify_tol = 1e-6;
  std::filesystem::path snapshot;
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 1;
};

/// Strict key=value parser: one assignment per line, '#' starts a comment,
/// unknown or repeated keys are errors. Messages carry the line number or the
/// offending key.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// Every key parse_config accepts.
const std::vector<std::string>& config_keys();

inline constexpr std::string_view kRecordsVersionLine = "# fnls records v1";

/// CSV with a version line and header; numbers carry 17 significant digits
/// so that reading back is exact.
std::string records_to_csv(const std::vector<SweepRecord>& records);
std::vector<SweepRecord> records_from_csv(std::string_view text);
void write_records(const std::vector<SweepRecord>& records, const std::filesystem::path& path);
std::vector<SweepRecord> read_records(const std::filesystem::path& path);

using NamedValues = std::vector<std::pair<std::string, double>>;

/// Two-column name,value CSV (fits, summaries).
std::string named_values_to_csv(const NamedValues& values);
NamedValues named_values_from_csv(std::string_view text);

/// Header a,kinetic,potential,interaction,total and one row per entry.
std::string energy_csv(const std::vector<EnergyBreakdown>& rows);

/// Header `iteration,<column>`.
std::string trace_csv(const std::vector<double>& trace, std::string_view column);

/// Columns named in header, one row per tuple.
std::string table_csv(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows);

std::string format_double(double x);

}  // namespace fnls
