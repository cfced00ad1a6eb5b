#include "fnls/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "fnls/errors.hpp"
#include "fnls/snapshot.hpp"

namespace fnls {
namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_double(std::string_view s, const std::string& what) {
  const std::string str(trim(s));
  if (str.empty()) throw ConfigError(what + ": empty number");
  char* end = nullptr;
  const double v = std::strtod(str.c_str(), &end);
  if (end != str.c_str() + str.size() || !std::isfinite(v)) throw ConfigError(what + ": not a finite number '" + str + "'");
  return v;
}

std::uint64_t parse_uint(std::string_view s, const std::string& what) {
  s = trim(s);
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw ConfigError(what + ": not a nonnegative integer '" + std::string(s) + "'");
  return v;
}

bool parse_bool(std::string_view s, const std::string& what) {
  s = trim(s);
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw ConfigError(what + ": expected true or false");
}

std::vector<double> parse_list(std::string_view s, const std::string& what) {
  std::vector<double> out;
  for (auto part : split(s, ',')) out.push_back(parse_double(part, what));
  return out;
}

Vec3 parse_vec3(std::string_view s, const std::string& what) {
  const auto v = parse_list(s, what);
  if (v.size() == 1) return {v[0], v[0], v[0]};
  if (v.size() != 3) throw ConfigError(what + ": expected 1 or 3 comma-separated values");
  return {v[0], v[1], v[2]};
}

double parse_csv_double(std::string_view s, std::size_t line) {
  const std::string str(trim(s));
  char* end = nullptr;
  const double v = std::strtod(str.c_str(), &end);
  if (str.empty() || end != str.c_str() + str.size()) {
    throw FormatError("line " + std::to_string(line) + ": bad number '" + str + "'");
  }
  return v;
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out = split(text, '\n');
  if (!out.empty() && out.back().empty()) out.pop_back();
  return out;
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "grid.L",           "grid.n",          "potential.kind",     "potential.omega1",   "potential.omega2",
      "potential.A",      "potential.omega", "potential.center",   "problem.N",          "problem.a",
      "problem.gaps",     "problem.a_star",  "solver.method",      "solver.max_outer",   "solver.energy_tol",
      "solver.residual_tol", "solver.step0", "solver.backtrack",   "solver.mixing",      "solver.rescale_radius",
      "solver.dealias",   "astar.L",         "astar.n",            "sweep.n",            "sweep.box_scale",
      "verify.tol",       "verify.snapshot", "output.dir",         "seed"};
  return keys;
}

RunConfig parse_config(std::string_view text) {
  const std::set<std::string> known(config_keys().begin(), config_keys().end());
  std::map<std::string, std::pair<std::string, std::size_t>> kv;
  const auto lines = split(text, '\n');
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = lines[i];
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = "line " + std::to_string(i + 1);
    if (eq == std::string_view::npos) throw ConfigError(where + ": expected key=value");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError(where + ": empty key");
    if (!known.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
    if (value.empty()) throw ConfigError(where + ": empty value for '" + key + "'");
    if (kv.count(key)) throw ConfigError(where + ": repeated key '" + key + "'");
    kv[key] = {value, i + 1};
  }
  auto has = [&](const char* k) { return kv.count(k) > 0; };
  auto raw = [&](const char* k) -> const std::string& { return kv.at(k).first; };
  auto num = [&](const char* k) { return parse_double(raw(k), k); };
  auto uint = [&](const char* k) { return parse_uint(raw(k), k); };

  RunConfig rc;
  auto grid_of = [&](const char* lk, const char* nk, GridSpec fallback) {
    const double L = has(lk) ? num(lk) : fallback.half_length;
    const std::size_t n = has(nk) ? uint(nk) : fallback.points_per_dim;
    try {
      return make_grid(L, n);
    } catch (const ConfigError& e) {
      throw ConfigError(std::string(lk) + "/" + nk + ": " + e.what());
    }
  };
  rc.grid = grid_of("grid.L", "grid.n", rc.grid);
  rc.astar_grid = grid_of("astar.L", "astar.n", rc.astar_grid);

  const std::string kind = has("potential.kind") ? raw("potential.kind") : "zero";
  auto forbid = [&](std::initializer_list<const char*> keys) {
    for (const char* k : keys) {
      if (has(k)) throw ConfigError(std::string(k) + ": not used by potential.kind=" + kind);
    }
  };
  if (kind == "zero") {
    forbid({"potential.omega1", "potential.omega2", "potential.A", "potential.omega", "potential.center"});
    rc.potential = TrapPotential::zero();
  } else if (kind == "harmonic") {
    forbid({"potential.omega1", "potential.omega2", "potential.A"});
    const Vec3 omega = has("potential.omega") ? parse_vec3(raw("potential.omega"), "potential.omega") : Vec3{1, 1, 1};
    const Vec3 center = has("potential.center") ? parse_vec3(raw("potential.center"), "potential.center") : Vec3{};
    for (double w : omega) {
      if (!(w > 0.0)) throw ConfigError("potential.omega: frequencies must be positive");
    }
    rc.potential = TrapPotential::harmonic(omega, center);
  } else if (kind == "ring") {
    forbid({"potential.omega", "potential.center"});
    const double w1 = has("potential.omega1") ? num("potential.omega1") : 1.0;
    const double w2 = has("potential.omega2") ? num("potential.omega2") : 1.0;
    if (!has("potential.A")) throw ConfigError("potential.A: required for potential.kind=ring");
    const double A = num("potential.A");
    if (!(w1 > 0.0)) throw ConfigError("potential.omega1: must be positive");
    if (!(w2 > 0.0)) throw ConfigError("potential.omega2: must be positive");
    if (!(A > 0.0)) throw ConfigError("potential.A: must be positive");
    if (!(A < 0.5 * rc.grid.half_length)) throw ConfigError("potential.A: ring must satisfy A < L/2");
    rc.potential = TrapPotential::ring(w1, w2, A);
  } else {
    throw ConfigError("potential.kind: expected zero, harmonic or ring");
  }

  if (has("problem.N")) {
    rc.N = uint("problem.N");
    if (rc.N < 1) throw ConfigError("problem.N: must be at least 1");
  }
  if (has("problem.a")) {
    rc.a = num("problem.a");
    if (!(*rc.a >= 0.0)) throw ConfigError("problem.a: must be nonnegative");
  }
  if (has("problem.gaps")) {
    rc.gaps = parse_list(raw("problem.gaps"), "problem.gaps");
    for (std::size_t k = 0; k < rc.gaps.size(); ++k) {
      if (!(rc.gaps[k] > 0.0)) throw ConfigError("problem.gaps: gaps must be positive");
      if (k > 0 && !(rc.gaps[k] < rc.gaps[k - 1])) throw ConfigError("problem.gaps: gaps must be strictly decreasing");
    }
  }
  if (has("problem.a_star")) {
    rc.a_star = num("problem.a_star");
    if (!(*rc.a_star > 0.0)) throw ConfigError("problem.a_star: must be positive");
  }

  if (has("solver.method")) {
    const std::string& m = raw("solver.method");
    if (m == "direct") {
      rc.method = SolverMethod::Direct;
    } else if (m == "scf") {
      rc.method = SolverMethod::Scf;
    } else {
      throw ConfigError("solver.method: expected direct or scf");
    }
  }
  SolverConfig& s = rc.solver;
  if (has("solver.max_outer")) s.max_outer = static_cast<int>(uint("solver.max_outer"));
  if (has("solver.energy_tol")) s.energy_tol = num("solver.energy_tol");
  if (has("solver.residual_tol")) s.residual_tol = num("solver.residual_tol");
  if (has("solver.step0")) s.step0 = num("solver.step0");
  if (has("solver.backtrack")) s.backtrack = num("solver.backtrack");
  if (has("solver.mixing")) s.mixing = num("solver.mixing");
  if (has("solver.rescale_radius")) s.rescale_radius = num("solver.rescale_radius");
  if (has("solver.dealias")) s.dealias = parse_bool(raw("solver.dealias"), "solver.dealias");
  s.validate();

  if (has("sweep.n")) {
    rc.sweep.points_per_dim = uint("sweep.n");
    try {
      make_grid(1.0, rc.sweep.points_per_dim);
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("sweep.n: ") + e.what());
    }
  }
  if (has("sweep.box_scale")) {
    rc.sweep.box_scale = num("sweep.box_scale");
    if (!(rc.sweep.box_scale > 0.0)) throw ConfigError("sweep.box_scale: must be positive");
  }
  if (has("verify.tol")) {
    rc.verify_tol = num("verify.tol");
    if (!(rc.verify_tol > 0.0)) throw ConfigError("verify.tol: must be positive");
  }
  if (has("verify.snapshot")) rc.snapshot = raw("verify.snapshot");
  if (has("output.dir")) rc.output_dir = raw("output.dir");
  if (has("seed")) rc.seed = uint("seed");
  rc.solver.seed = rc.seed;
  return rc;
}

RunConfig load_config(const std::filesystem::path& path) { return parse_config(read_file(path)); }

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string records_to_csv(const std::vector<SweepRecord>& records) {
  std::size_t nmu = records.empty() ? 0 : records.front().mu.size();
  for (const auto& r : records) {
    if (r.mu.size() != nmu) throw DomainError("records carry different multiplier counts");
  }
  std::ostringstream os;
  os << kRecordsVersionLine << '\n';
  os << "a,gap,eps,energy,rho53,x1,x2,x3,boundary_leak,spacing,converged,iterations";
  for (std::size_t i = 0; i < nmu; ++i) os << ",mu" << (i + 1);
  os << '\n';
  for (const auto& r : records) {
    os << format_double(r.a) << ',' << format_double(r.gap) << ',' << format_double(r.eps) << ','
       << format_double(r.energy) << ',' << format_double(r.rho53) << ',' << format_double(r.x_max[0]) << ','
       << format_double(r.x_max[1]) << ',' << format_double(r.x_max[2]) << ',' << format_double(r.boundary_leak)
       << ',' << format_double(r.spacing) << ',' << (r.converged ? 1 : 0) << ',' << r.iterations;
    for (double m : r.mu) os << ',' << format_double(m);
    os << '\n';
  }
  return os.str();
}

std::vector<SweepRecord> records_from_csv(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.empty() || trim(lines[0]) != kRecordsVersionLine) throw FormatError("records file: missing or unsupported version line");
  if (lines.size() < 2) throw FormatError("records file: missing header");
  const auto header = split(lines[1], ',');
  const std::size_t fixed = 12;
  if (header.size() < fixed || header[0] != "a" || header[11] != "iterations") throw FormatError("records file: bad header");
  const std::size_t nmu = header.size() - fixed;
  std::vector<SweepRecord> out;
  for (std::size_t i = 2; i < lines.size(); ++i) {
    const auto cells = split(lines[i], ',');
    if (cells.size() != header.size()) throw FormatError("line " + std::to_string(i + 1) + ": wrong column count");
    std::vector<double> v;
    for (auto c : cells) v.push_back(parse_csv_double(c, i + 1));
    SweepRecord r;
    r.a = v[0];
    r.gap = v[1];
    r.eps = v[2];
    r.energy = v[3];
    r.rho53 = v[4];
    r.x_max = {v[5], v[6], v[7]};
    r.boundary_leak = v[8];
    r.spacing = v[9];
    r.converged = v[10] != 0.0;
    r.iterations = static_cast<int>(v[11]);
    r.mu.assign(v.begin() + fixed, v.begin() + static_cast<std::ptrdiff_t>(fixed + nmu));
    out.push_back(std::move(r));
  }
  return out;
}

void write_records(const std::vector<SweepRecord>& records, const std::filesystem::path& path) {
  write_file_atomic(path, records_to_csv(records));
}

std::vector<SweepRecord> read_records(const std::filesystem::path& path) { return records_from_csv(read_file(path)); }

std::string named_values_to_csv(const NamedValues& values) {
  std::ostringstream os;
  os << "name,value\n";
  for (const auto& [name, value] : values) {
    if (name.find_first_of(",\n") != std::string::npos) throw DomainError("value names may not contain commas");
    os << name << ',' << format_double(value) << '\n';
  }
  return os.str();
}

NamedValues named_values_from_csv(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.empty() || trim(lines[0]) != "name,value") throw FormatError("name,value file: bad header");
  NamedValues out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = split(lines[i], ',');
    if (cells.size() != 2) throw FormatError("line " + std::to_string(i + 1) + ": expected name,value");
    out.emplace_back(std::string(cells[0]), parse_csv_double(cells[1], i + 1));
  }
  return out;
}

std::string energy_csv(const std::vector<EnergyBreakdown>& rows) {
  std::ostringstream os;
  os << "a,kinetic,potential,interaction,total\n";
  for (const auto& e : rows) {
    os << format_double(e.a) << ',' << format_double(e.kinetic) << ',' << format_double(e.potential) << ','
       << format_double(e.interaction) << ',' << format_double(e.total) << '\n';
  }
  return os.str();
}

std::string trace_csv(const std::vector<double>& trace, std::string_view column) {
  std::ostringstream os;
  os << "iteration," << column << '\n';
  for (std::size_t i = 0; i < trace.size(); ++i) os << i << ',' << format_double(trace[i]) << '\n';
  return os.str();
}

std::string table_csv(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
  std::ostringstream os;
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << '\n';
  for (const auto& row : rows) {
    if (row.size() != header.size()) throw DomainError("table row width does not match header");
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_double(row[i]);
    os << '\n';
  }
  return os.str();
}

}  // namespace fnls
