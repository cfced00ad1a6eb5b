#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "fnls/asymptotics.hpp"
#include "fnls/eigensolve.hpp"
#include "fnls/energy.hpp"
#include "fnls/errors.hpp"
#include "fnls/io.hpp"
#include "fnls/orbitals.hpp"
#include "fnls/potentials.hpp"
#include "fnls/solvers.hpp"
#include "fnls/spectral.hpp"

namespace py = pybind11;
using namespace fnls;

namespace {

ScalarField field_from_array(const GridSpec& g, py::array_t<double, py::array::c_style | py::array::forcecast> a) {
  if (static_cast<std::size_t>(a.size()) != g.size()) throw DomainError("array size does not match the grid");
  return ScalarField(g, std::vector<double>(a.data(), a.data() + a.size()));
}

py::array_t<double> field_to_array(const ScalarField& f) {
  const auto n = static_cast<py::ssize_t>(f.grid.points_per_dim);
  py::array_t<double> out({n, n, n});
  std::copy(f.values.begin(), f.values.end(), out.mutable_data());
  return out;
}

}  // namespace

PYBIND11_MODULE(_fnls, m) {
  m.doc() = "Ground states of N-orbital mass-critical fermionic NLS systems in a periodic box";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<DegenerateFrameError>(m, "DegenerateFrameError", base.ptr());
  py::register_exception<FormatError>(m, "FormatError", base.ptr());
  py::register_exception<ConvergenceError>(m, "ConvergenceError", base.ptr());

  py::class_<GridSpec>(m, "GridSpec")
      .def_readonly("half_length", &GridSpec::half_length)
      .def_readonly("points_per_dim", &GridSpec::points_per_dim)
      .def_readonly("spacing", &GridSpec::spacing)
      .def_property_readonly("size", &GridSpec::size)
      .def("__eq__", &GridSpec::operator==)
      .def("__repr__", [](const GridSpec& g) {
        return "GridSpec(L=" + std::to_string(g.half_length) + ", n=" + std::to_string(g.points_per_dim) + ")";
      });
  m.def("make_grid", &make_grid, py::arg("half_length"), py::arg("points_per_dim"));
  m.def("coordinates", [](const GridSpec& g) {
    std::vector<double> x(g.points_per_dim);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = g.coordinate(i);
    return py::array_t<double>(std::vector<py::ssize_t>{static_cast<py::ssize_t>(x.size())}, x.data());
  }, "Node coordinates along one axis.");

  m.def("integrate", [](const GridSpec& g, py::array_t<double, py::array::c_style | py::array::forcecast> f) {
    return integrate(field_from_array(g, f));
  }, py::arg("grid"), py::arg("values"));
  m.def("laplacian_apply", [](const GridSpec& g, py::array_t<double, py::array::c_style | py::array::forcecast> f) {
    return field_to_array(laplacian_apply(field_from_array(g, f)));
  }, py::arg("grid"), py::arg("values"), "Returns -Laplacian f on the periodic grid.");
  m.def("kinetic_quadratic_form", [](const GridSpec& g, py::array_t<double, py::array::c_style | py::array::forcecast> f) {
    return kinetic_quadratic_form(field_from_array(g, f));
  }, py::arg("grid"), py::arg("values"));
  m.def("set_thread_count", &set_thread_count, py::arg("threads"));

  py::class_<TrapPotential>(m, "TrapPotential")
      .def_static("zero", &TrapPotential::zero)
      .def_static("harmonic", &TrapPotential::harmonic, py::arg("omega"), py::arg("center") = Vec3{0.0, 0.0, 0.0})
      .def_static("ring", &TrapPotential::ring, py::arg("omega1"), py::arg("omega2"), py::arg("radius"))
      .def("__call__", &TrapPotential::operator(), py::arg("x"))
      .def_property_readonly("kind", &TrapPotential::kind)
      .def("minimum_point", &TrapPotential::minimum_point);
  m.def("sample_potential", [](const TrapPotential& v, const GridSpec& g) { return field_to_array(sample_potential(v, g)); },
        py::arg("potential"), py::arg("grid"));
  m.def("beta_level_integral", &beta_level_integral, py::arg("potential"), py::arg("beta"), py::arg("grid"));

  py::class_<OrbitalSet>(m, "OrbitalSet")
      .def(py::init([](const GridSpec& g, const Eigen::MatrixXd& columns) { return OrbitalSet(g, columns); }),
           py::arg("grid"), py::arg("orbitals"))
      .def_readonly("grid", &OrbitalSet::grid)
      .def_readwrite("orbitals", &OrbitalSet::orbitals, "(n^3, N) matrix of orbital samples, x1 fastest")
      .def_readwrite("occupations", &OrbitalSet::occupations)
      .def_property_readonly("count", &OrbitalSet::count)
      .def("density", [](const OrbitalSet& s) { return field_to_array(density(s)); })
      .def("gram", [](const OrbitalSet& s) { return gram(s); });
  m.def("loewdin", [](const OrbitalSet& s) { return loewdin(s); }, py::arg("frame"));
  m.def("random_init", &random_init, py::arg("grid"), py::arg("count"), py::arg("seed"), py::arg("width"));
  m.def("transform_frame", &transform_frame, py::arg("frame"), py::arg("target"), py::arg("scale"), py::arg("shift"));
  m.def("save_orbitals", &save_orbitals, py::arg("path"), py::arg("frame"));
  m.def("load_orbitals", &load_orbitals, py::arg("path"));

  py::class_<EnergyBreakdown>(m, "EnergyBreakdown")
      .def_readonly("kinetic", &EnergyBreakdown::kinetic)
      .def_readonly("potential", &EnergyBreakdown::potential)
      .def_readonly("interaction", &EnergyBreakdown::interaction)
      .def_readonly("total", &EnergyBreakdown::total)
      .def_readonly("a", &EnergyBreakdown::a);
  m.def("energy", [](const OrbitalSet& s, double a, const TrapPotential& v) { return energy(s, a, v); },
        py::arg("frame"), py::arg("a"), py::arg("potential"));
  m.def("lt_ratio", &lt_ratio, py::arg("frame"));
  m.def("multipliers", [](const OrbitalSet& s, double a, const TrapPotential& v) {
    return subspace_hamiltonian(s, a, v).multipliers.mu;
  }, py::arg("frame"), py::arg("a"), py::arg("potential"));

  py::class_<EigenResult>(m, "EigenResult")
      .def_readonly("eigenvalues", &EigenResult::eigenvalues)
      .def_readonly("eigenfields", &EigenResult::eigenfields)
      .def_readonly("residual_norms", &EigenResult::residual_norms)
      .def_readonly("iterations", &EigenResult::iterations);
  m.def("lowest_eigenpairs", [](const GridSpec& g, py::array_t<double, py::array::c_style | py::array::forcecast> w,
                                std::size_t count, double tol, std::uint64_t seed) {
    return lowest_eigenpairs(field_from_array(g, w), count, tol, seed);
  }, py::arg("grid"), py::arg("W"), py::arg("count"), py::arg("tol") = 1e-8, py::arg("seed") = 1);

  py::class_<SolverConfig>(m, "SolverConfig")
      .def(py::init<>())
      .def_readwrite("max_outer", &SolverConfig::max_outer)
      .def_readwrite("energy_tol", &SolverConfig::energy_tol)
      .def_readwrite("residual_tol", &SolverConfig::residual_tol)
      .def_readwrite("step0", &SolverConfig::step0)
      .def_readwrite("backtrack", &SolverConfig::backtrack)
      .def_readwrite("mixing", &SolverConfig::mixing)
      .def_readwrite("seed", &SolverConfig::seed)
      .def_readwrite("rescale_radius", &SolverConfig::rescale_radius)
      .def_readwrite("dealias", &SolverConfig::dealias);

  py::class_<SolveReport>(m, "SolveReport")
      .def_readonly("converged", &SolveReport::converged)
      .def_readonly("orbitals", &SolveReport::orbitals)
      .def_readonly("energy", &SolveReport::energy)
      .def_property_readonly("mu", [](const SolveReport& r) { return r.multipliers.mu; })
      .def_readonly("residual_norms", &SolveReport::residual_norms)
      .def_readonly("trace", &SolveReport::trace)
      .def_readonly("boundary_leak", &SolveReport::boundary_leak)
      .def_readonly("iterations", &SolveReport::iterations);
  m.def("minimize_direct", [](const SolverConfig& c, double a, const TrapPotential& v, std::size_t N, const OrbitalSet& init) {
    return minimize_direct(c, a, v, N, init);
  }, py::arg("config"), py::arg("a"), py::arg("potential"), py::arg("N"), py::arg("init"),
        py::call_guard<py::gil_scoped_release>());
  m.def("scf", [](const SolverConfig& c, double a, const TrapPotential& v, std::size_t N, const OrbitalSet& init) {
    return scf(c, a, v, N, init);
  }, py::arg("config"), py::arg("a"), py::arg("potential"), py::arg("N"), py::arg("init"),
        py::call_guard<py::gil_scoped_release>());

  py::class_<AStarResult>(m, "AStarResult")
      .def_readonly("a_star", &AStarResult::a_star)
      .def_readonly("optimizer", &AStarResult::optimizer)
      .def_readonly("mu_hat", &AStarResult::mu_hat)
      .def_readonly("residual_norms", &AStarResult::residual_norms)
      .def_readonly("converged", &AStarResult::converged)
      .def_readonly("rank_deficient", &AStarResult::rank_deficient)
      .def_readonly("iterations", &AStarResult::iterations);
  m.def("estimate_aN_star", [](const SolverConfig& c, std::size_t N, const GridSpec& g) {
    return estimate_aN_star(c, N, g);
  }, py::arg("config"), py::arg("N"), py::arg("grid"), py::call_guard<py::gil_scoped_release>());

  py::class_<LStarResult>(m, "LStarResult")
      .def_readonly("dual", &LStarResult::dual)
      .def_readonly("direct", &LStarResult::direct);
  m.def("estimate_LN_star", &estimate_LN_star, py::arg("config"), py::arg("N"), py::arg("optimizer"), py::arg("a_star"),
        py::call_guard<py::gil_scoped_release>());
  m.attr("DUALITY_CONSTANT") = kDualityConstant;

  py::class_<VerifyReport>(m, "VerifyReport")
      .def_readonly("passed", &VerifyReport::pass)
      .def_readonly("subspace_angle", &VerifyReport::subspace_angle)
      .def_readonly("eigenvalues", &VerifyReport::eigenvalues)
      .def_readonly("mu", &VerifyReport::mu)
      .def_readonly("diagnostic", &VerifyReport::diagnostic);
  m.def("verify_groundstate", [](const OrbitalSet& s, double a, const TrapPotential& v, double tol) {
    return verify_groundstate(s, a, v, tol);
  }, py::arg("frame"), py::arg("a"), py::arg("potential"), py::arg("tol") = 1e-6);
  m.def("trial_energy", &trial_energy, py::arg("tau"), py::arg("y0"), py::arg("a"), py::arg("potential"),
        py::arg("optimizer"), py::arg("grid"), py::arg("origin") = Vec3{0.0, 0.0, 0.0});

  py::class_<PowerLawFit>(m, "PowerLawFit")
      .def_readonly("exponent", &PowerLawFit::exponent)
      .def_readonly("prefactor", &PowerLawFit::prefactor)
      .def_readonly("r2", &PowerLawFit::r2);
  m.def("fit_power_law", &fit_power_law, py::arg("x"), py::arg("y"));
  m.def("concentration_point", [](const GridSpec& g, py::array_t<double, py::array::c_style | py::array::forcecast> rho) {
    const ConcentrationPoint c = concentration_point(field_from_array(g, rho));
    return py::make_tuple(c.point, c.tie);
  }, py::arg("grid"), py::arg("rho"));

  py::class_<SweepRecord>(m, "SweepRecord")
      .def_readonly("a", &SweepRecord::a)
      .def_readonly("gap", &SweepRecord::gap)
      .def_readonly("eps", &SweepRecord::eps)
      .def_readonly("energy", &SweepRecord::energy)
      .def_readonly("rho53", &SweepRecord::rho53)
      .def_readonly("x_max", &SweepRecord::x_max)
      .def_readonly("mu", &SweepRecord::mu)
      .def_readonly("boundary_leak", &SweepRecord::boundary_leak)
      .def_readonly("converged", &SweepRecord::converged);
  m.def("read_records", &read_records, py::arg("path"));
  m.def("check_config", [](const std::string& text) {
    const RunConfig rc = parse_config(text);
    return py::dict(py::arg("L") = rc.grid.half_length, py::arg("n") = rc.grid.points_per_dim,
                    py::arg("potential") = rc.potential.kind(), py::arg("N") = rc.N);
  }, py::arg("text"), "Parses a key=value run configuration and returns its main fields.");
}
