#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "porous/app/config.hpp"
#include "porous/app/run.hpp"
#include "porous/darcy/fem.hpp"
#include "porous/error.hpp"
#include "porous/ident/problem.hpp"
#include "porous/pfem/convection_diffusion.hpp"
#include "porous/pore/pack.hpp"
#include "porous/pore/pdf.hpp"
#include "porous/pore/stokes.hpp"
#include "porous/pore/voxel.hpp"

namespace py = pybind11;
using namespace porous;

namespace {

// nlohmann::json <-> Python via the json module keeps the binding small.
py::object to_python(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

nlohmann::json from_python(const py::object& o) {
  return nlohmann::json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

py::dict solution_dict(const pfem::DiscreteSolution& s) {
  std::vector<double> x;
  for (int j = 0; j <= s.elements(); ++j) {
    x.push_back(s.node(j));
  }
  py::dict d;
  d["degree"] = s.degree();
  d["x"] = x;
  d["nodal"] = std::vector<double>(s.nodal().begin(), s.nodal().end());
  return d;
}

std::vector<pore::Vec3> centers_of(const pore::SpherePack& p) { return p.centers; }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Porous-media flow and transport toolkit";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<InvalidArgument>(m, "InvalidArgument", base);
  py::register_exception<NumericalError>(m, "NumericalError", base);

  // pfem
  m.def("bar_gamma_exact", &pfem::bar_gamma_exact, py::arg("peclet"), py::arg("diffusivity") = 1.0);
  m.def("bar_gamma_p", &pfem::bar_gamma_p, py::arg("degree"), py::arg("peclet"), py::arg("diffusivity") = 1.0);
  m.def("bar_gamma_p_numeric", &pfem::bar_gamma_p_numeric, py::arg("degree"), py::arg("peclet"),
        py::arg("diffusivity") = 1.0);
  m.def("truncation_error", &pfem::truncation_error, py::arg("degree"), py::arg("peclet"),
        py::arg("diffusivity") = 1.0);
  m.def("alpha_p", &pfem::alpha_p, py::arg("degree"), py::arg("peclet"));
  m.def("max_stable_pe", &pfem::max_stable_pe, py::arg("degree"));
  m.def("min_degree_for_pe", &pfem::min_degree_for_pe, py::arg("peclet"));
  m.def("analytic_solution", &pfem::analytic_solution, py::arg("velocity"), py::arg("diffusivity"), py::arg("x"));
  m.def("oscillation_measure",
        [](const std::vector<double>& v) { return pfem::oscillation_measure(v); }, py::arg("nodal_values"));
  m.def(
      "solve_bvp",
      [](double velocity, double diffusivity, int elements, int degree, double left, double right) {
        pfem::ConvDiff1DProblem p;
        p.velocity = velocity;
        p.diffusivity = diffusivity;
        p.elements = elements;
        p.left_value = left;
        p.right_value = right;
        return solution_dict(pfem::solve_bvp(p, degree));
      },
      py::arg("velocity"), py::arg("diffusivity"), py::arg("elements"), py::arg("degree"), py::arg("left") = 0.0,
      py::arg("right") = 1.0, "Solves u c' - Gamma c'' = 0 with Dirichlet values; returns nodes and nodal values.");

  // darcy
  m.def(
      "darcy_manufactured_errors",
      [](int n) {
        const darcy::Rectangle unit{};
        const darcy::StructuredQuadMesh mesh(n, n, unit);
        const auto perm = darcy::PermeabilityField::uniform(darcy::grid_partition(unit, 1, 1), 1.0, 1.0);
        const auto state = darcy::solve_state(darcy::assemble_darcy(mesh, perm, darcy::manufactured_source));
        const auto e = darcy::l2_errors(mesh, state, darcy::manufactured_solution);
        return std::pair{e.velocity, e.pressure};
      },
      py::arg("n"), "L2 errors (velocity, pressure) of the manufactured problem on an n x n mesh.");

  // ident
  m.def(
      "default_reference_parameters",
      [](std::size_t n, std::uint64_t seed) { return ident::default_reference_parameters(n, seed); }, py::arg("n"),
      py::arg("seed") = ident::kDefaultReferenceSeed);
  m.def(
      "reduced_gradient",
      [](int n, int parts, const Eigen::VectorXd& q, const Eigen::VectorXd& q_ref, const std::string& observation) {
        const darcy::Rectangle unit{};
        const darcy::StructuredQuadMesh mesh(n, n, unit);
        auto disc = std::make_shared<const darcy::DarcyDiscretization>(
            mesh, darcy::grid_partition(unit, parts, parts), darcy::manufactured_source);
        const auto op = observation == "lattice" ? ident::ObservationOperator::lattice(unit)
                                                 : ident::ObservationOperator::identity();
        ident::ReducedObjective obj(disc, op.matrix(mesh), ident::generate_synthetic_data(*disc, op, q_ref), 0.0);
        return std::pair{obj.value(q), obj.gradient(q)};
      },
      py::arg("n"), py::arg("parts"), py::arg("q"), py::arg("q_ref"), py::arg("observation") = "identity",
      "Reduced cost and adjoint gradient for noiseless synthetic data on an n x n mesh.");

  // pore
  py::class_<pore::SpherePack>(m, "SpherePack")
      .def_readonly("box", &pore::SpherePack::box)
      .def_readonly("diameter", &pore::SpherePack::diameter)
      .def_readonly("seed", &pore::SpherePack::seed)
      .def_property_readonly("centers", &centers_of)
      .def("analytic_porosity", &pore::SpherePack::analytic_porosity);
  m.def("hexagonal_pack", &pore::hexagonal_pack, py::arg("diameter"));
  m.def(
      "random_pack",
      [](const pore::Vec3& box, double diameter, std::uint64_t seed) { return pore::random_pack(box, diameter, seed); },
      py::arg("box"), py::arg("diameter"), py::arg("seed"));
  m.def("count_overlaps", &pore::count_overlaps);
  m.def("blake_kozeny", &pore::blake_kozeny, py::arg("diameter"), py::arg("porosity"), py::arg("alpha") = 150.0);
  m.def("duct_mean_velocity", &pore::duct_mean_velocity, py::arg("side"), py::arg("viscosity"), py::arg("gradient"),
        py::arg("terms") = 200);
  m.def(
      "pack_flow",
      [](const pore::SpherePack& pack, int cells_per_diameter, double viscosity, double gradient) {
        const auto grid = pore::voxelize(pack, cells_per_diameter);
        pore::StokesOptions o;
        o.viscosity = viscosity;
        o.gradient = gradient;
        py::gil_scoped_release release;
        const auto f = pore::solve_stokes(grid, o);
        py::gil_scoped_acquire acquire;
        py::dict d;
        d["porosity"] = grid.porosity();
        d["permeability"] = pore::permeability(f);
        d["intrinsic_velocity"] = pore::intrinsic_velocity(f, grid);
        d["iterations"] = f.iterations;
        return d;
      },
      py::arg("pack"), py::arg("cells_per_diameter"), py::arg("viscosity") = 1e-3, py::arg("gradient") = 0.002,
      "Voxelizes the pack and solves Stokes flow; returns porosity, permeability and U_i.");

  // experiments
  m.def(
      "normalize_config", [](const py::object& cfg) {
        return to_python(app::config_to_json(app::config_from_json(from_python(cfg))));
      },
      py::arg("config"), "Strictly parses a config dict and returns it with every default filled in.");
  m.def(
      "run",
      [](const py::object& cfg, int threads) {
        const auto config = app::config_from_json(from_python(cfg));
        app::RunResult r;
        {
          py::gil_scoped_release release;
          r = app::run(config, {threads});
        }
        py::dict d;
        d["output_dir"] = r.output_dir.string();
        d["manifest_sha256"] = r.manifest_sha256;
        d["summary"] = to_python(r.summary);
        d["artifacts"] = py::cast([&] {
          std::vector<std::string> v;
          for (const auto& a : r.artifacts) {
            v.push_back(a.path);
          }
          return v;
        }());
        return d;
      },
      py::arg("config"), py::arg("threads") = 1, "Runs an experiment config dict; returns its manifest hash and summary.");
  m.def("figure_ids", &app::figure_ids);
}
