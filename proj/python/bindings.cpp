#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "mpmiqp/casestudies.hpp"
#include "mpmiqp/cli.hpp"
#include "mpmiqp/errors.hpp"
#include "mpmiqp/factorizable.hpp"
#include "mpmiqp/instance_io.hpp"
#include "mpmiqp/model.hpp"
#include "mpmiqp/oracle.hpp"
#include "mpmiqp/projection.hpp"
#include "mpmiqp/spp.hpp"

namespace py = pybind11;
using namespace mpmiqp;

namespace {

py::array_t<double> to_numpy(const Matrix& m) {
  py::array_t<double> out({m.rows(), m.cols()});
  auto view = out.mutable_unchecked<2>();
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) view(r, c) = m(r, c);
  return out;
}

Matrix from_numpy(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 2) throw DimensionError("expected a 2-d array");
  const auto rows = static_cast<std::size_t>(a.shape(0)), cols = static_cast<std::size_t>(a.shape(1));
  return Matrix(rows, cols, std::vector<double>(a.data(), a.data() + rows * cols));
}

std::vector<Matrix> from_numpy_list(const std::vector<py::array_t<double, py::array::c_style | py::array::forcecast>>& v) {
  std::vector<Matrix> out;
  out.reserve(v.size());
  for (const auto& a : v) out.push_back(from_numpy(a));
  return out;
}

py::dict solution_dict(const SppSolution& s) {
  py::dict d;
  d["objective"] = s.objective;
  d["path_cost"] = s.path_cost;
  d["path"] = s.path;
  d["support"] = s.support;
  d["x"] = s.x;
  d["z"] = s.z;
  return d;
}

}  // namespace

PYBIND11_MODULE(_mpmiqp, m) {
  m.doc() = "Exact shortest-path solver for MIQPs with factorizable cost matrices";

  // Translators run newest first, so the base class goes first.
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidArgumentError>(m, "InvalidArgumentError", PyExc_ValueError);
  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<AssumptionError>(m, "AssumptionError", PyExc_ArithmeticError);
  py::register_exception<SizeGuardError>(m, "SizeGuardError", PyExc_RuntimeError);

  py::class_<FactorizableSpec>(m, "FactorizableSpec")
      .def(py::init<Vector, Vector>(), py::arg("u"), py::arg("v"))
      .def_property_readonly("n", &FactorizableSpec::n)
      .def_property_readonly("u", &FactorizableSpec::u)
      .def_property_readonly("v", &FactorizableSpec::v)
      .def("assumption_holds", [](const FactorizableSpec& s) { return s.assumption().pass; })
      .def("dense", [](const FactorizableSpec& s) { return to_numpy(materialize(s)); })
      .def(
          "submatrix_inverse",
          [](const FactorizableSpec& s, std::vector<std::size_t> S) { return to_numpy(submatrix_inverse(s, S)); },
          py::arg("support"));

  py::class_<BlockFactorizableSpec>(m, "BlockFactorizableSpec")
      .def(py::init([](const std::vector<py::array_t<double, py::array::c_style | py::array::forcecast>>& U,
                       const std::vector<py::array_t<double, py::array::c_style | py::array::forcecast>>& V) {
             return BlockFactorizableSpec(from_numpy_list(U), from_numpy_list(V));
           }),
           py::arg("U"), py::arg("V"))
      .def_property_readonly("n", &BlockFactorizableSpec::n)
      .def_property_readonly("d", &BlockFactorizableSpec::d)
      .def("assumption_holds", [](const BlockFactorizableSpec& s) { return s.assumption().pass; })
      .def("dense", [](const BlockFactorizableSpec& s) { return to_numpy(materialize(s)); })
      .def(
          "submatrix_inverse",
          [](const BlockFactorizableSpec& s, std::vector<std::size_t> S) { return to_numpy(submatrix_inverse(s, S)); },
          py::arg("support"));

  py::class_<ProjectedMIQP>(m, "ProjectedMIQP")
      .def(py::init([](const FactorizableSpec& s, Vector a, Vector c, double constant) {
             return ProjectedMIQP::make(s, std::move(a), std::move(c), constant);
           }),
           py::arg("spec"), py::arg("a"), py::arg("c"), py::arg("constant") = 0.0)
      .def(py::init([](const BlockFactorizableSpec& s, Vector a, Vector c, double constant) {
             return ProjectedMIQP::make(s, std::move(a), std::move(c), constant);
           }),
           py::arg("spec"), py::arg("a"), py::arg("c"), py::arg("constant") = 0.0)
      .def_readonly("n", &ProjectedMIQP::n)
      .def_readonly("d", &ProjectedMIQP::d)
      .def_readonly("a", &ProjectedMIQP::a)
      .def_readonly("c", &ProjectedMIQP::c)
      .def_readonly("constant", &ProjectedMIQP::constant)
      .def("Q", [](const ProjectedMIQP& p) { return to_numpy(materialize(p.spec)); })
      .def("objective", [](const ProjectedMIQP& p, const Vector& x, const Vector& z) {
        return projected_objective(p, x, z);
      });

  m.def("load_instance", [](const std::string& text) { return to_projected(instance_from_json(text)); },
        py::arg("json_text"), "Projected problem of an instance file's contents (any kind).");
  m.def("load_instance_file", [](const std::string& path) { return to_projected(read_instance_file(path)); },
        py::arg("path"));
  m.def(
      "gen_calcium",
      [](std::size_t n, double mu, double sigma, double alpha, double lambda, std::uint64_t seed, double beta0) {
        return instance_to_json(gen_calcium(n, mu, sigma, alpha, lambda, seed, beta0));
      },
      py::arg("n"), py::arg("mu") = 0.05, py::arg("sigma") = 0.1, py::arg("alpha") = 0.96, py::arg("lambda_") = 1.0,
      py::arg("seed") = 0, py::arg("beta0") = 1.0, "Calcium instance as instance JSON.");
  m.def(
      "gen_hev", [](std::size_t n, double lambda, std::uint64_t seed) { return instance_to_json(gen_hev(n, lambda, seed)); },
      py::arg("n"), py::arg("lambda_") = 2.0, py::arg("seed") = 0, "HEV instance as instance JSON.");

  m.def(
      "solve",
      [](const ProjectedMIQP& p, unsigned threads) {
        SppSolution s;
        {
          py::gil_scoped_release release;
          s = solve(p, threads);
        }
        return solution_dict(s);
      },
      py::arg("problem"), py::arg("threads") = 1);
  m.def(
      "enumerate_supports",
      [](const ProjectedMIQP& p, unsigned threads) {
        OracleResult r;
        {
          py::gil_scoped_release release;
          r = enumerate_supports(p, {false, threads});
        }
        py::dict d;
        d["objective"] = r.best_objective;
        d["support"] = r.best_support;
        d["x"] = r.best_x;
        return d;
      },
      py::arg("problem"), py::arg("threads") = 1);

  m.def(
      "build_socp", [](const ProjectedMIQP& p) { return model_to_json(build_socp(p)); }, py::arg("problem"),
      "Extended SOCP formulation as canonical model JSON.");
  m.def(
      "build_miqp", [](const ProjectedMIQP& p) { return model_to_json(build_miqp(p)); }, py::arg("problem"));

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = run_cli(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command-line tool in-process; returns (exit_code, stdout, stderr).");
}
