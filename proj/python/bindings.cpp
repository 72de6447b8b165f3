#include <random>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "relugeom/decision_boundary.hpp"
#include "relugeom/deep_network.hpp"
#include "relugeom/partition.hpp"
#include "relugeom/random.hpp"
#include "relugeom/relu_layer.hpp"

namespace py = pybind11;
using namespace relugeom;

namespace {

py::tuple sector_tuple(const SectorIndex& s) {
  return py::make_tuple(indices_from_mask(s.plus()), indices_from_mask(s.minus()));
}

py::dict piece_dict(const BoundaryPiece& p) {
  py::dict d;
  d["J"] = indices_from_mask(p.j);
  d["J_negative"] = indices_from_mask(p.j_negative);
  d["bounded"] = p.bounded;
  d["recession"] = indices_from_mask(p.recession());
  return d;
}

}  // namespace

PYBIND11_MODULE(_relugeom, m) {
  m.doc() = "Dual frames, sector partitions and decision boundaries of ReLU layers";

  static py::exception<GeometryError> geometry_error(m, "GeometryError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const GeometryError& e) {
      py::tuple args = py::make_tuple(std::string(to_string(e.code())), e.what());
      PyErr_SetObject(geometry_error.ptr(), args.ptr());
    }
  });

  py::class_<AffineMap>(m, "AffineMap")
      .def(py::init<Matrix, Vector>(), py::arg("matrix"), py::arg("offset"))
      .def_property_readonly("matrix", &AffineMap::matrix)
      .def_property_readonly("offset", &AffineMap::offset)
      .def("__call__", &AffineMap::evaluate);

  py::class_<DualFrame>(m, "DualFrame")
      .def_property_readonly("apex", &DualFrame::apex)
      .def_property_readonly("duals", &DualFrame::duals, "Dual vectors as columns")
      .def_property_readonly("contracting", &DualFrame::contracting)
      .def_property_readonly("rcond", &DualFrame::rcond)
      .def_property_readonly("duality_residual", &DualFrame::duality_residual)
      .def("coordinates", &DualFrame::coordinates)
      .def("reconstruct", &DualFrame::reconstruct);

  m.def("dual_frame", [](const Matrix& a, const Vector& b) {
    return build_dual_frame(AffineMap(a, b));
  }, py::arg("matrix"), py::arg("offset"));

  m.def("classify", [](const DualFrame& f, const Vector& x, std::optional<double> tol) {
    return sector_tuple(classify(f, x, tol));
  }, py::arg("frame"), py::arg("x"), py::arg("tol") = py::none(),
        "Sector of x as (plus, minus) lists of 1-based indices");
  m.def("enumerate_sectors", [](int d, std::optional<int> k) {
    py::list out;
    for (const auto& s : enumerate_sectors(d, k)) out.append(sector_tuple(s));
    return out;
  }, py::arg("d"), py::arg("dimension") = py::none());
  m.def("sector_count_table", &sector_count_table, py::arg("d"));

  py::class_<ReluLayer>(m, "ReluLayer")
      .def(py::init([](const Matrix& a, const Vector& b) { return ReluLayer(AffineMap(a, b)); }),
           py::arg("matrix"), py::arg("offset"))
      .def_property_readonly("frame", &ReluLayer::frame, py::return_value_policy::reference_internal)
      .def_property_readonly("affine", &ReluLayer::affine, py::return_value_policy::reference_internal)
      .def("__call__", &ReluLayer::evaluate)
      .def("project_to_cone", &ReluLayer::project_to_cone)
      .def("decompose_residual", &ReluLayer::decompose_residual);

  py::class_<PreimageSet>(m, "PreimageSet")
      .def_readonly("target", &PreimageSet::target)
      .def_readonly("base", &PreimageSet::base)
      .def_readonly("free_indices", &PreimageSet::free_indices)
      .def_readonly("generators", &PreimageSet::generators)
      .def_readonly("kernel", &PreimageSet::kernel)
      .def_property_readonly("dimension", &PreimageSet::dimension);
  m.def("preimage_of_point", [](const ReluLayer& l, const Vector& y) {
    return preimage_of_point(l, y);
  }, py::arg("layer"), py::arg("y"), "None when y has a negative entry");
  m.def("membership_oracle", &membership_oracle, py::arg("layer"), py::arg("preimage"),
        py::arg("x"), py::arg("tol") = 1e-6);
  m.def("sample_preimage", [](const PreimageSet& pre, int n, double radius, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return sample_preimage(pre, n, radius, rng);
  }, py::arg("preimage"), py::arg("n"), py::arg("radius") = 1.0, py::arg("seed") = 0);

  py::class_<OutputLayer>(m, "OutputLayer")
      .def(py::init([](const Vector& w, double c) { return OutputLayer{w, c}; }),
           py::arg("weights"), py::arg("bias"))
      .def_readonly("weights", &OutputLayer::weights)
      .def_readonly("bias", &OutputLayer::bias)
      .def("__call__", &OutputLayer::evaluate);

  py::class_<DecisionBoundary>(m, "DecisionBoundary")
      .def_readonly("d", &DecisionBoundary::d)
      .def_readonly("m", &DecisionBoundary::m)
      .def_readonly("piece_count", &DecisionBoundary::piece_count)
      .def_property_readonly("curvature",
                             [](const DecisionBoundary& b) { return to_string(b.curvature); })
      .def_property_readonly("t", [](const DecisionBoundary& b) { return b.values.t; })
      .def_property_readonly("pieces", [](const DecisionBoundary& b) {
        py::list out;
        for (const auto& p : b.pieces) out.append(piece_dict(p));
        return out;
      })
      .def_property_readonly("sigma", [](const DecisionBoundary& b) {
        std::vector<int> s;
        for (int i : b.canonical.sigma) s.push_back(i + 1);
        return s;
      }, "Sorting permutation, 1-based")
      .def_property_readonly("canonical_map", [](const DecisionBoundary& b) {
        return py::make_tuple(b.canonical.map.matrix(), b.canonical.map.offset());
      })
      .def("sample", [](const DecisionBoundary& b, int per_piece, double radius,
                        std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        std::vector<Vector> out;
        for (const auto& p : b.pieces)
          for (Vector& x : sample_piece(p, per_piece, radius, rng)) out.push_back(std::move(x));
        return out;
      }, py::arg("per_piece"), py::arg("radius") = 1.0, py::arg("seed") = 0);

  m.def("enumerate_pieces", &enumerate_pieces, py::arg("layer"), py::arg("output"));
  m.def("piece_count_oracle", &piece_count_oracle, py::arg("layer"), py::arg("output"));
  m.def("canonical_boundary", &canonical_boundary, py::arg("d"), py::arg("m"));
  m.def("equivalent", &equivalence_check, py::arg("a"), py::arg("b"));

  py::class_<ReluNetwork>(m, "ReluNetwork")
      .def(py::init<std::vector<ReluLayer>, OutputLayer>(), py::arg("layers"), py::arg("output"))
      .def_property_readonly("depth", &ReluNetwork::depth)
      .def("__call__", &ReluNetwork::evaluate)
      .def("rewrite", [](const ReluNetwork& net, const Vector& x) {
        return canonical_structure(net).evaluate(x);
      }, "Evaluates the composed cone-projection form of the network")
      .def("boundary_samples", [](const ReluNetwork& net, int per_face, std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        const RecursionResult r = pull_back_all(net, per_face, rng);
        py::dict levels;
        for (const auto& l : r.levels) levels[py::int_(l.level)] = l.points;
        return py::make_tuple(levels, r.empty_level);
      }, py::arg("per_face") = 10, py::arg("seed") = 0,
         "({level: points}, first empty level or None)");
}
