#include "corrdyn/dynamics.hpp"
#include "corrdyn/measures.hpp"
#include "corrdyn/periodic.hpp"

#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <limits>

namespace py = pybind11;
using namespace corrdyn;

namespace {

// infinity travels as complex(inf, 0)
cplx to_py(const SpherePoint& p)
{
    if (p.is_infinity())
        return {std::numeric_limits<double>::infinity(), 0.0};
    return p.to_affine();
}

SpherePoint from_py(cplx z) { return SpherePoint::affine(z); }

std::vector<cplx> to_py(const std::vector<SpherePoint>& pts)
{
    std::vector<cplx> out;
    for (auto& p : pts)
        out.push_back(to_py(p));
    return out;
}

Correspondence from_rows(const std::vector<std::vector<cplx>>& rows)
{
    return Correspondence::from_bipoly(BiPoly::from_rows(rows));
}

std::vector<std::vector<cplx>> rows(const Correspondence& f)
{
    const BiPoly& p = f.poly();
    std::vector<std::vector<cplx>> out(static_cast<std::size_t>(p.deg_x() + 1));
    for (int i = 0; i <= p.deg_x(); ++i)
        for (int j = 0; j <= p.deg_y(); ++j)
            out[static_cast<std::size_t>(i)].push_back(p.at(i, j));
    return out;
}

py::list critical_list(const std::vector<CriticalValue>& vals)
{
    py::list out;
    for (auto& v : vals) {
        py::dict d;
        d["value"] = to_py(v.value);
        d["witness"] = to_py(v.witness);
        d["fiber_multiplicity"] = v.fiber_multiplicity;
        d["component_crossing"] = v.component_crossing;
        out.append(d);
    }
    return out;
}

} // namespace

PYBIND11_MODULE(_corrdyn, m)
{
    m.doc() = "Holomorphic correspondences on the Riemann sphere";

    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

    py::class_<Correspondence>(m, "Correspondence")
        .def(py::init(&from_rows), py::arg("rows"), "rows[i][j] is the coefficient of x^i y^j")
        .def_static("from_record", &from_record)
        .def_property_readonly("d1", &Correspondence::d1)
        .def_property_readonly("d2", &Correspondence::d2)
        .def_property_readonly("rows", &rows)
        .def("adjoint", [](const Correspondence& f) { return adjoint(f); })
        .def("preimages", [](const Correspondence& f, cplx y) { return to_py(f.preimages(from_py(y))); })
        .def("images", [](const Correspondence& f, cplx x) { return to_py(f.images(from_py(x))); })
        .def("record", [](const Correspondence& f) { return to_record(f); })
        .def("hash", [](const Correspondence& f) { return correspondence_hash(f); })
        .def("__eq__", [](const Correspondence& a, const Correspondence& b) { return a == b; });

    m.def("compose", [](const Correspondence& f, const Correspondence& g) { return compose(f, g); },
          "f o g: first g, then f");
    m.def("iterate", [](const Correspondence& f, int n) { return iterate(f, n); });
    m.def("critical_values", [](const Correspondence& f) {
        const auto cd = critical_values(f);
        py::dict d;
        d["b1"] = critical_list(cd.b1);
        d["b2"] = critical_list(cd.b2);
        return d;
    });

    py::class_<PointCloudMeasure>(m, "Cloud")
        .def(py::init([](const std::vector<cplx>& pts, const std::vector<double>& w) {
                 std::vector<SpherePoint> sp;
                 for (auto z : pts)
                     sp.push_back(from_py(z));
                 return PointCloudMeasure(std::move(sp), w);
             }),
             py::arg("points"), py::arg("weights"))
        .def_property_readonly("points", [](const PointCloudMeasure& c) { return to_py(c.points()); })
        .def_property_readonly("weights", &PointCloudMeasure::weights)
        .def_property_readonly("monte_carlo", [](const PointCloudMeasure& c) { return c.meta().monte_carlo; })
        .def("__len__", &PointCloudMeasure::size);

    m.def("backward_cloud",
          [](const Correspondence& f, cplx a, int n, std::size_t max_atoms, std::uint64_t seed) {
              return backward_cloud(f, from_py(a), n, max_atoms, seed);
          },
          py::arg("f"), py::arg("a"), py::arg("n"), py::arg("max_atoms") = 100000, py::arg("seed") = 1);
    m.def("forward_cloud",
          [](const Correspondence& f, cplx a, int n, std::size_t max_atoms, std::uint64_t seed) {
              return forward_cloud(f, from_py(a), n, max_atoms, seed);
          },
          py::arg("f"), py::arg("a"), py::arg("n"), py::arg("max_atoms") = 100000, py::arg("seed") = 1);
    m.def("dual_lip_distance",
          [](const PointCloudMeasure& a, const PointCloudMeasure& b, int degree) {
              return degree == 8 ? dual_lip_distance(a, b, default_dictionary())
                                 : dual_lip_distance(a, b, TestDictionary(degree));
          },
          py::arg("mu"), py::arg("nu"), py::arg("degree") = 8);

    m.def("periodic_points", [](const Correspondence& f, int n) {
        const auto rep = periodic_points(f, n);
        py::list pts;
        for (auto& p : rep.points) {
            py::dict d;
            d["point"] = to_py(p.point);
            d["multiplier"] = p.multiplier;
            d["multiplicity"] = p.multiplicity;
            d["class"] = to_string(p.cls);
            pts.append(d);
        }
        py::dict out;
        out["points"] = pts;
        out["diagonal_components"] = rep.diagonal_components;
        out["total_count"] = rep.total_count();
        return out;
    });

    m.def("operator_norm_estimate",
          [](const Correspondence& f, const std::string& direction, int iters, int resolution, std::uint64_t seed) {
              if (direction != "pullback" && direction != "pushforward")
                  throw DomainError("direction must be 'pullback' or 'pushforward'");
              const auto est = operator_norm_estimate(
                  f, direction == "pullback" ? Direction::pullback : Direction::pushforward, iters, resolution, seed);
              py::dict d;
              d["estimate"] = est.estimate;
              d["history"] = est.history;
              d["masked_fraction"] = est.masked_fraction;
              d["weak_modularity_suspected"] = est.weak_modularity_suspected;
              return d;
          },
          py::arg("f"), py::arg("direction") = "pullback", py::arg("iters") = 30, py::arg("resolution") = 128,
          py::arg("seed") = 1);
}
