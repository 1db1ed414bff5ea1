#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cartex/metrics.hpp"
#include "cartex/noise.hpp"
#include "cartex/solver.hpp"
#include "cartex/synthetic.hpp"

namespace py = pybind11;
using namespace cartex;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Image to_image(const Array& a) {
    if (a.ndim() != 2) throw std::invalid_argument("expected a 2-D array (height, width)");
    const auto h = static_cast<int>(a.shape(0));
    const auto w = static_cast<int>(a.shape(1));
    return Image(w, h, std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(const Image& img) {
    Array out({img.height(), img.width()});
    std::copy(img.pixels().begin(), img.pixels().end(), out.mutable_data());
    return out;
}

Array to_array(const CoefficientField& c) {
    Array out({static_cast<py::ssize_t>(c.channels()), static_cast<py::ssize_t>(c.height()),
               static_cast<py::ssize_t>(c.width())});
    std::copy(c.values().begin(), c.values().end(), out.mutable_data());
    return out;
}

CoefficientField to_field(const Array& a) {
    if (a.ndim() != 3) throw std::invalid_argument("expected a 3-D array (channels, height, width)");
    CoefficientField c(static_cast<std::size_t>(a.shape(0)), static_cast<int>(a.shape(2)),
                       static_cast<int>(a.shape(1)));
    std::copy(a.data(), a.data() + a.size(), c.values().begin());
    return c;
}

PixelMask to_mask(const py::array_t<bool, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 2) throw std::invalid_argument("expected a 2-D boolean mask");
    PixelMask m(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
    for (std::size_t i = 0; i < m.size(); ++i) m.set(i, a.data()[i]);
    return m;
}

py::array_t<bool> from_mask(const PixelMask& m) {
    py::array_t<bool> out({m.height(), m.width()});
    for (std::size_t i = 0; i < m.size(); ++i) out.mutable_data()[i] = m.known(i);
    return out;
}

py::dict record(const IterationRecord& r) {
    py::dict d;
    d["pass"] = r.pass;
    d["iteration"] = r.iteration;
    d["splitting_residual"] = r.splitting_residual;
    d["relative_splitting"] = r.relative_splitting;
    d["data_term"] = r.data_term;
    d["objective"] = r.objective;
    d["lambda_updated"] = r.lambda_updated;
    d["cg_iterations"] = r.cg_iterations;
    d["cg_residual"] = r.cg_residual;
    d["cg_converged"] = r.cg_converged;
    d["constraint_residual"] = r.constraint_residual;
    return d;
}

py::dict decompose(const Array& image, const std::string& mode, const py::object& mask,
                   const py::object& graph, const py::object& solver, double sigma) {
    DecomposerOptions o;
    o.solver = solver.is_none() ? SolverParams::defaults_for(parse_mode(mode)) : solver.cast<SolverParams>();
    o.solver.mode = parse_mode(mode);
    if (!graph.is_none()) o.graph = graph.cast<GraphParams>();
    o.sigma = sigma;
    std::optional<PixelMask> m;
    if (!mask.is_none()) m = to_mask(mask.cast<py::array_t<bool, py::array::c_style | py::array::forcecast>>());
    const Image f = to_image(image);
    DecompositionResult r;
    {
        py::gil_scoped_release release;
        r = Decomposer(f, o, m).run();
    }
    py::dict out;
    out["cartoon"] = to_array(r.cartoon);
    out["texture"] = to_array(r.texture);
    out["residual"] = to_array(r.residual);
    py::list diagnostics;
    for (const auto& rec : r.diagnostics) diagnostics.append(record(rec));
    out["diagnostics"] = diagnostics;
    out["warnings"] = r.warnings;
    out["constraint_met"] = r.constraint_met;
    out["passes"] = r.passes;
    out["cg_iterations_max"] = r.cg_iterations_max;
    return out;
}

py::tuple laplacian(const Array& image, const py::object& graph) {
    const GraphParams gp = graph.is_none() ? GraphParams{} : graph.cast<GraphParams>();
    const NonlocalLaplacian l = build_laplacian(build_patch_graph(to_image(image), gp));
    const auto t = l.triplets();
    py::array_t<std::int32_t> rows(static_cast<py::ssize_t>(t.size()));
    py::array_t<std::int32_t> cols(static_cast<py::ssize_t>(t.size()));
    py::array_t<double> vals(static_cast<py::ssize_t>(t.size()));
    for (std::size_t i = 0; i < t.size(); ++i) {
        rows.mutable_data()[i] = t[i].row;
        cols.mutable_data()[i] = t[i].col;
        vals.mutable_data()[i] = t[i].value;
    }
    return py::make_tuple(rows, cols, vals);
}

}  // namespace

PYBIND11_MODULE(_cartex, m) {
    m.doc() = "Cartoon-texture decomposition with a directional nonlocal wavelet prior";

    py::register_exception<NumericalError>(m, "NumericalError");

    py::class_<GraphParams>(m, "GraphParams")
        .def(py::init<>())
        .def_readwrite("window", &GraphParams::window)
        .def_readwrite("directions", &GraphParams::directions)
        .def_readwrite("knn", &GraphParams::knn)
        .def_readwrite("h", &GraphParams::h)
        .def_readwrite("patch", &GraphParams::patch)
        .def_readwrite("band_halfwidth", &GraphParams::band_halfwidth)
        .def_readwrite("isotropic", &GraphParams::isotropic)
        .def_readwrite("union_knn", &GraphParams::union_knn);

    py::class_<SolverParams>(m, "SolverParams")
        .def(py::init<>())
        .def_static("defaults_for", [](const std::string& mode) { return SolverParams::defaults_for(parse_mode(mode)); })
        .def_readwrite("beta1", &SolverParams::beta1)
        .def_readwrite("beta2", &SolverParams::beta2)
        .def_readwrite("eta1", &SolverParams::eta1)
        .def_readwrite("eta2", &SolverParams::eta2)
        .def_readwrite("gamma", &SolverParams::gamma)
        .def_readwrite("delta", &SolverParams::delta)
        .def_readwrite("iterations", &SolverParams::iterations)
        .def_readwrite("lambda_refresh", &SolverParams::lambda_refresh)
        .def_readwrite("cg_tol", &SolverParams::cg_tol)
        .def_readwrite("cg_maxit", &SolverParams::cg_maxit)
        .def_readwrite("outer_limit", &SolverParams::outer_limit)
        .def_readwrite("constraint_tol", &SolverParams::constraint_tol)
        .def("validate", &SolverParams::validate);

    m.def("decompose", &decompose, py::arg("image"), py::arg("mode") = "noiseless", py::arg("mask") = py::none(),
          py::arg("graph") = py::none(), py::arg("solver") = py::none(), py::arg("sigma") = 0.1,
          "Split image (height, width) into cartoon and texture. mask marks known pixels in inpaint mode.");
    m.def(
        "analyze", [](const Array& img) { return to_array(analyze(to_image(img), build_spline_bank())); },
        py::arg("image"), "Undecimated spline frame coefficients, shape (9, height, width).");
    m.def(
        "synthesize", [](const Array& c) { return to_array(synthesize(to_field(c), build_spline_bank())); },
        py::arg("coefficients"), "Adjoint of analyze; synthesize(analyze(x)) == x.");
    m.def("laplacian_triplets", &laplacian, py::arg("image"), py::arg("graph") = py::none(),
          "Nonlocal Laplacian of the patch graph of image as (rows, cols, values).");
    m.def(
        "preset",
        [](int index, int size) {
            const SyntheticImages s = render_synthetic(preset_spec(index, size));
            py::dict d;
            d["cartoon"] = to_array(s.cartoon);
            d["texture"] = to_array(s.texture);
            d["mix"] = to_array(s.mix);
            return d;
        },
        py::arg("index"), py::arg("size") = 128, "Ground-truth cartoon, texture and mix of a synthetic preset.");
    m.def(
        "add_noise", [](const Array& img, double sigma, std::uint64_t seed) {
            return to_array(add_gaussian_noise(to_image(img), sigma, seed));
        },
        py::arg("image"), py::arg("sigma"), py::arg("seed"));
    m.def(
        "random_mask",
        [](int width, int height, double missing, unsigned long long seed) {
            return from_mask(PixelMask::random(width, height, missing, seed));
        },
        py::arg("width"), py::arg("height"), py::arg("missing"), py::arg("seed"), "True marks known pixels.");
    m.def(
        "psnr", [](const Array& a, const Array& b) { return psnr(to_image(a), to_image(b)); }, py::arg("a"),
        py::arg("b"));
    m.def(
        "ssim", [](const Array& a, const Array& b) { return ssim(to_image(a), to_image(b)); }, py::arg("a"),
        py::arg("b"));
}
