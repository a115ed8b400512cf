#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "avlab/connections.hpp"
#include "avlab/distribution.hpp"
#include "avlab/em_fields.hpp"
#include "avlab/harness.hpp"
#include "avlab/scaling.hpp"
#include "json.hpp"

namespace py = pybind11;
using namespace avlab;

namespace {

Vec to_vec(const std::vector<double>& v) {
    if (v.empty() || v.size() > static_cast<std::size_t>(kMaxDim)) throw std::invalid_argument("vector length must be 1..4");
    Vec out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
    return out;
}

std::vector<double> from_vec(const Vec& v) { return {v.data(), v.data() + v.size()}; }

FieldTensor to_field(const std::vector<std::vector<double>>& F) {
    const auto n = static_cast<Eigen::Index>(F.size());
    Mat M(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (static_cast<Eigen::Index>(F[i].size()) != n) throw std::invalid_argument("field tensor must be square");
        for (Eigen::Index j = 0; j < n; ++j) M(i, j) = F[i][j];
    }
    return FieldTensor(M);
}

PhaseDistribution beam(double rapidity, const std::vector<double>& direction, double alpha, double skew, int nodes) {
    BeamOptions o;
    o.skew = skew;
    o.nodes_per_axis = nodes;
    return make_beam_distribution(rapidity, to_vec(direction), alpha, o);
}

py::dict scan_json(const std::string& text) {
    ScanResult r;
    {
        py::gil_scoped_release nogil;
        r = run_scan(parse_config(text));
    }
    py::dict d;
    d["manifest"] = py::module_::import("json").attr("loads")(manifest_json(r));
    d["comparison_csv"] = write_csv(r.comparison);
    d["fluid_csv"] = write_csv(r.fluid);
    d["summary"] = summary_text(r);
    d["exit_code"] = exit_code(r);
    return d;
}

}  // namespace

PYBIND11_MODULE(_avlab, m) {
    m.doc() = "avlab core bindings";
    m.attr("__version__") = code_version();
    m.attr("SCHEMA_VERSION") = kSchemaVersion;

    m.def("list_scenarios", [] {
        py::list out;
        for (const auto& s : list_scenarios()) {
            py::dict d;
            d["name"] = s.name;
            d["description"] = s.description;
            d["dims"] = s.dims;
            d["defaults"] = s.defaults;
            out.append(d);
        }
        return out;
    });

    m.def(
        "lorentz_coeffs",
        [](const std::vector<std::vector<double>>& F, const std::vector<double>& y) {
            const ConnectionCoeffs G = lorentz_coeffs(to_field(F), to_vec(y));
            const int n = G.dim();
            std::vector<std::vector<std::vector<double>>> out(n, std::vector<std::vector<double>>(n, std::vector<double>(n)));
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    for (int k = 0; k < n; ++k) out[i][j][k] = G(i, j, k);
            return out;
        },
        py::arg("F"), py::arg("y"), "Gamma^i_jk of the Lorentz connection at velocity y (nested lists [i][j][k]).");
    m.def(
        "lorentz_spray", [](const std::vector<std::vector<double>>& F, const std::vector<double>& y) {
            return from_vec(lorentz_spray(to_field(F), to_vec(y)));
        },
        py::arg("F"), py::arg("y"));

    m.def(
        "beam_stats",
        [](double rapidity, const std::vector<double>& direction, double alpha, double skew, int nodes) {
            const auto f = beam(rapidity, direction, alpha, skew, nodes);
            const auto st = support_stats(f, Vec::Zero(f.dim()));
            py::dict d;
            d["alpha"] = st.alpha;
            d["energy"] = st.energy;
            d["max_delta"] = st.max_delta;
            d["U"] = from_vec(st.U);
            return d;
        },
        py::arg("rapidity"), py::arg("direction"), py::arg("alpha"), py::arg("skew") = 0.0, py::arg("nodes") = 9);
    m.def(
        "beam_moments",
        [](double rapidity, const std::vector<double>& direction, double alpha, double skew, int nodes) {
            const auto f = beam(rapidity, direction, alpha, skew, nodes);
            const auto mm = compute_moments(f, Vec::Zero(f.dim()));
            py::dict d;
            d["volume"] = mm.volume;
            d["volume_E"] = mm.volume_E;
            d["first"] = from_vec(mm.first);
            std::vector<std::vector<double>> second(mm.n, std::vector<double>(mm.n));
            for (int i = 0; i < mm.n; ++i)
                for (int j = 0; j < mm.n; ++j) second[i][j] = mm.second(i, j);
            d["second"] = second;
            return d;
        },
        py::arg("rapidity"), py::arg("direction"), py::arg("alpha"), py::arg("skew") = 0.0, py::arg("nodes") = 9);

    m.def(
        "fit_scaling",
        [](const std::vector<double>& x, const std::vector<double>& y) {
            const ScalingFit f = fit_scaling(x, y);
            py::dict d;
            d["exponent"] = f.exponent;
            d["prefactor"] = f.prefactor;
            d["r2"] = f.r2;
            d["count"] = f.count;
            d["excluded"] = f.excluded;
            d["valid"] = f.valid;
            d["note"] = f.note;
            return d;
        },
        py::arg("x"), py::arg("y"));

    m.def(
        "parse_config", [](const std::string& text) { return parse_config(text).canonical; }, py::arg("text"),
        "Validate a config JSON string; returns its canonical form. Raises on unknown keys.");
    m.def("run_scan_json", &scan_json, py::arg("text"));
    m.def("comparison_columns", &comparison_columns);
    m.def("fluid_columns", &fluid_columns);
}
