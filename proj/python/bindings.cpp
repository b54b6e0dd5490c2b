#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "carpet/fem.hpp"
#include "carpet/graphs.hpp"
#include "carpet/network.hpp"
#include "carpet/scaling.hpp"

namespace py = pybind11;
using namespace carpet;

namespace {

py::dict graph_stats_dict(int N, int m, const std::string& kind) {
  const CarpetParams p(N);
  const auto s = graph_stats(build_graph(p, m, parse_graph_kind(kind)));
  py::dict d;
  d["vertices"] = s.vertices;
  d["edges"] = s.edges;
  d["components"] = s.components;
  d["boundary_A"] = s.boundary_A;
  d["boundary_B"] = s.boundary_B;
  d["degree_histogram"] = s.degree_histogram;
  return d;
}

std::string graph_resistance_json(int N, int m, const std::string& kind) {
  const CarpetParams p(N);
  return record_json(analyze_graph(p, build_graph(p, m, parse_graph_kind(kind))));
}

py::dict fem_dict(int N, int n, int k) {
  const CarpetParams p(N);
  const auto mesh = build_mesh(p, n, k);
  const auto sol = solve_mixed_bvp(mesh);
  const auto s = sector_analysis(p, mesh, sol);
  py::dict d;
  d["R"] = sol.resistance;
  d["energy"] = sol.energy;
  d["nodes"] = mesh.nodes.size();
  d["triangles"] = mesh.triangles.size();
  d["E_v"] = s.E_v;
  d["E_w"] = s.E_w;
  d["E_V"] = s.E_V;
  d["E_W"] = s.E_W;
  d["orthogonality"] = s.orthogonality;
  return d;
}

py::dict duality_dict(int N, int m_max) {
  const auto rep = duality_check(CarpetParams(N), m_max);
  py::list rows;
  for (const auto& r : rep.rows) {
    py::dict row;
    row["m"] = r.m;
    row["RG"] = r.RG;
    row["RD"] = r.RD;
    row["deviation"] = r.deviation;
    rows.append(row);
  }
  py::dict d;
  d["max_deviation"] = rep.max_deviation;
  d["rows"] = rows;
  return d;
}

py::dict rho_dict(const std::vector<double>& seq) {
  const auto e = rho_estimate(seq);
  py::dict d;
  d["last_ratio"] = e.last_ratio;
  d["slope"] = e.slope;
  d["ratios"] = e.ratios;
  return d;
}

std::string scaling_report_json(int N, int m_max, int fem_n_max, int fem_k, double slack) {
  ScalingOptions o;
  o.m_max = m_max;
  o.fem_n_max = fem_n_max;
  o.fem_k = fem_k;
  o.slack = slack;
  return scaling_json(build_scaling_report(CarpetParams(N), o));
}

}  // namespace

PYBIND11_MODULE(_carpet, m) {
  m.doc() = "4N-carpet pre-fractals: geometry, graph resistances and finite elements";
  py::register_exception<CapExceeded>(m, "CapExceeded", PyExc_RuntimeError);

  m.def("contraction_ratio", &contraction_ratio, py::arg("N"));
  m.def("hausdorff_dimension", &hausdorff_dimension, py::arg("N"));
  m.def(
      "outer_vertex", [](int N, long long j) { return outer_vertex(CarpetParams(N), j); }, py::arg("N"),
      py::arg("j"));
  m.def(
      "cell_count", [](int N, int level) { return cell_count(CarpetParams(N), level); }, py::arg("N"),
      py::arg("level"), "None when (4N)^level overflows");
  m.def(
      "carpet_svg",
      [](int N, int level, bool highlight_ab) {
        SvgOptions o;
        o.highlight_ab = highlight_ab;
        return emit_carpet_svg(CarpetParams(N), level, o);
      },
      py::arg("N"), py::arg("level"), py::arg("highlight_ab") = false);
  m.def("graph_stats", &graph_stats_dict, py::arg("N"), py::arg("m"), py::arg("kind") = "G");
  m.def("_graph_resistance_json", &graph_resistance_json, py::arg("N"), py::arg("m"), py::arg("kind") = "G");
  m.def("fem_resistance", &fem_dict, py::arg("N"), py::arg("n"), py::arg("k"));
  m.def("duality", &duality_dict, py::arg("N"), py::arg("m_max"));
  m.def("rho_estimate", &rho_dict, py::arg("sequence"));
  m.def(
      "beta_coefficients", [](int N, double I0, double IN, double I3N1) { return beta_coefficients(N, {I0, IN, I3N1}); },
      py::arg("N"), py::arg("I0"), py::arg("IN"), py::arg("I3N1"));
  m.def("_scaling_report_json", &scaling_report_json, py::arg("N"), py::arg("m_max") = 4, py::arg("fem_n_max") = 2,
        py::arg("fem_k") = 3, py::arg("slack") = 0.05);
}
