#include "carpet/network.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "carpet/union_find.hpp"

namespace carpet {

ConductanceNetwork::ConductanceNetwork(std::size_t vertex_count, std::vector<GraphEdge> edges)
    : n_(vertex_count), edges_(std::move(edges)) {
  for (auto& e : edges_) {
    if (e.i < 0 || e.j < 0 || static_cast<std::size_t>(e.i) >= n_ || static_cast<std::size_t>(e.j) >= n_)
      throw std::invalid_argument("edge endpoint out of range");
    if (e.i == e.j) throw std::invalid_argument("self loops are not allowed");
    if (!(e.conductance > 0.0)) throw std::invalid_argument("conductance must be positive");
    if (e.i > e.j) std::swap(e.i, e.j);
  }
  std::sort(edges_.begin(), edges_.end(), [](const GraphEdge& a, const GraphEdge& b) {
    return std::pair(a.i, a.j) < std::pair(b.i, b.j);
  });
  for (std::size_t e = 1; e < edges_.size(); ++e)
    if (edges_[e].i == edges_[e - 1].i && edges_[e].j == edges_[e - 1].j)
      throw std::invalid_argument("duplicate edge (" + std::to_string(edges_[e].i) + "," +
                                  std::to_string(edges_[e].j) + ")");
}

ConductanceNetwork ConductanceNetwork::from_graph(const GraphApprox& graph) {
  return ConductanceNetwork(graph.vertices.size(), graph.edges);
}

std::vector<Triplet> ConductanceNetwork::laplacian() const {
  std::vector<Triplet> t;
  t.reserve(4 * edges_.size());
  for (const auto& e : edges_) {
    t.push_back({e.i, e.i, e.conductance});
    t.push_back({e.j, e.j, e.conductance});
    t.push_back({e.i, e.j, -e.conductance});
    t.push_back({e.j, e.i, -e.conductance});
  }
  return t;
}

PotentialVector solve_potential(const ConductanceNetwork& net, const std::vector<int>& A,
                                const std::vector<int>& B, double a_val, double b_val,
                                const SolverOptions& opts) {
  if (A.empty() || B.empty()) throw std::invalid_argument("boundary sets A and B must be nonempty");
  const std::size_t n = net.size();
  std::vector<bool> fixed(n, false);
  std::vector<double> values(n, 0.0);
  for (int v : A) {
    if (v < 0 || static_cast<std::size_t>(v) >= n) throw std::invalid_argument("A vertex out of range");
    fixed[v] = true;
    values[v] = a_val;
  }
  std::vector<bool> inA = fixed;
  for (int v : B) {
    if (v < 0 || static_cast<std::size_t>(v) >= n) throw std::invalid_argument("B vertex out of range");
    if (inA[v]) throw std::invalid_argument("A and B intersect at vertex " + std::to_string(v));
    fixed[v] = true;
    values[v] = b_val;
  }

  UnionFind uf(n);
  for (const auto& e : net.edges()) uf.unite(e.i, e.j);
  std::unordered_set<int> a_roots;
  for (int v : A) a_roots.insert(uf.find(v));

  PotentialVector p;
  p.A = A;
  p.B = B;
  p.a_val = a_val;
  p.b_val = b_val;
  p.connected = std::any_of(B.begin(), B.end(), [&](int v) { return a_roots.count(uf.find(v)) > 0; });
  p.values = solve_dirichlet(n, net.laplacian(), fixed, values, a_val, opts, &p.info);
  return p;
}

double dirichlet_energy(const ConductanceNetwork& net, const std::vector<double>& u) {
  double s = 0.0;
  for (const auto& e : net.edges()) {
    const double d = u[e.i] - u[e.j];
    s += e.conductance * d * d;
  }
  return s;
}

ResistanceResult effective_resistance(const ConductanceNetwork& net, const std::vector<int>& A,
                                      const std::vector<int>& B, const SolverOptions& opts) {
  ResistanceResult r;
  r.potential = solve_potential(net, A, B, 0.0, 1.0, opts);
  r.energy = dirichlet_energy(net, r.potential.values);
  r.resistance = r.potential.connected ? 1.0 / r.energy : std::numeric_limits<double>::infinity();
  return r;
}

CurrentAssignment CurrentAssignment::scaled(double s) const {
  CurrentAssignment c{values};
  for (double& v : c.values) v *= s;
  return c;
}

double CurrentAssignment::at(const ConductanceNetwork& net, int x, int y) const {
  const int lo = std::min(x, y), hi = std::max(x, y);
  const auto& es = net.edges();
  auto it = std::lower_bound(es.begin(), es.end(), std::pair(lo, hi), [](const GraphEdge& e, auto key) {
    return std::pair(e.i, e.j) < key;
  });
  if (it == es.end() || it->i != lo || it->j != hi)
    throw std::out_of_range("(" + std::to_string(x) + "," + std::to_string(y) + ") is not an edge");
  const double v = values[static_cast<std::size_t>(it - es.begin())];
  return x == lo ? v : -v;
}

CurrentAssignment current_from_potential(const ConductanceNetwork& net, const std::vector<double>& u) {
  CurrentAssignment c;
  c.values.reserve(net.edges().size());
  for (const auto& e : net.edges()) c.values.push_back(e.conductance * (u[e.i] - u[e.j]));
  return c;
}

double current_energy(const ConductanceNetwork& net, const CurrentAssignment& I) {
  double s = 0.0;
  const auto& es = net.edges();
  for (std::size_t e = 0; e < es.size(); ++e) s += I.values[e] * I.values[e] / es[e].conductance;
  return s;
}

std::vector<double> vertex_outflow(const ConductanceNetwork& net, const CurrentAssignment& I) {
  std::vector<double> out(net.size(), 0.0);
  const auto& es = net.edges();
  for (std::size_t e = 0; e < es.size(); ++e) {
    out[es[e].i] += I.values[e];
    out[es[e].j] -= I.values[e];
  }
  return out;
}

double max_kirchhoff_violation(const ConductanceNetwork& net, const CurrentAssignment& I,
                               const std::vector<int>& A, const std::vector<int>& B) {
  const auto out = vertex_outflow(net, I);
  double scale = 0.0;
  for (double c : I.values) scale = std::max(scale, std::abs(c));
  if (scale == 0.0) return 0.0;
  std::vector<bool> boundary(net.size(), false);
  for (int v : A) boundary[v] = true;
  for (int v : B) boundary[v] = true;
  double worst = 0.0;
  for (std::size_t v = 0; v < net.size(); ++v)
    if (!boundary[v]) worst = std::max(worst, std::abs(out[v]) / scale);
  return worst;
}

double side_flux(const CarpetParams& params, const GraphApprox& graph, const ConductanceNetwork& net,
                 const CurrentAssignment& I, int k) {
  k = params.wrap(k);
  if (outer_side_class(params, k) == BoundaryClass::Other)
    throw std::invalid_argument("L_" + std::to_string(k) + " is not an A or B side");
  const BoundaryLocator loc(params, graph.level, graph.tolerance);
  const auto out = vertex_outflow(net, I);
  double flux = 0.0;
  for (const auto* set : {&graph.boundary_A, &graph.boundary_B})
    for (int v : *set)
      if (loc.locate(graph.vertices[v].position).outer_index == k) flux += out[v];
  return flux;
}

GraphResistanceRecord analyze_graph(const CarpetParams& params, const GraphApprox& graph,
                                    const SolverOptions& opts) {
  if (graph.boundary_A.empty() || graph.boundary_B.empty())
    throw std::invalid_argument("graph has no tagged boundary (level must be >= 1)");
  const auto net = ConductanceNetwork::from_graph(graph);
  const auto res = effective_resistance(net, graph.boundary_A, graph.boundary_B, opts);
  GraphResistanceRecord rec;
  rec.kind = graph.kind;
  rec.N = params.N();
  rec.m = graph.level;
  rec.resistance = res.resistance;
  rec.energy = res.energy;
  rec.info = res.potential.info;
  if (res.infinite()) return rec;
  const auto I = current_from_potential(net, res.potential.values).scaled(res.resistance);
  rec.thomson_energy = current_energy(net, I);
  const BoundaryLocator loc(params, graph.level, graph.tolerance);
  const auto out = vertex_outflow(net, I);
  for (int k = 0; k < params.num_cells_per_level(); k += 2) rec.flux_per_side[k] = 0.0;
  for (const auto* set : {&graph.boundary_A, &graph.boundary_B})
    for (int v : *set) rec.flux_per_side[loc.locate(graph.vertices[v].position).outer_index] += out[v];
  return rec;
}

std::string record_json(const GraphResistanceRecord& rec) {
  nlohmann::json j;
  j["kind"] = to_string(rec.kind);
  j["N"] = rec.N;
  j["m"] = rec.m;
  if (std::isfinite(rec.resistance))
    j["R"] = rec.resistance;
  else
    j["R"] = "inf";
  j["energy"] = rec.energy;
  j["thomson_energy"] = rec.thomson_energy;
  nlohmann::json flux = nlohmann::json::object();
  for (const auto& [k, f] : rec.flux_per_side) flux[std::to_string(k)] = f;
  j["flux_per_side"] = flux;
  j["solver"] = {{"method", rec.info.method},
                 {"unknowns", rec.info.unknowns},
                 {"iterations", rec.info.iterations},
                 {"relative_residual", rec.info.relative_residual}};
  return j.dump();
}

GraphResistanceRecord record_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  GraphResistanceRecord rec;
  rec.kind = parse_graph_kind(j.at("kind").get<std::string>());
  rec.N = j.at("N").get<int>();
  rec.m = j.at("m").get<int>();
  rec.resistance = j.at("R").is_string() ? std::numeric_limits<double>::infinity() : j.at("R").get<double>();
  rec.energy = j.at("energy").get<double>();
  rec.thomson_energy = j.at("thomson_energy").get<double>();
  for (const auto& [k, f] : j.at("flux_per_side").items()) rec.flux_per_side[std::stoi(k)] = f.get<double>();
  const auto& s = j.at("solver");
  rec.info.method = s.at("method").get<std::string>();
  rec.info.unknowns = s.at("unknowns").get<std::size_t>();
  rec.info.iterations = s.at("iterations").get<std::size_t>();
  rec.info.relative_residual = s.at("relative_residual").get<double>();
  return rec;
}

std::string potential_csv(const GraphApprox& graph, const std::vector<double>& u) {
  std::ostringstream os;
  os << "vertex,x,y,u\n";
  for (std::size_t v = 0; v < graph.vertices.size(); ++v)
    os << v << ',' << fmt17(graph.vertices[v].position.real()) << ','
       << fmt17(graph.vertices[v].position.imag()) << ',' << fmt17(u[v]) << '\n';
  return os.str();
}

std::string current_csv(const ConductanceNetwork& net, const CurrentAssignment& I) {
  std::ostringstream os;
  os << "i,j,I\n";
  const auto& es = net.edges();
  for (std::size_t e = 0; e < es.size(); ++e) os << es[e].i << ',' << es[e].j << ',' << fmt17(I.values[e]) << '\n';
  return os.str();
}

}  // namespace carpet
