#include "carpet/fem.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "carpet/graphs.hpp"

namespace carpet {

const char* to_string(NodeMarker m) {
  switch (m) {
    case NodeMarker::DirichletA: return "dirichlet-A";
    case NodeMarker::DirichletB: return "dirichlet-B";
    case NodeMarker::Neumann: return "neumann-boundary";
    default: return "interior";
  }
}

namespace {

double signed_area(Point a, Point b, Point c) {
  return 0.5 * ((b.real() - a.real()) * (c.imag() - a.imag()) - (c.real() - a.real()) * (b.imag() - a.imag()));
}

// Appends the 4^k triangles of the k-fold red refinement of (p0, p1, p2),
// i.e. the lattice subdivision with 2^k segments per edge.
void refine_triangle(Point p0, Point p1, Point p2, int k, std::vector<Point>& pts,
                     std::vector<std::array<int, 3>>& tris) {
  const int s = 1 << k;
  const int base = static_cast<int>(pts.size());
  std::vector<int> row_start(s + 2);
  int idx = 0;
  for (int i = 0; i <= s; ++i) {
    row_start[i] = idx;
    for (int j = 0; j <= s - i; ++j) {
      pts.push_back(p0 + (static_cast<double>(i) / s) * (p1 - p0) + (static_cast<double>(j) / s) * (p2 - p0));
      ++idx;
    }
  }
  auto at = [&](int i, int j) { return base + row_start[i] + j; };
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < s - i; ++j) {
      tris.push_back({at(i, j), at(i + 1, j), at(i, j + 1)});
      if (i + j < s - 1) tris.push_back({at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)});
    }
}

// Collapse the raw point list with snap_dedup and orient triangles CCW.
void finalize_mesh(Mesh& mesh, const std::vector<Point>& raw, const std::vector<std::array<int, 3>>& raw_tris) {
  const DedupResult dd = snap_dedup(raw, mesh.tolerance);
  mesh.nodes = dd.representatives;
  mesh.triangles.clear();
  mesh.triangles.reserve(raw_tris.size());
  for (const auto& t : raw_tris) {
    std::array<int, 3> m{dd.ids[t[0]], dd.ids[t[1]], dd.ids[t[2]]};
    if (m[0] == m[1] || m[1] == m[2] || m[0] == m[2]) throw ToleranceError("degenerate triangle after node merge");
    if (signed_area(mesh.nodes[m[0]], mesh.nodes[m[1]], mesh.nodes[m[2]]) < 0) std::swap(m[1], m[2]);
    mesh.triangles.push_back(m);
  }
}

std::unordered_map<std::uint64_t, int> edge_use_counts(const Mesh& mesh) {
  std::unordered_map<std::uint64_t, int> count;
  count.reserve(mesh.triangles.size() * 2);
  for (const auto& t : mesh.triangles)
    for (int e = 0; e < 3; ++e) {
      int a = t[e], b = t[(e + 1) % 3];
      if (a > b) std::swap(a, b);
      ++count[(static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b)];
    }
  return count;
}

void mark_neumann(Mesh& mesh) {
  for (const auto& [key, c] : edge_use_counts(mesh)) {
    if (c != 1) continue;
    for (int v : {static_cast<int>(key >> 32), static_cast<int>(key & 0xffffffffu)})
      if (mesh.markers[v] == NodeMarker::Interior) mesh.markers[v] = NodeMarker::Neumann;
  }
}

}  // namespace

Mesh build_mesh(const CarpetParams& params, int n, int k, const MeshOptions& opts) {
  if (n < 0 || k < 0) throw std::invalid_argument("mesh level and refinement must be >= 0");
  const auto cells = cell_count(params, n);
  const double tri_count =
      static_cast<double>(params.num_cells_per_level()) * std::pow(4.0, k) * (cells ? static_cast<double>(*cells) : 1e300);
  if (k > 15 || tri_count > static_cast<double>(opts.triangle_cap))
    throw CapExceeded("mesh (n=" + std::to_string(n) + ", k=" + std::to_string(k) +
                      ") exceeds the triangle cap of " + std::to_string(opts.triangle_cap));

  Mesh mesh;
  mesh.N = params.N();
  mesh.level = n;
  mesh.refinement = k;
  mesh.tolerance = level_tolerance(params, n) / static_cast<double>(1 << k);

  std::vector<Point> raw;
  std::vector<std::array<int, 3>> raw_tris;
  const std::size_t per_fan = static_cast<std::size_t>((1 << k) + 1) * ((1 << k) + 2) / 2;
  raw.reserve(static_cast<std::size_t>(tri_count / std::pow(4.0, k)) * per_fan);
  raw_tris.reserve(static_cast<std::size_t>(tri_count));
  for (const auto& c : enumerate_cells(params, n)) {
    const auto poly = c.polygon(params);
    const Point center = c.center();
    for (std::size_t j = 0; j < poly.size(); ++j)
      refine_triangle(center, poly[j], poly[(j + 1) % poly.size()], k, raw, raw_tris);
  }
  finalize_mesh(mesh, raw, raw_tris);

  mesh.markers.assign(mesh.nodes.size(), NodeMarker::Interior);
  const BoundaryLocator loc(params, n, level_tolerance(params, n));
  for (std::size_t v = 0; v < mesh.nodes.size(); ++v) {
    const auto hit = loc.locate(mesh.nodes[v]);
    if (hit.cls == BoundaryClass::A) mesh.markers[v] = NodeMarker::DirichletA;
    if (hit.cls == BoundaryClass::B) mesh.markers[v] = NodeMarker::DirichletB;
  }
  mark_neumann(mesh);
  return mesh;
}

Mesh unit_square_mesh(int k) {
  if (k < 0 || k > 12) throw std::invalid_argument("unit square refinement must be in [0, 12]");
  const int s = 1 << k;
  Mesh mesh;
  mesh.refinement = k;
  mesh.tolerance = 1e-9 / s;
  auto id = [&](int i, int j) { return j * (s + 1) + i; };
  for (int j = 0; j <= s; ++j)
    for (int i = 0; i <= s; ++i) mesh.nodes.emplace_back(static_cast<double>(i) / s, static_cast<double>(j) / s);
  for (int j = 0; j < s; ++j)
    for (int i = 0; i < s; ++i) {
      mesh.triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      mesh.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  mesh.markers.assign(mesh.nodes.size(), NodeMarker::Interior);
  for (int j = 0; j <= s; ++j) {
    mesh.markers[id(0, j)] = NodeMarker::DirichletA;
    mesh.markers[id(s, j)] = NodeMarker::DirichletB;
  }
  mark_neumann(mesh);
  return mesh;
}

bool is_conforming(const Mesh& mesh) {
  // A hanging node would show up as an edge used once that is not on the
  // outer boundary; checking that no edge is used more than twice, and that
  // every boundary edge lies between boundary-marked nodes, catches both.
  for (const auto& [key, c] : edge_use_counts(mesh)) {
    if (c > 2) return false;
    if (c == 1) {
      const int a = static_cast<int>(key >> 32), b = static_cast<int>(key & 0xffffffffu);
      if (mesh.markers[a] == NodeMarker::Interior || mesh.markers[b] == NodeMarker::Interior) return false;
    }
  }
  return true;
}

std::array<std::array<double, 3>, 3> element_stiffness(Point p0, Point p1, Point p2) {
  const std::array<Point, 3> p{p0, p1, p2};
  const double area = std::abs(signed_area(p0, p1, p2));
  std::array<double, 3> b{}, c{};
  for (int i = 0; i < 3; ++i) {
    const Point pj = p[(i + 1) % 3], pk = p[(i + 2) % 3];
    b[i] = pj.imag() - pk.imag();
    c[i] = pk.real() - pj.real();
  }
  std::array<std::array<double, 3>, 3> K{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) K[i][j] = (b[i] * b[j] + c[i] * c[j]) / (4.0 * area);
  return K;
}

double mesh_inner(const Mesh& mesh, const std::vector<double>& f, const std::vector<double>& g) {
  double s = 0.0;
  for (const auto& t : mesh.triangles) {
    const auto K = element_stiffness(mesh.nodes[t[0]], mesh.nodes[t[1]], mesh.nodes[t[2]]);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) s += f[t[i]] * K[i][j] * g[t[j]];
  }
  return s;
}

FemSolution solve_mixed_bvp(const Mesh& mesh, const SolverOptions& opts) {
  const std::size_t n = mesh.nodes.size();
  std::vector<bool> fixed(n, false);
  std::vector<double> values(n, 0.0);
  bool has_a = false, has_b = false;
  for (std::size_t v = 0; v < n; ++v) {
    if (mesh.markers[v] == NodeMarker::DirichletA) {
      fixed[v] = true;
      has_a = true;
    } else if (mesh.markers[v] == NodeMarker::DirichletB) {
      fixed[v] = true;
      values[v] = 1.0;
      has_b = true;
    }
  }
  if (!has_a || !has_b) throw std::runtime_error("mesh has no Dirichlet A or B nodes");

  std::vector<Triplet> K;
  K.reserve(9 * mesh.triangles.size());
  for (const auto& t : mesh.triangles) {
    const auto Ke = element_stiffness(mesh.nodes[t[0]], mesh.nodes[t[1]], mesh.nodes[t[2]]);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) K.push_back({t[i], t[j], Ke[i][j]});
  }
  FemSolution sol;
  sol.u = solve_dirichlet(n, K, fixed, values, 0.0, opts, &sol.info);
  sol.energy = mesh_inner(mesh, sol.u, sol.u);
  if (!(sol.energy > 0.0)) throw std::runtime_error("non-positive discrete energy; singular mesh?");
  sol.resistance = 1.0 / sol.energy;
  return sol;
}

std::vector<double> normalize_pm1(const FemSolution& sol) {
  std::vector<double> u(sol.u.size());
  std::transform(sol.u.begin(), sol.u.end(), u.begin(), [](double x) { return 2.0 * x - 1.0; });
  return u;
}

std::vector<int> node_permutation(const Mesh& mesh, const Similarity& sym) {
  const PointIndex index(mesh.nodes, mesh.tolerance);
  std::vector<int> perm(mesh.nodes.size());
  for (std::size_t v = 0; v < mesh.nodes.size(); ++v) {
    perm[v] = index.find(sym(mesh.nodes[v]));
    if (perm[v] < 0) throw SymmetryError("mesh node " + std::to_string(v) + " has no symmetric partner");
  }
  return perm;
}

SectorData sector_analysis(const CarpetParams& params, const Mesh& mesh, const FemSolution& sol) {
  const int M = params.num_cells_per_level();
  const auto u = normalize_pm1(sol);
  const auto th = node_permutation(mesh, theta_map(params, 1));
  const auto th2 = node_permutation(mesh, theta_map(params, 2));
  const auto cj = node_permutation(mesh, conj_map());

  std::vector<double> w(u.size());
  for (std::size_t v = 0; v < u.size(); ++v) w[v] = u[th[v]];

  SectorData d;
  d.resistance = sol.resistance;
  d.sector_energies.assign(M, 0.0);
  const double half_width = std::numbers::pi / M;  // sector T_j spans arg C_j .. arg C_{j+1}
  for (const auto& t : mesh.triangles) {
    const Point p0 = mesh.nodes[t[0]], p1 = mesh.nodes[t[1]], p2 = mesh.nodes[t[2]];
    const Point centroid = (p0 + p1 + p2) / 3.0;
    const double ang = std::arg(centroid);
    int j = static_cast<int>(std::floor((ang * M / std::numbers::pi + 1.0) / 2.0));
    j = params.wrap(j);
    const Point axis = std::polar(1.0, 2.0 * j * std::numbers::pi / M);
    for (Point p : {p0, p1, p2}) {
      const double rad = std::abs(p);
      if (rad <= mesh.tolerance) continue;
      const double rel = std::abs(std::arg(p * std::conj(axis)));
      if (rel > half_width + mesh.tolerance / rad + 1e-12)
        throw std::runtime_error("triangle straddles the ray bounding sector " + std::to_string(j));
    }
    const auto K = element_stiffness(p0, p1, p2);
    double uu = 0.0, ww = 0.0, uw = 0.0;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        uu += u[t[a]] * K[a][b] * u[t[b]];
        ww += w[t[a]] * K[a][b] * w[t[b]];
        uw += u[t[a]] * K[a][b] * w[t[b]];
      }
    d.sector_energies[j] += uu;
    if (j == 0) {
      d.E_v += uu;
      d.E_w += ww;
      d.orthogonality += uw;
    }
  }
  for (double e : d.sector_energies) d.energy_pm1 += e;
  for (std::size_t v = 0; v < u.size(); ++v) {
    d.theta2_residual = std::max(d.theta2_residual, std::abs(u[th2[v]] + u[v]));
    d.conj_residual = std::max(d.conj_residual, std::abs(u[cj[v]] - u[v]));
  }
  const double R = sol.resistance;
  d.E_V = R * R * d.E_v;
  d.E_W = R * R * d.E_w;
  return d;
}

std::vector<double> beta_coefficients(int N, const FluxTriple& I) {
  if (N < 2) throw std::invalid_argument("N must be >= 2");
  const double scale = std::max({1.0, std::abs(I.I0), std::abs(I.IN), std::abs(I.I3N1)});
  if (std::abs(I.I0 + I.IN + I.I3N1) > 1e-12 * scale)
    throw std::invalid_argument("fluxes I_0 + I_N + I_{3N-1} must sum to zero");
  std::vector<double> beta(4 * N);
  for (int j = 0; j < 4 * N; ++j) {
    if (j == 0)
      beta[j] = I.IN - I.I3N1;
    else if (j == N)
      beta[j] = I.I3N1 - I.I0;
    else if (j == 3 * N - 1)
      beta[j] = I.I0 - I.IN;
    else if (j < N)
      beta[j] = 2 * I.IN - 2 * I.I0;
    else if (j <= 3 * N - 2)
      beta[j] = 2 * I.I3N1 - 2 * I.IN;
    else
      beta[j] = 2 * I.I0 - 2 * I.I3N1;
  }
  return beta;
}

double beta_sum_squares_closed_form(int N, const FluxTriple& I) {
  const double a = I.IN - I.I0, b = I.I3N1 - I.IN, c = I.I0 - I.I3N1;
  return (4.0 * N - 3) * a * a + (8.0 * N - 7) * b * b + (4.0 * N + 1) * c * c;
}

double beta_sum_squares_bound(int N, const FluxTriple& I) {
  return (22.0 * N - 18) * I.I0 * I.I0 + (22.0 * N - 19) * I.IN * I.IN + (22.0 * N - 16) * I.I3N1 * I.I3N1;
}

GluedCurrentEnergy glued_current_energy(int N, const SectorData& s, const FluxTriple& I) {
  double beta2 = 0.0;
  for (double b : beta_coefficients(N, I)) beta2 += b * b;
  const double n2 = static_cast<double>(N) * N;
  const double sumI2 = I.sum_squares();
  GluedCurrentEnergy e;
  e.energy = n2 / 4.0 * s.E_V * sumI2 + n2 / 36.0 * s.E_W * beta2;
  e.bound_sectors = (n2 / 4.0 * s.E_V + n2 / 18.0 * (11.0 * N - 8) * s.E_W) * sumI2;
  e.bound_resistance = 11.0 / 9.0 * n2 * s.resistance * sumI2;
  return e;
}

std::vector<int> d0_corner_indices(int N) { return {0, 1, N, N + 1, 3 * N - 1, 3 * N}; }

GluedPotentialEnergy glued_potential_energy(int N, const SectorData& s, const std::map<int, double>& z) {
  const int M = 4 * N;
  const auto allowed = d0_corner_indices(N);
  std::vector<double> zz(M, 0.0);
  for (const auto& [j, val] : z) {
    if (std::find(allowed.begin(), allowed.end(), j) == allowed.end())
      throw std::invalid_argument("C_" + std::to_string(j) + " is not a vertex of D_0");
    zz[j] = val;
  }
  double plus = 0.0, minus = 0.0, sumz2 = 0.0;
  for (int j = 0; j < M; ++j) {
    const double a = zz[(j + 1) % M], b = zz[j];
    plus += (a + b) * (a + b);
    minus += (a - b) * (a - b);
    sumz2 += b * b;
  }
  GluedPotentialEnergy e;
  e.energy = 0.25 * s.E_v * plus + 0.25 * s.E_w * minus;
  e.bound_sectors = (s.E_v + s.E_w) * sumz2;
  e.bound_resistance = 2.0 / (N * s.resistance) * sumz2;
  return e;
}

std::vector<ConvergenceRow> convergence_table(const CarpetParams& params, int n, int k_min, int k_max,
                                              const SolverOptions& opts, const MeshOptions& mesh_opts) {
  std::vector<ConvergenceRow> rows;
  for (int k = k_min; k <= k_max; ++k) {
    const Mesh mesh = build_mesh(params, n, k, mesh_opts);
    const FemSolution sol = solve_mixed_bvp(mesh, opts);
    ConvergenceRow row{k, mesh.nodes.size(), mesh.triangles.size(), sol.energy, sol.resistance, 0.0};
    if (!rows.empty()) row.delta = row.resistance - rows.back().resistance;
    rows.push_back(row);
  }
  return rows;
}

std::optional<double> aitken_estimate(const std::vector<ConvergenceRow>& rows) {
  if (rows.size() < 3) return std::nullopt;
  const double x0 = rows[rows.size() - 3].resistance, x1 = rows[rows.size() - 2].resistance,
               x2 = rows.back().resistance;
  const double d1 = x1 - x0, d2 = x2 - x1;
  if (d1 == 0.0 || std::abs(d2) >= std::abs(d1) || d1 * d2 < 0) return std::nullopt;
  return x2 - d2 * d2 / (d2 - d1);
}

std::string convergence_csv(const std::vector<ConvergenceRow>& rows) {
  std::ostringstream os;
  os << "k,nodes,energy,R_est,delta\n";
  for (const auto& r : rows)
    os << r.k << ',' << r.nodes << ',' << fmt17(r.energy) << ',' << fmt17(r.resistance) << ','
       << fmt17(r.delta) << '\n';
  return os.str();
}

std::string mesh_json(const Mesh& mesh) {
  nlohmann::json j;
  j["N"] = mesh.N;
  j["level"] = mesh.level;
  j["refinement"] = mesh.refinement;
  auto& nodes = j["nodes"] = nlohmann::json::array();
  for (Point p : mesh.nodes) nodes.push_back({p.real(), p.imag()});
  j["triangles"] = mesh.triangles;
  auto& markers = j["markers"] = nlohmann::json::array();
  for (auto m : mesh.markers) markers.push_back(to_string(m));
  return j.dump();
}

std::string solution_csv(const Mesh& mesh, const FemSolution& sol) {
  std::ostringstream os;
  os << "node,x,y,u\n";
  for (std::size_t v = 0; v < mesh.nodes.size(); ++v)
    os << v << ',' << fmt17(mesh.nodes[v].real()) << ',' << fmt17(mesh.nodes[v].imag()) << ','
       << fmt17(sol.u[v]) << '\n';
  return os.str();
}

}  // namespace carpet
