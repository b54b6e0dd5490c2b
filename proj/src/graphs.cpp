#include "carpet/graphs.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "carpet/union_find.hpp"

namespace carpet {

namespace {

std::uint64_t cell_key(long long gx, long long gy) {
  // splitmix-style mix of the two grid coordinates
  std::uint64_t h = static_cast<std::uint64_t>(gx) * 0x9E3779B97F4A7C15ULL;
  h ^= static_cast<std::uint64_t>(gy) + 0x7F4A7C159E3779B9ULL + (h << 6) + (h >> 2);
  h ^= h >> 31;
  h *= 0xBF58476D1CE4E5B9ULL;
  h ^= h >> 27;
  return h;
}

long long grid_coord(double x, double cell) { return static_cast<long long>(std::floor(x / cell)); }

bool lex_less(Point a, Point b) {
  return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
}

}  // namespace

DedupResult snap_dedup(const std::vector<Point>& points, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("snap tolerance must be positive");
  const std::size_t n = points.size();
  UnionFind uf(n);
  std::unordered_multimap<std::uint64_t, int> grid;
  grid.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Point p = points[i];
    const long long gx = grid_coord(p.real(), tol), gy = grid_coord(p.imag(), tol);
    for (long long dx = -1; dx <= 1; ++dx)
      for (long long dy = -1; dy <= 1; ++dy) {
        auto [lo, hi] = grid.equal_range(cell_key(gx + dx, gy + dy));
        for (auto it = lo; it != hi; ++it)
          if (std::abs(points[it->second] - p) <= tol) uf.unite(static_cast<int>(i), it->second);
      }
    grid.emplace(cell_key(gx, gy), static_cast<int>(i));
  }

  DedupResult out;
  out.ids.assign(n, -1);
  std::vector<int> root_id(n, -1);
  std::vector<Point> lo, hi;  // bounding box per class
  for (std::size_t i = 0; i < n; ++i) {
    const int root = uf.find(static_cast<int>(i));
    int& id = root_id[root];
    const Point p = points[i];
    if (id < 0) {
      id = static_cast<int>(out.representatives.size());
      out.representatives.push_back(p);
      lo.push_back(p);
      hi.push_back(p);
    } else {
      if (lex_less(p, out.representatives[id])) out.representatives[id] = p;
      lo[id] = {std::min(lo[id].real(), p.real()), std::min(lo[id].imag(), p.imag())};
      hi[id] = {std::max(hi[id].real(), p.real()), std::max(hi[id].imag(), p.imag())};
    }
    out.ids[i] = id;
  }
  for (std::size_t id = 0; id < lo.size(); ++id)
    if (std::abs(hi[id] - lo[id]) > 10.0 * tol)
      throw ToleranceError("snap merge chain spans " + fmt17(std::abs(hi[id] - lo[id])) +
                           " > 10 * tol; geometry is inconsistent at this tolerance");
  return out;
}

PointIndex::PointIndex(const std::vector<Point>& points, double tol)
    : points_(points), tol_(tol), cell_(tol) {
  grid_.reserve(points_.size());
  for (std::size_t i = 0; i < points_.size(); ++i)
    grid_.emplace(cell_key(grid_coord(points_[i].real(), cell_), grid_coord(points_[i].imag(), cell_)),
                  static_cast<int>(i));
}

int PointIndex::find(Point p) const {
  const long long gx = grid_coord(p.real(), cell_), gy = grid_coord(p.imag(), cell_);
  int found = -1;
  for (long long dx = -1; dx <= 1; ++dx)
    for (long long dy = -1; dy <= 1; ++dy) {
      auto [lo, hi] = grid_.equal_range(cell_key(gx + dx, gy + dy));
      for (auto it = lo; it != hi; ++it)
        if (std::abs(points_[it->second] - p) <= tol_) {
          if (found >= 0 && found != it->second) return -1;  // ambiguous
          found = it->second;
        }
    }
  return found;
}

const char* to_string(GraphKind k) { return k == GraphKind::G ? "G" : "D"; }

const char* to_string(VertexRole r) {
  switch (r) {
    case VertexRole::CellCenter: return "cell-center";
    case VertexRole::SideMidpoint: return "side-midpoint";
    default: return "corner";
  }
}

GraphKind parse_graph_kind(const std::string& s) {
  if (s == "G" || s == "g") return GraphKind::G;
  if (s == "D" || s == "d") return GraphKind::D;
  throw std::invalid_argument("graph kind must be G or D, got '" + s + "'");
}

namespace {

std::vector<Point> base_graph_points(const CarpetParams& params, GraphKind kind) {
  const int N = params.N();
  auto C = [&](int j) { return outer_vertex(params, j); };
  if (kind == GraphKind::G)
    return {Point{0.0, 0.0}, 0.5 * (C(0) + C(1)), 0.5 * (C(N) + C(N + 1)),
            0.5 * (C(3 * N - 1) + C(3 * N))};
  return {Point{0.0, 0.0}, C(0), C(1), C(N), C(N + 1), C(3 * N - 1), C(3 * N)};
}

}  // namespace

GraphApprox build_graph(const CarpetParams& params, int m, GraphKind kind,
                        const GraphBuildOptions& opts) {
  const auto cells = enumerate_cells(params, m, opts.cell_cap);
  const auto base = base_graph_points(params, kind);
  const std::size_t per = base.size();

  std::vector<Point> pts;
  pts.reserve(cells.size() * per);
  for (const auto& c : cells)
    for (Point b : base) pts.push_back(c.map(b));

  GraphApprox g;
  g.kind = kind;
  g.level = m;
  g.tolerance = level_tolerance(params, m) * opts.tol_multiplier;
  const DedupResult dd = snap_dedup(pts, g.tolerance);

  g.vertices.resize(dd.representatives.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const VertexRole role = (i % per == 0)      ? VertexRole::CellCenter
                            : kind == GraphKind::G ? VertexRole::SideMidpoint
                                                   : VertexRole::Corner;
    auto& v = g.vertices[dd.ids[i]];
    v.position = dd.representatives[dd.ids[i]];
    v.role = role;
  }

  g.edges.reserve(cells.size() * (per - 1));
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const int center = dd.ids[c * per];
    for (std::size_t t = 1; t < per; ++t) {
      const int other = dd.ids[c * per + t];
      if (other == center) throw ToleranceError("cell center merged with one of its own vertices");
      g.edges.push_back(GraphEdge{std::min(center, other), std::max(center, other), 1.0});
    }
  }
  std::sort(g.edges.begin(), g.edges.end(),
            [](const GraphEdge& a, const GraphEdge& b) { return std::pair(a.i, a.j) < std::pair(b.i, b.j); });
  for (std::size_t e = 1; e < g.edges.size(); ++e)
    if (g.edges[e].i == g.edges[e - 1].i && g.edges[e].j == g.edges[e - 1].j)
      throw ToleranceError("duplicate edge after vertex identification");

  if (m >= 1) {
    const BoundaryLocator loc(params, m, g.tolerance);
    for (std::size_t v = 0; v < g.vertices.size(); ++v) {
      if (g.vertices[v].role == VertexRole::CellCenter) continue;
      const auto hit = loc.locate(g.vertices[v].position);
      if (hit.cls == BoundaryClass::A) g.boundary_A.push_back(static_cast<int>(v));
      if (hit.cls == BoundaryClass::B) g.boundary_B.push_back(static_cast<int>(v));
    }
  }
  return g;
}

SymmetryPermutation symmetry_permutation(const CarpetParams& params, const GraphApprox& graph,
                                         Symmetry sym) {
  if (graph.level < 1) throw std::invalid_argument("symmetry permutations need level >= 1");
  const Similarity f = sym == Symmetry::Theta2 ? theta_map(params, 2) : conj_map();

  std::vector<Point> pos;
  pos.reserve(graph.vertices.size());
  for (const auto& v : graph.vertices) pos.push_back(v.position);
  const PointIndex index(pos, graph.tolerance);

  SymmetryPermutation p;
  p.swaps_AB = sym == Symmetry::Theta2;
  p.map.resize(pos.size());
  for (std::size_t v = 0; v < pos.size(); ++v) {
    const int w = index.find(f(pos[v]));
    if (w < 0 || graph.vertices[w].role != graph.vertices[v].role)
      throw SymmetryError("vertex " + std::to_string(v) + " has no image under the symmetry");
    p.map[v] = w;
  }

  std::unordered_set<std::uint64_t> edge_set;
  edge_set.reserve(graph.edges.size());
  auto ekey = [](int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
  };
  for (const auto& e : graph.edges) edge_set.insert(ekey(e.i, e.j));
  for (const auto& e : graph.edges)
    if (!edge_set.count(ekey(p.map[e.i], p.map[e.j])))
      throw SymmetryError("edge (" + std::to_string(e.i) + "," + std::to_string(e.j) +
                          ") is not mapped to an edge");

  auto maps_onto = [&](const std::vector<int>& from, const std::vector<int>& to) {
    std::vector<int> img;
    img.reserve(from.size());
    for (int v : from) img.push_back(p.map[v]);
    std::sort(img.begin(), img.end());
    return img == to;
  };
  const bool ok = p.swaps_AB ? maps_onto(graph.boundary_A, graph.boundary_B) &&
                                   maps_onto(graph.boundary_B, graph.boundary_A)
                             : maps_onto(graph.boundary_A, graph.boundary_A) &&
                                   maps_onto(graph.boundary_B, graph.boundary_B);
  if (!ok) throw SymmetryError("boundary sets are not mapped as expected");
  return p;
}

std::vector<int> degrees(const GraphApprox& graph) {
  std::vector<int> deg(graph.vertices.size(), 0);
  for (const auto& e : graph.edges) {
    ++deg[e.i];
    ++deg[e.j];
  }
  return deg;
}

GraphStats graph_stats(const GraphApprox& graph) {
  GraphStats s;
  s.vertices = graph.vertices.size();
  s.edges = graph.edges.size();
  for (int d : degrees(graph)) ++s.degree_histogram[d];
  UnionFind uf(s.vertices);
  std::size_t comps = s.vertices;
  for (const auto& e : graph.edges)
    if (uf.unite(e.i, e.j)) --comps;
  s.components = comps;
  s.boundary_A = graph.boundary_A.size();
  s.boundary_B = graph.boundary_B.size();
  return s;
}

std::string graph_json(const GraphApprox& graph) {
  nlohmann::json j;
  j["kind"] = to_string(graph.kind);
  j["level"] = graph.level;
  auto& vs = j["vertices"] = nlohmann::json::array();
  for (const auto& v : graph.vertices)
    vs.push_back({{"x", v.position.real()}, {"y", v.position.imag()}, {"role", to_string(v.role)}});
  auto& es = j["edges"] = nlohmann::json::array();
  for (const auto& e : graph.edges) es.push_back({e.i, e.j});
  j["A"] = graph.boundary_A;
  j["B"] = graph.boundary_B;
  return j.dump();
}

std::string graph_svg(const CarpetParams& params, const GraphApprox& graph, double size_px) {
  std::ostringstream os;
  const double stroke = 0.002;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << fmt17(size_px)
     << "\" height=\"" << fmt17(size_px) << "\" viewBox=\"-1.05 -1.05 2.1 2.1\">\n"
     << "<g id=\"cells\" fill=\"none\" stroke=\"#909090\" stroke-width=\"" << fmt17(stroke) << "\">\n";
  for (const auto& c : enumerate_cells(params, graph.level)) {
    os << "<polygon points=\"";
    bool first = true;
    for (Point p : c.polygon(params)) {
      if (!first) os << ' ';
      first = false;
      os << fmt17(p.real()) << ',' << fmt17(-p.imag());
    }
    os << "\"/>\n";
  }
  os << "</g>\n<g id=\"edges\" stroke=\"#000000\" stroke-width=\"" << fmt17(stroke) << "\">\n";
  for (const auto& e : graph.edges) {
    const Point a = graph.vertices[e.i].position, b = graph.vertices[e.j].position;
    os << "<line x1=\"" << fmt17(a.real()) << "\" y1=\"" << fmt17(-a.imag()) << "\" x2=\""
       << fmt17(b.real()) << "\" y2=\"" << fmt17(-b.imag()) << "\"/>\n";
  }
  os << "</g>\n";
  const double rad = 0.25 * std::pow(params.r(), graph.level);
  for (const auto& [name, set, color] :
       {std::tuple{"A", &graph.boundary_A, "#c00000"}, std::tuple{"B", &graph.boundary_B, "#0000c0"}}) {
    os << "<g id=\"" << name << "\" fill=\"" << color << "\">\n";
    for (int v : *set) {
      const Point p = graph.vertices[v].position;
      os << "<circle cx=\"" << fmt17(p.real()) << "\" cy=\"" << fmt17(-p.imag()) << "\" r=\""
         << fmt17(0.1 * rad) << "\"/>\n";
    }
    os << "</g>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace carpet
