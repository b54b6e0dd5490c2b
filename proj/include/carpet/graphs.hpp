#pragma once

// Current-approximation graphs G_m and potential-approximation graphs D_m.

#include <cstdint>
#include <map>
#include <unordered_map>
#include <string>
#include <vector>

#include "carpet/geometry.hpp"

namespace carpet {

struct DedupResult {
  std::vector<int> ids;                ///< canonical id per input point
  std::vector<Point> representatives;  ///< one per id
};

/// Merge points within `tol` (transitively) using a spatial hash grid. Ids are
/// assigned in order of first appearance; the representative of each class is
/// its lexicographically smallest member. Throws ToleranceError if a merged
/// class spans more than 10*tol.
DedupResult snap_dedup(const std::vector<Point>& points, double tol);

/// Exact-match lookup of points against a fixed, already deduplicated set.
class PointIndex {
 public:
  PointIndex(const std::vector<Point>& points, double tol);
  /// Index of the unique point within tol of p, or -1.
  int find(Point p) const;

 private:
  std::vector<Point> points_;
  double tol_;
  double cell_;
  std::unordered_multimap<std::uint64_t, int> grid_;
};

enum class GraphKind { G, D };
enum class VertexRole { CellCenter, SideMidpoint, Corner };

const char* to_string(GraphKind k);
const char* to_string(VertexRole r);
GraphKind parse_graph_kind(const std::string& s);

struct GraphVertex {
  Point position;
  VertexRole role;
};

struct GraphEdge {
  int i;
  int j;
  double conductance = 1.0;
};

struct GraphApprox {
  GraphKind kind = GraphKind::G;
  int level = 0;
  std::vector<GraphVertex> vertices;
  std::vector<GraphEdge> edges;  ///< sorted by (i, j) with i < j
  std::vector<int> boundary_A;   ///< sorted
  std::vector<int> boundary_B;   ///< sorted
  double tolerance = 0.0;        ///< snap tolerance used at construction
};

struct GraphBuildOptions {
  double tol_multiplier = 1.0;  ///< scales the level tolerance 1e-6 r^m
  std::size_t cell_cap = kDefaultCellCap;
};

/// Per-cell copies of G_0 (center + midpoints of L_0, L_N, L_{3N-1}) or D_0
/// (center + C_0, C_1, C_N, C_{N+1}, C_{3N-1}, C_{3N}) mapped through every
/// psi_w, vertices identified geometrically. For m >= 1 vertices on A_m / B_m
/// are tagged; m = 0 graphs carry empty boundary sets.
GraphApprox build_graph(const CarpetParams& params, int m, GraphKind kind,
                        const GraphBuildOptions& opts = {});

enum class Symmetry { Theta2, Conj };

struct SymmetryPermutation {
  std::vector<int> map;  ///< vertex v goes to map[v]
  bool swaps_AB = false;
};

/// Vertex permutation induced by rotation theta^2 or complex conjugation.
/// Throws SymmetryError if a vertex, edge, or boundary tag is not preserved.
SymmetryPermutation symmetry_permutation(const CarpetParams& params, const GraphApprox& graph,
                                         Symmetry sym);

struct GraphStats {
  std::size_t vertices = 0;
  std::size_t edges = 0;
  std::map<int, std::size_t> degree_histogram;
  std::size_t components = 0;
  std::size_t boundary_A = 0;
  std::size_t boundary_B = 0;
};

GraphStats graph_stats(const GraphApprox& graph);

/// Vertex degrees, indexed by vertex.
std::vector<int> degrees(const GraphApprox& graph);

/// JSON dump {kind, level, vertices:[{x,y,role}], edges:[[i,j]], A:[i], B:[i]}.
std::string graph_json(const GraphApprox& graph);

/// SVG overlay of the graph on the level-m carpet.
std::string graph_svg(const CarpetParams& params, const GraphApprox& graph,
                      double size_px = 600.0);

}  // namespace carpet
