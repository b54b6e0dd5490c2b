#pragma once

// Construction of the 4N-carpet pre-fractals F_n: the outer regular 4N-gon,
// the contractions phi_j, the rotation theta, the orientation-adjusted cell
// maps psi_j / psi~_j, cell enumeration, and the electrode sets A_n, B_n.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "carpet/common.hpp"

namespace carpet {

/// Euclidean similarity z -> a*z + b, or z -> a*conj(z) + b when `reflect`.
struct Similarity {
  std::complex<double> a{1.0, 0.0};
  std::complex<double> b{0.0, 0.0};
  bool reflect = false;

  Point operator()(Point z) const { return a * (reflect ? std::conj(z) : z) + b; }

  /// (*this) o other
  Similarity compose(const Similarity& other) const;

  double ratio() const { return std::abs(a); }

  /// Row-major 2x2 linear part [[m00, m01], [m10, m11]].
  std::array<double, 4> matrix() const;
};

class CarpetParams {
 public:
  /// Throws std::invalid_argument for N < 2.
  explicit CarpetParams(int N);

  int N() const { return N_; }
  /// Number of contractions (and polygon vertices), 4N.
  int num_cells_per_level() const { return 4 * N_; }
  double r() const { return r_; }
  const std::vector<Point>& vertices() const { return vertices_; }

  /// Reduce any integer index into [0, 4N).
  int wrap(long long j) const;

 private:
  int N_;
  double r_;
  std::vector<Point> vertices_;
};

double contraction_ratio(int N);
double hausdorff_dimension(int N);

/// C_j = exp((2j-1) i pi / 4N), j reduced mod 4N.
Point outer_vertex(const CarpetParams& params, long long j);

Similarity phi_map(const CarpetParams& params, long long j);
/// Rotation by k*pi/(2N) about the origin; negative k handled mod 4N.
Similarity theta_map(const CarpetParams& params, long long k);
Similarity conj_map();
Similarity psi_map(const CarpetParams& params, int j);
Similarity psi_tilde_map(const CarpetParams& params, int j);

Point apply_phi(const CarpetParams& params, long long j, Point z);
Point apply_theta(const CarpetParams& params, long long k, Point z);
Point apply_psi(const CarpetParams& params, int j, Point z);
Point apply_psi_tilde(const CarpetParams& params, int j, Point z);

/// Vertices of F_0 in order C_0, ..., C_{4N-1}.
std::vector<Point> base_polygon(const CarpetParams& params);
double polygon_area(const std::vector<Point>& poly);

struct CellAddress {
  std::vector<int> word;
  Similarity map;

  /// Image of F_0 under `map`, vertex k being the image of C_k.
  std::vector<Point> polygon(const CarpetParams& params) const;
  /// Center of the cell (image of the origin).
  Point center() const { return map.b; }
};

/// All (4N)^m cells of F_m with maps psi_{w1} o psi~_{w2} o ... o psi~_{wm}.
/// Words are enumerated in lexicographic order.
std::vector<CellAddress> enumerate_cells(const CarpetParams& params, int m,
                                         std::size_t cap = kDefaultCellCap);

/// Number of cells at level m, or nullopt if it overflows 64 bits.
std::optional<std::uint64_t> cell_count(const CarpetParams& params, int m);

enum class BoundaryClass { A, B, Other };

const char* to_string(BoundaryClass c);

struct SideSegment {
  int level = 0;
  Point start;
  Point end;
  std::optional<int> outer_index;  ///< j of the level-0 side L_j containing it
  BoundaryClass boundary_class = BoundaryClass::Other;

  double length() const { return std::abs(end - start); }
};

/// A-class side L_{4k} or B-class side L_{4k+2}; Other for odd sides.
BoundaryClass outer_side_class(const CarpetParams& params, int j);

/// The 2^n maximal segments of F_n lying on L_j, ordered from C_j to C_{j+1}.
std::vector<SideSegment> outer_side_segments(const CarpetParams& params, int j, int n);

/// All A and B segments of F_n (sides L_0, L_2, ..., L_{4N-2} in order).
std::vector<SideSegment> boundary_segments(const CarpetParams& params, int n);

/// Point-to-segment distance.
double segment_distance(Point p, Point a, Point b);

/// Classifies points against the A_n / B_n segments with tolerance tau.
class BoundaryLocator {
 public:
  BoundaryLocator(const CarpetParams& params, int n, double tau);

  struct Hit {
    BoundaryClass cls = BoundaryClass::Other;
    int outer_index = -1;
  };

  /// Class of the (closed) A/B segment within tau of p, or Other.
  Hit locate(Point p) const;

  /// Index of the outer side L_j (any parity) whose segment of F_n is within
  /// tau of p, or -1.
  int outer_side_of(Point p) const;

  int level() const { return n_; }
  double tau() const { return tau_; }

 private:
  struct Side {
    Point a, dir;  // dir is the unit vector from C_j to C_{j+1}
    double len;
    std::vector<std::pair<double, double>> intervals;  // sorted arclength ranges
  };
  bool on_side(const Side& s, Point p) const;

  const CarpetParams* params_;
  int n_;
  double tau_;
  std::vector<Side> sides_;
};

/// Scale-relative snap tolerance at level m: 1e-6 * r^m.
double level_tolerance(const CarpetParams& params, int m);

struct SvgOptions {
  bool highlight_ab = false;
  double size_px = 600.0;
  double stroke = 0.002;
};

/// Deterministic SVG 1.1 document with one <polygon> per cell of F_n.
std::string emit_carpet_svg(const CarpetParams& params, int n, const SvgOptions& opts = {},
                            std::size_t cap = kDefaultCellCap);

/// JSON dump {N, level, cells:[{word, vertices:[[x,y],...]}]}.
std::string cells_json(const CarpetParams& params, int n, std::size_t cap = kDefaultCellCap);

}  // namespace carpet
