#pragma once

// P1 finite elements for the mixed Dirichlet/Neumann problem on the
// pre-carpets F_n, plus the sector decomposition and the energy algebra used
// to glue currents and potentials across cells.

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "carpet/geometry.hpp"
#include "carpet/linsolve.hpp"

namespace carpet {

enum class NodeMarker { Interior, DirichletA, DirichletB, Neumann };

const char* to_string(NodeMarker m);

struct Mesh {
  std::vector<Point> nodes;
  std::vector<std::array<int, 3>> triangles;  ///< counter-clockwise
  std::vector<NodeMarker> markers;
  int N = 0;  ///< carpet parameter, 0 for meshes not built from a carpet
  int level = 0;
  int refinement = 0;
  double tolerance = 0.0;  ///< node identification tolerance
};

struct MeshOptions {
  std::size_t triangle_cap = 20'000'000;
};

/// Fan-triangulate every level-n cell from its center (4N triangles), refine
/// each triangle uniformly k times, identify nodes across cells, and mark
/// nodes on A_n / B_n as Dirichlet.
Mesh build_mesh(const CarpetParams& params, int n, int k, const MeshOptions& opts = {});

/// Structured mesh of [0,1]^2 with 2^k x 2^k squares split along a diagonal;
/// x = 0 is Dirichlet A, x = 1 is Dirichlet B.
Mesh unit_square_mesh(int k);

/// Every interior edge is shared by exactly two triangles and no edge by more.
bool is_conforming(const Mesh& mesh);

/// Local P1 stiffness matrix (cotangent formula), exact for linear fields.
std::array<std::array<double, 3>, 3> element_stiffness(Point p0, Point p1, Point p2);

struct FemSolution {
  std::vector<double> u;  ///< 0 on A nodes, 1 on B nodes
  double energy = 0.0;
  double resistance = 0.0;  ///< 1 / energy, a lower bound for the continuum value
  SolveInfo info;
};

/// Galerkin minimizer of the Dirichlet energy with u = 0 on A, 1 on B and the
/// natural condition elsewhere. Throws std::runtime_error if a Dirichlet set
/// is empty or the solve fails.
FemSolution solve_mixed_bvp(const Mesh& mesh, const SolverOptions& opts = {});

/// Sum over triangles of f^T K_t g.
double mesh_inner(const Mesh& mesh, const std::vector<double>& f, const std::vector<double>& g);

/// u_n = 2u - 1: -1 on A, +1 on B; its energy is 4 / R.
std::vector<double> normalize_pm1(const FemSolution& sol);

/// perm[v] is the node at sym(nodes[v]). Throws SymmetryError if the node set
/// is not invariant.
std::vector<int> node_permutation(const Mesh& mesh, const Similarity& sym);

struct SectorData {
  double E_v = 0.0;             ///< energy of u_n on T_0
  double E_w = 0.0;             ///< energy of u_n o theta on T_0 (= energy on T_1)
  double orthogonality = 0.0;   ///< integral over T_0 of grad v . grad w
  double E_V = 0.0;             ///< R^2 E_v
  double E_W = 0.0;             ///< R^2 E_w
  double resistance = 0.0;
  double energy_pm1 = 0.0;      ///< total energy of u_n
  double theta2_residual = 0.0; ///< max |u_n(theta^2 x) + u_n(x)|
  double conj_residual = 0.0;   ///< max |u_n(conj x) - u_n(x)|
  std::vector<double> sector_energies;  ///< energy of u_n on each T_j
};

/// Sector decomposition of the ±1 solution. Throws std::runtime_error if a
/// triangle straddles a sector ray and SymmetryError if the mesh is not
/// invariant under theta and conjugation.
SectorData sector_analysis(const CarpetParams& params, const Mesh& mesh, const FemSolution& sol);

/// Flux triple (I_0, I_N, I_{3N-1}) through the three joining sides of a cell.
struct FluxTriple {
  double I0 = 0.0;
  double IN = 0.0;
  double I3N1 = 0.0;
  double sum_squares() const { return I0 * I0 + IN * IN + I3N1 * I3N1; }
};

/// The 4N coefficients beta_j of the W^j fields in the glued current. Throws
/// std::invalid_argument unless the fluxes sum to zero (within 1e-12 scale).
std::vector<double> beta_coefficients(int N, const FluxTriple& I);

/// (4N-3)(I_N-I_0)^2 + (8N-7)(I_{3N-1}-I_N)^2 + (4N+1)(I_0-I_{3N-1})^2.
double beta_sum_squares_closed_form(int N, const FluxTriple& I);

/// (22N-18) I_0^2 + (22N-19) I_N^2 + (22N-16) I_{3N-1}^2.
double beta_sum_squares_bound(int N, const FluxTriple& I);

struct GluedCurrentEnergy {
  double energy = 0.0;       ///< N^2/4 E_V sum I^2 + N^2/36 E_W sum beta^2
  double bound_sectors = 0.0;  ///< (N^2/4 E_V + N^2/18 (11N-8) E_W) sum I^2
  double bound_resistance = 0.0;  ///< 11/9 N^2 R sum I^2
};

GluedCurrentEnergy glued_current_energy(int N, const SectorData& sector, const FluxTriple& I);

struct GluedPotentialEnergy {
  double energy = 0.0;  ///< 1/4 E_v sum (z_{j+1}+z_j)^2 + 1/4 E_w sum (z_{j+1}-z_j)^2
  double bound_sectors = 0.0;     ///< (E_v + E_w) sum z^2
  double bound_resistance = 0.0;  ///< 2/(N R) sum z^2
};

/// Indices j with C_j a vertex of D_0: {0, 1, N, N+1, 3N-1, 3N}.
std::vector<int> d0_corner_indices(int N);

/// `z` maps D_0 corner indices to u(C_j) - u(0); other indices are zero.
/// Throws std::invalid_argument for keys that are not D_0 corners.
GluedPotentialEnergy glued_potential_energy(int N, const SectorData& sector,
                                            const std::map<int, double>& z);

struct ConvergenceRow {
  int k = 0;
  std::size_t nodes = 0;
  std::size_t triangles = 0;
  double energy = 0.0;
  double resistance = 0.0;
  double delta = 0.0;  ///< resistance(k) - resistance(k-1); 0 for the first row
};

std::vector<ConvergenceRow> convergence_table(const CarpetParams& params, int n, int k_min, int k_max,
                                              const SolverOptions& opts = {},
                                              const MeshOptions& mesh_opts = {});

/// Aitken delta-squared extrapolation of the last three resistances; an
/// estimate only, nullopt when the increments do not contract.
std::optional<double> aitken_estimate(const std::vector<ConvergenceRow>& rows);

std::string convergence_csv(const std::vector<ConvergenceRow>& rows);
std::string mesh_json(const Mesh& mesh);
std::string solution_csv(const Mesh& mesh, const FemSolution& sol);

}  // namespace carpet
