#pragma once

// Resistor networks: optimal potentials, effective resistance, currents,
// Thomson's principle, and per-side fluxes on the carpet graphs.

#include <limits>
#include <map>
#include <string>
#include <vector>

#include "carpet/graphs.hpp"
#include "carpet/linsolve.hpp"

namespace carpet {

class ConductanceNetwork {
 public:
  /// Validates: endpoints in range, no self loops, conductance > 0, no
  /// duplicate undirected edges. Edges are stored with i < j, sorted.
  ConductanceNetwork(std::size_t vertex_count, std::vector<GraphEdge> edges);

  static ConductanceNetwork from_graph(const GraphApprox& graph);

  std::size_t size() const { return n_; }
  const std::vector<GraphEdge>& edges() const { return edges_; }

  /// Full Laplacian as triplets.
  std::vector<Triplet> laplacian() const;

 private:
  std::size_t n_;
  std::vector<GraphEdge> edges_;
};

struct PotentialVector {
  std::vector<double> values;
  std::vector<int> A;
  std::vector<int> B;
  double a_val = 0.0;
  double b_val = 1.0;
  bool connected = true;  ///< false when no path joins A and B
  SolveInfo info;
};

/// Unique Dirichlet-energy minimizer with u = a_val on A and b_val on B.
/// Throws std::invalid_argument when A or B is empty, out of range, or the
/// sets intersect. Disconnection is reported through `connected`.
PotentialVector solve_potential(const ConductanceNetwork& net, const std::vector<int>& A,
                                const std::vector<int>& B, double a_val = 0.0, double b_val = 1.0,
                                const SolverOptions& opts = {});

/// Sum over undirected edges of g (u(x) - u(y))^2.
double dirichlet_energy(const ConductanceNetwork& net, const std::vector<double>& u);

struct ResistanceResult {
  double resistance = std::numeric_limits<double>::infinity();
  double energy = 0.0;  ///< energy of the optimal 0/1 potential
  PotentialVector potential;

  bool infinite() const { return !potential.connected; }
};

ResistanceResult effective_resistance(const ConductanceNetwork& net, const std::vector<int>& A,
                                      const std::vector<int>& B, const SolverOptions& opts = {});

/// Current on each stored edge e, oriented from edges()[e].i to edges()[e].j.
struct CurrentAssignment {
  std::vector<double> values;

  CurrentAssignment scaled(double s) const;
  /// I(x, y) for an edge; antisymmetric. Throws if (x, y) is not an edge.
  double at(const ConductanceNetwork& net, int x, int y) const;
};

/// Ohmic current I(x, y) = g(x, y) (u(x) - u(y)), flowing from high to low
/// potential. Multiplying by R gives the unit-flux optimal current, whose
/// outflow is +1 through the high-potential set.
CurrentAssignment current_from_potential(const ConductanceNetwork& net, const std::vector<double>& u);

/// Sum over undirected edges of I^2 / g.
double current_energy(const ConductanceNetwork& net, const CurrentAssignment& I);

/// Net outflow sum_y I(x, y) at every vertex.
std::vector<double> vertex_outflow(const ConductanceNetwork& net, const CurrentAssignment& I);

/// max over vertices outside A u B of |outflow(x)|, relative to the largest edge current.
double max_kirchhoff_violation(const ConductanceNetwork& net, const CurrentAssignment& I,
                               const std::vector<int>& A, const std::vector<int>& B);

/// Net outflow of I through the boundary vertices of `graph` lying on the
/// outer side L_k. Throws std::invalid_argument if L_k is not an A/B side.
double side_flux(const CarpetParams& params, const GraphApprox& graph, const ConductanceNetwork& net,
                 const CurrentAssignment& I, int k);

/// Everything the CLI reports for one graph resistance query.
struct GraphResistanceRecord {
  GraphKind kind = GraphKind::G;
  int N = 0;
  int m = 0;
  double resistance = 0.0;
  double energy = 0.0;
  std::map<int, double> flux_per_side;  ///< unit-flux current, per A/B side index
  double thomson_energy = 0.0;          ///< energy of the unit-flux current
  SolveInfo info;
};

GraphResistanceRecord analyze_graph(const CarpetParams& params, const GraphApprox& graph,
                                    const SolverOptions& opts = {});

std::string record_json(const GraphResistanceRecord& rec);
/// Inverse of record_json; throws on malformed input.
GraphResistanceRecord record_from_json(const std::string& text);

/// CSV "vertex,x,y,u".
std::string potential_csv(const GraphApprox& graph, const std::vector<double>& u);
/// CSV "i,j,I".
std::string current_csv(const ConductanceNetwork& net, const CurrentAssignment& I);

}  // namespace carpet
