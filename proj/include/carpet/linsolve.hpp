#pragma once

// Symmetric positive semi-definite solves with Dirichlet elimination, shared by
// the resistor-network and finite-element solvers.

#include <string>
#include <vector>

namespace carpet {

struct SolverOptions {
  /// Free-unknown count up to which a sparse LDL^T factorization is used;
  /// larger systems use Jacobi-preconditioned conjugate gradients.
  std::size_t direct_limit = 2'000'000;
  double cg_tolerance = 1e-12;
  /// CG iteration cap is cg_iteration_factor * sqrt(unknowns).
  double cg_iteration_factor = 50.0;
};

struct SolveInfo {
  std::string method = "none";
  std::size_t unknowns = 0;
  std::size_t iterations = 0;
  double relative_residual = 0.0;
};

struct Triplet {
  int row;
  int col;
  double value;
};

/// Solve K u = 0 on the free nodes with u fixed on `fixed` nodes. K is given
/// as (possibly repeated) triplets of the full symmetric matrix. Nodes in a
/// connected component of K's graph that holds no fixed node are set to
/// `floating_value`. Throws std::runtime_error if the solve fails.
std::vector<double> solve_dirichlet(std::size_t n, const std::vector<Triplet>& K,
                                    const std::vector<bool>& fixed,
                                    const std::vector<double>& fixed_values, double floating_value,
                                    const SolverOptions& opts, SolveInfo* info = nullptr);

}  // namespace carpet
