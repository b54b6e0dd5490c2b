#include "carpet/linsolve.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include "carpet/union_find.hpp"

namespace carpet {

std::vector<double> solve_dirichlet(std::size_t n, const std::vector<Triplet>& K,
                                    const std::vector<bool>& fixed,
                                    const std::vector<double>& fixed_values, double floating_value,
                                    const SolverOptions& opts, SolveInfo* info) {
  if (fixed.size() != n || fixed_values.size() != n)
    throw std::invalid_argument("solve_dirichlet: size mismatch");

  // Components without a fixed node have no unique solution; pin them.
  UnionFind uf(n);
  for (const auto& t : K)
    if (t.row != t.col && t.value != 0.0) uf.unite(t.row, t.col);
  std::vector<bool> anchored(n, false);
  for (std::size_t v = 0; v < n; ++v)
    if (fixed[v]) anchored[uf.find(static_cast<int>(v))] = true;

  std::vector<double> u(n, 0.0);
  std::vector<int> reduced(n, -1);
  int nfree = 0;
  for (std::size_t v = 0; v < n; ++v) {
    if (fixed[v]) {
      u[v] = fixed_values[v];
    } else if (!anchored[uf.find(static_cast<int>(v))]) {
      u[v] = floating_value;
    } else {
      reduced[v] = nfree++;
    }
  }

  SolveInfo local;
  local.unknowns = static_cast<std::size_t>(nfree);
  if (nfree == 0) {
    if (info) *info = local;
    return u;
  }

  using SpMat = Eigen::SparseMatrix<double>;
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(K.size());
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nfree);
  for (const auto& t : K) {
    const int r = reduced[t.row];
    if (r < 0) continue;
    const int c = reduced[t.col];
    if (c >= 0)
      trips.emplace_back(r, c, t.value);
    else if (fixed[t.col])
      rhs[r] -= t.value * u[t.col];
  }
  SpMat A(nfree, nfree);
  A.setFromTriplets(trips.begin(), trips.end());
  A.makeCompressed();

  Eigen::VectorXd x;
  if (static_cast<std::size_t>(nfree) <= opts.direct_limit) {
    Eigen::SimplicialLDLT<SpMat> ldlt(A);
    if (ldlt.info() != Eigen::Success) throw std::runtime_error("sparse LDL^T factorization failed");
    x = ldlt.solve(rhs);
    if (ldlt.info() != Eigen::Success) throw std::runtime_error("sparse LDL^T solve failed");
    local.method = "ldlt";
  } else {
    Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg;
    cg.setTolerance(opts.cg_tolerance);
    cg.setMaxIterations(static_cast<Eigen::Index>(
        std::ceil(opts.cg_iteration_factor * std::sqrt(static_cast<double>(nfree)))));
    cg.compute(A);
    x = cg.solve(rhs);
    local.method = "cg";
    local.iterations = static_cast<std::size_t>(cg.iterations());
    if (cg.info() != Eigen::Success)
      throw std::runtime_error("conjugate gradient did not converge (estimated error " +
                               std::to_string(cg.error()) + ")");
  }
  const double bnorm = rhs.norm();
  local.relative_residual = bnorm > 0 ? (A * x - rhs).norm() / bnorm : (A * x).norm();

  for (std::size_t v = 0; v < n; ++v)
    if (reduced[v] >= 0) u[v] = x[reduced[v]];
  if (info) *info = local;
  return u;
}

}  // namespace carpet
