#pragma once

// Resistance sequences, the graph duality R^G = 2 R^D, ratio estimators for
// rho(N), the multiplicative sandwich inequalities and Fekete intervals.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "carpet/graphs.hpp"
#include "carpet/linsolve.hpp"

namespace carpet {

struct ResistanceSequence {
  GraphKind kind = GraphKind::G;
  std::vector<double> values;  ///< values[i] is R at level m = i + 1
  std::optional<std::string> error;  ///< first failure; values holds the levels before it
  bool increasing() const;
};

/// Effective resistances of G_m or D_m between A_m and B_m for m = 1..m_max.
/// Throws std::invalid_argument if m_max < 1; per-level failures stop the
/// sweep and are recorded in `error`.
ResistanceSequence resistance_sequence(const CarpetParams& params, GraphKind kind, int m_max,
                                       const SolverOptions& opts = {},
                                       const GraphBuildOptions& graph_opts = {});

struct DualityRow {
  int m = 0;
  double RG = 0.0;
  double RD = 0.0;
  double deviation = 0.0;  ///< |RG / (2 RD) - 1|
};

struct DualityReport {
  double max_deviation = 0.0;
  std::vector<DualityRow> rows;
};

DualityReport duality_from_sequences(const std::vector<double>& RG, const std::vector<double>& RD);
DualityReport duality_check(const CarpetParams& params, int m_max, const SolverOptions& opts = {});

struct RhoEstimate {
  double last_ratio = 0.0;
  double slope = 0.0;  ///< exp of the least-squares slope of log R against index
  std::vector<double> ratios;
};

/// Throws std::invalid_argument for fewer than two entries or any entry that
/// is not finite and positive.
RhoEstimate rho_estimate(const std::vector<double>& seq);

struct InequalityRecord {
  std::string name;
  int n = 0;
  int m = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  bool pass = false;
  bool skipped = false;
  std::string reason;
};

struct SandwichResult {
  std::vector<InequalityRecord> records;
  bool incomplete = false;
  bool all_pass() const;
};

/// Checks, for all n, m with n + m <= max key of `fem`:
///   (N/2) R_n R^D_m <= R_{n+m} (1 + slack)            (m >= 1)
///   R_{n+m} <= (11/9) N^2 R_n R^G_m (1 + slack)        (m >= 1)
///   9/(44N) R_0^-1 R_n R_m <= R_{n+m} (1 + slack)
///   R_{n+m} <= 44N/9 R_0^-1 R_n R_m (1 + slack)
/// `fem` maps n to R_n; `RG`/`RD` map m to graph resistances.
SandwichResult sandwich_check(int N, const std::map<int, double>& fem, const std::map<int, double>& RG,
                              const std::map<int, double>& RD, double slack);

struct FeketeInterval {
  int n = 0;
  double lo = 0.0;
  double hi = 0.0;
};

struct FeketeReport {
  std::vector<FeketeInterval> intervals;
  double lo = 0.0;  ///< running intersection
  double hi = 0.0;
  bool empty = false;
  bool contains(double log_rho) const { return !empty && lo <= log_rho && log_rho <= hi; }
};

/// Intervals [(1/n) log(c R_n), (1/n) log(C R_n)] for log rho with
/// c = 9/(44N R_0), C = 44N/(9 R_0). Throws std::invalid_argument without R_0.
FeketeReport fekete_report(int N, const std::map<int, double>& fem);

struct ScalingReport {
  int N = 0;
  ResistanceSequence G;
  ResistanceSequence D;
  std::map<int, double> fem;  ///< R_n by level at refinement `fem_refinement`
  int fem_refinement = 0;
  std::optional<std::string> fem_error;
  DualityReport duality;
  std::optional<RhoEstimate> rho;
  SandwichResult sandwich;
  std::optional<FeketeReport> fekete;
  double slack = 0.05;
};

struct ScalingOptions {
  int m_max = 4;
  int fem_n_max = 2;
  int fem_k = 3;
  double slack = 0.05;
  SolverOptions solver;
  GraphBuildOptions graph;
};

ScalingReport build_scaling_report(const CarpetParams& params, const ScalingOptions& opts);

std::string scaling_json(const ScalingReport& report);
/// CSV "kind,index,R,ratio" covering the G, D and FEM sequences.
std::string scaling_csv(const ScalingReport& report);

}  // namespace carpet
