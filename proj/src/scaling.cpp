#include "carpet/scaling.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "carpet/fem.hpp"
#include "carpet/network.hpp"

namespace carpet {

bool ResistanceSequence::increasing() const {
  for (std::size_t i = 1; i < values.size(); ++i)
    if (!(values[i] > values[i - 1])) return false;
  return true;
}

ResistanceSequence resistance_sequence(const CarpetParams& params, GraphKind kind, int m_max,
                                       const SolverOptions& opts, const GraphBuildOptions& graph_opts) {
  if (m_max < 1) throw std::invalid_argument("m_max must be >= 1");
  ResistanceSequence seq;
  seq.kind = kind;
  for (int m = 1; m <= m_max; ++m) {
    try {
      const auto g = build_graph(params, m, kind, graph_opts);
      const auto net = ConductanceNetwork::from_graph(g);
      seq.values.push_back(effective_resistance(net, g.boundary_A, g.boundary_B, opts).resistance);
    } catch (const std::exception& e) {
      seq.error = "m=" + std::to_string(m) + ": " + e.what();
      break;
    }
  }
  return seq;
}

DualityReport duality_from_sequences(const std::vector<double>& RG, const std::vector<double>& RD) {
  DualityReport rep;
  for (std::size_t i = 0; i < std::min(RG.size(), RD.size()); ++i) {
    DualityRow row{static_cast<int>(i) + 1, RG[i], RD[i], std::abs(RG[i] / (2.0 * RD[i]) - 1.0)};
    rep.max_deviation = std::max(rep.max_deviation, row.deviation);
    rep.rows.push_back(row);
  }
  return rep;
}

DualityReport duality_check(const CarpetParams& params, int m_max, const SolverOptions& opts) {
  const auto G = resistance_sequence(params, GraphKind::G, m_max, opts);
  const auto D = resistance_sequence(params, GraphKind::D, m_max, opts);
  if (G.error) throw std::runtime_error(*G.error);
  if (D.error) throw std::runtime_error(*D.error);
  return duality_from_sequences(G.values, D.values);
}

RhoEstimate rho_estimate(const std::vector<double>& seq) {
  if (seq.size() < 2) throw std::invalid_argument("rho_estimate needs at least two values");
  for (double v : seq)
    if (!std::isfinite(v) || v <= 0.0) throw std::invalid_argument("rho_estimate needs finite positive values");
  RhoEstimate est;
  for (std::size_t i = 1; i < seq.size(); ++i) est.ratios.push_back(seq[i] / seq[i - 1]);
  est.last_ratio = est.ratios.back();
  const double n = static_cast<double>(seq.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const double x = static_cast<double>(i), y = std::log(seq[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  est.slope = std::exp((n * sxy - sx * sy) / (n * sxx - sx * sx));
  return est;
}

bool SandwichResult::all_pass() const {
  for (const auto& r : records)
    if (!r.skipped && !r.pass) return false;
  return true;
}

SandwichResult sandwich_check(int N, const std::map<int, double>& fem, const std::map<int, double>& RG,
                              const std::map<int, double>& RD, double slack) {
  SandwichResult res;
  if (fem.empty()) {
    res.incomplete = true;
    return res;
  }
  const int depth = fem.rbegin()->first;
  auto lookup = [&](const std::map<int, double>& m, int key) -> std::optional<double> {
    auto it = m.find(key);
    if (it == m.end()) return std::nullopt;
    return it->second;
  };
  const auto R0 = lookup(fem, 0);
  const double n2 = static_cast<double>(N) * N;
  auto add = [&](const char* name, int n, int m, std::optional<double> lhs, std::optional<double> rhs) {
    InequalityRecord rec{name, n, m, 0.0, 0.0, slack, false, false, ""};
    if (!lhs || !rhs) {
      rec.skipped = true;
      rec.reason = "missing level";
      res.incomplete = true;
    } else {
      rec.lhs = *lhs;
      rec.rhs = *rhs;
      rec.pass = rec.lhs <= rec.rhs * (1.0 + slack);
    }
    res.records.push_back(rec);
  };
  auto times = [](std::optional<double> a, std::optional<double> b, double c) -> std::optional<double> {
    if (!a || !b) return std::nullopt;
    return c * *a * *b;
  };

  for (int total = 0; total <= depth; ++total)
    for (int n = 0; n <= total; ++n) {
      const int m = total - n;
      const auto Rn = lookup(fem, n), Rnm = lookup(fem, total);
      if (m == 0) {
        for (const char* name : {"graph-lower", "graph-upper"}) {
          InequalityRecord rec{name, n, m, 0.0, 0.0, slack, false, true,
                               "graph resistances are defined for m >= 1"};
          res.records.push_back(rec);
        }
      } else {
        add("graph-lower", n, m, times(Rn, lookup(RD, m), N / 2.0), Rnm);
        add("graph-upper", n, m, Rnm, times(Rn, lookup(RG, m), 11.0 / 9.0 * n2));
      }
      const auto Rm = lookup(fem, m);
      if (!R0) {
        add("continuum-lower", n, m, std::nullopt, Rnm);
        add("continuum-upper", n, m, Rnm, std::nullopt);
      } else {
        add("continuum-lower", n, m, times(Rn, Rm, 9.0 / (44.0 * N) / *R0), Rnm);
        add("continuum-upper", n, m, Rnm, times(Rn, Rm, 44.0 * N / 9.0 / *R0));
      }
    }
  return res;
}

FeketeReport fekete_report(int N, const std::map<int, double>& fem) {
  auto it0 = fem.find(0);
  if (it0 == fem.end()) throw std::invalid_argument("fekete_report needs R_0");
  const double c = 9.0 / (44.0 * N) / it0->second;
  const double C = 44.0 * N / 9.0 / it0->second;
  FeketeReport rep;
  rep.lo = -std::numeric_limits<double>::infinity();
  rep.hi = std::numeric_limits<double>::infinity();
  for (const auto& [n, Rn] : fem) {
    if (n < 1) continue;
    FeketeInterval iv{n, std::log(c * Rn) / n, std::log(C * Rn) / n};
    rep.lo = std::max(rep.lo, iv.lo);
    rep.hi = std::min(rep.hi, iv.hi);
    rep.intervals.push_back(iv);
  }
  rep.empty = rep.intervals.empty() || rep.lo > rep.hi;
  return rep;
}

ScalingReport build_scaling_report(const CarpetParams& params, const ScalingOptions& opts) {
  ScalingReport rep;
  rep.N = params.N();
  rep.slack = opts.slack;
  rep.fem_refinement = opts.fem_k;
  rep.G = resistance_sequence(params, GraphKind::G, opts.m_max, opts.solver, opts.graph);
  rep.D = resistance_sequence(params, GraphKind::D, opts.m_max, opts.solver, opts.graph);
  rep.duality = duality_from_sequences(rep.G.values, rep.D.values);
  if (rep.G.values.size() >= 2) rep.rho = rho_estimate(rep.G.values);
  for (int n = 0; n <= opts.fem_n_max; ++n) {
    try {
      const Mesh mesh = build_mesh(params, n, opts.fem_k);
      rep.fem[n] = solve_mixed_bvp(mesh, opts.solver).resistance;
    } catch (const std::exception& e) {
      rep.fem_error = "n=" + std::to_string(n) + ": " + e.what();
      break;
    }
  }
  std::map<int, double> RG, RD;
  for (std::size_t i = 0; i < rep.G.values.size(); ++i) RG[static_cast<int>(i) + 1] = rep.G.values[i];
  for (std::size_t i = 0; i < rep.D.values.size(); ++i) RD[static_cast<int>(i) + 1] = rep.D.values[i];
  rep.sandwich = sandwich_check(rep.N, rep.fem, RG, RD, opts.slack);
  if (rep.fem.count(0)) rep.fekete = fekete_report(rep.N, rep.fem);
  return rep;
}

std::string scaling_json(const ScalingReport& rep) {
  using nlohmann::json;
  json j;
  j["N"] = rep.N;
  auto seq_json = [](const ResistanceSequence& s) {
    json o;
    o["values"] = s.values;
    o["increasing"] = s.increasing();
    o["error"] = s.error ? json(*s.error) : json(nullptr);
    return o;
  };
  json fem = json::object();
  for (const auto& [n, R] : rep.fem) fem[std::to_string(n)] = R;
  j["sequences"] = {{"G", seq_json(rep.G)}, {"D", seq_json(rep.D)}, {"fem", fem},
                    {"fem_refinement", rep.fem_refinement}};
  j["ratios"] = rep.rho ? json(rep.rho->ratios) : json::array();
  j["rho"] = rep.rho ? json{{"last_ratio", rep.rho->last_ratio}, {"slope", rep.rho->slope}}
                     : json{{"last_ratio", nullptr}, {"slope", nullptr}};
  json dual = json::array();
  for (const auto& r : rep.duality.rows)
    dual.push_back({{"m", r.m}, {"RG", r.RG}, {"RD", r.RD}, {"deviation", r.deviation}});
  j["duality"] = {{"max_deviation", rep.duality.max_deviation}, {"rows", dual}};
  json sw = json::array();
  for (const auto& r : rep.sandwich.records) {
    json o{{"name", r.name}, {"n", r.n}, {"m", r.m}, {"slack", r.slack}, {"pass", r.pass}, {"skipped", r.skipped}};
    if (r.skipped)
      o["reason"] = r.reason;
    else {
      o["lhs"] = r.lhs;
      o["rhs"] = r.rhs;
    }
    sw.push_back(o);
  }
  j["sandwich"] = sw;
  json fk = json::array();
  if (rep.fekete)
    for (const auto& iv : rep.fekete->intervals) fk.push_back({{"n", iv.n}, {"lo", iv.lo}, {"hi", iv.hi}});
  j["fekete"] = fk;
  if (rep.fekete)
    j["fekete_intersection"] = {{"lo", rep.fekete->lo}, {"hi", rep.fekete->hi}, {"empty", rep.fekete->empty}};
  j["fem_error"] = rep.fem_error ? json(*rep.fem_error) : json(nullptr);
  j["incomplete"] = rep.sandwich.incomplete || rep.G.error.has_value() || rep.D.error.has_value() ||
                    rep.fem_error.has_value();
  return j.dump(2);
}

std::string scaling_csv(const ScalingReport& rep) {
  std::ostringstream os;
  os << "kind,index,R,ratio\n";
  auto emit = [&](const char* kind, int index, double R, std::optional<double> prev) {
    os << kind << ',' << index << ',' << fmt17(R) << ',' << (prev ? fmt17(R / *prev) : "") << '\n';
  };
  for (const auto* s : {&rep.G, &rep.D})
    for (std::size_t i = 0; i < s->values.size(); ++i)
      emit(to_string(s->kind), static_cast<int>(i) + 1, s->values[i],
           i ? std::optional<double>(s->values[i - 1]) : std::nullopt);
  std::optional<double> prev;
  for (const auto& [n, R] : rep.fem) {
    emit("fem", n, R, prev);
    prev = R;
  }
  return os.str();
}

}  // namespace carpet
