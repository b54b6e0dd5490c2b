// carpet: build 4N-carpet pre-fractals, their graphs and meshes, compute
// resistances and run the verification suites.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "carpet/config.hpp"
#include "carpet/fem.hpp"
#include "carpet/network.hpp"
#include "carpet/scaling.hpp"

using namespace carpet;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kVerifyFailed = 1, kUsage = 2, kCap = 3, kError = 4 };

struct Options {
  std::string config_file;
  RunConfig cfg;
  int level = 1;
  int k = 2;
  std::string kind = "G";
  std::string out;
  std::string format;
  bool highlight_ab = false;
  std::string suite;
  bool convergence = false;
  std::string mesh_out;
};

std::filesystem::path output_path(const Options& o, const std::string& name) {
  std::filesystem::path p(name);
  if (p.is_relative()) p = std::filesystem::path(o.cfg.out_dir) / p;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  return p;
}

void write_file(const Options& o, const std::string& name, const std::string& text) {
  const auto p = output_path(o, name);
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  if (!f) throw std::ios_base::failure("cannot open " + p.string() + " for writing");
  f << text;
  if (!f) throw std::ios_base::failure("write to " + p.string() + " failed");
}

void emit(const Options& o, const std::string& text) {
  if (o.out.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  write_file(o, o.out, text);
}

// --format, else the first supported entry of a config file's formats, else the fallback.
std::string format_or(const Options& o, const char* fallback, std::initializer_list<const char*> supported) {
  if (!o.format.empty()) return o.format;
  if (!o.config_file.empty())
    for (const auto& f : o.cfg.formats)
      for (const char* s : supported)
        if (f == s) return f;
  return fallback;
}

SolverOptions solver_options(const RunConfig& c) {
  SolverOptions s;
  s.cg_tolerance = c.cg_tolerance;
  s.direct_limit = c.direct_limit;
  return s;
}

GraphBuildOptions graph_options(const RunConfig& c) {
  GraphBuildOptions g;
  g.tol_multiplier = c.tol_multiplier;
  return g;
}

ResultCache make_cache(const RunConfig& c) {
  return ResultCache(c.cache_dir.empty() ? default_cache_dir() : std::filesystem::path(c.cache_dir), c.cache);
}

std::string solver_key(const RunConfig& c) {
  return fmt17(c.cg_tolerance) + "|" + std::to_string(c.direct_limit) + "|" + fmt17(c.tol_multiplier);
}

int cmd_gen(const Options& o) {
  const CarpetParams params(o.cfg.N);
  const auto fmt = format_or(o, "svg", {"svg", "json"});
  if (fmt == "svg") {
    SvgOptions svg;
    svg.highlight_ab = o.highlight_ab;
    emit(o, emit_carpet_svg(params, o.level, svg));
  } else if (fmt == "json") {
    emit(o, cells_json(params, o.level));
  } else {
    throw CLI::ValidationError("--format", "gen supports svg and json");
  }
  return kOk;
}

int cmd_graph(const Options& o) {
  const CarpetParams params(o.cfg.N);
  const auto g = build_graph(params, o.level, parse_graph_kind(o.kind), graph_options(o.cfg));
  const auto fmt = format_or(o, "json", {"json", "svg", "csv"});
  if (fmt == "json") {
    emit(o, graph_json(g));
  } else if (fmt == "svg") {
    emit(o, graph_svg(params, g));
  } else {
    std::ostringstream os;
    os << "i,j,conductance\n";
    for (const auto& e : g.edges) os << e.i << ',' << e.j << ',' << fmt17(e.conductance) << '\n';
    emit(o, os.str());
  }
  return kOk;
}

int cmd_resist(const Options& o) {
  if (o.level < 1) throw CLI::ValidationError("--m", "resistance needs m >= 1");
  const CarpetParams params(o.cfg.N);
  const GraphKind kind = parse_graph_kind(o.kind);
  const auto fmt = format_or(o, "json", {"json", "csv"});
  if (fmt == "csv") {
    const auto g = build_graph(params, o.level, kind, graph_options(o.cfg));
    const auto net = ConductanceNetwork::from_graph(g);
    const auto res = effective_resistance(net, g.boundary_A, g.boundary_B, solver_options(o.cfg));
    emit(o, potential_csv(g, res.potential.values));
    return kOk;
  }
  if (fmt != "json") throw CLI::ValidationError("--format", "resist supports json and csv");
  const std::string key = "resist|" + std::to_string(o.cfg.N) + "|" + o.kind + "|" + std::to_string(o.level) +
                          "|" + solver_key(o.cfg);
  const auto cache = make_cache(o.cfg);
  json out;
  if (auto hit = cache.load(key)) {
    out = *hit;
    out["cached"] = true;
  } else {
    const auto g = build_graph(params, o.level, kind, graph_options(o.cfg));
    out = json::parse(record_json(analyze_graph(params, g, solver_options(o.cfg))));
    cache.store(key, out);
    out["cached"] = false;
  }
  emit(o, out.dump(2));
  return kOk;
}

int cmd_fem(const Options& o) {
  const CarpetParams params(o.cfg.N);
  const auto solver = solver_options(o.cfg);
  const auto fmt = format_or(o, "json", {"json", "csv"});
  if (o.convergence) {
    const auto rows = convergence_table(params, o.level, 0, o.k, solver);
    if (fmt == "csv") {
      emit(o, convergence_csv(rows));
      return kOk;
    }
    json j;
    j["N"] = o.cfg.N;
    j["n"] = o.level;
    auto& t = j["rows"] = json::array();
    for (const auto& r : rows)
      t.push_back({{"k", r.k}, {"nodes", r.nodes}, {"energy", r.energy}, {"R_est", r.resistance}, {"delta", r.delta}});
    const auto aitken = aitken_estimate(rows);
    j["aitken_estimate"] = aitken ? json(*aitken) : json(nullptr);
    emit(o, j.dump(2));
    return kOk;
  }
  const Mesh mesh = build_mesh(params, o.level, o.k);
  if (!o.mesh_out.empty()) {
    write_file(o, o.mesh_out, mesh_json(mesh));
  }
  if (fmt == "csv") {
    emit(o, solution_csv(mesh, solve_mixed_bvp(mesh, solver)));
    return kOk;
  }
  const std::string key = "fem|" + std::to_string(o.cfg.N) + "|" + std::to_string(o.level) + "|" +
                          std::to_string(o.k) + "|" + solver_key(o.cfg);
  const auto cache = make_cache(o.cfg);
  json out;
  if (auto hit = cache.load(key)) {
    out = *hit;
    out["cached"] = true;
  } else {
    const auto sol = solve_mixed_bvp(mesh, solver);
    const auto sec = sector_analysis(params, mesh, sol);
    out = {{"N", o.cfg.N},
           {"n", o.level},
           {"k", o.k},
           {"nodes", mesh.nodes.size()},
           {"triangles", mesh.triangles.size()},
           {"R_est", sol.resistance},
           {"energy", sol.energy},
           {"E_v", sec.E_v},
           {"E_w", sec.E_w},
           {"E_V", sec.E_V},
           {"E_W", sec.E_W},
           {"orthogonality", sec.orthogonality},
           {"solver",
            {{"method", sol.info.method},
             {"unknowns", sol.info.unknowns},
             {"iterations", sol.info.iterations},
             {"relative_residual", sol.info.relative_residual}}}};
    cache.store(key, out);
    out["cached"] = false;
  }
  emit(o, out.dump(2));
  return kOk;
}

// Collects check outcomes for a verification suite.
struct Checker {
  std::string suite;
  int N;
  std::ostringstream log;
  std::vector<std::string> failures;

  void check(bool ok, int m, const std::string& what, double value, double limit) {
    std::ostringstream line;
    line << (ok ? "PASS " : "FAIL ") << suite << " N=" << N << " m=" << m << " " << what << " value=" << fmt17(value)
         << " limit=" << fmt17(limit);
    log << line.str() << '\n';
    if (!ok) failures.push_back("(" + std::to_string(N) + ", " + std::to_string(m) + ", " + what + ")");
  }
};

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

void suite_duality(const Options& o, Checker& c) {
  const CarpetParams params(o.cfg.N);
  const auto rep = duality_check(params, o.cfg.m_max, solver_options(o.cfg));
  for (const auto& row : rep.rows) c.check(row.deviation <= 1e-9, row.m, "RG/(2RD)-1", row.deviation, 1e-9);
}

void suite_symmetry(const Options& o, Checker& c) {
  const CarpetParams params(o.cfg.N);
  for (int m = 1; m <= o.cfg.m_max; ++m)
    for (GraphKind kind : {GraphKind::G, GraphKind::D}) {
      const auto g = build_graph(params, m, kind, graph_options(o.cfg));
      const auto net = ConductanceNetwork::from_graph(g);
      const auto u = solve_potential(net, g.boundary_A, g.boundary_B, -1.0, 1.0, solver_options(o.cfg)).values;
      const auto th = symmetry_permutation(params, g, Symmetry::Theta2);
      const auto cj = symmetry_permutation(params, g, Symmetry::Conj);
      double e_th = 0, e_cj = 0;
      for (std::size_t v = 0; v < u.size(); ++v) {
        e_th = std::max(e_th, std::abs(u[th.map[v]] + u[v]));
        e_cj = std::max(e_cj, std::abs(u[cj.map[v]] - u[v]));
      }
      const std::string k = to_string(kind);
      c.check(e_th <= 1e-9, m, k + " u(theta^2 x)+u(x)", e_th, 1e-9);
      c.check(e_cj <= 1e-9, m, k + " u(conj x)-u(x)", e_cj, 1e-9);
    }
}

void suite_thomson(const Options& o, Checker& c) {
  const CarpetParams params(o.cfg.N);
  for (int m = 1; m <= o.cfg.m_max; ++m)
    for (GraphKind kind : {GraphKind::G, GraphKind::D}) {
      const auto g = build_graph(params, m, kind, graph_options(o.cfg));
      const auto rec = analyze_graph(params, g, solver_options(o.cfg));
      const std::string k = to_string(kind);
      const double e = rel(rec.thomson_energy, rec.resistance);
      c.check(e <= 1e-9, m, k + " thomson-energy/R", e, 1e-9);
      double worst = 0;
      for (const auto& [side, flux] : rec.flux_per_side) {
        const double expect = (outer_side_class(params, side) == BoundaryClass::A ? -1.0 : 1.0) / o.cfg.N;
        worst = std::max(worst, std::abs(flux - expect));
      }
      c.check(worst <= 1e-9, m, k + " side-flux", worst, 1e-9);
    }
}

void suite_sector(const Options& o, Checker& c) {
  const CarpetParams params(o.cfg.N);
  for (int n = 0; n <= o.cfg.n_max; ++n)
    for (int k = 0; k <= o.cfg.k_max; ++k) {
      const Mesh mesh = build_mesh(params, n, k);
      const auto sol = solve_mixed_bvp(mesh, solver_options(o.cfg));
      const auto s = sector_analysis(params, mesh, sol);
      const std::string tag = "k=" + std::to_string(k) + " ";
      const double orth = std::abs(s.orthogonality) / s.E_v;
      c.check(orth <= 1e-9, n, tag + "orthogonality", orth, 1e-9);
      const double id = rel(2.0 * o.cfg.N * (s.E_v + s.E_w), 4.0 / sol.resistance);
      c.check(id <= 1e-9, n, tag + "4/R=2N(Ev+Ew)", id, 1e-9);
    }
}

void suite_beta(const Options& o, Checker& c) {
  const int N = o.cfg.N;
  std::mt19937_64 rng(20240601u + static_cast<unsigned>(N));
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  double worst = 0, bound_excess = -INFINITY;
  for (int t = 0; t < 10000; ++t) {
    FluxTriple I{dist(rng), dist(rng), 0.0};
    I.I3N1 = -I.I0 - I.IN;
    double s = 0;
    for (double b : beta_coefficients(N, I)) s += b * b;
    worst = std::max(worst, rel(s, beta_sum_squares_closed_form(N, I)));
    bound_excess = std::max(bound_excess, s - beta_sum_squares_bound(N, I));
  }
  c.check(worst <= 1e-12, 0, "sum-beta^2 closed form", worst, 1e-12);
  c.check(bound_excess <= 0, 0, "sum-beta^2 <= bound", bound_excess, 0);
}

void suite_sandwich(const Options& o, Checker& c) {
  const CarpetParams params(o.cfg.N);
  ScalingOptions so;
  so.m_max = std::max(1, o.cfg.n_max);
  so.fem_n_max = o.cfg.n_max;
  so.fem_k = o.cfg.k_max;
  so.slack = o.cfg.slack;
  so.solver = solver_options(o.cfg);
  so.graph = graph_options(o.cfg);
  const auto rep = build_scaling_report(params, so);
  for (const auto& r : rep.sandwich.records) {
    if (r.skipped) continue;
    c.check(r.pass, r.m, r.name + " n=" + std::to_string(r.n), r.lhs, r.rhs * (1 + r.slack));
  }
  c.check(!rep.sandwich.incomplete, 0, "all levels available", rep.sandwich.incomplete ? 1.0 : 0.0, 0.0);
}

int cmd_verify(const Options& o) {
  Checker c{o.suite, o.cfg.N, {}, {}};
  if (o.suite == "duality") suite_duality(o, c);
  else if (o.suite == "symmetry") suite_symmetry(o, c);
  else if (o.suite == "sector") suite_sector(o, c);
  else if (o.suite == "beta") suite_beta(o, c);
  else if (o.suite == "sandwich") suite_sandwich(o, c);
  else if (o.suite == "thomson") suite_thomson(o, c);
  emit(o, c.log.str());
  if (c.failures.empty()) return kOk;
  std::cerr << "verify " << o.suite << ": " << c.failures.size() << " failed check(s):\n";
  for (const auto& f : c.failures) std::cerr << "  " << f << '\n';
  return kVerifyFailed;
}

int cmd_scaling(const Options& o) {
  const CarpetParams params(o.cfg.N);
  ScalingOptions so;
  so.m_max = o.cfg.m_max;
  so.fem_n_max = o.cfg.n_max;
  so.fem_k = o.cfg.k_max;
  so.slack = o.cfg.slack;
  so.solver = solver_options(o.cfg);
  so.graph = graph_options(o.cfg);
  const auto rep = build_scaling_report(params, so);
  const auto fmt = format_or(o, "json", {"json", "csv"});
  if (fmt == "csv")
    emit(o, scaling_csv(rep));
  else if (fmt == "json")
    emit(o, scaling_json(rep));
  else
    throw CLI::ValidationError("--format", "scaling supports json and csv");
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"4N-carpet pre-fractals: geometry, graph and FEM resistances, scaling checks"};
  app.require_subcommand(1);
  Options o;
  RunConfig cli;  // values given on the command line

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_file, "key = value configuration file")->check(CLI::ExistingFile);
    sub->add_option("--N", cli.N, "carpet parameter N >= 2");
    sub->add_option("--out", o.out, "output file (default: stdout)");
    sub->add_option("--format", o.format, "json, csv or svg")->check(CLI::IsMember({"json", "csv", "svg"}));
    sub->add_option("--cache-dir", cli.cache_dir, "result cache directory (default: $CARPET_CACHE_DIR)");
    sub->add_option("--tol", cli.cg_tolerance, "iterative solver relative tolerance");
    sub->add_option("--snap", cli.tol_multiplier, "multiplier on the vertex snapping tolerance");
    sub->add_option("--slack", cli.slack, "relative slack for FEM-based inequalities");
    sub->add_option("--m-max", cli.m_max, "largest graph level");
    sub->add_option("--n-max", cli.n_max, "largest FEM carpet level");
    sub->add_option("--k-max", cli.k_max, "FEM refinement");
    sub->add_flag("--no-cache{false}", cli.cache, "disable the result cache");
  };

  auto* gen = app.add_subcommand("gen", "emit the level-n pre-carpet as SVG or JSON");
  add_common(gen);
  gen->add_option("--level,--m", o.level, "carpet level")->check(CLI::NonNegativeNumber);
  gen->add_flag("--highlight-ab", o.highlight_ab, "draw A and B boundary sides");

  auto* graph = app.add_subcommand("graph", "emit the graph G_m or D_m");
  add_common(graph);
  graph->add_option("--level,--m", o.level, "graph level")->check(CLI::NonNegativeNumber);
  graph->add_option("--kind", o.kind, "G or D")->check(CLI::IsMember({"G", "D"}));

  auto* resist = app.add_subcommand("resist", "effective resistance of G_m or D_m between A_m and B_m");
  add_common(resist);
  resist->add_option("--level,--m", o.level, "graph level");
  resist->add_option("--kind", o.kind, "G or D")->check(CLI::IsMember({"G", "D"}));

  auto* fem = app.add_subcommand("fem", "finite element resistance estimate on F_n");
  add_common(fem);
  fem->add_option("--level,--m", o.level, "carpet level n")->check(CLI::NonNegativeNumber);
  fem->add_option("--k", o.k, "uniform refinement of the fan triangulation")->check(CLI::NonNegativeNumber);
  fem->add_flag("--convergence", o.convergence, "table over refinements 0..k");
  fem->add_option("--mesh-out", o.mesh_out, "also write the mesh as JSON");

  auto* verify = app.add_subcommand("verify", "run a verification suite");
  add_common(verify);
  verify->add_option("--suite", o.suite, "suite name")
      ->required()
      ->check(CLI::IsMember({"duality", "symmetry", "sector", "beta", "sandwich", "thomson"}));

  auto* scaling = app.add_subcommand("scaling", "resistance sequences, rho estimates and sandwich report");
  add_common(scaling);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  try {
    o.cfg = o.config_file.empty() ? RunConfig{} : RunConfig::load(o.config_file);
    auto given = [&](const char* name) { return sub->count(name) > 0; };
    if (given("--N")) o.cfg.N = cli.N;
    if (given("--cache-dir")) o.cfg.cache_dir = cli.cache_dir;
    if (given("--tol")) o.cfg.cg_tolerance = cli.cg_tolerance;
    if (given("--snap")) o.cfg.tol_multiplier = cli.tol_multiplier;
    if (given("--slack")) o.cfg.slack = cli.slack;
    if (given("--m-max")) o.cfg.m_max = cli.m_max;
    if (given("--n-max")) o.cfg.n_max = cli.n_max;
    if (given("--k-max")) o.cfg.k_max = cli.k_max;
    if (given("--no-cache")) o.cfg.cache = false;
    o.cfg.validate();

    const std::string name = sub->get_name();
    if (name == "gen") return cmd_gen(o);
    if (name == "graph") return cmd_graph(o);
    if (name == "resist") return cmd_resist(o);
    if (name == "fem") return cmd_fem(o);
    if (name == "verify") return cmd_verify(o);
    return cmd_scaling(o);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const CapExceeded& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kCap;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kError;
  }
}
