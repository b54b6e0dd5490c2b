#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "carpet/fem.hpp"
#include "carpet/graphs.hpp"
#include "oracle.hpp"

using namespace carpet;

TEST_CASE("element stiffness") {
  const auto K = element_stiffness({0, 0}, {1, 0}, {0, 1});
  CHECK(K[0][0] == doctest::Approx(1.0));
  CHECK(K[1][1] == doctest::Approx(0.5));
  CHECK(K[0][1] == doctest::Approx(-0.5));
  CHECK(K[1][2] == doctest::Approx(0.0));
  for (const auto& row : K) CHECK(row[0] + row[1] + row[2] == doctest::Approx(0.0));
  // Energy of a linear field x on any triangle is its area.
  const Point a{0.2, 0.1}, b{1.3, 0.4}, c{0.5, 1.7};
  const auto Kt = element_stiffness(a, b, c);
  const double f[3] = {a.real(), b.real(), c.real()};
  double e = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) e += f[i] * Kt[i][j] * f[j];
  const double area = 0.5 * std::abs(((b - a) * std::conj(c - a)).imag());
  CHECK(e == doctest::Approx(area).epsilon(1e-14));
}

TEST_CASE("unit square returns R = 1 at every refinement") {
  for (int k = 0; k <= 6; ++k) {
    const auto mesh = unit_square_mesh(k);
    CHECK(is_conforming(mesh));
    const auto sol = solve_mixed_bvp(mesh);
    CHECK(std::abs(sol.resistance - 1.0) <= 1e-12);
    for (std::size_t v = 0; v < mesh.nodes.size(); ++v) CHECK(std::abs(sol.u[v] - mesh.nodes[v].real()) < 1e-12);
  }
}

TEST_CASE("mesh sizes and conformity") {
  const CarpetParams p(2);
  auto m00 = build_mesh(p, 0, 0);
  CHECK(m00.triangles.size() == 8);
  CHECK(m00.nodes.size() == 9);
  CHECK(build_mesh(p, 0, 1).triangles.size() == 32);
  const auto m10 = build_mesh(p, 1, 0);
  CHECK(m10.triangles.size() == 64);
  for (int N : {2, 3}) {
    const CarpetParams q(N);
    for (int n = 0; n <= 2; ++n)
      for (int k = 0; k <= 2; ++k) {
        if (N == 3 && n == 2 && k == 2) continue;
        const auto mesh = build_mesh(q, n, k);
        CHECK(mesh.triangles.size() == static_cast<std::size_t>(4 * N * (1 << (2 * k)) * *cell_count(q, n)));
        CHECK(is_conforming(mesh));
        for (const auto& t : mesh.triangles) {
          const Point a = mesh.nodes[t[0]], b = mesh.nodes[t[1]], c = mesh.nodes[t[2]];
          CHECK(((b - a) * std::conj(c - a)).imag() < 0);  // counter-clockwise
        }
        if (n <= 1 && k <= 1) {
          std::vector<oracle::Pt> raw;
          for (const auto& t : mesh.triangles)
            for (int i : t) raw.push_back(mesh.nodes[i]);
          CHECK(oracle::distinct_points(raw, mesh.tolerance) == mesh.nodes.size());
        }
      }
  }
  CHECK_THROWS_AS(build_mesh(p, 6, 6), CapExceeded);
  CHECK_THROWS_AS(build_mesh(p, -1, 0), std::invalid_argument);
}

TEST_CASE("markers") {
  const CarpetParams p(2);
  const auto mesh = build_mesh(p, 1, 1);
  std::size_t a = 0, b = 0, neu = 0;
  for (std::size_t v = 0; v < mesh.nodes.size(); ++v) {
    const Point x = mesh.nodes[v];
    switch (mesh.markers[v]) {
      case NodeMarker::DirichletA: ++a; break;
      case NodeMarker::DirichletB: ++b; break;
      case NodeMarker::Neumann: ++neu; break;
      default: break;
    }
    if (std::abs(x) < 1e-9) CHECK(mesh.markers[v] == NodeMarker::Interior);
  }
  // Each A side of F_1 is two sub-segments of 2^k + 1 nodes.
  CHECK(a == 2 * 2 * 3);
  CHECK(b == a);
  CHECK(neu > 0);
  const auto sol = solve_mixed_bvp(mesh);
  for (std::size_t v = 0; v < mesh.nodes.size(); ++v) {
    if (mesh.markers[v] == NodeMarker::DirichletA) CHECK(sol.u[v] == 0.0);
    if (mesh.markers[v] == NodeMarker::DirichletB) CHECK(sol.u[v] == 1.0);
  }
  const auto u = normalize_pm1(sol);
  CHECK(mesh_inner(mesh, u, u) == doctest::Approx(4.0 * sol.energy).epsilon(1e-12));
  Mesh bad = mesh;
  for (auto& m : bad.markers)
    if (m == NodeMarker::DirichletB) m = NodeMarker::Neumann;
  CHECK_THROWS_AS(solve_mixed_bvp(bad), std::runtime_error);
}

TEST_CASE("lower-bound monotonicity in the refinement") {
  for (int N : {2, 3}) {
    const CarpetParams p(N);
    const auto rows = convergence_table(p, 0, 0, N == 2 ? 6 : 5);
    for (std::size_t i = 1; i < rows.size(); ++i) {
      CHECK(rows[i].resistance > rows[i - 1].resistance);
      if (i >= 2) CHECK(std::abs(rows[i].delta) < std::abs(rows[i - 1].delta));
    }
    const auto est = aitken_estimate(rows);
    REQUIRE(est.has_value());
    CHECK(*est > rows.back().resistance);
    const auto csv = convergence_csv(rows);
    CHECK(csv.rfind("k,nodes,energy,R_est,delta\n", 0) == 0);
  }
  CHECK_FALSE(aitken_estimate({}).has_value());
}

TEST_CASE("regression anchor for R_0 (N = 2)") {
  // Value at k = 6; k = 7 moves it by less than 5e-4.
  const CarpetParams p(2);
  const auto sol6 = solve_mixed_bvp(build_mesh(p, 0, 6));
  const auto sol7 = solve_mixed_bvp(build_mesh(p, 0, 7));
  CHECK(std::abs(sol7.resistance - sol6.resistance) < 5e-4);
  CHECK(sol6.resistance == doctest::Approx(0.4993808212).epsilon(1e-9));
}

TEST_CASE("symmetry and sector identities") {
  for (int N : {2, 3}) {
    const CarpetParams p(N);
    for (int n = 0; n <= 1; ++n)
      for (int k = 0; k <= 3; ++k) {
        const auto mesh = build_mesh(p, n, k);
        const auto sol = solve_mixed_bvp(mesh);
        const auto s = sector_analysis(p, mesh, sol);
        CAPTURE(N);
        CAPTURE(n);
        CAPTURE(k);
        CHECK(s.E_v > 0);
        CHECK(s.E_w > 0);
        CHECK(std::abs(s.orthogonality) <= 1e-9 * std::sqrt(s.E_v * s.E_w));
        CHECK(std::abs(4.0 / sol.resistance - 2.0 * N * (s.E_v + s.E_w)) <= 1e-9 * 4.0 / sol.resistance);
        CHECK(s.theta2_residual <= 1e-9);
        CHECK(s.conj_residual <= 1e-9);
        CHECK(4.0 * sol.resistance == doctest::Approx(2.0 * N * (s.E_V + s.E_W)).epsilon(1e-9));
        // Even sectors carry E_v and odd sectors E_w.
        for (std::size_t j = 0; j < s.sector_energies.size(); ++j)
          CHECK(s.sector_energies[j] == doctest::Approx(j % 2 == 0 ? s.E_v : s.E_w).epsilon(1e-9));
      }
  }
}

TEST_CASE("node permutations detect asymmetric meshes") {
  const CarpetParams p(2);
  Mesh mesh = build_mesh(p, 0, 1);
  CHECK_NOTHROW(node_permutation(mesh, theta_map(p, 1)));
  mesh.nodes[3] += Point(1e-3, 0.0);
  CHECK_THROWS_AS(node_permutation(mesh, theta_map(p, 1)), SymmetryError);
}

TEST_CASE("beta coefficients") {
  const auto b = beta_coefficients(2, {1.0, -1.0, 0.0});
  const std::vector<double> expect{-1, -4, -1, 2, 2, 2, 2, 2};
  CHECK(b == expect);
  double s = 0;
  for (double x : b) s += x * x;
  CHECK(s == 38.0);
  CHECK(beta_sum_squares_closed_form(2, {1.0, -1.0, 0.0}) == 38.0);
  for (double x : beta_coefficients(4, {0, 0, 0})) CHECK(x == 0.0);
  CHECK_THROWS_AS(beta_coefficients(2, {1.0, 1.0, 0.0}), std::invalid_argument);

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  for (int N = 2; N <= 8; ++N)
    for (int t = 0; t < 10000; ++t) {
      FluxTriple I{dist(rng), dist(rng), 0.0};
      I.I3N1 = -I.I0 - I.IN;
      const auto beta = beta_coefficients(N, I);
      REQUIRE(beta.size() == static_cast<std::size_t>(4 * N));
      double sum = 0;
      for (double x : beta) sum += x * x;
      const double cf = beta_sum_squares_closed_form(N, I);
      REQUIRE(std::abs(sum - cf) <= 1e-12 * cf);
      REQUIRE(sum <= beta_sum_squares_bound(N, I) * (1 + 1e-15));
    }
}

TEST_CASE("glued energies and their bounds") {
  for (int N : {2, 3}) {
    const CarpetParams p(N);
    const auto mesh = build_mesh(p, 1, 2);
    const auto sol = solve_mixed_bvp(mesh);
    const auto s = sector_analysis(p, mesh, sol);
    std::mt19937_64 rng(N);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int t = 0; t < 1000; ++t) {
      FluxTriple I{dist(rng), dist(rng), 0.0};
      I.I3N1 = -I.I0 - I.IN;
      const auto e = glued_current_energy(N, s, I);
      CHECK(e.energy <= e.bound_sectors * (1 + 1e-12));
      CHECK(e.energy <= e.bound_resistance * (1 + 1e-12));
      CHECK(e.bound_sectors <= e.bound_resistance * (1 + 1e-9));

      std::map<int, double> z;
      for (int j : d0_corner_indices(N)) z[j] = dist(rng);
      const auto g = glued_potential_energy(N, s, z);
      CHECK(g.energy <= g.bound_sectors * (1 + 1e-12));
      CHECK(g.bound_sectors == doctest::Approx(g.bound_resistance).epsilon(1e-9));
    }
    CHECK(glued_current_energy(N, s, {0, 0, 0}).energy == 0.0);
    CHECK(glued_potential_energy(N, s, {}).energy == 0.0);
    CHECK_THROWS_AS(glued_potential_energy(N, s, {{4 * N - 1, 1.0}}), std::invalid_argument);
  }
}

TEST_CASE("exports") {
  const CarpetParams p(2);
  const auto mesh = build_mesh(p, 0, 1);
  const auto sol = solve_mixed_bvp(mesh);
  const auto js = mesh_json(mesh);
  CHECK(js.find("\"triangles\"") != std::string::npos);
  CHECK(js.find("dirichlet-A") != std::string::npos);
  const auto csv = solution_csv(mesh, sol);
  CHECK(csv.rfind("node,x,y,u\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(mesh.nodes.size()) + 1);
}
