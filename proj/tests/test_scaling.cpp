#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include <nlohmann/json.hpp>

#include "carpet/scaling.hpp"

using namespace carpet;

TEST_CASE("resistance sequences") {
  const CarpetParams p(2);
  const auto G = resistance_sequence(p, GraphKind::G, 1);
  REQUIRE(G.values.size() == 1);
  CHECK(G.values[0] == doctest::Approx(1.0).epsilon(1e-12));
  const auto D = resistance_sequence(p, GraphKind::D, 1);
  CHECK(D.values[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK_THROWS_AS(resistance_sequence(p, GraphKind::G, 0), std::invalid_argument);

  const auto G4 = resistance_sequence(p, GraphKind::G, 4);
  CHECK(G4.values.size() == 4);
  CHECK(G4.increasing());
  CHECK_FALSE(G4.error.has_value());

  GraphBuildOptions tiny;
  tiny.cell_cap = 100;
  const auto partial = resistance_sequence(p, GraphKind::G, 4, {}, tiny);
  CHECK(partial.values.size() == 2);
  REQUIRE(partial.error.has_value());
  CHECK(partial.error->rfind("m=3", 0) == 0);
}

TEST_CASE("duality R^G = 2 R^D") {
  const auto exact = duality_from_sequences({1.0}, {0.5});
  CHECK(exact.max_deviation == 0.0);
  for (int N : {2, 3}) {
    const auto rep = duality_check(CarpetParams(N), 3);
    CHECK(rep.rows.size() == 3);
    CHECK(rep.max_deviation <= 1e-9);
  }
}

TEST_CASE("rho estimators") {
  const auto e = rho_estimate({6.0, 12.0, 24.0});
  CHECK(e.last_ratio == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(e.slope == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(e.ratios.size() == 2);
  CHECK_THROWS_AS(rho_estimate({1.0}), std::invalid_argument);
  CHECK_THROWS_AS(rho_estimate({1.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(rho_estimate({1.0, -2.0}), std::invalid_argument);
  CHECK_THROWS_AS(rho_estimate({1.0, INFINITY}), std::invalid_argument);
  const std::vector<double> s{1.0, 1.9, 3.4, 6.6, 12.1};
  std::vector<double> t;
  for (double v : s) t.push_back(37.5 * v);
  const auto a = rho_estimate(s), b = rho_estimate(t);
  CHECK(a.last_ratio == doctest::Approx(b.last_ratio).epsilon(1e-14));
  CHECK(a.slope == doctest::Approx(b.slope).epsilon(1e-14));
}

TEST_CASE("sandwich records") {
  // Synthetic data that satisfies everything with room to spare.
  const std::map<int, double> fem{{0, 0.5}, {1, 0.7}, {2, 1.3}};
  const std::map<int, double> RG{{1, 1.0}, {2, 1.857}}, RD{{1, 0.5}, {2, 0.9285}};
  const auto res = sandwich_check(2, fem, RG, RD, 0.05);
  CHECK_FALSE(res.incomplete);
  CHECK(res.all_pass());
  int skipped = 0;
  for (const auto& r : res.records) {
    if (r.skipped) {
      ++skipped;
      CHECK(r.m == 0);
      CHECK_FALSE(r.reason.empty());
      continue;
    }
    CHECK(r.slack == 0.05);
    if (r.name == "graph-lower" && r.n == 0 && r.m == 1) {
      CHECK(r.lhs == doctest::Approx(1.0 * 0.5 * 0.5));
      CHECK(r.rhs == 0.7);
    }
    if (r.name == "graph-upper" && r.n == 1 && r.m == 1) {
      CHECK(r.lhs == 1.3);
      CHECK(r.rhs == doctest::Approx(11.0 / 9.0 * 4.0 * 0.7 * 1.0));
    }
  }
  CHECK(skipped == 6);

  // A violated inequality is reported, and the slack is applied to the right side.
  const auto bad = sandwich_check(2, {{0, 0.5}, {1, 10.0}}, {{1, 1.0}}, {{1, 0.5}}, 0.05);
  CHECK_FALSE(bad.all_pass());
  const auto edge = sandwich_check(2, {{0, 1.0}, {1, 1.05}}, {{1, 1.0}}, {{1, 1.08}}, 0.05);
  for (const auto& r : edge.records)
    if (r.name == "graph-lower" && r.m == 1) CHECK(r.pass);

  const auto missing = sandwich_check(2, {{0, 0.5}, {1, 0.7}}, {}, {}, 0.05);
  CHECK(missing.incomplete);
  CHECK(sandwich_check(2, {}, {}, {}, 0.05).incomplete);
  CHECK((9.0 / (44.0 * 2)) * (44.0 * 2 / 9.0) == doctest::Approx(1.0));
}

TEST_CASE("Fekete intervals") {
  const int N = 2;
  const std::map<int, double> fem{{0, 0.5}, {1, 0.7}, {2, 1.3}, {3, 2.4}};
  const auto rep = fekete_report(N, fem);
  REQUIRE(rep.intervals.size() == 3);
  for (const auto& iv : rep.intervals)
    CHECK(iv.hi - iv.lo == doctest::Approx(2.0 * std::log(44.0 * N / 9.0) / iv.n).epsilon(1e-12));
  CHECK_FALSE(rep.empty);
  CHECK(rep.lo == doctest::Approx(std::max({rep.intervals[0].lo, rep.intervals[1].lo, rep.intervals[2].lo})));
  CHECK(rep.contains(0.5 * (rep.lo + rep.hi)));
  CHECK_THROWS_AS(fekete_report(N, {{1, 0.7}}), std::invalid_argument);
  const auto clash = fekete_report(N, {{0, 1.0}, {1, 1e-6}, {2, 1e9}});
  CHECK(clash.empty);
}

TEST_CASE("scaling report") {
  const CarpetParams p(2);
  ScalingOptions o;
  o.m_max = 3;
  o.fem_n_max = 1;
  o.fem_k = 2;
  const auto rep = build_scaling_report(p, o);
  CHECK(rep.G.values.size() == 3);
  CHECK(rep.fem.size() == 2);
  REQUIRE(rep.rho.has_value());
  CHECK(rep.rho->ratios.size() == 2);
  REQUIRE(rep.fekete.has_value());
  CHECK(rep.fekete->contains(std::log(rep.rho->last_ratio)));
  CHECK(rep.sandwich.all_pass());
  const auto j = nlohmann::json::parse(scaling_json(rep));
  for (const char* key : {"N", "sequences", "ratios", "rho", "sandwich", "fekete"}) CHECK(j.contains(key));
  CHECK(j["rho"].contains("last_ratio"));
  CHECK(j["rho"].contains("slope"));
  CHECK(j["sequences"]["G"]["values"].size() == 3);
  CHECK(scaling_json(rep) == scaling_json(build_scaling_report(p, o)));
  const auto csv = scaling_csv(rep);
  CHECK(csv.rfind("kind,index,R,ratio\n", 0) == 0);
  CHECK(csv.find("fem,1,") != std::string::npos);
}
