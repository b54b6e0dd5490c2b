#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "carpet/geometry.hpp"
#include "oracle.hpp"

using namespace carpet;

namespace {

bool near(Point a, Point b, double tol = 1e-12) { return std::abs(a - b) <= tol; }

// Length of the overlap of two collinear-or-not segments (0 unless collinear).
double shared_length(Point a0, Point a1, Point b0, Point b1) {
  const Point d = a1 - a0;
  const double len = std::abs(d);
  const Point u = d / len;
  auto offset = [&](Point p) { return std::abs(((p - a0) * std::conj(u)).imag()); };
  if (offset(b0) > 1e-10 || offset(b1) > 1e-10) return 0.0;
  auto t = [&](Point p) { return ((p - a0) * std::conj(u)).real(); };
  const double lo = std::max(0.0, std::min(t(b0), t(b1)));
  const double hi = std::min(len, std::max(t(b0), t(b1)));
  return std::max(0.0, hi - lo);
}

}  // namespace

TEST_CASE("outer vertices follow exp((2j-1) i pi / 4N)") {
  for (int N : {2, 3, 4, 7}) {
    const CarpetParams p(N);
    CHECK(p.num_cells_per_level() == 4 * N);
    for (int j = -9; j < 20; ++j) {
      CHECK(near(outer_vertex(p, j), oracle::vertex(N, j)));
      CHECK(std::abs(std::abs(outer_vertex(p, j)) - 1.0) < 1e-15);
    }
  }
  const CarpetParams p2(2);
  // C_1 = (cos pi/8, sin pi/8) on the octagon.
  CHECK(near(outer_vertex(p2, 1), {0.92387953251128674, 0.38268343236508978}, 1e-15));
  CHECK(near(outer_vertex(p2, 0), {0.92387953251128674, -0.38268343236508978}, 1e-15));
  CHECK(near(outer_vertex(p2, 8), outer_vertex(p2, 0), 0.0));
  const CarpetParams p3(3);
  CHECK(near(outer_vertex(p3, 1), {std::cos(std::numbers::pi / 12), std::sin(std::numbers::pi / 12)}));
}

TEST_CASE("contraction ratio and dimension") {
  CHECK(contraction_ratio(2) == doctest::Approx(1.0 / (2.0 + std::sqrt(2.0))).epsilon(1e-15));
  CHECK(contraction_ratio(3) == doctest::Approx(1.0 / (3.0 + std::sqrt(3.0))).epsilon(1e-15));
  CHECK(contraction_ratio(2) == doctest::Approx(0.29289322).epsilon(1e-8));
  CHECK(contraction_ratio(3) == doctest::Approx(0.21132487).epsilon(1e-8));
  for (int N = 2; N < 40; ++N) {
    CHECK(contraction_ratio(N) > 0.0);
    CHECK(contraction_ratio(N) < 1.0 / 3.0);
    CHECK(contraction_ratio(N + 1) < contraction_ratio(N));
    const double d = hausdorff_dimension(N);
    CHECK(d > 1.0);
    CHECK(d < 2.0);
  }
  CHECK(hausdorff_dimension(2) == doctest::Approx(std::log(8.0) / std::log(2.0 + std::sqrt(2.0))).epsilon(1e-14));
  CHECK(hausdorff_dimension(2) == doctest::Approx(1.69342).epsilon(1e-5));
  CHECK(hausdorff_dimension(3) == doctest::Approx(std::log(12.0) / std::log(3.0 + std::sqrt(3.0))).epsilon(1e-14));
  CHECK_THROWS_AS(contraction_ratio(1), std::invalid_argument);
  CHECK_THROWS_AS(CarpetParams(1), std::invalid_argument);
}

TEST_CASE("phi, theta and their elementary properties") {
  for (int N : {2, 3, 5}) {
    const CarpetParams p(N);
    const double r = p.r();
    const Point z{0.3, -0.1}, w{-0.45, 0.2};
    for (int j = 0; j < 4 * N; ++j) {
      CHECK(near(apply_phi(p, j, outer_vertex(p, j)), outer_vertex(p, j)));
      CHECK(near(apply_phi(p, j, z), oracle::phi(N, j, z)));
      CHECK(std::abs(std::abs(apply_phi(p, j, z) - apply_phi(p, j, w)) - r * std::abs(z - w)) < 1e-12);
      CHECK(near(apply_theta(p, 1, outer_vertex(p, j)), outer_vertex(p, j + 1)));
    }
    CHECK(near(apply_phi(p, 0, 0.0), (1.0 - r) * outer_vertex(p, 0)));
    CHECK(near(apply_theta(p, 4 * N, z), z));
    CHECK(near(apply_theta(p, -1, apply_theta(p, 1, z)), z));
  }
  CHECK(near(apply_theta(CarpetParams(2), 2, {1.0, 0.0}), {0.0, 1.0}));
}

TEST_CASE("adjacent level-1 cells share a full side") {
  for (int N : {2, 3, 4}) {
    const CarpetParams p(N);
    const auto poly = base_polygon(p);
    const double side = std::abs(poly[1] - poly[0]) * p.r();
    for (int j = 0; j < 4 * N; ++j) {
      const auto a = enumerate_cells(p, 1)[j].polygon(p);
      const auto b = enumerate_cells(p, 1)[(j + 1) % (4 * N)].polygon(p);
      double best = 0.0;
      for (std::size_t s = 0; s < a.size(); ++s)
        for (std::size_t t = 0; t < b.size(); ++t)
          best = std::max(best, shared_length(a[s], a[(s + 1) % a.size()], b[t], b[(t + 1) % b.size()]));
      CHECK(best == doctest::Approx(side).epsilon(1e-10));
    }
  }
}

TEST_CASE("psi maps place F_0 on the cell of F_1 containing C_j") {
  for (int N : {2, 3, 4, 5}) {
    const CarpetParams p(N);
    const auto F0 = base_polygon(p);
    BoundaryLocator loc(p, 1, level_tolerance(p, 1));
    for (int j = 0; j < 4 * N; ++j) {
      std::vector<Point> img, ref;
      for (Point c : F0) {
        img.push_back(apply_psi(p, j, c));
        ref.push_back(apply_phi(p, j, c));
      }
      CHECK(oracle::same_point_sets(img, ref, 1e-12));
      std::vector<Point> imgt;
      for (Point c : F0) imgt.push_back(apply_psi_tilde(p, j, c));
      CHECK(oracle::same_point_sets(imgt, ref, 1e-12));
      const Point mid = 0.5 * (apply_psi(p, j, outer_vertex(p, 0)) + apply_psi(p, j, outer_vertex(p, 1)));
      CHECK(loc.locate(mid).cls != BoundaryClass::Other);
    }
    CHECK(near(apply_psi(p, 0, {0.1, 0.2}), apply_phi(p, 0, {0.1, 0.2})));
  }
}

TEST_CASE("psi-tilde places L_N and L_{3N-1} on shared sides") {
  for (int N : {2, 3, 4, 5}) {
    const CarpetParams p(N);
    const auto cells = enumerate_cells(p, 1);
    for (int j = 0; j < 4 * N; ++j) {
      const auto s = psi_tilde_map(p, j);
      for (int side : {N, 3 * N - 1}) {
        const Point a = s(outer_vertex(p, side)), b = s(outer_vertex(p, side + 1));
        int owners = 0;
        for (const auto& c : cells) {
          const auto poly = c.polygon(p);
          for (std::size_t t = 0; t < poly.size(); ++t) {
            const Point x = poly[t], y = poly[(t + 1) % poly.size()];
            if ((near(x, a, 1e-12) && near(y, b, 1e-12)) || (near(x, b, 1e-12) && near(y, a, 1e-12))) ++owners;
          }
        }
        CHECK(owners == 2);
      }
    }
  }
}

TEST_CASE("cell enumeration") {
  const CarpetParams p(2);
  CHECK(enumerate_cells(p, 0).size() == 1);
  CHECK(enumerate_cells(p, 0)[0].word.empty());
  CHECK(enumerate_cells(p, 2).size() == 64);
  CHECK(*cell_count(p, 3) == 512);
  CHECK_THROWS_AS(enumerate_cells(p, 3, 100), CapExceeded);
  CHECK_THROWS_AS(enumerate_cells(p, -1), std::invalid_argument);

  for (int N : {2, 3}) {
    const CarpetParams q(N);
    for (int m = 0; m <= 3; ++m) {
      if (N == 3 && m == 3) continue;
      const auto cells = enumerate_cells(q, m);
      const double area0 = polygon_area(base_polygon(q));
      double total = 0.0;
      std::vector<oracle::Pt> centers;
      for (const auto& c : cells) {
        CHECK(c.word.size() == static_cast<std::size_t>(m));
        CHECK(c.map.ratio() == doctest::Approx(std::pow(q.r(), m)).epsilon(1e-12));
        total += polygon_area(c.polygon(q));
        centers.push_back(c.center());
      }
      CHECK(total == doctest::Approx(std::pow(4.0 * N * q.r() * q.r(), m) * area0).epsilon(1e-12));
      CHECK(oracle::same_point_sets(centers, oracle::phi_cell_centers(N, m), 1e-9 * std::pow(q.r(), m)));
      CHECK(oracle::distinct_points(centers, 1e-6 * std::pow(q.r(), m)) == cells.size());
    }
  }
}

TEST_CASE("boundary segments") {
  const CarpetParams p2(2);
  const auto s0 = boundary_segments(p2, 0);
  REQUIRE(s0.size() == 4);
  int a = 0, b = 0;
  for (const auto& s : s0) {
    CHECK(s.outer_index.has_value());
    if (s.boundary_class == BoundaryClass::A) {
      ++a;
      CHECK((*s.outer_index == 0 || *s.outer_index == 4));
    } else {
      ++b;
      CHECK((*s.outer_index == 2 || *s.outer_index == 6));
    }
  }
  CHECK(a == 2);
  CHECK(b == 2);

  const CarpetParams p3(3);
  int a3 = 0, b3 = 0;
  for (const auto& s : boundary_segments(p3, 0)) (s.boundary_class == BoundaryClass::A ? a3 : b3)++;
  CHECK(a3 == 3);
  CHECK(b3 == 3);

  for (int N : {2, 3, 4}) {
    const CarpetParams p(N);
    const double L0 = std::abs(outer_vertex(p, 1) - outer_vertex(p, 0));
    for (int n = 0; n <= 4; ++n) {
      const auto segs = boundary_segments(p, n);
      int na = 0, nb = 0;
      double len = 0.0;
      for (const auto& s : segs) {
        (s.boundary_class == BoundaryClass::A ? na : nb)++;
        len += s.length();
        CHECK(s.length() == doctest::Approx(L0 * std::pow(p.r(), n)).epsilon(1e-12));
      }
      CHECK(na == N * (1 << n));
      CHECK(nb == N * (1 << n));
      CHECK(len == doctest::Approx(2.0 * N * L0 * std::pow(2.0 * p.r(), n)).epsilon(1e-10));
    }
  }
  CHECK(boundary_segments(p2, 2).size() == 16);
}

TEST_CASE("boundary locator") {
  const CarpetParams p(2);
  const BoundaryLocator loc(p, 1, level_tolerance(p, 1));
  const Point mid0 = 0.5 * (outer_vertex(p, 0) + outer_vertex(p, 1));
  // The middle of L_0 is not in F_1 (the gap between the two corner cells).
  CHECK(loc.locate(mid0).cls == BoundaryClass::Other);
  const Point inA = apply_phi(p, 0, mid0);
  CHECK(loc.locate(inA).cls == BoundaryClass::A);
  CHECK(loc.locate(inA).outer_index == 0);
  const Point inB = apply_theta(p, 2, inA);
  CHECK(loc.locate(inB).cls == BoundaryClass::B);
  CHECK(loc.locate(inB).outer_index == 2);
  CHECK(loc.locate(apply_theta(p, 1, inA)).cls == BoundaryClass::Other);
  CHECK(loc.locate({0.0, 0.0}).cls == BoundaryClass::Other);
  CHECK(segment_distance({0.0, 1.0}, {-1.0, 0.0}, {1.0, 0.0}) == doctest::Approx(1.0));
  CHECK(segment_distance({2.0, 0.0}, {-1.0, 0.0}, {1.0, 0.0}) == doctest::Approx(1.0));
}

TEST_CASE("symmetries act on A and B as stated") {
  for (int N : {2, 3}) {
    const CarpetParams p(N);
    for (const auto& s : boundary_segments(p, 2)) {
      const BoundaryLocator loc(p, 2, level_tolerance(p, 2));
      const Point mid = 0.5 * (s.start + s.end);
      const auto rot = loc.locate(apply_theta(p, 2, mid)).cls;
      const auto cj = loc.locate(std::conj(mid)).cls;
      CHECK(rot == (s.boundary_class == BoundaryClass::A ? BoundaryClass::B : BoundaryClass::A));
      CHECK(cj == s.boundary_class);
    }
  }
}

TEST_CASE("similarity composition and matrix") {
  const CarpetParams p(3);
  const Similarity a = psi_tilde_map(p, 4), b = psi_map(p, 7);
  const Point z{0.21, -0.37};
  CHECK(near(a.compose(b)(z), a(b(z))));
  CHECK(near(conj_map()(z), std::conj(z)));
  const auto M = a.matrix();
  const Point lin = a(z) - a(0.0);
  CHECK(lin.real() == doctest::Approx(M[0] * z.real() + M[1] * z.imag()));
  CHECK(lin.imag() == doctest::Approx(M[2] * z.real() + M[3] * z.imag()));
}

TEST_CASE("svg and json output") {
  const CarpetParams p(2);
  const auto svg0 = emit_carpet_svg(p, 0);
  const auto svg2 = emit_carpet_svg(p, 2);
  auto count = [](const std::string& s, const std::string& pat) {
    std::size_t n = 0;
    for (auto pos = s.find(pat); pos != std::string::npos; pos = s.find(pat, pos + 1)) ++n;
    return n;
  };
  CHECK(count(svg0, "<polygon") == 1);
  CHECK(count(svg2, "<polygon") == 64);
  CHECK(svg2 == emit_carpet_svg(p, 2));
  SvgOptions hl;
  hl.highlight_ab = true;
  const auto svg3 = emit_carpet_svg(CarpetParams(3), 0, hl);
  CHECK(count(svg3, "<line") == 6);
  CHECK(count(svg3, "id=\"A\"") == 1);
  const auto js = cells_json(p, 1);
  CHECK(js.find("\"word\":[7]") != std::string::npos);
  CHECK(js == cells_json(p, 1));
}
