#include "carpet/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdio>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

namespace carpet {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Similarity Similarity::compose(const Similarity& o) const {
  Similarity s;
  s.a = a * (reflect ? std::conj(o.a) : o.a);
  s.b = a * (reflect ? std::conj(o.b) : o.b) + b;
  s.reflect = reflect != o.reflect;
  return s;
}

std::array<double, 4> Similarity::matrix() const {
  // z -> a z : [[ar, -ai], [ai, ar]];  z -> a conj(z) : [[ar, ai], [ai, -ar]]
  const double ar = a.real(), ai = a.imag();
  if (reflect) return {ar, ai, ai, -ar};
  return {ar, -ai, ai, ar};
}

double contraction_ratio(int N) {
  if (N < 2) throw std::invalid_argument("N must be >= 2 (N = 1 is the square)");
  const double t = std::numbers::pi / (4.0 * N);
  return 1.0 / (1.0 + std::cos(t) / std::sin(t));
}

double hausdorff_dimension(int N) {
  const double r = contraction_ratio(N);
  return std::log(4.0 * N) / -std::log(r);
}

CarpetParams::CarpetParams(int N) : N_(N), r_(contraction_ratio(N)) {
  vertices_.reserve(4 * N);
  for (int j = 0; j < 4 * N; ++j) {
    const double ang = (2.0 * j - 1.0) * std::numbers::pi / (4.0 * N);
    vertices_.emplace_back(std::cos(ang), std::sin(ang));
  }
}

int CarpetParams::wrap(long long j) const {
  const long long M = 4LL * N_;
  long long k = j % M;
  if (k < 0) k += M;
  return static_cast<int>(k);
}

Point outer_vertex(const CarpetParams& params, long long j) { return params.vertices()[params.wrap(j)]; }

Similarity phi_map(const CarpetParams& params, long long j) {
  const Point c = outer_vertex(params, j);
  const double r = params.r();
  return Similarity{{r, 0.0}, (1.0 - r) * c, false};
}

Similarity theta_map(const CarpetParams& params, long long k) {
  const int kk = params.wrap(k);
  const double ang = kk * std::numbers::pi / (2.0 * params.N());
  return Similarity{{std::cos(ang), std::sin(ang)}, {0.0, 0.0}, false};
}

Similarity conj_map() { return Similarity{{1.0, 0.0}, {0.0, 0.0}, true}; }

Similarity psi_map(const CarpetParams& params, int j) {
  if (j % 2 == 0) return phi_map(params, j).compose(theta_map(params, j));
  return phi_map(params, j).compose(theta_map(params, j - 1)).compose(conj_map());
}

Similarity psi_tilde_map(const CarpetParams& params, int j) {
  const int N = params.N();
  if (N % 2 == 0) {
    if (j == 3 * N - 1) return phi_map(params, j).compose(theta_map(params, 3 * N - 1));
    if (j == 3 * N)
      return phi_map(params, j).compose(theta_map(params, 3 * N - 1)).compose(conj_map());
  } else {
    if (j == N) return phi_map(params, j).compose(theta_map(params, N));
    if (j == N + 1) return phi_map(params, j).compose(theta_map(params, N)).compose(conj_map());
  }
  return psi_map(params, j);
}

Point apply_phi(const CarpetParams& params, long long j, Point z) { return phi_map(params, j)(z); }
Point apply_theta(const CarpetParams& params, long long k, Point z) { return theta_map(params, k)(z); }
Point apply_psi(const CarpetParams& params, int j, Point z) { return psi_map(params, j)(z); }
Point apply_psi_tilde(const CarpetParams& params, int j, Point z) {
  return psi_tilde_map(params, j)(z);
}

std::vector<Point> base_polygon(const CarpetParams& params) { return params.vertices(); }

double polygon_area(const std::vector<Point>& poly) {
  double s = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point p = poly[i], q = poly[(i + 1) % poly.size()];
    s += p.real() * q.imag() - q.real() * p.imag();
  }
  return 0.5 * std::abs(s);
}

std::vector<Point> CellAddress::polygon(const CarpetParams& params) const {
  std::vector<Point> out;
  out.reserve(params.vertices().size());
  for (Point c : params.vertices()) out.push_back(map(c));
  return out;
}

std::optional<std::uint64_t> cell_count(const CarpetParams& params, int m) {
  if (m < 0) return std::nullopt;
  std::uint64_t n = 1;
  const std::uint64_t base = static_cast<std::uint64_t>(params.num_cells_per_level());
  for (int i = 0; i < m; ++i) {
    if (n > UINT64_MAX / base) return std::nullopt;
    n *= base;
  }
  return n;
}

std::vector<CellAddress> enumerate_cells(const CarpetParams& params, int m, std::size_t cap) {
  if (m < 0) throw std::invalid_argument("level must be >= 0");
  const auto count = cell_count(params, m);
  if (!count || *count > cap)
    throw CapExceeded("level " + std::to_string(m) + " exceeds the cell cap of " +
                      std::to_string(cap));
  const int M = params.num_cells_per_level();
  std::vector<Similarity> psi(M), psit(M);
  for (int j = 0; j < M; ++j) {
    psi[j] = psi_map(params, j);
    psit[j] = psi_tilde_map(params, j);
  }

  // Build suffix compositions psi~_{w_k} o ... o psi~_{w_m} level by level,
  // then prepend psi_{w_1}.
  std::vector<CellAddress> inner{CellAddress{{}, Similarity{}}};
  for (int level = 1; level < m; ++level) {
    std::vector<CellAddress> next;
    next.reserve(inner.size() * M);
    for (int j = 0; j < M; ++j)
      for (const auto& c : inner) {
        CellAddress a;
        a.word.reserve(c.word.size() + 1);
        a.word.push_back(j);
        a.word.insert(a.word.end(), c.word.begin(), c.word.end());
        a.map = psit[j].compose(c.map);
        next.push_back(std::move(a));
      }
    inner = std::move(next);
  }
  if (m == 0) return inner;

  std::vector<CellAddress> out;
  out.reserve(inner.size() * M);
  for (int j = 0; j < M; ++j)
    for (const auto& c : inner) {
      CellAddress a;
      a.word.reserve(c.word.size() + 1);
      a.word.push_back(j);
      a.word.insert(a.word.end(), c.word.begin(), c.word.end());
      a.map = psi[j].compose(c.map);
      out.push_back(std::move(a));
    }
  return out;
}

const char* to_string(BoundaryClass c) {
  switch (c) {
    case BoundaryClass::A: return "A";
    case BoundaryClass::B: return "B";
    default: return "other";
  }
}

BoundaryClass outer_side_class(const CarpetParams& params, int j) {
  const int k = params.wrap(j);
  if (k % 4 == 0) return BoundaryClass::A;
  if (k % 4 == 2) return BoundaryClass::B;
  return BoundaryClass::Other;
}

std::vector<SideSegment> outer_side_segments(const CarpetParams& params, int j, int n) {
  if (n < 0) throw std::invalid_argument("level must be >= 0");
  j = params.wrap(j);
  // F_n intersects L_j only inside the two corner cells phi_j and phi_{j+1},
  // each of which maps L_j into itself.
  std::vector<std::pair<Point, Point>> segs{{outer_vertex(params, j), outer_vertex(params, j + 1)}};
  const Similarity f0 = phi_map(params, j), f1 = phi_map(params, j + 1);
  for (int level = 0; level < n; ++level) {
    std::vector<std::pair<Point, Point>> next;
    next.reserve(2 * segs.size());
    for (const auto& s : segs) next.emplace_back(f0(s.first), f0(s.second));
    for (const auto& s : segs) next.emplace_back(f1(s.first), f1(s.second));
    segs = std::move(next);
  }
  const Point origin = outer_vertex(params, j);
  std::sort(segs.begin(), segs.end(), [&](const auto& x, const auto& y) {
    return std::abs(x.first - origin) < std::abs(y.first - origin);
  });
  std::vector<SideSegment> out;
  out.reserve(segs.size());
  const BoundaryClass cls = outer_side_class(params, j);
  for (const auto& s : segs) out.push_back(SideSegment{n, s.first, s.second, j, cls});
  return out;
}

std::vector<SideSegment> boundary_segments(const CarpetParams& params, int n) {
  std::vector<SideSegment> out;
  for (int j = 0; j < params.num_cells_per_level(); j += 2) {
    auto s = outer_side_segments(params, j, n);
    out.insert(out.end(), s.begin(), s.end());
  }
  return out;
}

double segment_distance(Point p, Point a, Point b) {
  const Point d = b - a;
  const double len2 = std::norm(d);
  if (len2 == 0.0) return std::abs(p - a);
  double t = ((p - a) * std::conj(d)).real() / len2;
  t = std::clamp(t, 0.0, 1.0);
  return std::abs(p - (a + t * d));
}

double level_tolerance(const CarpetParams& params, int m) { return 1e-6 * std::pow(params.r(), m); }

BoundaryLocator::BoundaryLocator(const CarpetParams& params, int n, double tau)
    : params_(&params), n_(n), tau_(tau) {
  const int M = params.num_cells_per_level();
  sides_.reserve(M);
  for (int j = 0; j < M; ++j) {
    Side s;
    s.a = outer_vertex(params, j);
    const Point d = outer_vertex(params, j + 1) - s.a;
    s.len = std::abs(d);
    s.dir = d / s.len;
    for (const auto& seg : outer_side_segments(params, j, n)) {
      double t0 = ((seg.start - s.a) * std::conj(s.dir)).real();
      double t1 = ((seg.end - s.a) * std::conj(s.dir)).real();
      if (t0 > t1) std::swap(t0, t1);
      s.intervals.emplace_back(t0, t1);
    }
    std::sort(s.intervals.begin(), s.intervals.end());
    sides_.push_back(std::move(s));
  }
}

bool BoundaryLocator::on_side(const Side& s, Point p) const {
  const Point rel = (p - s.a) * std::conj(s.dir);
  if (std::abs(rel.imag()) > tau_) return false;
  const double t = rel.real();
  if (t < -tau_ || t > s.len + tau_) return false;
  // first interval whose start is beyond t + tau; candidate is the one before it
  auto it = std::upper_bound(s.intervals.begin(), s.intervals.end(),
                             std::make_pair(t + tau_, std::numeric_limits<double>::infinity()));
  if (it == s.intervals.begin()) return false;
  --it;
  return t <= it->second + tau_;
}

BoundaryLocator::Hit BoundaryLocator::locate(Point p) const {
  for (int j = 0; j < static_cast<int>(sides_.size()); j += 2)
    if (on_side(sides_[j], p)) return Hit{outer_side_class(*params_, j), j};
  return {};
}

int BoundaryLocator::outer_side_of(Point p) const {
  for (int j = 0; j < static_cast<int>(sides_.size()); ++j)
    if (on_side(sides_[j], p)) return j;
  return -1;
}

namespace {

std::string svg_points(const std::vector<Point>& poly) {
  std::string s;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    if (i) s += ' ';
    s += fmt17(poly[i].real());
    s += ',';
    s += fmt17(-poly[i].imag());
  }
  return s;
}

}  // namespace

std::string emit_carpet_svg(const CarpetParams& params, int n, const SvgOptions& opts,
                            std::size_t cap) {
  const auto cells = enumerate_cells(params, n, cap);
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << fmt17(opts.size_px)
     << "\" height=\"" << fmt17(opts.size_px) << "\" viewBox=\"-1.05 -1.05 2.1 2.1\">\n"
     << "<g id=\"cells\" fill=\"#d0d0d0\" stroke=\"#000000\" stroke-width=\"" << fmt17(opts.stroke)
     << "\">\n";
  for (const auto& c : cells) os << "<polygon points=\"" << svg_points(c.polygon(params)) << "\"/>\n";
  os << "</g>\n";
  if (opts.highlight_ab) {
    for (BoundaryClass cls : {BoundaryClass::A, BoundaryClass::B}) {
      os << "<g id=\"" << to_string(cls) << "\" stroke=\""
         << (cls == BoundaryClass::A ? "#c00000" : "#0000c0") << "\" stroke-width=\""
         << fmt17(4 * opts.stroke) << "\">\n";
      for (const auto& s : boundary_segments(params, n)) {
        if (s.boundary_class != cls) continue;
        os << "<line x1=\"" << fmt17(s.start.real()) << "\" y1=\"" << fmt17(-s.start.imag())
           << "\" x2=\"" << fmt17(s.end.real()) << "\" y2=\"" << fmt17(-s.end.imag()) << "\"/>\n";
      }
      os << "</g>\n";
    }
  }
  os << "</svg>\n";
  return os.str();
}

std::string cells_json(const CarpetParams& params, int n, std::size_t cap) {
  nlohmann::json j;
  j["N"] = params.N();
  j["level"] = n;
  auto& arr = j["cells"] = nlohmann::json::array();
  for (const auto& c : enumerate_cells(params, n, cap)) {
    nlohmann::json verts = nlohmann::json::array();
    for (Point p : c.polygon(params)) verts.push_back({p.real(), p.imag()});
    arr.push_back({{"word", c.word}, {"vertices", std::move(verts)}});
  }
  return j.dump();
}

}  // namespace carpet
