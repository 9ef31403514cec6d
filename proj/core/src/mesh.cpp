#include "sttrend/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "sttrend/error.hpp"

namespace sttrend {

namespace {

double orient(const Point& a, const Point& b, const Point& c) {
  return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

// > 0 when d lies strictly inside the circumcircle of the CCW triangle abc.
double incircle(const Point& a, const Point& b, const Point& c, const Point& d) {
  const long double adx = a.x - d.x, ady = a.y - d.y;
  const long double bdx = b.x - d.x, bdy = b.y - d.y;
  const long double cdx = c.x - d.x, cdy = c.y - d.y;
  const long double ad = adx * adx + ady * ady;
  const long double bd = bdx * bdx + bdy * bdy;
  const long double cd = cdx * cdx + cdy * cdy;
  return static_cast<double>(adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) +
                             ad * (bdx * cdy - bdy * cdx));
}

double dist(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

Point circumcenter(const Point& a, const Point& b, const Point& c) {
  const double bx = b.x - a.x, by = b.y - a.y;
  const double cx = c.x - a.x, cy = c.y - a.y;
  const double d = 2.0 * (bx * cy - by * cx);
  const double b2 = bx * bx + by * by;
  const double c2 = cx * cx + cy * cy;
  return {a.x + (cy * b2 - by * c2) / d, a.y + (bx * c2 - cx * b2) / d};
}

// Andrew's monotone chain; CCW, collinear points dropped.
std::vector<Point> convex_hull(std::vector<Point> pts) {
  std::sort(pts.begin(), pts.end(),
            [](const Point& a, const Point& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  std::vector<Point> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && orient(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && orient(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

double polygon_area(const std::vector<Point>& poly) {
  double a = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto& p = poly[i];
    const auto& q = poly[(i + 1) % poly.size()];
    a += p.x * q.y - q.x * p.y;
  }
  return 0.5 * a;
}

// Signed distance from p to the boundary of a CCW convex polygon; positive
// inside.
double inside_distance(const std::vector<Point>& poly, const Point& p) {
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto& a = poly[i];
    const auto& b = poly[(i + 1) % poly.size()];
    d = std::min(d, orient(a, b, p) / dist(a, b));
  }
  return d;
}

std::uint64_t edge_key(int u, int v) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(u)) << 32) |
         static_cast<std::uint32_t>(v);
}

// Incremental Delaunay triangulation of a convex domain. The domain is fixed
// by the initial boundary polygon; later points must fall strictly inside.
class Triangulator {
 public:
  explicit Triangulator(const std::vector<Point>& boundary) {
    for (const auto& p : boundary) points_.push_back(p);
    const int n = static_cast<int>(boundary.size());
    for (int i = 1; i + 1 < n; ++i) add({0, i, i + 1});
    legalize_all();
  }

  const std::vector<Point>& points() const { return points_; }
  int last_added() const { return static_cast<int>(tris_.size()) - 1; }

  // Returns the new vertex index, or -1 if the point was not inserted.
  int insert(const Point& p) {
    const int start = locate(p);
    if (start < 0) return -1;
    for (int v : tris_[start])
      if (dist(points_[v], p) < 1e-12 * (1.0 + std::abs(p.x) + std::abs(p.y))) return -1;

    std::vector<int> cavity{start};
    std::unordered_map<int, bool> visited{{start, true}};
    for (std::size_t k = 0; k < cavity.size(); ++k) {
      const auto t = tris_[cavity[k]];
      for (int e = 0; e < 3; ++e) {
        const int nb = neighbour(t[e], t[(e + 1) % 3]);
        if (nb < 0 || visited.count(nb)) continue;
        visited[nb] = true;
        const auto& q = tris_[nb];
        if (incircle(points_[q[0]], points_[q[1]], points_[q[2]], p) > 0) cavity.push_back(nb);
      }
    }
    std::unordered_map<int, bool> in_cavity;
    for (int c : cavity) in_cavity[c] = true;

    std::vector<std::pair<int, int>> rim;
    for (int c : cavity) {
      const auto t = tris_[c];
      for (int e = 0; e < 3; ++e) {
        const int u = t[e], v = t[(e + 1) % 3];
        const int nb = neighbour(u, v);
        if (nb >= 0 && in_cavity.count(nb)) continue;
        rim.emplace_back(u, v);
      }
    }
    for (const auto& [u, v] : rim)
      if (orient(points_[u], points_[v], p) <= 0) return -1;

    const int idx = static_cast<int>(points_.size());
    points_.push_back(p);
    for (int c : cavity) remove(c);
    for (const auto& [u, v] : rim) add({u, v, idx});
    return idx;
  }

  int locate(const Point& p) const {
    int t = hint_;
    if (t < 0 || t >= static_cast<int>(tris_.size()) || !alive_[t]) t = any_alive();
    const int limit = 4 * static_cast<int>(tris_.size()) + 16;
    int rot = 0;
    for (int step = 0; step < limit && t >= 0; ++step) {
      const auto& tri = tris_[t];
      int next = -2;
      for (int k = 0; k < 3; ++k) {
        const int e = (k + rot) % 3;
        const int u = tri[e], v = tri[(e + 1) % 3];
        if (orient(points_[u], points_[v], p) < 0) {
          next = neighbour(u, v);
          break;
        }
      }
      ++rot;
      if (next == -2) {
        hint_ = t;
        return t;
      }
      if (next < 0) return -1;
      t = next;
    }
    // The walk should always terminate on a Delaunay mesh; scan as a fallback.
    for (int i = 0; i < static_cast<int>(tris_.size()); ++i) {
      if (!alive_[i]) continue;
      const auto& tri = tris_[i];
      if (orient(points_[tri[0]], points_[tri[1]], p) >= 0 &&
          orient(points_[tri[1]], points_[tri[2]], p) >= 0 &&
          orient(points_[tri[2]], points_[tri[0]], p) >= 0)
        return i;
    }
    return -1;
  }

  int neighbour(int u, int v) const {
    auto it = owner_.find(edge_key(v, u));
    return it == owner_.end() ? -1 : it->second;
  }

  bool alive(int t) const { return alive_[t]; }
  const Triangle& triangle(int t) const { return tris_[t]; }
  int triangle_slots() const { return static_cast<int>(tris_.size()); }

  std::vector<Triangle> triangles() const {
    std::vector<Triangle> out;
    for (std::size_t i = 0; i < tris_.size(); ++i)
      if (alive_[i]) out.push_back(tris_[i]);
    return out;
  }

 private:
  std::vector<Point> points_;
  std::vector<Triangle> tris_;
  std::vector<bool> alive_;
  std::unordered_map<std::uint64_t, int> owner_;
  mutable int hint_ = -1;

  int add(const Triangle& t) {
    const int id = static_cast<int>(tris_.size());
    tris_.push_back(t);
    alive_.push_back(true);
    for (int e = 0; e < 3; ++e) owner_[edge_key(t[e], t[(e + 1) % 3])] = id;
    hint_ = id;
    return id;
  }

  void remove(int id) {
    const auto& t = tris_[id];
    for (int e = 0; e < 3; ++e) {
      auto it = owner_.find(edge_key(t[e], t[(e + 1) % 3]));
      if (it != owner_.end() && it->second == id) owner_.erase(it);
    }
    alive_[id] = false;
  }

  int any_alive() const {
    for (int i = static_cast<int>(tris_.size()) - 1; i >= 0; --i)
      if (alive_[i]) return i;
    return -1;
  }

  // Lawson flips until every interior edge is locally Delaunay.
  void legalize_all() {
    bool changed = true;
    int passes = 0;
    while (changed && passes++ < 10000) {
      changed = false;
      for (int id = 0; id < static_cast<int>(tris_.size()); ++id) {
        if (!alive_[id]) continue;
        const Triangle t = tris_[id];
        for (int e = 0; e < 3; ++e) {
          const int a = t[e], b = t[(e + 1) % 3], c = t[(e + 2) % 3];
          const int nb = neighbour(a, b);
          if (nb < 0) continue;
          const auto& q = tris_[nb];
          int d = -1;
          for (int k = 0; k < 3; ++k)
            if (q[k] != a && q[k] != b) d = q[k];
          // Cocircular quads (the boundary arcs are full of them) must not
          // flip back and forth, so the test carries a relative tolerance.
          double scale = 0.0;
          for (int k : {b, c, d}) {
            const double l = dist(points_[a], points_[k]);
            scale = std::max(scale, l * l);
          }
          if (incircle(points_[a], points_[b], points_[c], points_[d]) > 1e-10 * scale * scale &&
              orient(points_[a], points_[d], points_[c]) > 0 &&
              orient(points_[d], points_[b], points_[c]) > 0) {
            remove(id);
            remove(nb);
            add({a, d, c});
            add({d, b, c});
            changed = true;
            break;
          }
        }
      }
    }
  }
};

// Strictly convex CCW boundary enclosing the locations with the requested
// margin; edges no longer than max_edge.
std::vector<Point> extended_boundary(const std::vector<Point>& hull, double extension,
                                     double max_edge) {
  constexpr int kCircle = 16;
  std::vector<Point> ring;
  for (const auto& p : hull)
    for (int k = 0; k < kCircle; ++k) {
      const double a = 2.0 * std::numbers::pi * k / kCircle;
      ring.push_back({p.x + extension * std::cos(a), p.y + extension * std::sin(a)});
    }
  const auto outer = convex_hull(ring);

  // Subdivide long edges, bowing the new points slightly outward so no three
  // boundary points are collinear.
  std::vector<Point> pts;
  for (std::size_t i = 0; i < outer.size(); ++i) {
    const auto& a = outer[i];
    const auto& b = outer[(i + 1) % outer.size()];
    const double len = dist(a, b);
    const int segments = std::max(1, static_cast<int>(std::ceil(len / max_edge - 1e-9)));
    const double nx = (b.y - a.y) / len, ny = -(b.x - a.x) / len;
    const double bow = 1e-3 * len;
    pts.push_back(a);
    for (int s = 1; s < segments; ++s) {
      const double f = static_cast<double>(s) / segments;
      const double off = bow * 4.0 * f * (1.0 - f);
      pts.push_back({a.x + f * (b.x - a.x) + off * nx, a.y + f * (b.y - a.y) + off * ny});
    }
  }
  return convex_hull(pts);
}

struct Refiner {
  Triangulator& tri;
  const std::vector<Point>& inner_region;
  const std::vector<Point>& domain;
  const MeshOptions& opt;
  double quality_ratio;  // circumradius / shortest edge bound

  double local_size(const Point& c) const {
    return inside_distance(inner_region, c) >= 0.0 ? opt.max_edge_inner : opt.max_edge_outer;
  }

  void run() {
    std::deque<int> work;
    for (int t = 0; t < tri.triangle_slots(); ++t) work.push_back(t);
    while (!work.empty()) {
      const int t = work.front();
      work.pop_front();
      if (!tri.alive(t)) continue;
      if (static_cast<int>(tri.points().size()) >= opt.max_vertices)
        throw Error(ErrorCode::InvalidParameters,
                    "mesh refinement exceeded " + std::to_string(opt.max_vertices) + " vertices");
      const auto& v = tri.triangle(t);
      const Point a = tri.points()[v[0]], b = tri.points()[v[1]], c = tri.points()[v[2]];
      const Point centroid{(a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0};
      const double h = local_size(centroid);
      const std::array<double, 3> len{dist(a, b), dist(b, c), dist(c, a)};
      const int longest = static_cast<int>(std::max_element(len.begin(), len.end()) - len.begin());
      const double shortest = *std::min_element(len.begin(), len.end());
      const Point cc = circumcenter(a, b, c);
      const double radius = dist(cc, a);

      const bool too_long = len[longest] > h * (1.0 + 1e-9);
      const bool poor = radius / shortest > quality_ratio && shortest > 0.25 * h;
      if (!too_long && !poor) continue;

      Point candidate = cc;
      const bool cc_ok = inside_distance(domain, cc) > 0.25 * h;
      if (!cc_ok) {
        if (!too_long) continue;
        const int u = v[longest], w = v[(longest + 1) % 3];
        if (tri.neighbour(u, w) >= 0) {
          const Point& p = tri.points()[u];
          const Point& q = tri.points()[w];
          candidate = {0.5 * (p.x + q.x), 0.5 * (p.y + q.y)};
        } else {
          candidate = centroid;
        }
      }
      const int host = tri.locate(candidate);
      if (host < 0) continue;
      bool crowded = false;
      for (int k : tri.triangle(host))
        if (dist(tri.points()[k], candidate) < 0.1 * h) crowded = true;
      if (crowded) continue;
      const int before = tri.triangle_slots();
      if (tri.insert(candidate) < 0) continue;
      for (int n = before; n < tri.triangle_slots(); ++n) work.push_back(n);
    }
  }
};

}  // namespace

// ---------------------------------------------------------------------------
// Mesh

Mesh::Mesh(std::vector<Point> vertices, std::vector<Triangle> triangles)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
  const int n = vertex_count();
  if (n < 1) throw Error(ErrorCode::InvalidInput, "mesh needs at least one vertex");
  for (const auto& t : triangles_) {
    for (int k : t)
      if (k < 0 || k >= n) throw Error(ErrorCode::InvalidInput, "triangle vertex index out of range");
    const double a = orient(vertices_[t[0]], vertices_[t[1]], vertices_[t[2]]);
    if (!(a > 0.0))
      throw Error(ErrorCode::DegenerateTriangle,
                  "triangle (" + std::to_string(t[0]) + ", " + std::to_string(t[1]) + ", " +
                      std::to_string(t[2]) + ") is degenerate or clockwise");
  }
  build_index();
}

void Mesh::build_index() {
  buckets_.clear();
  if (triangles_.empty()) return;
  double x0 = std::numeric_limits<double>::infinity(), y0 = x0;
  double x1 = -x0, y1 = -x0;
  for (const auto& p : vertices_) {
    x0 = std::min(x0, p.x);
    y0 = std::min(y0, p.y);
    x1 = std::max(x1, p.x);
    y1 = std::max(y1, p.y);
  }
  const int side = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(triangles_.size()))));
  bnx_ = bny_ = side;
  bx0_ = x0;
  by0_ = y0;
  bdx_ = std::max((x1 - x0) / side, 1e-12);
  bdy_ = std::max((y1 - y0) / side, 1e-12);
  buckets_.assign(static_cast<std::size_t>(bnx_ * bny_), {});
  auto cell = [&](double v, double o, double d, int n) {
    return std::clamp(static_cast<int>(std::floor((v - o) / d)), 0, n - 1);
  };
  for (int t = 0; t < triangle_count(); ++t) {
    const auto& tri = triangles_[t];
    double tx0 = vertices_[tri[0]].x, tx1 = tx0, ty0 = vertices_[tri[0]].y, ty1 = ty0;
    for (int k = 1; k < 3; ++k) {
      tx0 = std::min(tx0, vertices_[tri[k]].x);
      tx1 = std::max(tx1, vertices_[tri[k]].x);
      ty0 = std::min(ty0, vertices_[tri[k]].y);
      ty1 = std::max(ty1, vertices_[tri[k]].y);
    }
    for (int i = cell(tx0, bx0_, bdx_, bnx_); i <= cell(tx1, bx0_, bdx_, bnx_); ++i)
      for (int j = cell(ty0, by0_, bdy_, bny_); j <= cell(ty1, by0_, bdy_, bny_); ++j)
        buckets_[static_cast<std::size_t>(j * bnx_ + i)].push_back(t);
  }
}

double Mesh::total_area() const {
  double a = 0.0;
  for (const auto& t : triangles_) a += 0.5 * orient(vertices_[t[0]], vertices_[t[1]], vertices_[t[2]]);
  return a;
}

int Mesh::locate(const Point& p) const {
  if (buckets_.empty()) return -1;
  const double fx = (p.x - bx0_) / bdx_, fy = (p.y - by0_) / bdy_;
  const double slack = 1e-9;
  if (fx < -slack || fy < -slack || fx > bnx_ + slack || fy > bny_ + slack) return -1;
  const int i = std::clamp(static_cast<int>(std::floor(fx)), 0, bnx_ - 1);
  const int j = std::clamp(static_cast<int>(std::floor(fy)), 0, bny_ - 1);
  int best = -1;
  double best_margin = -std::numeric_limits<double>::infinity();
  for (int t : buckets_[static_cast<std::size_t>(j * bnx_ + i)]) {
    const auto& tri = triangles_[t];
    const Point& a = vertices_[tri[0]];
    const Point& b = vertices_[tri[1]];
    const Point& c = vertices_[tri[2]];
    const double area = orient(a, b, c);
    const double m = std::min({orient(a, b, p), orient(b, c, p), orient(c, a, p)}) / area;
    if (m > best_margin) {
      best_margin = m;
      best = t;
    }
  }
  return best_margin >= -1e-10 ? best : -1;
}

std::vector<bool> Mesh::boundary_vertices() const {
  std::unordered_map<std::uint64_t, int> directed;
  for (const auto& t : triangles_)
    for (int e = 0; e < 3; ++e) directed[edge_key(t[e], t[(e + 1) % 3])] = 1;
  std::vector<bool> out(static_cast<std::size_t>(vertex_count()), false);
  for (const auto& t : triangles_)
    for (int e = 0; e < 3; ++e) {
      const int u = t[e], v = t[(e + 1) % 3];
      if (!directed.count(edge_key(v, u))) out[u] = out[v] = true;
    }
  return out;
}

// ---------------------------------------------------------------------------
// Construction

Mesh build_mesh(std::span<const Point> locations, const MeshOptions& options) {
  if (locations.size() < 3)
    throw Error(ErrorCode::CollinearInput, "need at least three locations");
  if (!(options.extension > 0) || !(options.max_edge_inner > 0) || !(options.max_edge_outer > 0) ||
      options.cutoff < 0 || !(options.min_angle_deg > 0) || options.min_angle_deg >= 35.0)
    throw Error(ErrorCode::InvalidParameters,
                "extension and edge lengths must be positive; min angle in (0, 35)");
  for (const auto& p : locations)
    if (!std::isfinite(p.x) || !std::isfinite(p.y))
      throw Error(ErrorCode::InvalidParameters, "non-finite location");

  const std::vector<Point> pts(locations.begin(), locations.end());
  const auto hull = convex_hull(pts);
  double extent = 0.0;
  for (const auto& p : hull)
    for (const auto& q : hull) extent = std::max(extent, dist(p, q));
  if (hull.size() < 3 || polygon_area(hull) <= 1e-12 * extent * extent)
    throw Error(ErrorCode::CollinearInput, "locations are collinear");

  const auto boundary = extended_boundary(hull, options.extension, options.max_edge_outer);
  Triangulator tri(boundary);

  for (const auto& p : pts) {
    if (options.cutoff > 0.0) {
      bool near = false;
      for (const auto& q : tri.points())
        if (dist(p, q) < options.cutoff) {
          near = true;
          break;
        }
      if (near) continue;
    }
    tri.insert(p);
  }

  const double ratio = 1.0 / (2.0 * std::sin(options.min_angle_deg * std::numbers::pi / 180.0));
  Refiner{tri, hull, boundary, options, ratio}.run();

  Mesh mesh(tri.points(), tri.triangles());
  const double expected = polygon_area(boundary);
  if (std::abs(mesh.total_area() - expected) > 1e-9 * expected)
    throw Error(ErrorCode::InvalidInput, "triangulation does not cover the extended domain");
  for (const auto& p : pts)
    if (mesh.locate(p) < 0)
      throw Error(ErrorCode::PointOutsideMesh, "location not covered by the mesh");
  return mesh;
}

Mesh regular_mesh(double x0, double x1, double y0, double y1, int nx, int ny) {
  if (nx < 1 || ny < 1 || !(x1 > x0) || !(y1 > y0))
    throw Error(ErrorCode::InvalidParameters, "regular_mesh: empty extent");
  std::vector<Point> v;
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      v.push_back({x0 + (x1 - x0) * i / nx, y0 + (y1 - y0) * j / ny});
  auto id = [&](int i, int j) { return j * (nx + 1) + i; };
  std::vector<Triangle> t;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      t.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      t.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  return Mesh(std::move(v), std::move(t));
}

// ---------------------------------------------------------------------------
// Projector and FEM

std::vector<int> Projector::support() const {
  std::vector<bool> used(static_cast<std::size_t>(matrix.cols()), false);
  for (int k = 0; k < matrix.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(matrix, k); it; ++it)
      if (it.value() != 0.0) used[static_cast<std::size_t>(it.col())] = true;
  std::vector<int> out;
  for (std::size_t g = 0; g < used.size(); ++g)
    if (used[g]) out.push_back(static_cast<int>(g));
  return out;
}

Projector basis_projector(const Mesh& mesh, std::span<const Point> locations) {
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < locations.size(); ++i) {
    const auto& p = locations[i];
    const int id = mesh.locate(p);
    if (id < 0)
      throw Error(ErrorCode::PointOutsideMesh, "location (" + std::to_string(p.x) + ", " +
                                                    std::to_string(p.y) + ") is outside the mesh");
    const auto& tri = mesh.triangles()[id];
    const auto& v = mesh.vertices();
    const double area = orient(v[tri[0]], v[tri[1]], v[tri[2]]);
    std::array<double, 3> w{orient(v[tri[1]], v[tri[2]], p) / area,
                            orient(v[tri[2]], v[tri[0]], p) / area,
                            orient(v[tri[0]], v[tri[1]], p) / area};
    double sum = 0.0;
    for (auto& x : w) {
      if (x < 1e-13) x = 0.0;
      sum += x;
    }
    for (int k = 0; k < 3; ++k)
      if (w[k] > 0.0) t.emplace_back(static_cast<int>(i), tri[k], w[k] / sum);
  }
  Projector out;
  out.matrix = SparseMatrix(static_cast<int>(locations.size()), mesh.vertex_count());
  out.matrix.setFromTriplets(t.begin(), t.end());
  out.matrix.makeCompressed();
  return out;
}

FemMatrices fem_matrices(const Mesh& mesh) {
  const int n = mesh.vertex_count();
  Eigen::VectorXd mass = Eigen::VectorXd::Zero(n);
  std::vector<Triplet> stiff;
  stiff.reserve(static_cast<std::size_t>(mesh.triangle_count()) * 9);
  const auto& v = mesh.vertices();
  for (const auto& t : mesh.triangles()) {
    const double area = 0.5 * orient(v[t[0]], v[t[1]], v[t[2]]);
    if (!(area > 0.0)) throw Error(ErrorCode::DegenerateTriangle, "zero-area triangle in mesh");
    // Edge vector opposite each vertex.
    std::array<Point, 3> e;
    for (int k = 0; k < 3; ++k) {
      const auto& p = v[t[(k + 1) % 3]];
      const auto& q = v[t[(k + 2) % 3]];
      e[k] = {q.x - p.x, q.y - p.y};
    }
    for (int i = 0; i < 3; ++i) {
      mass[t[i]] += area / 3.0;
      for (int j = 0; j < 3; ++j)
        stiff.emplace_back(t[i], t[j], (e[i].x * e[j].x + e[i].y * e[j].y) / (4.0 * area));
    }
  }
  // from_triplets folds upper entries onto the lower triangle, which would
  // double off-diagonal contributions; keep only i >= j.
  std::vector<Triplet> lower;
  for (const auto& s : stiff)
    if (s.row() >= s.col()) lower.push_back(s);
  for (int i = 0; i < n; ++i) lower.emplace_back(i, i, 0.0);
  return {SparseSymmetric::diagonal(mass), SparseSymmetric::from_triplets(n, lower)};
}

// ---------------------------------------------------------------------------
// I/O

void write_mesh(std::ostream& out, const Mesh& mesh) {
  out << mesh.vertex_count() << ' ' << mesh.triangle_count() << '\n';
  out << std::setprecision(17);
  for (const auto& p : mesh.vertices()) out << p.x << ' ' << p.y << '\n';
  for (const auto& t : mesh.triangles()) out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

Mesh read_mesh(std::istream& in) {
  long long g = 0, nt = 0;
  if (!(in >> g >> nt) || g < 1 || nt < 0)
    throw Error(ErrorCode::InvalidInput, "mesh header must be 'G T' with G >= 1");
  std::vector<Point> v(static_cast<std::size_t>(g));
  for (auto& p : v)
    if (!(in >> p.x >> p.y)) throw Error(ErrorCode::InvalidInput, "truncated mesh vertex list");
  std::vector<Triangle> t(static_cast<std::size_t>(nt));
  for (auto& tri : t)
    if (!(in >> tri[0] >> tri[1] >> tri[2]))
      throw Error(ErrorCode::InvalidInput, "truncated mesh triangle list");
  return Mesh(std::move(v), std::move(t));
}

void save_mesh(const std::string& path, const Mesh& mesh) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InputMissing, "cannot write mesh file " + path);
  write_mesh(out, mesh);
}

Mesh load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InputMissing, "cannot open mesh file " + path);
  return read_mesh(in);
}

}  // namespace sttrend
