#include "eigstab/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <utility>

#include "eigstab/error.hpp"

namespace eigstab {

double TriMesh::total_area() const {
  double a = 0.0;
  for (std::size_t j = 0; j < elements.size(); ++j) a += element_area(j);
  return a;
}

double TriMesh::diameter() const {
  if (nodes.empty()) return 0.0;
  double xmin = nodes[0].x, xmax = xmin, ymin = nodes[0].y, ymax = ymin;
  for (const auto& p : nodes) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  return std::hypot(xmax - xmin, ymax - ymin);
}

bool TriMesh::is_boundary(std::size_t node) const {
  return std::binary_search(boundary_nodes.begin(), boundary_nodes.end(), node);
}

void validate(const TriMesh& mesh) {
  if (mesh.macro_id.size() != mesh.elements.size())
    throw Error(ErrorKind::InvalidArgument, "macro_id length differs from element count");
  for (std::size_t j = 0; j < mesh.elements.size(); ++j) {
    for (auto n : mesh.elements[j])
      if (n >= mesh.nodes.size()) throw Error(ErrorKind::InvalidArgument, "element references missing node");
    if (mesh.macro_id[j] >= mesh.macro_triangles.size())
      throw Error(ErrorKind::InvalidArgument, "macro_id out of range");
    if (!(mesh.element_area(j) > 0.0))
      throw Error(ErrorKind::InvertedElement, "element " + std::to_string(j) + " has non-positive area");
  }
  if (!std::is_sorted(mesh.boundary_nodes.begin(), mesh.boundary_nodes.end()))
    throw Error(ErrorKind::InvalidArgument, "boundary node list must be sorted");
}

namespace {

std::array<double, 3> raw_barycentric(const Triangle2& tri, Point2 p) {
  const double a2 = signed_area2(tri);
  return {cross(tri[1] - p, tri[2] - p) / a2, cross(tri[2] - p, tri[0] - p) / a2,
          cross(tri[0] - p, tri[1] - p) / a2};
}

std::size_t macro_of_point(const std::vector<Triangle2>& macros, Point2 p, double tol) {
  for (std::size_t m = 0; m < macros.size(); ++m) {
    auto b = raw_barycentric(macros[m], p);
    if (b[0] >= -tol && b[1] >= -tol && b[2] >= -tol) return m;
  }
  return macros.size();
}

Point2 centroid(const Triangle2& t) {
  return {(t[0].x + t[1].x + t[2].x) / 3.0, (t[0].y + t[1].y + t[2].y) / 3.0};
}

}  // namespace

std::array<double, 3> barycentric(const Triangle2& tri, Point2 p) { return raw_barycentric(tri, p); }

TriMesh rect_mesh(std::size_t n, double width, double height, MeshPattern pattern) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "rect_mesh needs n >= 1");
  if (!(width > 0.0) || !(height > 0.0))
    throw Error(ErrorKind::InvalidArgument, "rect_mesh needs positive width and height");
  const auto nx = static_cast<std::size_t>(std::max<long>(1, std::lround(static_cast<double>(n) * width)));
  const auto ny = static_cast<std::size_t>(std::max<long>(1, std::lround(static_cast<double>(n) * height)));
  const double hx = width / static_cast<double>(nx);
  const double hy = height / static_cast<double>(ny);

  TriMesh mesh;
  mesh.nodes.reserve((nx + 1) * (ny + 1) + (pattern == MeshPattern::Crossed ? nx * ny : 0));
  for (std::size_t j = 0; j <= ny; ++j)
    for (std::size_t i = 0; i <= nx; ++i) {
      double x = i == nx ? width : hx * static_cast<double>(i);
      double y = j == ny ? height : hy * static_cast<double>(j);
      mesh.nodes.push_back({x, y});
    }
  auto lattice = [nx](std::size_t i, std::size_t j) { return j * (nx + 1) + i; };
  const std::size_t centers = mesh.nodes.size();
  if (pattern == MeshPattern::Crossed)
    for (std::size_t j = 0; j < ny; ++j)
      for (std::size_t i = 0; i < nx; ++i)
        mesh.nodes.push_back({0.5 * (mesh.nodes[lattice(i, j)].x + mesh.nodes[lattice(i + 1, j)].x),
                              0.5 * (mesh.nodes[lattice(i, j)].y + mesh.nodes[lattice(i, j + 1)].y)});

  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) {
      const std::size_t a = lattice(i, j), b = lattice(i + 1, j), c = lattice(i + 1, j + 1),
                        d = lattice(i, j + 1);
      switch (pattern) {
        case MeshPattern::Left:
          mesh.elements.push_back({a, b, d});
          mesh.elements.push_back({b, c, d});
          break;
        case MeshPattern::Right:
          mesh.elements.push_back({a, b, c});
          mesh.elements.push_back({a, c, d});
          break;
        case MeshPattern::Crossed: {
          const std::size_t m = centers + j * nx + i;
          mesh.elements.push_back({a, b, m});
          mesh.elements.push_back({b, c, m});
          mesh.elements.push_back({c, d, m});
          mesh.elements.push_back({d, a, m});
          break;
        }
      }
    }

  for (std::size_t j = 0; j <= ny; ++j)
    for (std::size_t i = 0; i <= nx; ++i)
      if (i == 0 || j == 0 || i == nx || j == ny) mesh.boundary_nodes.push_back(lattice(i, j));

  const Point2 p0{0, 0}, p1{width, 0}, p2{width, height}, p3{0, height};
  mesh.macro_triangles = {{p0, p1, p2}, {p0, p2, p3}};
  mesh.macro_id.reserve(mesh.elements.size());
  for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
    Point2 c = centroid(mesh.element(e));
    mesh.macro_id.push_back(c.y * width < c.x * height ? 0 : 1);
  }
  validate(mesh);
  return mesh;
}

TriMesh refined_polygon_mesh(const PolygonSpec& polygon, const MacroTriangulation& macro,
                             std::size_t levels) {
  if (levels < 1) throw Error(ErrorKind::InvalidArgument, "refinement needs levels >= 1");
  if (levels > 12) throw Error(ErrorKind::InvalidArgument, "refinement levels above 12 are not supported");
  const std::size_t N = std::size_t{1} << levels;
  const std::size_t k = polygon.size();

  // Node key: (vertex, weight) pairs with nonzero weight, sorted by vertex.
  // Interior nodes of a macro triangle additionally carry the macro index so
  // that equal weights in different macros stay distinct.
  using Key = std::pair<std::size_t, std::vector<std::pair<std::size_t, std::size_t>>>;
  std::map<Key, std::size_t> index_of;

  TriMesh mesh;
  std::vector<char> on_boundary;
  auto boundary_edge = [k](std::size_t a, std::size_t b) {
    return (a + 1) % k == b || (b + 1) % k == a;
  };

  for (std::size_t m = 0; m < macro.triangles.size(); ++m) {
    const auto& tri = macro.triangles[m];
    const Triangle2 geo = macro_triangle(macro, polygon, m);
    if (!(signed_area2(geo) > 0.0))
      throw Error(ErrorKind::DegenerateTriangle, "macro triangle " + std::to_string(m) + " is degenerate");
    mesh.macro_triangles.push_back(geo);

    std::vector<std::size_t> local((N + 1) * (N + 2) / 2);
    auto lid = [N](std::size_t i, std::size_t j) { return j * (N + 1) - j * (j - 1) / 2 + i; };
    for (std::size_t j = 0; j <= N; ++j)
      for (std::size_t i = 0; i + j <= N; ++i) {
        std::vector<std::pair<std::size_t, std::size_t>> w;
        const std::size_t weights[3] = {N - i - j, i, j};
        for (int v = 0; v < 3; ++v)
          if (weights[v] != 0) w.emplace_back(tri[v], weights[v]);
        std::sort(w.begin(), w.end());
        Key key{w.size() == 3 ? m + 1 : 0, w};
        auto [it, inserted] = index_of.try_emplace(key, mesh.nodes.size());
        if (inserted) {
          Point2 p{0, 0};
          for (auto [v, wt] : w) p = p + (static_cast<double>(wt) / static_cast<double>(N)) * polygon[v];
          mesh.nodes.push_back(p);
          bool bnd = w.size() == 1 || (w.size() == 2 && boundary_edge(w[0].first, w[1].first));
          on_boundary.push_back(bnd ? 1 : 0);
        }
        local[lid(i, j)] = it->second;
      }
    for (std::size_t j = 0; j < N; ++j)
      for (std::size_t i = 0; i + j < N; ++i) {
        mesh.elements.push_back({local[lid(i, j)], local[lid(i + 1, j)], local[lid(i, j + 1)]});
        mesh.macro_id.push_back(m);
        if (i + j + 1 < N) {
          mesh.elements.push_back({local[lid(i + 1, j)], local[lid(i + 1, j + 1)], local[lid(i, j + 1)]});
          mesh.macro_id.push_back(m);
        }
      }
  }
  for (std::size_t v = 0; v < on_boundary.size(); ++v)
    if (on_boundary[v]) mesh.boundary_nodes.push_back(v);
  validate(mesh);
  return mesh;
}

TriMesh triangle_mesh(Point2 apex, std::size_t levels) {
  const Triangle2 tri{Point2{0, 0}, Point2{1, 0}, apex};
  if (!(0.5 * signed_area2(tri) > 1e-14 * diameter(tri) * diameter(tri)))
    throw Error(ErrorKind::DegenerateTriangle, "apex is collinear with (0,0),(1,0) or below the base");
  PolygonSpec poly({tri[0], tri[1], tri[2]});
  MacroTriangulation macro{{{0, 1, 2}}};
  return refined_polygon_mesh(poly, macro, levels);
}

MatchedMeshPair transport(MeshPtr mesh0, const std::vector<AffineMap2>& maps, double t) {
  if (!mesh0) throw Error(ErrorKind::InvalidArgument, "transport: null mesh");
  const TriMesh& m0 = *mesh0;
  if (maps.size() != m0.macro_triangles.size())
    throw Error(ErrorKind::InvalidArgument, "transport: one map per macro triangle required");

  // A node's macro triangle is that of its first incident element, unless the
  // node lies outside it (then any containing macro triangle is used).
  std::vector<std::size_t> node_macro(m0.node_count(), maps.size());
  for (std::size_t j = 0; j < m0.element_count(); ++j)
    for (auto n : m0.elements[j])
      if (node_macro[n] == maps.size()) node_macro[n] = m0.macro_id[j];

  auto out = std::make_shared<TriMesh>(m0);
  const double diam = m0.diameter();
  for (std::size_t n = 0; n < m0.node_count(); ++n) {
    std::size_t m = node_macro[n];
    const double btol = 1e-12;
    bool inside = false;
    if (m < maps.size()) {
      auto b = raw_barycentric(m0.macro_triangles[m], m0.nodes[n]);
      inside = b[0] >= -btol && b[1] >= -btol && b[2] >= -btol;
    }
    if (!inside) m = macro_of_point(m0.macro_triangles, m0.nodes[n], btol);
    if (m >= maps.size())
      throw Error(ErrorKind::NodeOutsideMacro, "node " + std::to_string(n) + " lies in no macro triangle");
    out->nodes[n] = maps[m].apply(m0.nodes[n]);
  }
  for (std::size_t m = 0; m < maps.size(); ++m) {
    auto& tri = out->macro_triangles[m];
    for (auto& p : tri) p = maps[m].apply(p);
  }

  MatchedMeshPair pair;
  pair.t = t;
  pair.element_maps.reserve(m0.element_count());
  for (std::size_t j = 0; j < m0.element_count(); ++j) {
    if (!(out->element_area(j) > 0.0))
      throw Error(ErrorKind::InvertedElement, "transported element " + std::to_string(j) + " is inverted");
    const AffineMap2& map = maps[m0.macro_id[j]];
    for (auto n : m0.elements[j])
      if (distance(map.apply(m0.nodes[n]), out->nodes[n]) > 1e-12 * diam)
        throw Error(ErrorKind::NonConformingMesh,
                    "element " + std::to_string(j) + " straddles macro triangles with different maps");
    pair.element_maps.push_back(map);
  }
  pair.mesh0 = std::move(mesh0);
  pair.mesh_t = std::move(out);
  return pair;
}

PointLocator::PointLocator(MeshPtr mesh) : mesh_(std::move(mesh)) {
  if (!mesh_ || mesh_->elements.empty()) throw Error(ErrorKind::InvalidArgument, "locator: empty mesh");
  const auto& m = *mesh_;
  double xmin = m.nodes[0].x, xmax = xmin, ymin = m.nodes[0].y, ymax = ymin;
  for (const auto& p : m.nodes) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  const double w = std::max(xmax - xmin, 1e-300), h = std::max(ymax - ymin, 1e-300);
  const double per_axis = std::max(1.0, std::sqrt(static_cast<double>(m.element_count()) / 2.0));
  cell_ = std::max(w, h) / per_axis;
  x0_ = xmin;
  y0_ = ymin;
  nx_ = static_cast<std::size_t>(std::ceil(w / cell_)) + 1;
  ny_ = static_cast<std::size_t>(std::ceil(h / cell_)) + 1;
  buckets_.assign(nx_ * ny_, {});
  for (std::size_t j = 0; j < m.element_count(); ++j) {
    Triangle2 t = m.element(j);
    double ex0 = std::min({t[0].x, t[1].x, t[2].x}), ex1 = std::max({t[0].x, t[1].x, t[2].x});
    double ey0 = std::min({t[0].y, t[1].y, t[2].y}), ey1 = std::max({t[0].y, t[1].y, t[2].y});
    auto i0 = static_cast<std::size_t>(std::floor((ex0 - x0_) / cell_));
    auto i1 = std::min(nx_ - 1, static_cast<std::size_t>(std::floor((ex1 - x0_) / cell_)));
    auto j0 = static_cast<std::size_t>(std::floor((ey0 - y0_) / cell_));
    auto j1 = std::min(ny_ - 1, static_cast<std::size_t>(std::floor((ey1 - y0_) / cell_)));
    for (std::size_t bj = j0; bj <= j1; ++bj)
      for (std::size_t bi = i0; bi <= i1; ++bi) buckets_[bj * nx_ + bi].push_back(j);
  }
}

namespace {

// Closest point of segment ab to p, as parameter s in [0,1].
double segment_param(Point2 a, Point2 b, Point2 p) {
  Point2 d = b - a;
  double len2 = dot(d, d);
  if (len2 == 0.0) return 0.0;
  return std::clamp(dot(p - a, d) / len2, 0.0, 1.0);
}

}  // namespace

std::optional<PointLocation> PointLocator::search(Point2 pt, double tol) const {
  const auto& m = *mesh_;
  auto bucket_index = [this](double v, double origin, std::size_t count) -> long {
    long i = static_cast<long>(std::floor((v - origin) / cell_));
    return std::clamp<long>(i, 0, static_cast<long>(count) - 1);
  };
  const long i0 = bucket_index(pt.x - tol, x0_, nx_), i1 = bucket_index(pt.x + tol, x0_, nx_);
  const long j0 = bucket_index(pt.y - tol, y0_, ny_), j1 = bucket_index(pt.y + tol, y0_, ny_);

  std::optional<PointLocation> best;
  double best_dist = std::numeric_limits<double>::infinity();
  double best_minb = -std::numeric_limits<double>::infinity();
  for (long bj = j0; bj <= j1; ++bj)
    for (long bi = i0; bi <= i1; ++bi)
      for (std::size_t e : buckets_[static_cast<std::size_t>(bj) * nx_ + static_cast<std::size_t>(bi)]) {
        const Triangle2 tri = m.element(e);
        auto b = raw_barycentric(tri, pt);
        const double minb = std::min({b[0], b[1], b[2]});
        double dist = 0.0;
        std::array<double, 3> cb = b;
        if (minb < 0.0) {
          // Closest point on the boundary of the element.
          dist = std::numeric_limits<double>::infinity();
          for (int k = 0; k < 3; ++k) {
            Point2 a = tri[k], c = tri[(k + 1) % 3];
            double s = segment_param(a, c, pt);
            double dk = distance(a + s * (c - a), pt);
            if (dk < dist) {
              dist = dk;
              cb = {0, 0, 0};
              cb[k] = 1.0 - s;
              cb[(k + 1) % 3] = s;
            }
          }
          // Points that are inside up to rounding keep their barycentrics.
          if (minb > -1e-14) {
            dist = 0.0;
            for (auto& v : b) v = std::max(v, 0.0);
            double s = b[0] + b[1] + b[2];
            cb = {b[0] / s, b[1] / s, b[2] / s};
          }
        }
        if (dist < best_dist || (dist == best_dist && minb > best_minb)) {
          best_dist = dist;
          best_minb = minb;
          best = PointLocation{e, cb};
        }
      }
  if (best && best_dist <= tol) return best;
  return std::nullopt;
}

PointLocation PointLocator::locate(Point2 pt, double tol) const {
  // Most queries land inside an element of their own bucket.
  if (auto r = search(pt, 0.0)) return *r;
  if (tol > 0.0)
    if (auto r = search(pt, tol)) return *r;
  throw Error(ErrorKind::OutsideDomain,
              "point (" + std::to_string(pt.x) + ", " + std::to_string(pt.y) + ") is outside the mesh");
}

PointLocation locate_point(const MeshPtr& mesh, Point2 pt, double tol) {
  return PointLocator(mesh).locate(pt, tol);
}

}  // namespace eigstab
