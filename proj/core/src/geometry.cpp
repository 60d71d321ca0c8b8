#include "eigstab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/LU>

#include "eigstab/error.hpp"

namespace eigstab {

double norm(Point2 a) { return std::hypot(a.x, a.y); }
double distance(Point2 a, Point2 b) { return norm(a - b); }

double diameter(const Triangle2& tri) {
  return std::max({distance(tri[0], tri[1]), distance(tri[1], tri[2]), distance(tri[2], tri[0])});
}

namespace {

double vertex_diameter(std::span<const Point2> v) {
  double d = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = i + 1; j < v.size(); ++j) d = std::max(d, distance(v[i], v[j]));
  return d;
}

int orientation(Point2 a, Point2 b, Point2 c, double tol) {
  double o = cross(b - a, c - a);
  if (o > tol) return 1;
  if (o < -tol) return -1;
  return 0;
}

bool on_segment(Point2 a, Point2 b, Point2 c, double tol) {
  // c collinear with ab; check it lies within the bounding box.
  return std::min(a.x, b.x) - tol <= c.x && c.x <= std::max(a.x, b.x) + tol &&
         std::min(a.y, b.y) - tol <= c.y && c.y <= std::max(a.y, b.y) + tol;
}

bool segments_intersect(Point2 a, Point2 b, Point2 c, Point2 d, double tol, double len_scale) {
  double area_tol = tol * len_scale;
  int o1 = orientation(a, b, c, area_tol);
  int o2 = orientation(a, b, d, area_tol);
  int o3 = orientation(c, d, a, area_tol);
  int o4 = orientation(c, d, b, area_tol);
  if (o1 != o2 && o3 != o4 && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0) return true;
  if (o1 == 0 && on_segment(a, b, c, tol)) return true;
  if (o2 == 0 && on_segment(a, b, d, tol)) return true;
  if (o3 == 0 && on_segment(c, d, a, tol)) return true;
  if (o4 == 0 && on_segment(c, d, b, tol)) return true;
  return false;
}

}  // namespace

bool is_simple(std::span<const Point2> v, double tol) {
  const std::size_t k = v.size();
  if (k < 3) return false;
  const double scale = std::max(vertex_diameter(v), 1e-300);
  for (std::size_t i = 0; i < k; ++i) {
    Point2 a = v[i], b = v[(i + 1) % k];
    if (distance(a, b) <= tol) return false;
    // Adjacent edge folding back onto this one.
    Point2 c = v[(i + 2) % k];
    if (std::abs(cross(b - a, c - b)) <= tol * scale && dot(b - a, c - b) < 0) return false;
    for (std::size_t j = i + 1; j < k; ++j) {
      if (j == i || (j + 1) % k == i || (i + 1) % k == j) continue;
      if (segments_intersect(a, b, v[j], v[(j + 1) % k], tol, scale)) return false;
    }
  }
  return true;
}

PolygonSpec::PolygonSpec(std::vector<Point2> vertices) : vertices_(std::move(vertices)) {
  if (vertices_.size() < 3)
    throw Error(ErrorKind::InvalidArgument, "polygon needs at least 3 vertices");
  for (const auto& p : vertices_)
    if (!std::isfinite(p.x) || !std::isfinite(p.y))
      throw Error(ErrorKind::InvalidArgument, "polygon vertex is not finite");
  const double diam = vertex_diameter(vertices_);
  if (!is_simple(vertices_, 1e-12 * diam))
    throw Error(ErrorKind::SelfIntersecting, "polygon edges cross");
  if (signed_area() <= 0.0)
    throw Error(ErrorKind::InvalidArgument, "polygon must be counter-clockwise with positive area");
}

PolygonSpec PolygonSpec::from_parameters(std::span<const double> p) {
  if (p.size() % 2 != 0 || p.size() < 6)
    throw Error(ErrorKind::InvalidArgument, "parameter vector must have even length >= 6");
  const std::size_t k = p.size() / 2;
  std::vector<Point2> v(k);
  for (std::size_t i = 0; i < k; ++i) v[i] = {p[i], p[k + i]};
  return PolygonSpec(std::move(v));
}

double PolygonSpec::signed_area() const {
  double a = 0.0;
  for (std::size_t i = 0; i < vertices_.size(); ++i)
    a += cross(vertices_[i], vertices_[(i + 1) % vertices_.size()]);
  return 0.5 * a;
}

double PolygonSpec::diameter() const { return vertex_diameter(vertices_); }

std::vector<double> PolygonSpec::parameters() const {
  const std::size_t k = vertices_.size();
  std::vector<double> p(2 * k);
  for (std::size_t i = 0; i < k; ++i) {
    p[i] = vertices_[i].x;
    p[k + i] = vertices_[i].y;
  }
  return p;
}

void PerturbationSpec::validate(std::size_t k) const {
  if (direction.size() != 2 * k)
    throw Error(ErrorKind::InvalidArgument, "direction must have 2k = " + std::to_string(2 * k) +
                                                " entries, got " + std::to_string(direction.size()));
  if (!(magnitude >= 0.0) || !std::isfinite(magnitude))
    throw Error(ErrorKind::InvalidArgument, "magnitude must be finite and >= 0");
  for (double e : direction)
    if (!std::isfinite(e)) throw Error(ErrorKind::InvalidArgument, "direction entry is not finite");
  if (magnitude > 0.0 && std::all_of(direction.begin(), direction.end(), [](double e) { return e == 0.0; }))
    throw Error(ErrorKind::InvalidArgument, "direction is zero while magnitude > 0");
}

AffineMap2::AffineMap2(const Eigen::Matrix2d& linear, const Eigen::Vector2d& offset)
    : linear_(linear), offset_(offset), det_(linear.determinant()) {
  if (!(det_ != 0.0) || !std::isfinite(det_))
    throw Error(ErrorKind::DegenerateTriangle, "affine map has singular linear part");
  inverse_ << linear_(1, 1), -linear_(0, 1), -linear_(1, 0), linear_(0, 0);
  inverse_ /= det_;
}

AffineMap2 AffineMap2::identity() {
  return AffineMap2(Eigen::Matrix2d::Identity(), Eigen::Vector2d::Zero());
}

Point2 AffineMap2::apply(Point2 p) const {
  Eigen::Vector2d r = linear_ * Eigen::Vector2d(p.x, p.y) + offset_;
  return {r.x(), r.y()};
}

Point2 AffineMap2::apply_inverse(Point2 p) const {
  Eigen::Vector2d r = inverse_ * (Eigen::Vector2d(p.x, p.y) - offset_);
  return {r.x(), r.y()};
}

PolygonSpec perturb_polygon(const PolygonSpec& p, const PerturbationSpec& spec) {
  const std::size_t k = p.size();
  spec.validate(k);
  if (spec.magnitude == 0.0) return p;
  std::vector<Point2> v = p.vertices();
  for (std::size_t i = 0; i < k; ++i) {
    v[i].x += spec.magnitude * spec.direction[i];
    v[i].y += spec.magnitude * spec.direction[k + i];
  }
  if (!is_simple(v, 1e-12 * vertex_diameter(v)))
    throw Error(ErrorKind::SelfIntersecting, "perturbed polygon is not simple");
  return PolygonSpec(std::move(v));
}

MacroTriangulation fan_macro_triangulation(const PolygonSpec& p) {
  const auto& v = p.vertices();
  const std::size_t k = v.size();
  const double diam = p.diameter();
  for (std::size_t i = 0; i < k; ++i) {
    Point2 a = v[i], b = v[(i + 1) % k], c = v[(i + 2) % k];
    if (cross(b - a, c - b) <= 1e-12 * diam * diam)
      throw Error(ErrorKind::NonConvex,
                  "fan triangulation needs a strictly convex polygon (vertex " +
                      std::to_string((i + 1) % k) + ")");
  }
  MacroTriangulation m;
  for (std::size_t i = 1; i + 1 < k; ++i) m.triangles.push_back({0, i, i + 1});
  return m;
}

AffineMap2 affine_from_triangles(const Triangle2& src, const Triangle2& dst) {
  const double diam = diameter(src);
  if (!(0.5 * std::abs(signed_area2(src)) > 1e-14 * diam * diam))
    throw Error(ErrorKind::DegenerateTriangle, "source triangle is degenerate");
  Eigen::Matrix2d e, d;
  e << src[1].x - src[0].x, src[2].x - src[0].x, src[1].y - src[0].y, src[2].y - src[0].y;
  d << dst[1].x - dst[0].x, dst[2].x - dst[0].x, dst[1].y - dst[0].y, dst[2].y - dst[0].y;
  Eigen::Matrix2d linear = d * e.inverse();
  Eigen::Vector2d offset = Eigen::Vector2d(dst[0].x, dst[0].y) - linear * Eigen::Vector2d(src[0].x, src[0].y);
  return AffineMap2(linear, offset);
}

Triangle2 macro_triangle(const MacroTriangulation& macro, const PolygonSpec& p, std::size_t i) {
  const auto& t = macro.triangles.at(i);
  return {p[t[0]], p[t[1]], p[t[2]]};
}

std::vector<AffineMap2> macro_maps(const MacroTriangulation& macro, const PolygonSpec& p0,
                                   const PolygonSpec& pt) {
  if (p0.size() != pt.size())
    throw Error(ErrorKind::InvalidArgument, "polygons have different vertex counts");
  std::vector<AffineMap2> maps;
  maps.reserve(macro.triangles.size());
  for (std::size_t i = 0; i < macro.triangles.size(); ++i) {
    Triangle2 dst = macro_triangle(macro, pt, i);
    const double diam = diameter(dst);
    if (!(0.5 * signed_area2(dst) > 1e-14 * diam * diam))
      throw Error(ErrorKind::DegenerateTriangle,
                  "perturbed macro triangle " + std::to_string(i) + " collapsed or inverted");
    maps.push_back(affine_from_triangles(macro_triangle(macro, p0, i), dst));
  }
  return maps;
}

}  // namespace eigstab
