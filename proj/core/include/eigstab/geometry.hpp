#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace eigstab {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Point2 a, Point2 b) = default;
};

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
double norm(Point2 a);
double distance(Point2 a, Point2 b);

using Triangle2 = std::array<Point2, 3>;

/// Twice the signed area; positive for counter-clockwise vertex order.
inline double signed_area2(const Triangle2& tri) {
  return cross(tri[1] - tri[0], tri[2] - tri[0]);
}
double diameter(const Triangle2& tri);

/// Simple, counter-clockwise polygon with k >= 3 vertices.
///
/// The parameter vector ordering is (x_1..x_k, y_1..y_k), which is also the
/// ordering of PerturbationSpec::direction.
class PolygonSpec {
 public:
  explicit PolygonSpec(std::vector<Point2> vertices);

  static PolygonSpec from_parameters(std::span<const double> p);

  const std::vector<Point2>& vertices() const { return vertices_; }
  std::size_t size() const { return vertices_.size(); }
  const Point2& operator[](std::size_t i) const { return vertices_[i]; }

  double signed_area() const;
  double diameter() const;
  std::vector<double> parameters() const;

 private:
  std::vector<Point2> vertices_;
};

/// True when no two edges intersect except adjacent edges at their shared vertex.
bool is_simple(std::span<const Point2> vertices, double tol);

struct PerturbationSpec {
  std::vector<double> direction;  // e, length 2k
  double magnitude = 0.0;         // t

  void validate(std::size_t k) const;
};

/// x -> linear * x + offset with a cached inverse.
class AffineMap2 {
 public:
  AffineMap2(const Eigen::Matrix2d& linear, const Eigen::Vector2d& offset);

  static AffineMap2 identity();

  Point2 apply(Point2 p) const;
  Point2 apply_inverse(Point2 p) const;

  const Eigen::Matrix2d& linear() const { return linear_; }
  const Eigen::Matrix2d& inverse() const { return inverse_; }
  const Eigen::Vector2d& offset() const { return offset_; }
  double det() const { return det_; }
  double abs_det() const { return det_ < 0 ? -det_ : det_; }

 private:
  Eigen::Matrix2d linear_;
  Eigen::Matrix2d inverse_;
  Eigen::Vector2d offset_;
  double det_;
};

/// Triangles over polygon vertex indices realizing a piecewise-affine Phi_t.
struct MacroTriangulation {
  std::vector<std::array<std::size_t, 3>> triangles;
};

PolygonSpec perturb_polygon(const PolygonSpec& p, const PerturbationSpec& spec);

/// Fan from vertex 0: (v0, vi, vi+1). Requires a strictly convex polygon.
MacroTriangulation fan_macro_triangulation(const PolygonSpec& p);

AffineMap2 affine_from_triangles(const Triangle2& src, const Triangle2& dst);

/// One map per macro triangle, carrying the triangle over `p0` onto the same
/// index triplet over `pt`.
std::vector<AffineMap2> macro_maps(const MacroTriangulation& macro, const PolygonSpec& p0,
                                   const PolygonSpec& pt);

Triangle2 macro_triangle(const MacroTriangulation& macro, const PolygonSpec& p, std::size_t i);

}  // namespace eigstab
