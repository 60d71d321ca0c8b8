#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

#include "eigstab/geometry.hpp"

namespace eigstab {

enum class MeshPattern { Left, Right, Crossed };

using Element = std::array<std::size_t, 3>;

/// Conforming triangulation with counter-clockwise elements.
///
/// `macro_id[j]` names the macro triangle (in `macro_triangles`) that contains
/// element j; transport uses it to pick the element's affine map.
struct TriMesh {
  std::vector<Point2> nodes;
  std::vector<Element> elements;
  std::vector<std::size_t> boundary_nodes;  // sorted, unique
  std::vector<std::size_t> macro_id;
  std::vector<Triangle2> macro_triangles;

  std::size_t node_count() const { return nodes.size(); }
  std::size_t element_count() const { return elements.size(); }
  std::size_t interior_count() const { return nodes.size() - boundary_nodes.size(); }

  Triangle2 element(std::size_t j) const {
    const auto& e = elements[j];
    return {nodes[e[0]], nodes[e[1]], nodes[e[2]]};
  }
  double element_area(std::size_t j) const { return 0.5 * signed_area2(element(j)); }
  double total_area() const;

  /// Bounding-box diagonal.
  double diameter() const;

  bool is_boundary(std::size_t node) const;
};

using MeshPtr = std::shared_ptr<const TriMesh>;

/// Throws InvertedElement / InvalidArgument when the structural invariants fail.
void validate(const TriMesh& mesh);

/// Two meshes with identical connectivity related elementwise by affine maps.
struct MatchedMeshPair {
  MeshPtr mesh0;
  MeshPtr mesh_t;
  std::vector<AffineMap2> element_maps;
  double t = 0.0;
};

/// Structured mesh of (0,width)x(0,height) with n cells per unit length.
/// Macro ids follow the fan from the corner (0,0).
TriMesh rect_mesh(std::size_t n, double width, double height, MeshPattern pattern);

/// Uniform 4-way refinement (`levels` times) of the triangle (0,0),(1,0),apex.
TriMesh triangle_mesh(Point2 apex, std::size_t levels);

/// Uniform refinement of every macro triangle; nodes on shared macro edges
/// are created once, so the result conforms to the macro triangulation.
TriMesh refined_polygon_mesh(const PolygonSpec& polygon, const MacroTriangulation& macro,
                             std::size_t levels);

MatchedMeshPair transport(MeshPtr mesh0, const std::vector<AffineMap2>& macro_maps, double t);

struct PointLocation {
  std::size_t element = 0;
  std::array<double, 3> bary{};
};

/// Bucket grid over element bounding boxes for repeated point queries.
class PointLocator {
 public:
  explicit PointLocator(MeshPtr mesh);

  /// Element within distance `tol` of `pt`, with barycentrics of the closest
  /// point (clamped to the element). Throws OutsideDomain otherwise.
  PointLocation locate(Point2 pt, double tol) const;

  const TriMesh& mesh() const { return *mesh_; }

 private:
  std::optional<PointLocation> search(Point2 pt, double tol) const;

  MeshPtr mesh_;
  double x0_ = 0, y0_ = 0, cell_ = 1;
  std::size_t nx_ = 1, ny_ = 1;
  std::vector<std::vector<std::size_t>> buckets_;
};

PointLocation locate_point(const MeshPtr& mesh, Point2 pt, double tol);

/// Barycentric coordinates of `p` in `tri` (not clamped).
std::array<double, 3> barycentric(const Triangle2& tri, Point2 p);

}  // namespace eigstab
