#pragma once

// Shared by the unit, property and acceptance tests: problem builders,
// independent oracles, and the randomized property suites.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "eigstab/experiments.hpp"
#include "eigstab/fem.hpp"
#include "eigstab/geometry.hpp"
#include "eigstab/mesh.hpp"
#include "eigstab/stabilize.hpp"

namespace eigstab::testing {

inline constexpr double kPi2 = std::numbers::pi * std::numbers::pi;

using Rng = std::mt19937_64;

/// Unit square meshed with `pattern`, stretched in x by (1 + eps).
MatchedMeshPair rect_stretch(std::size_t n, MeshPattern pattern, double eps);

/// Unit square meshed with `pattern`, scaled by (1 + t) about the origin.
MatchedMeshPair rect_dilation(std::size_t n, MeshPattern pattern, double t);

/// Equilateral triangle refined `levels` times, apex moved per `c` by eps.
MatchedMeshPair triangle_case(TriangleCase c, double eps, std::size_t levels);

/// Random strictly convex polygon with k vertices (points on a jittered ellipse).
PolygonSpec random_convex_polygon(Rng& rng, std::size_t k);

/// Non-degenerate random triangle, counter-clockwise, min angle >= ~10 degrees.
Triangle2 random_triangle(Rng& rng);

/// Random direction for a polygon with k vertices, unit max-norm.
std::vector<double> random_direction(Rng& rng, std::size_t k);

/// Random convex polygon, its refinement and a small random perturbation.
MatchedMeshPair random_pair(Rng& rng, std::size_t levels, double t);

FEFunction random_function(Rng& rng, const MeshPtr& mesh);

/// Dense generalized symmetric eigenvalues of (A, B) by Cholesky reduction and
/// Jacobi-free self-adjoint solve; independent of the library's solver path.
Eigen::VectorXd dense_eigenvalues(const SparseSym& A, const SparseSym& B);

/// Gradients of the barycentric functions from the inverse of [1 x y] rows.
std::array<Eigen::Vector2d, 3> gradients_by_inverse(const Triangle2& tri);

/// Edge-midpoint rule (exact for quadratics) for int lambda_a lambda_b.
Eigen::Matrix3d mass_by_quadrature(const Triangle2& tri);

/// Polygon area by the shoelace formula.
double shoelace_area(const std::vector<Point2>& vertices);

struct PropertyResult {
  std::string name;
  std::size_t cases = 0;
  std::size_t failures = 0;
  std::string first_failure;
  double seconds = 0.0;

  bool ok() const { return failures == 0 && cases > 0; }
};

/// A named randomized invariant check run over `cases` seeds.
struct PropertySuite {
  std::string name;
  std::function<PropertyResult(std::size_t cases, std::uint64_t seed)> run;
};

/// The property suites listed by the module invariants.
std::vector<PropertySuite> property_suites();

}  // namespace eigstab::testing
