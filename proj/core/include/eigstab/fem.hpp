#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "eigstab/mesh.hpp"

namespace eigstab {

/// Interior (Dirichlet-free) numbering of mesh nodes.
struct DofMap {
  std::vector<std::optional<std::size_t>> interior_of_node;
  std::vector<std::size_t> node_of_interior;

  std::size_t size() const { return node_of_interior.size(); }
  static DofMap from_mesh(const TriMesh& mesh);
};

struct SparseSym {
  Eigen::SparseMatrix<double> matrix;
  bool symmetric = true;

  std::size_t dimension() const { return static_cast<std::size_t>(matrix.rows()); }
};

/// P1 nodal field. Dirichlet fields have exactly zero boundary values.
class FEFunction {
 public:
  FEFunction(MeshPtr mesh, Eigen::VectorXd values, bool dirichlet = true);

  static FEFunction zero(MeshPtr mesh);
  static FEFunction interpolate(MeshPtr mesh, const std::function<double(Point2)>& f,
                                bool dirichlet = true);
  static FEFunction from_interior(MeshPtr mesh, const DofMap& dofs, const Eigen::VectorXd& interior);

  const MeshPtr& mesh_ptr() const { return mesh_; }
  const TriMesh& mesh() const { return *mesh_; }
  const Eigen::VectorXd& values() const { return values_; }
  bool dirichlet() const { return dirichlet_; }

  Eigen::VectorXd interior_values(const DofMap& dofs) const;

  FEFunction scaled(double c) const;
  /// Same nodal values on another mesh with identical node count.
  FEFunction on_mesh(MeshPtr other) const;

 private:
  MeshPtr mesh_;
  Eigen::VectorXd values_;
  bool dirichlet_;
};

using Matrix3 = Eigen::Matrix3d;

/// Constant gradients of the three barycentric (hat) functions.
std::array<Eigen::Vector2d, 3> hat_gradients(const Triangle2& tri);

Matrix3 local_stiffness(const Triangle2& tri);
Matrix3 local_mass(const Triangle2& tri);

struct Assembly {
  SparseSym stiffness;
  SparseSym mass;
  DofMap dofs;
};

/// Stiffness and consistent mass with boundary rows and columns eliminated.
Assembly assemble(const TriMesh& mesh);

/// Same matrices over all nodes, without Dirichlet elimination.
std::pair<SparseSym, SparseSym> assemble_full(const TriMesh& mesh);

/// P1 interpolation at `pt`, located within distance `tol`.
double evaluate(const FEFunction& f, Point2 pt, double tol);
double evaluate(const FEFunction& f, const PointLocator& locator, Point2 pt, double tol);

double inner(const FEFunction& f, const FEFunction& g, const SparseSym& B, const DofMap& dofs);
double norm(const FEFunction& f, const SparseSym& B, const DofMap& dofs);

/// Elementwise L2 inner product with exact local mass; covers boundary values too.
double l2_inner(const FEFunction& f, const FEFunction& g);
double l2_norm(const FEFunction& f);

/// Elementwise (grad f, grad g).
double energy_inner(const FEFunction& f, const FEFunction& g);

}  // namespace eigstab
