#include "eigstab/fem.hpp"

#include <cmath>
#include <string>

#include "eigstab/error.hpp"

namespace eigstab {

DofMap DofMap::from_mesh(const TriMesh& mesh) {
  DofMap d;
  d.interior_of_node.assign(mesh.node_count(), std::nullopt);
  std::vector<char> bnd(mesh.node_count(), 0);
  for (auto n : mesh.boundary_nodes) bnd[n] = 1;
  for (std::size_t n = 0; n < mesh.node_count(); ++n)
    if (!bnd[n]) {
      d.interior_of_node[n] = d.node_of_interior.size();
      d.node_of_interior.push_back(n);
    }
  return d;
}

FEFunction::FEFunction(MeshPtr mesh, Eigen::VectorXd values, bool dirichlet)
    : mesh_(std::move(mesh)), values_(std::move(values)), dirichlet_(dirichlet) {
  if (!mesh_) throw Error(ErrorKind::InvalidArgument, "FEFunction: null mesh");
  if (static_cast<std::size_t>(values_.size()) != mesh_->node_count())
    throw Error(ErrorKind::DimensionMismatch, "FEFunction: value count " + std::to_string(values_.size()) +
                                                  " != node count " + std::to_string(mesh_->node_count()));
  if (dirichlet_)
    for (auto n : mesh_->boundary_nodes) values_[static_cast<Eigen::Index>(n)] = 0.0;
}

FEFunction FEFunction::zero(MeshPtr mesh) {
  const auto n = static_cast<Eigen::Index>(mesh->node_count());
  return FEFunction(std::move(mesh), Eigen::VectorXd::Zero(n));
}

FEFunction FEFunction::interpolate(MeshPtr mesh, const std::function<double(Point2)>& f, bool dirichlet) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(mesh->node_count()));
  for (std::size_t n = 0; n < mesh->node_count(); ++n) v[static_cast<Eigen::Index>(n)] = f(mesh->nodes[n]);
  return FEFunction(std::move(mesh), std::move(v), dirichlet);
}

FEFunction FEFunction::from_interior(MeshPtr mesh, const DofMap& dofs, const Eigen::VectorXd& interior) {
  if (static_cast<std::size_t>(interior.size()) != dofs.size() ||
      dofs.interior_of_node.size() != mesh->node_count())
    throw Error(ErrorKind::DimensionMismatch, "from_interior: DofMap does not match the vector or mesh");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh->node_count()));
  for (std::size_t i = 0; i < dofs.size(); ++i)
    v[static_cast<Eigen::Index>(dofs.node_of_interior[i])] = interior[static_cast<Eigen::Index>(i)];
  return FEFunction(std::move(mesh), std::move(v));
}

Eigen::VectorXd FEFunction::interior_values(const DofMap& dofs) const {
  if (dofs.interior_of_node.size() != mesh_->node_count())
    throw Error(ErrorKind::DimensionMismatch, "interior_values: DofMap does not match the mesh");
  Eigen::VectorXd r(static_cast<Eigen::Index>(dofs.size()));
  for (std::size_t i = 0; i < dofs.size(); ++i)
    r[static_cast<Eigen::Index>(i)] = values_[static_cast<Eigen::Index>(dofs.node_of_interior[i])];
  return r;
}

FEFunction FEFunction::scaled(double c) const { return FEFunction(mesh_, c * values_, dirichlet_); }

FEFunction FEFunction::on_mesh(MeshPtr other) const {
  if (!other || other->node_count() != mesh_->node_count())
    throw Error(ErrorKind::MeshMismatch, "on_mesh: node counts differ");
  return FEFunction(std::move(other), values_, dirichlet_);
}

std::array<Eigen::Vector2d, 3> hat_gradients(const Triangle2& tri) {
  const double a2 = signed_area2(tri);
  std::array<Eigen::Vector2d, 3> g;
  for (int a = 0; a < 3; ++a) {
    const Point2 p = tri[(a + 1) % 3], q = tri[(a + 2) % 3];
    g[a] = Eigen::Vector2d(p.y - q.y, q.x - p.x) / a2;
  }
  return g;
}

namespace {

double checked_area(const Triangle2& tri) {
  const double area = 0.5 * signed_area2(tri);
  const double d = diameter(tri);
  if (!(area > 1e-14 * d * d)) throw Error(ErrorKind::DegenerateTriangle, "element has non-positive area");
  return area;
}

}  // namespace

Matrix3 local_stiffness(const Triangle2& tri) {
  const double area = checked_area(tri);
  const auto g = hat_gradients(tri);
  Matrix3 k;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) k(a, b) = area * g[a].dot(g[b]);
  return k;
}

Matrix3 local_mass(const Triangle2& tri) {
  const double area = checked_area(tri);
  Matrix3 m;
  m << 2, 1, 1, 1, 2, 1, 1, 1, 2;
  return (area / 12.0) * m;
}

namespace {

SparseSym from_triplets(std::size_t n, const std::vector<Eigen::Triplet<double>>& trips) {
  SparseSym s;
  s.matrix.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  s.matrix.setFromTriplets(trips.begin(), trips.end());
  s.matrix.makeCompressed();
  return s;
}

}  // namespace

Assembly assemble(const TriMesh& mesh) {
  Assembly out;
  out.dofs = DofMap::from_mesh(mesh);
  std::vector<Eigen::Triplet<double>> ka, ma;
  ka.reserve(9 * mesh.element_count());
  ma.reserve(9 * mesh.element_count());
  for (std::size_t j = 0; j < mesh.element_count(); ++j) {
    const Triangle2 tri = mesh.element(j);
    const Matrix3 k = local_stiffness(tri);
    const Matrix3 m = local_mass(tri);
    const auto& e = mesh.elements[j];
    for (int a = 0; a < 3; ++a) {
      const auto ia = out.dofs.interior_of_node[e[a]];
      if (!ia) continue;
      for (int b = 0; b < 3; ++b) {
        const auto ib = out.dofs.interior_of_node[e[b]];
        if (!ib) continue;
        const auto r = static_cast<int>(*ia), c = static_cast<int>(*ib);
        ka.emplace_back(r, c, k(a, b));
        ma.emplace_back(r, c, m(a, b));
      }
    }
  }
  out.stiffness = from_triplets(out.dofs.size(), ka);
  out.mass = from_triplets(out.dofs.size(), ma);
  return out;
}

std::pair<SparseSym, SparseSym> assemble_full(const TriMesh& mesh) {
  std::vector<Eigen::Triplet<double>> ka, ma;
  for (std::size_t j = 0; j < mesh.element_count(); ++j) {
    const Triangle2 tri = mesh.element(j);
    const Matrix3 k = local_stiffness(tri);
    const Matrix3 m = local_mass(tri);
    const auto& e = mesh.elements[j];
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        ka.emplace_back(static_cast<int>(e[a]), static_cast<int>(e[b]), k(a, b));
        ma.emplace_back(static_cast<int>(e[a]), static_cast<int>(e[b]), m(a, b));
      }
  }
  return {from_triplets(mesh.node_count(), ka), from_triplets(mesh.node_count(), ma)};
}

double evaluate(const FEFunction& f, const PointLocator& locator, Point2 pt, double tol) {
  if (&locator.mesh() != &f.mesh()) throw Error(ErrorKind::MeshMismatch, "evaluate: locator built on another mesh");
  const PointLocation loc = locator.locate(pt, tol);
  const auto& e = f.mesh().elements[loc.element];
  const auto& v = f.values();
  return loc.bary[0] * v[static_cast<Eigen::Index>(e[0])] + loc.bary[1] * v[static_cast<Eigen::Index>(e[1])] +
         loc.bary[2] * v[static_cast<Eigen::Index>(e[2])];
}

double evaluate(const FEFunction& f, Point2 pt, double tol) {
  return evaluate(f, PointLocator(f.mesh_ptr()), pt, tol);
}

double inner(const FEFunction& f, const FEFunction& g, const SparseSym& B, const DofMap& dofs) {
  if (f.mesh().node_count() != g.mesh().node_count() || dofs.interior_of_node.size() != f.mesh().node_count() ||
      B.dimension() != dofs.size())
    throw Error(ErrorKind::DimensionMismatch, "inner: functions, DofMap and matrix disagree");
  const Eigen::VectorXd a = f.interior_values(dofs), b = g.interior_values(dofs);
  return a.dot(B.matrix * b);
}

double norm(const FEFunction& f, const SparseSym& B, const DofMap& dofs) {
  return std::sqrt(std::max(0.0, inner(f, f, B, dofs)));
}

double l2_inner(const FEFunction& f, const FEFunction& g) {
  if (f.mesh_ptr() != g.mesh_ptr() && f.mesh().node_count() != g.mesh().node_count())
    throw Error(ErrorKind::MeshMismatch, "l2_inner: functions live on different meshes");
  const TriMesh& mesh = f.mesh();
  const auto& u = f.values();
  const auto& v = g.values();
  double s = 0.0;
  for (std::size_t j = 0; j < mesh.element_count(); ++j) {
    const auto& e = mesh.elements[j];
    const double area = mesh.element_area(j);
    Eigen::Vector3d a(u[static_cast<Eigen::Index>(e[0])], u[static_cast<Eigen::Index>(e[1])],
                      u[static_cast<Eigen::Index>(e[2])]);
    Eigen::Vector3d b(v[static_cast<Eigen::Index>(e[0])], v[static_cast<Eigen::Index>(e[1])],
                      v[static_cast<Eigen::Index>(e[2])]);
    // (area/12) * a^T [[2,1,1],[1,2,1],[1,1,2]] b
    s += area / 12.0 * (a.dot(b) + a.sum() * b.sum());
  }
  return s;
}

double l2_norm(const FEFunction& f) { return std::sqrt(std::max(0.0, l2_inner(f, f))); }

double energy_inner(const FEFunction& f, const FEFunction& g) {
  if (f.mesh().node_count() != g.mesh().node_count())
    throw Error(ErrorKind::MeshMismatch, "energy_inner: functions live on different meshes");
  const TriMesh& mesh = f.mesh();
  double s = 0.0;
  for (std::size_t j = 0; j < mesh.element_count(); ++j) {
    const Triangle2 tri = mesh.element(j);
    const auto g3 = hat_gradients(tri);
    const auto& e = mesh.elements[j];
    Eigen::Vector2d gu = Eigen::Vector2d::Zero(), gv = Eigen::Vector2d::Zero();
    for (int a = 0; a < 3; ++a) {
      gu += f.values()[static_cast<Eigen::Index>(e[a])] * g3[a];
      gv += g.values()[static_cast<Eigen::Index>(e[a])] * g3[a];
    }
    s += 0.5 * signed_area2(tri) * gu.dot(gv);
  }
  return s;
}

}  // namespace eigstab
