#include "eigstab/metrics.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "eigstab/error.hpp"

namespace eigstab {

double antisymmetry(const FEFunction& u, const ReflectionAxis& axis, double tol) {
  const TriMesh& mesh = u.mesh();
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& p : mesh.nodes) {
    const double c = axis.kind() == ReflectionAxis::Kind::Vertical ? p.x : p.y;
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }
  if (axis.position() < lo || axis.position() > hi)
    throw Error(ErrorKind::InvalidArgument, "reflection axis misses the domain's bounding box");

  const double unorm = l2_norm(u);
  if (!(unorm > 0.0)) throw Error(ErrorKind::ZeroFunction, "antisymmetry of the zero function");

  const PointLocator locator(u.mesh_ptr());
  Eigen::VectorXd reflected(u.values().size());
  for (std::size_t n = 0; n < mesh.node_count(); ++n)
    reflected[static_cast<Eigen::Index>(n)] = evaluate(u, locator, axis.reflect(mesh.nodes[n]), tol);
  const FEFunction sum(u.mesh_ptr(), u.values() + reflected, false);
  return l2_norm(sum) / unorm;
}

double difference_quotient(double lambda_t, double lambda_0, double t) {
  if (!(t != 0.0)) throw Error(ErrorKind::ZeroPerturbation, "difference quotient with t = 0");
  if (!(t > 0.0)) throw Error(ErrorKind::InvalidArgument, "difference quotient needs t > 0");
  return (lambda_t - lambda_0) / t;
}

double gap(std::span<const double> values, std::size_t i, std::size_t j) {
  if (i >= values.size() || j >= values.size())
    throw Error(ErrorKind::IndexOutOfRange, "gap index out of range (size " + std::to_string(values.size()) + ")");
  return values[j] - values[i];
}

double cross_orthogonality(const FEFunction& u, const FEFunction& v, const SparseSym& B, const DofMap& dofs) {
  const double nu = norm(u, B, dofs), nv = norm(v, B, dofs);
  if (!(nu > 0.0) || !(nv > 0.0)) throw Error(ErrorKind::ZeroFunction, "cross_orthogonality of a zero function");
  return std::abs(inner(u, v, B, dofs)) / (nu * nv);
}

}  // namespace eigstab
