#include "eigstab/stabilize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "eigstab/error.hpp"

namespace eigstab {

const char* to_string(WeightMode mode) noexcept { return mode == WeightMode::PaperD ? "paper" : "det"; }

void ClusterSpec::validate() const {
  if (first < 1 || last < first)
    throw Error(ErrorKind::InvalidArgument, "cluster needs 1 <= first <= last");
}

ElementCoeffs element_coeffs(const MatchedMeshPair& pair) {
  if (!(pair.t != 0.0)) throw Error(ErrorKind::ZeroPerturbation, "difference quotients need t > 0");
  if (!(pair.t > 0.0)) throw Error(ErrorKind::InvalidArgument, "perturbation magnitude must be positive");
  ElementCoeffs out;
  out.mesh0 = pair.mesh0;
  out.t = pair.t;
  out.elements.reserve(pair.element_maps.size());
  for (const auto& map : pair.element_maps) {
    if (!(map.det() > 0.0)) throw Error(ErrorKind::InvertedElement, "element map reverses orientation");
    const Eigen::Matrix2d& s_inv = map.inverse();
    ElementCoeff c;
    c.P = (s_inv * s_inv.transpose() - Eigen::Matrix2d::Identity()) / pair.t;
    c.P = 0.5 * (c.P + c.P.transpose()).eval();
    c.det = map.abs_det();
    c.d = (c.det - 1.0) / pair.t;
    c.inv_T = s_inv.transpose();
    out.elements.push_back(c);
  }
  return out;
}

FEFunction pull_back(const FEFunction& f, const MatchedMeshPair& pair) {
  if (f.mesh_ptr() != pair.mesh_t) throw Error(ErrorKind::MeshMismatch, "pull_back: function is not on mesh_t");
  return f.on_mesh(pair.mesh0);
}

FEFunction push_forward(const FEFunction& f, const MatchedMeshPair& pair) {
  if (f.mesh_ptr() != pair.mesh0) throw Error(ErrorKind::MeshMismatch, "push_forward: function is not on mesh0");
  return f.on_mesh(pair.mesh_t);
}

namespace {

void require_on(const FEFunction& f, const ElementCoeffs& coeffs) {
  if (f.mesh_ptr() != coeffs.mesh0 || coeffs.elements.size() != coeffs.mesh0->element_count())
    throw Error(ErrorKind::MeshMismatch, "function and coefficients live on different meshes");
}

struct LocalData {
  Eigen::Vector2d grad_u, grad_v;
  double mass_uv;
  double area;
};

template <class F>
double sum_elements(const FEFunction& u, const FEFunction& v, F&& term) {
  const TriMesh& mesh = u.mesh();
  const auto& uv = u.values();
  const auto& vv = v.values();
  double s = 0.0;
  for (std::size_t j = 0; j < mesh.element_count(); ++j) {
    const Triangle2 tri = mesh.element(j);
    const auto g = hat_gradients(tri);
    const auto& e = mesh.elements[j];
    LocalData d;
    d.area = 0.5 * signed_area2(tri);
    d.grad_u.setZero();
    d.grad_v.setZero();
    Eigen::Vector3d a, b;
    for (int k = 0; k < 3; ++k) {
      a[k] = uv[static_cast<Eigen::Index>(e[k])];
      b[k] = vv[static_cast<Eigen::Index>(e[k])];
      d.grad_u += a[k] * g[k];
      d.grad_v += b[k] * g[k];
    }
    d.mass_uv = d.area / 12.0 * (a.dot(b) + a.sum() * b.sum());
    s += term(j, d);
  }
  return s;
}

}  // namespace

double tilde_a(const FEFunction& u, const FEFunction& v, const ElementCoeffs& coeffs, double lambda_ref) {
  require_on(u, coeffs);
  require_on(v, coeffs);
  return sum_elements(u, v, [&](std::size_t j, const LocalData& d) {
    const ElementCoeff& c = coeffs.elements[j];
    const double pgrad = (c.P * d.grad_u).dot(d.grad_v) * d.area;
    const double grad = d.grad_u.dot(d.grad_v) * d.area;
    return c.det * pgrad + c.d * grad - lambda_ref * c.d * d.mass_uv;
  });
}

double tilde_b(const FEFunction& u, const FEFunction& v, const ElementCoeffs& coeffs, WeightMode mode) {
  require_on(u, coeffs);
  require_on(v, coeffs);
  return sum_elements(u, v, [&](std::size_t j, const LocalData& d) {
    const ElementCoeff& c = coeffs.elements[j];
    return (mode == WeightMode::PaperD ? c.d : c.det) * d.mass_uv;
  });
}

SmallSystem build_small_system(const std::vector<FEFunction>& basis_tilde, const std::vector<FEFunction>& basis_E,
                               const ElementCoeffs& coeffs, const ClusterSpec& cluster, WeightMode mode) {
  cluster.validate();
  const std::size_t m = cluster.size();
  if (basis_tilde.size() != m || basis_E.size() != m)
    throw Error(ErrorKind::DimensionMismatch, "both bases must have one function per cluster index");
  for (const auto& f : basis_tilde) require_on(f, coeffs);
  for (const auto& f : basis_E) require_on(f, coeffs);

  const auto M = static_cast<Eigen::Index>(m);
  Eigen::MatrixXd gram(M, M);
  for (Eigen::Index i = 0; i < M; ++i)
    for (Eigen::Index j = 0; j <= i; ++j)
      gram(i, j) = gram(j, i) = l2_inner(basis_tilde[static_cast<std::size_t>(i)], basis_tilde[static_cast<std::size_t>(j)]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ges(gram, Eigen::EigenvaluesOnly);
  const double gmin = ges.eigenvalues().minCoeff(), gmax = ges.eigenvalues().maxCoeff();
  if (!(gmin > 0.0) || gmax / gmin > 1e8)
    throw Error(ErrorKind::RankDeficientBasis, "perturbed cluster basis is (nearly) linearly dependent");

  SmallSystem sys;
  sys.weight_mode = mode;
  sys.Mt.resize(M, M);
  sys.Nt.resize(M, M);
  for (Eigen::Index i = 0; i < M; ++i)
    for (Eigen::Index j = 0; j < M; ++j) {
      const auto& ft = basis_tilde[static_cast<std::size_t>(i)];
      const auto& fe = basis_E[static_cast<std::size_t>(j)];
      sys.Mt(i, j) = tilde_a(ft, fe, coeffs, cluster.lambda_ref);
      sys.Nt(i, j) = tilde_b(ft, fe, coeffs, mode);
    }
  return sys;
}

SmallSolution solve_small_system(const SmallSystem& system) {
  const Eigen::MatrixXd mt = system.Mt.transpose(), nt = system.Nt.transpose();
  const auto pairs = dense_gep(mt, nt);
  SmallSolution out;
  out.sigma.resize(mt.rows(), mt.rows());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto mu = pairs[i].value;
    if (std::abs(mu.imag()) > 1e-8 * (1.0 + std::abs(mu.real()))) {
      std::ostringstream msg;
      msg << "difference quotient " << i << " has imaginary part " << mu.imag();
      throw Error(ErrorKind::ComplexQuotients, msg.str());
    }
    out.quotients.push_back(mu.real());
    out.sigma.col(static_cast<Eigen::Index>(i)) = pairs[i].vector.real();
  }
  for (std::size_t i = 1; i < out.quotients.size(); ++i)
    if (std::abs(out.quotients[i] - out.quotients[i - 1]) <= 1e-10 * (1.0 + std::abs(out.quotients[i])))
      out.unresolved_subcluster = true;
  return out;
}

FEFunction combine(const std::vector<FEFunction>& basis, const Eigen::VectorXd& sigma) {
  if (basis.empty() || static_cast<std::size_t>(sigma.size()) != basis.size())
    throw Error(ErrorKind::DimensionMismatch, "combine: coefficient count differs from basis size");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(basis[0].values().size());
  for (std::size_t k = 0; k < basis.size(); ++k) {
    if (basis[k].mesh_ptr() != basis[0].mesh_ptr())
      throw Error(ErrorKind::MeshMismatch, "combine: basis functions live on different meshes");
    v += sigma[static_cast<Eigen::Index>(k)] * basis[k].values();
  }
  return FEFunction(basis[0].mesh_ptr(), std::move(v));
}

namespace {

double sign_scale(const FEFunction& f) {
  const double n = l2_norm(f);
  if (!(n > 0.0)) throw Error(ErrorKind::ZeroFunction, "cannot normalize the zero function");
  Eigen::Index imax = 0;
  f.values().cwiseAbs().maxCoeff(&imax);
  return (f.values()[imax] < 0 ? -1.0 : 1.0) / n;
}

}  // namespace

FEFunction normalized_with_sign(const FEFunction& f) { return f.scaled(sign_scale(f)); }

StabilizedCluster stabilize_cluster(const MatchedMeshPair& pair, ClusterSpec cluster, const StabilizeOptions& opts) {
  cluster.validate();
  if (!(pair.t > 0.0)) throw Error(ErrorKind::ZeroPerturbation, "stabilization needs t > 0");

  // Step 1 (reference domain) and Step 2 (perturbed domain).
  const Assembly a0 = assemble(*pair.mesh0);
  const Assembly at = assemble(*pair.mesh_t);
  if (cluster.last > a0.dofs.size())
    throw Error(ErrorKind::IndexOutOfRange, "cluster index exceeds the number of interior DOFs");
  const auto pairs0 = smallest_pairs(a0.stiffness, a0.mass, cluster.last, opts.solver);
  const auto pairs_t = smallest_pairs(at.stiffness, at.mass, cluster.last, opts.solver);

  StabilizedCluster out;
  out.weight_mode = opts.weight_mode;
  std::vector<FEFunction> basis_E, basis_t, basis_tilde;
  for (std::size_t k = cluster.first - 1; k < cluster.last; ++k) {
    basis_E.push_back(FEFunction::from_interior(pair.mesh0, a0.dofs, pairs0[k].vector));
    basis_t.push_back(FEFunction::from_interior(pair.mesh_t, at.dofs, pairs_t[k].vector));
    basis_tilde.push_back(pull_back(basis_t.back(), pair));
    out.lambda0.push_back(pairs0[k].value);
    out.lambda_t.push_back(pairs_t[k].value);
    out.residual0.push_back(residual(a0.stiffness, a0.mass, pairs0[k]));
    out.residual_t.push_back(residual(at.stiffness, at.mass, pairs_t[k]));
    out.standard_on_Kt.push_back(normalized_with_sign(basis_t.back()));
  }

  const double mean = std::accumulate(out.lambda0.begin(), out.lambda0.end(), 0.0) /
                      static_cast<double>(out.lambda0.size());
  const auto [lo, hi] = std::minmax_element(out.lambda0.begin(), out.lambda0.end());
  if ((*hi - *lo) > 1e-6 * std::abs(mean)) {
    std::ostringstream msg;
    msg << "reference cluster eigenvalues spread by " << (*hi - *lo) / std::abs(mean)
        << " (relative); the discrete eigenvalue is not multiple";
    out.warnings.push_back(msg.str());
  }
  cluster.lambda_ref = mean;
  out.cluster = cluster;

  // Steps 3-4.
  const ElementCoeffs coeffs = element_coeffs(pair);
  out.system = build_small_system(basis_tilde, basis_E, coeffs, cluster, opts.weight_mode);
  const SmallSolution sol = solve_small_system(out.system);
  out.quotients = sol.quotients;
  out.unresolved_subcluster = sol.unresolved_subcluster;
  if (sol.unresolved_subcluster)
    out.warnings.push_back("difference quotients coincide within 1e-10; unresolved sub-cluster");

  // Step 5.
  out.coefficients = sol.sigma;
  for (Eigen::Index i = 0; i < sol.sigma.cols(); ++i) {
    const FEFunction raw = combine(basis_t, sol.sigma.col(i));
    const double s = sign_scale(raw);
    out.coefficients.col(i) *= s;
    out.functions_on_Kt.push_back(raw.scaled(s));
    out.functions_on_K0.push_back(pull_back(out.functions_on_Kt.back(), pair));
  }
  return out;
}

}  // namespace eigstab
