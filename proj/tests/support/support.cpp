#include "support.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <numeric>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "eigstab/eigensolve.hpp"
#include "eigstab/error.hpp"
#include "eigstab/metrics.hpp"

namespace eigstab::testing {

namespace {

MatchedMeshPair square_pair(std::size_t n, MeshPattern pattern, const std::vector<double>& e, double t) {
  PolygonSpec p0 = unit_square();
  auto mesh0 = std::make_shared<const TriMesh>(rect_mesh(n, 1.0, 1.0, pattern));
  auto macro = fan_macro_triangulation(p0);
  PolygonSpec pt = perturb_polygon(p0, {e, t});
  return transport(mesh0, macro_maps(macro, p0, pt), t);
}

double uniform(Rng& rng, double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }

template <class F>
PropertyResult run_cases(const std::string& name, std::size_t cases, std::uint64_t seed, F check) {
  PropertyResult r;
  r.name = name;
  const auto t0 = std::chrono::steady_clock::now();
  for (std::size_t c = 0; c < cases; ++c) {
    Rng rng(seed + 7919 * c);
    std::string why;
    bool ok = false;
    try {
      ok = check(rng, c, why);
    } catch (const std::exception& e) {
      why = std::string("exception: ") + e.what();
    }
    ++r.cases;
    if (!ok) {
      if (r.failures++ == 0) r.first_failure = "case " + std::to_string(c) + ": " + why;
    }
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

bool near_rel(double a, double b, double rel, std::string& why, const char* what) {
  const double scale = std::max({1.0, std::abs(a), std::abs(b)});
  if (std::abs(a - b) <= rel * scale) return true;
  why = std::string(what) + ": " + num(a) + " vs " + num(b);
  return false;
}

struct ClusterSetup {
  MatchedMeshPair pair;
  ClusterSpec cluster;
  std::vector<FEFunction> tilde;  // pulled-back perturbed eigenfunctions
  std::vector<FEFunction> basis;  // reference eigenfunctions
  ElementCoeffs coeffs;
};

ClusterSetup make_setup(MatchedMeshPair pair, ClusterSpec cluster) {
  ClusterSetup s{std::move(pair), cluster, {}, {}, {}};
  auto a0 = assemble(*s.pair.mesh0);
  auto at = assemble(*s.pair.mesh_t);
  auto p0 = smallest_pairs(a0.stiffness, a0.mass, cluster.last);
  auto pt = smallest_pairs(at.stiffness, at.mass, cluster.last);
  double mean = 0.0;
  for (std::size_t i = cluster.first - 1; i < cluster.last; ++i) {
    s.basis.push_back(FEFunction::from_interior(s.pair.mesh0, a0.dofs, p0[i].vector));
    s.tilde.push_back(pull_back(FEFunction::from_interior(s.pair.mesh_t, at.dofs, pt[i].vector), s.pair));
    mean += p0[i].value;
  }
  s.cluster.lambda_ref = mean / static_cast<double>(cluster.size());
  s.coeffs = element_coeffs(s.pair);
  return s;
}

std::vector<FEFunction> reconstruct(const ClusterSetup& s, const std::vector<FEFunction>& tilde,
                                    const SmallSolution& sol) {
  std::vector<FEFunction> out;
  for (Eigen::Index i = 0; i < sol.sigma.cols(); ++i)
    out.push_back(normalized_with_sign(push_forward(combine(tilde, sol.sigma.col(i)), s.pair)));
  return out;
}

}  // namespace

MatchedMeshPair rect_stretch(std::size_t n, MeshPattern pattern, double eps) {
  return square_pair(n, pattern, rect_stretch_direction(), eps);
}

MatchedMeshPair rect_dilation(std::size_t n, MeshPattern pattern, double t) {
  return square_pair(n, pattern, unit_square().parameters(), t);
}

MatchedMeshPair triangle_case(TriangleCase c, double eps, std::size_t levels) {
  PolygonSpec p0 = equilateral_triangle();
  auto macro = fan_macro_triangulation(p0);
  auto mesh0 = std::make_shared<const TriMesh>(refined_polygon_mesh(p0, macro, levels));
  PolygonSpec pt = perturb_polygon(p0, {triangle_direction(c), eps});
  return transport(mesh0, macro_maps(macro, p0, pt), eps);
}

PolygonSpec random_convex_polygon(Rng& rng, std::size_t k) {
  // Sorted angles with a minimum spacing keep the polygon strictly convex.
  std::vector<double> ang(k);
  const double base = 2.0 * std::numbers::pi / static_cast<double>(k);
  const double phase = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  for (std::size_t i = 0; i < k; ++i) ang[i] = phase + base * (static_cast<double>(i) + uniform(rng, -0.25, 0.25));
  const double a = uniform(rng, 0.6, 1.4), b = uniform(rng, 0.6, 1.4);
  const double cx = uniform(rng, -2.0, 2.0), cy = uniform(rng, -2.0, 2.0);
  std::vector<Point2> v;
  for (double t : ang) v.push_back({cx + a * std::cos(t), cy + b * std::sin(t)});
  return PolygonSpec(v);
}

Triangle2 random_triangle(Rng& rng) {
  for (;;) {
    Triangle2 t{Point2{uniform(rng, -1, 1), uniform(rng, -1, 1)}, Point2{uniform(rng, -1, 1), uniform(rng, -1, 1)},
                Point2{uniform(rng, -1, 1), uniform(rng, -1, 1)}};
    double a2 = signed_area2(t);
    if (a2 < 0) std::swap(t[1], t[2]);
    double area = 0.5 * std::abs(a2);
    double l = diameter(t);
    // Reject slivers: area relative to the longest edge squared.
    if (area > 0.08 * l * l) return t;
  }
}

std::vector<double> random_direction(Rng& rng, std::size_t k) {
  std::vector<double> e(2 * k);
  double m = 0.0;
  for (auto& x : e) {
    x = uniform(rng, -1, 1);
    m = std::max(m, std::abs(x));
  }
  for (auto& x : e) x /= m;
  return e;
}

MatchedMeshPair random_pair(Rng& rng, std::size_t levels, double t) {
  const std::size_t k = 3 + rng() % 4;
  PolygonSpec p0 = random_convex_polygon(rng, k);
  auto macro = fan_macro_triangulation(p0);
  auto mesh0 = std::make_shared<const TriMesh>(refined_polygon_mesh(p0, macro, levels));
  PolygonSpec pt = perturb_polygon(p0, {random_direction(rng, k), t});
  return transport(mesh0, macro_maps(macro, p0, pt), t);
}

FEFunction random_function(Rng& rng, const MeshPtr& mesh) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(mesh->node_count()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = uniform(rng, -1, 1);
  for (auto b : mesh->boundary_nodes) v[static_cast<Eigen::Index>(b)] = 0.0;
  return FEFunction(mesh, v);
}

Eigen::VectorXd dense_eigenvalues(const SparseSym& A, const SparseSym& B) {
  Eigen::MatrixXd a = Eigen::MatrixXd(A.matrix), b = Eigen::MatrixXd(B.matrix);
  Eigen::LLT<Eigen::MatrixXd> llt(b);
  Eigen::MatrixXd L = llt.matrixL();
  Eigen::MatrixXd Li = L.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(b.rows(), b.cols()));
  Eigen::MatrixXd c = Li * a * Li.transpose();
  c = 0.5 * (c + c.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

std::array<Eigen::Vector2d, 3> gradients_by_inverse(const Triangle2& tri) {
  Eigen::Matrix3d V;
  for (int i = 0; i < 3; ++i) V.row(i) << 1.0, tri[i].x, tri[i].y;
  // lambda_a(x, y) = c0 + c1 x + c2 y with coefficients in column a of V^{-1}.
  Eigen::Matrix3d C = V.inverse();
  std::array<Eigen::Vector2d, 3> g;
  for (int a = 0; a < 3; ++a) g[a] = Eigen::Vector2d(C(1, a), C(2, a));
  return g;
}

Eigen::Matrix3d mass_by_quadrature(const Triangle2& tri) {
  const double area = 0.5 * std::abs(signed_area2(tri));
  // Barycentrics of the three edge midpoints.
  const double mids[3][3] = {{0.5, 0.5, 0.0}, {0.0, 0.5, 0.5}, {0.5, 0.0, 0.5}};
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  for (const auto& q : mids)
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) m(a, b) += area / 3.0 * q[a] * q[b];
  return m;
}

double shoelace_area(const std::vector<Point2>& v) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += cross(v[i], v[(i + 1) % v.size()]);
  return 0.5 * s;
}

std::vector<PropertySuite> property_suites() {
  std::vector<PropertySuite> suites;

  suites.push_back({"perturbation linear in t", [](std::size_t cases, std::uint64_t seed) {
    return run_cases("perturbation linear in t", cases, seed, [](Rng& rng, std::size_t, std::string& why) {
      const std::size_t k = 3 + rng() % 6;
      PolygonSpec p = random_convex_polygon(rng, k);
      auto e = random_direction(rng, k);
      const double t1 = uniform(rng, 0, 0.05), t2 = uniform(rng, 0, 0.05);
      if (!(perturb_polygon(p, {e, 0.0}).vertices() == p.vertices())) {
        why = "t = 0 changed the polygon";
        return false;
      }
      auto a = perturb_polygon(p, {e, t1 + t2}).parameters();
      auto b = perturb_polygon(p, {e, t1}).parameters();
      for (std::size_t i = 0; i < a.size(); ++i)
        if (std::abs(a[i] - (b[i] + t2 * e[i])) > 1e-14 * (1 + std::abs(a[i]))) {
          why = "coordinate " + std::to_string(i);
          return false;
        }
      return true;
    });
  }});

  suites.push_back({"macro maps agree on shared edges", [](std::size_t cases, std::uint64_t seed) {
    return run_cases("macro maps agree on shared edges", cases, seed, [](Rng& rng, std::size_t, std::string& why) {
      const std::size_t k = 4 + rng() % 6;
      PolygonSpec p0 = random_convex_polygon(rng, k);
      PolygonSpec pt = perturb_polygon(p0, {random_direction(rng, k), uniform(rng, 0, 0.1)});
      auto macro = fan_macro_triangulation(p0);
      auto maps = macro_maps(macro, p0, pt);
      const double diam = p0.diameter();
      // Fan triangles i and i+1 share the edge (v0, v_{i+2}).
      for (std::size_t i = 0; i + 1 < maps.size(); ++i) {
        Point2 mid = 0.5 * (p0[0] + p0[macro.triangles[i][2]]);
        if (distance(maps[i].apply(mid), maps[i + 1].apply(mid)) > 1e-12 * diam) {
          why = "edge after macro triangle " + std::to_string(i);
          return false;
        }
      }
      return true;
    });
  }});

  suites.push_back({"affine map round trip", [](std::size_t cases, std::uint64_t seed) {
    return run_cases("affine map round trip", cases, seed, [](Rng& rng, std::size_t, std::string& why) {
      Triangle2 src = random_triangle(rng), dst = random_triangle(rng);
      AffineMap2 m = affine_from_triangles(src, dst);
      const double diam = std::max(diameter(src), diameter(dst));
      for (int i = 0; i < 3; ++i) {
        if (distance(m.apply(src[i]), dst[i]) > 1e-12 * diam) {
          why = "src vertex not sent to dst";
          return false;
        }
        if (distance(m.apply_inverse(m.apply(src[i])), src[i]) > 1e-10 * diam) {
          why = "inverse round trip";
          return false;
        }
      }
      return near_rel(m.abs_det(), std::abs(m.linear().determinant()), 1e-14, why, "cached det");
    });
  }});

  suites.push_back({"area conservation", [](std::size_t cases, std::uint64_t seed) {
    return run_cases("area conservation", cases, seed, [](Rng& rng, std::size_t, std::string& why) {
      const std::size_t k = 3 + rng() % 5;
      PolygonSpec p0 = random_convex_polygon(rng, k);
      PolygonSpec pt = perturb_polygon(p0, {random_direction(rng, k), uniform(rng, 0, 0.05)});
      auto macro = fan_macro_triangulation(p0);
      auto mesh0 = std::make_shared<const TriMesh>(refined_polygon_mesh(p0, macro, 1 + rng() % 3));
      auto pair = transport(mesh0, macro_maps(macro, p0, pt), 0.05);
      return near_rel(mesh0->total_area(), shoelace_area(p0.vertices()), 1e-12, why, "reference area") &&
             near_rel(pair.mesh_t->total_area(), shoelace_area(pt.vertices()), 1e-12, why, "perturbed area");
    });
  }});

  suites.push_back({"transport keeps boundary set and orientation", [](std::size_t cases, std::uint64_t seed) {
    return run_cases("transport keeps boundary set and orientation", cases, seed,
                     [](Rng& rng, std::size_t, std::string& why) {
      auto pair = random_pair(rng, 1 + rng() % 3, uniform(rng, 0, 0.05));
      if (pair.mesh0->boundary_nodes != pair.mesh_t->boundary_nodes) {
        why = "boundary index sets differ";
        return false;
      }
      const double diam = pair.mesh0->diameter();
      for (std::size_t j = 0; j < pair.element_maps.size(); ++j) {
        if (!(pair.element_maps[j].det() > 0)) {
          why = "non-positive det";
          return false;
        }
        for (auto n : pair.mesh0->elements[j])
          if (distance(pair.element_maps[j].apply(pair.mesh0->nodes[n]), pair.mesh_t->nodes[n]) > 1e-12 * diam) {
            why = "element map does not reproduce the transported node";
            return false;
          }
      }
      return true;
    });
  }});

  suites.push_back({"local matrices match oracles", [](std::size_t cases, std::uint64_t seed) {
    return run_cases("local matrices match oracles", cases, seed, [](Rng& rng, std::size_t, std::string& why) {
      Triangle2 tri = random_triangle(rng);
      Matrix3 K = local_stiffness(tri), M = local_mass(tri);
      auto g = gradients_by_inverse(tri);
      const double area = 0.5 * signed_area2(tri);
      Eigen::Matrix3d Kq, Mq = mass_by_quadrature(tri);
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) Kq(a, b) = area * g[a].dot(g[b]);
      if ((K - Kq).cwiseAbs().maxCoeff() > 1e-12 * Kq.cwiseAbs().maxCoeff()) {
        why = "stiffness vs inverse-gradient oracle";
        return false;
      }
      if ((M - Mq).cwiseAbs().maxCoeff() > 1e-14 * std::max(1.0, Mq.cwiseAbs().maxCoeff())) {
        why = "mass vs quadrature oracle";
        return false;
      }
      if ((K.rowwise().sum()).cwiseAbs().maxCoeff() > 1e-12 * K.cwiseAbs().maxCoeff()) {
        why = "stiffness row sums";
        return false;
      }
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(K);
      return es.eigenvalues().minCoeff() >= -1e-12 * K.cwiseAbs().maxCoeff() ||
             (why = "stiffness not PSD", false);
    });
  }});

  suites.push_back({"bilinear form symmetry", [](std::size_t cases, std::uint64_t seed) {
    return run_cases("bilinear form symmetry", cases, seed, [](Rng& rng, std::size_t, std::string& why) {
      auto pair = random_pair(rng, 2 + rng() % 2, uniform(rng, 1e-3, 0.05));
      auto sys = assemble(*pair.mesh0);
      Eigen::MatrixXd A = Eigen::MatrixXd(sys.stiffness.matrix), B = Eigen::MatrixXd(sys.mass.matrix);
      if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-14 * A.cwiseAbs().maxCoeff() ||
          (B - B.transpose()).cwiseAbs().maxCoeff() > 1e-14 * B.cwiseAbs().maxCoeff()) {
        why = "assembled matrix not symmetric";
        return false;
      }
      Eigen::VectorXd x = Eigen::VectorXd::Random(A.rows());
      if (!(x.dot(A * x) > 0) || !(x.dot(B * x) > 0)) {
        why = "quadratic form not positive";
        return false;
      }
      auto coeffs = element_coeffs(pair);
      FEFunction u = random_function(rng, pair.mesh0), v = random_function(rng, pair.mesh0);
      const double lam = uniform(rng, 1, 100);
      return near_rel(tilde_a(u, v, coeffs, lam), tilde_a(v, u, coeffs, lam), 1e-12, why, "a~ symmetry") &&
             near_rel(tilde_b(u, v, coeffs, WeightMode::PaperD), tilde_b(v, u, coeffs, WeightMode::PaperD), 1e-12,
                      why, "b~ paper symmetry") &&
             near_rel(tilde_b(u, v, coeffs, WeightMode::Det), tilde_b(v, u, coeffs, WeightMode::Det), 1e-12, why,
                      "b~ det symmetry");
    });
  }});

  suites.push_back({"pull-back exactness", [](std::size_t cases, std::uint64_t seed) {
    return run_cases("pull-back exactness", cases, seed, [](Rng& rng, std::size_t, std::string& why) {
      auto pair = random_pair(rng, 1 + rng() % 3, uniform(rng, 1e-3, 0.05));
      auto coeffs = element_coeffs(pair);
      FEFunction u = random_function(rng, pair.mesh_t), v = random_function(rng, pair.mesh_t);
      FEFunction ut = pull_back(u, pair), vt = pull_back(v, pair);
      // Transformed sums on mesh0 with hat gradients mapped by S^{-T}.
      const TriMesh& m0 = *pair.mesh0;
      double grad = 0.0, mass = 0.0;
      for (std::size_t j = 0; j < m0.element_count(); ++j) {
        const auto& el = m0.elements[j];
        auto g = hat_gradients(m0.element(j));
        Eigen::Vector2d gu = Eigen::Vector2d::Zero(), gv = Eigen::Vector2d::Zero();
        Eigen::Vector3d lu, lv;
        for (int a = 0; a < 3; ++a) {
          gu += ut.values()[static_cast<Eigen::Index>(el[a])] * g[a];
          gv += vt.values()[static_cast<Eigen::Index>(el[a])] * g[a];
          lu[a] = ut.values()[static_cast<Eigen::Index>(el[a])];
          lv[a] = vt.values()[static_cast<Eigen::Index>(el[a])];
        }
        const auto& c = coeffs.elements[j];
        const double area = m0.element_area(j);
        grad += c.det * area * (c.inv_T * gu).dot(c.inv_T * gv);
        mass += c.det * lu.dot(local_mass(m0.element(j)) * lv);
      }
      auto [K, M] = assemble_full(*pair.mesh_t);
      const double grad_t = u.values().dot(K.matrix * v.values());
      const double mass_t = u.values().dot(M.matrix * v.values());
      if (!near_rel(grad, grad_t, 1e-12, why, "gradient form")) return false;
      if (!near_rel(mass, mass_t, 1e-12, why, "mass form")) return false;
      FEFunction back = push_forward(ut, pair);
      if (back.values() != u.values()) {
        why = "push_forward(pull_back(u)) != u";
        return false;
      }
      return true;
    });
  }});

  suites.push_back({"eigenpairs B-orthonormal and sorted", [](std::size_t cases, std::uint64_t seed) {
    return run_cases("eigenpairs B-orthonormal and sorted", cases, seed, [](Rng& rng, std::size_t c, std::string& why) {
      auto pair = random_pair(rng, 2 + rng() % 2, 0.01);
      auto sys = assemble(*pair.mesh_t);
      const std::size_t m = std::min<std::size_t>(1 + rng() % 6, sys.dofs.size());
      SolverOptions opts;
      opts.seed = rng();
      if (c % 2 == 1) opts.dense_threshold = 0;  // exercise the Krylov path
      auto pairs = smallest_pairs(sys.stiffness, sys.mass, m, opts);
      if (pairs.size() != m) {
        why = "wrong pair count";
        return false;
      }
      Eigen::MatrixXd X(static_cast<Eigen::Index>(sys.dofs.size()), static_cast<Eigen::Index>(m));
      for (std::size_t i = 0; i < m; ++i) {
        X.col(static_cast<Eigen::Index>(i)) = pairs[i].vector;
        if (!(pairs[i].value > 0) || (i > 0 && pairs[i].value < pairs[i - 1].value)) {
          why = "eigenvalues not positive ascending";
          return false;
        }
        if (residual(sys.stiffness, sys.mass, pairs[i]) > 1e-10) {
          why = "residual " + num(residual(sys.stiffness, sys.mass, pairs[i]));
          return false;
        }
      }
      Eigen::MatrixXd G = X.transpose() * (sys.mass.matrix * X);
      const double dev = (G - Eigen::MatrixXd::Identity(G.rows(), G.cols())).cwiseAbs().maxCoeff();
      if (dev > 1e-10) {
        why = "B-Gram deviation " + num(dev);
        return false;
      }
      Eigen::VectorXd ref = dense_eigenvalues(sys.stiffness, sys.mass);
      for (std::size_t i = 0; i < m; ++i)
        if (!near_rel(pairs[i].value, ref[static_cast<Eigen::Index>(i)], 1e-9, why, "eigenvalue vs dense oracle"))
          return false;
      return true;
    });
  }});

  suites.push_back({"symmetric pencils give real quotients", [](std::size_t cases, std::uint64_t seed) {
    return run_cases("symmetric pencils give real quotients", cases, seed, [](Rng& rng, std::size_t, std::string& why) {
      const int n = 1 + static_cast<int>(rng() % 8);
      Eigen::MatrixXd R(n, n), S(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          R(i, j) = uniform(rng, -1, 1);
          S(i, j) = uniform(rng, -1, 1);
        }
      Eigen::MatrixXd M = R + R.transpose();
      Eigen::MatrixXd N = S * S.transpose() + n * Eigen::MatrixXd::Identity(n, n);
      auto pairs = dense_gep(M, N);
      for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto& p = pairs[i];
        if (std::abs(p.value.imag()) > 1e-12 * std::max(1.0, std::abs(p.value.real()))) {
          why = "imaginary part " + num(p.value.imag());
          return false;
        }
        if (i > 0 && p.value.real() < pairs[i - 1].value.real()) {
          why = "not sorted";
          return false;
        }
        Eigen::VectorXcd r = M.cast<std::complex<double>>() * p.vector - p.value * (N.cast<std::complex<double>>() * p.vector);
        if (r.norm() > 1e-10 * (M.norm() + std::abs(p.value) * N.norm()) * p.vector.norm()) {
          why = "pencil residual";
          return false;
        }
      }
      return true;
    });
  }});

  suites.push_back({"quotients invariant under basis permutation and scaling", [](std::size_t cases, std::uint64_t seed) {
    // Three fixed clusters; each case permutes and rescales the two bases.
    static const std::vector<ClusterSetup> setups = [] {
      std::vector<ClusterSetup> s;
      s.push_back(make_setup(rect_stretch(8, MeshPattern::Left, 0.1), {2, 3, 0}));
      s.push_back(make_setup(triangle_case(TriangleCase::C, 1e-3, 3), {2, 3, 0}));
      s.push_back(make_setup(rect_stretch(6, MeshPattern::Crossed, 0.05), {2, 3, 0}));
      s.push_back(make_setup(rect_stretch(6, MeshPattern::Right, 0.05), {1, 1, 0}));
      return s;
    }();
    return run_cases("quotients invariant under basis permutation and scaling", cases, seed,
                     [](Rng& rng, std::size_t c, std::string& why) {
      const ClusterSetup& s = setups[c % setups.size()];
      const WeightMode mode = (c / setups.size()) % 2 ? WeightMode::Det : WeightMode::PaperD;
      auto ref_sys = build_small_system(s.tilde, s.basis, s.coeffs, s.cluster, mode);
      auto ref = solve_small_system(ref_sys);
      auto ref_f = reconstruct(s, s.tilde, ref);

      const std::size_t M = s.tilde.size();
      std::vector<std::size_t> perm(M), perm2(M);
      std::iota(perm.begin(), perm.end(), 0);
      std::iota(perm2.begin(), perm2.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      std::shuffle(perm2.begin(), perm2.end(), rng);
      std::vector<FEFunction> tilde, basis;
      for (std::size_t k = 0; k < M; ++k) {
        double scale = uniform(rng, 0.5, 2.0) * (rng() % 2 ? 1.0 : -1.0);
        tilde.push_back(s.tilde[perm[k]].scaled(scale));
        basis.push_back(s.basis[perm2[k]]);
      }
      auto sys = build_small_system(tilde, basis, s.coeffs, s.cluster, mode);
      auto sol = solve_small_system(sys);
      for (std::size_t i = 0; i < M; ++i)
        if (!near_rel(sol.quotients[i], ref.quotients[i], 1e-10, why, "sorted quotient")) return false;
      auto f = reconstruct(s, tilde, sol);
      for (std::size_t i = 0; i < M; ++i) {
        // Up to sign: on symmetric meshes the largest nodal magnitude can be
        // attained with both signs, so the sign convention is not stable.
        const double d = std::min((f[i].values() - ref_f[i].values()).cwiseAbs().maxCoeff(),
                                  (f[i].values() + ref_f[i].values()).cwiseAbs().maxCoeff());
        if (d > 1e-8) {
          why = "reconstructed function " + std::to_string(i) + " differs by " + num(d);
          return false;
        }
      }
      return true;
    });
  }});

  suites.push_back({"antisymmetry sign and scale invariance", [](std::size_t cases, std::uint64_t seed) {
    return run_cases("antisymmetry sign and scale invariance", cases, seed, [](Rng& rng, std::size_t, std::string& why) {
      const std::size_t n = 4 + rng() % 10;
      const auto pattern = static_cast<MeshPattern>(rng() % 3);
      const double eps = uniform(rng, 0, 0.2);
      auto pair = rect_stretch(n, pattern, eps);
      // Vertical reflection maps the stretched lattice onto itself for every pattern.
      const auto axis = rng() % 2 ? ReflectionAxis::vertical(0.5 * (1 + eps)) : ReflectionAxis::horizontal(0.5);
      const double tol = 1e-9 * pair.mesh_t->diameter();
      FEFunction u = random_function(rng, pair.mesh_t);
      const double c = uniform(rng, 0.1, 10.0);
      const double a = antisymmetry(u, axis, tol);
      if (!(a >= 0.0 && a <= 2.0 + 1e-12)) {
        why = "A out of [0, 2]: " + num(a);
        return false;
      }
      return near_rel(antisymmetry(u.scaled(-1.0), axis, tol), a, 1e-12, why, "sign") &&
             near_rel(antisymmetry(u.scaled(c), axis, tol), a, 1e-12, why, "scale");
    });
  }});

  return suites;
}

}  // namespace eigstab::testing
