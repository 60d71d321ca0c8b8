#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "eigstab/eigensolve.hpp"
#include "eigstab/fem.hpp"
#include "eigstab/mesh.hpp"

namespace eigstab {

/// Weight used in the right-hand form b~_t.
///   PaperD: sum_j d_j (u,v)_{T_j}        (first-order volume change)
///   Det:    sum_j |det S_j| (u,v)_{T_j}  (makes mu the exact difference quotient)
enum class WeightMode { PaperD, Det };

const char* to_string(WeightMode mode) noexcept;

/// First-order data of one element map S (per unit t).
struct ElementCoeff {
  Eigen::Matrix2d P;      // (S^{-1} S^{-T} - I) / t
  double d = 0.0;         // (|det S| - 1) / t
  double det = 1.0;       // |det S|
  Eigen::Matrix2d inv_T;  // S^{-T}
};

struct ElementCoeffs {
  MeshPtr mesh0;
  std::vector<ElementCoeff> elements;
  double t = 0.0;
};

ElementCoeffs element_coeffs(const MatchedMeshPair& pair);

/// Eigenvalue cluster n..N (1-based, inclusive) with its reference eigenvalue.
struct ClusterSpec {
  std::size_t first = 1;
  std::size_t last = 1;
  double lambda_ref = 0.0;

  std::size_t size() const { return last - first + 1; }
  void validate() const;
};

/// Same nodal values on mesh0; composition with the element maps keeps P1
/// functions P1.
FEFunction pull_back(const FEFunction& f, const MatchedMeshPair& pair);
FEFunction push_forward(const FEFunction& f, const MatchedMeshPair& pair);

double tilde_a(const FEFunction& u, const FEFunction& v, const ElementCoeffs& coeffs, double lambda_ref);
double tilde_b(const FEFunction& u, const FEFunction& v, const ElementCoeffs& coeffs, WeightMode mode);

struct SmallSystem {
  Eigen::MatrixXd Mt;  // (Mt)_{ij} = a~(phi~_i, phi_j)
  Eigen::MatrixXd Nt;  // (Nt)_{ij} = b~(phi~_i, phi_j)
  WeightMode weight_mode = WeightMode::PaperD;
};

/// Throws RankDeficientBasis when the L2 Gram matrix of `basis_tilde` has
/// condition number above 1e8.
SmallSystem build_small_system(const std::vector<FEFunction>& basis_tilde, const std::vector<FEFunction>& basis_E,
                               const ElementCoeffs& coeffs, const ClusterSpec& cluster, WeightMode mode);

struct SmallSolution {
  std::vector<double> quotients;  // ascending
  Eigen::MatrixXd sigma;          // column i belongs to quotients[i]
  bool unresolved_subcluster = false;
};

/// Eigenpairs of the small system. The coefficients of u~_i = sum_k s_k phi~_k
/// satisfy Mt^T s = mu Nt^T s under the row/column convention above; both
/// pencils share their eigenvalues. Throws ComplexQuotients when an
/// eigenvalue has |Im mu| > 1e-8 (1 + |Re mu|).
SmallSolution solve_small_system(const SmallSystem& system);

/// sum_k sigma_k f_k over functions on a common mesh.
FEFunction combine(const std::vector<FEFunction>& basis, const Eigen::VectorXd& sigma);

struct StabilizeOptions {
  WeightMode weight_mode = WeightMode::PaperD;
  SolverOptions solver;
};

struct StabilizedCluster {
  ClusterSpec cluster;  // lambda_ref filled from the reference solve
  WeightMode weight_mode = WeightMode::PaperD;

  std::vector<double> quotients;      // mu_i ascending
  Eigen::MatrixXd coefficients;       // column i: sigma_i over the Step-2 basis
  std::vector<FEFunction> functions_on_Kt;
  std::vector<FEFunction> functions_on_K0;
  SmallSystem system;

  // Direct FEM data for the cluster: eigenvalues on K^0 and K^t, residuals,
  // and the (solver-arbitrary) perturbed eigenfunctions normalized on K^t.
  std::vector<double> lambda0;
  std::vector<double> lambda_t;
  std::vector<double> residual0;
  std::vector<double> residual_t;
  std::vector<FEFunction> standard_on_Kt;

  bool unresolved_subcluster = false;
  std::vector<std::string> warnings;
};

/// Full pipeline: reference and perturbed eigensolves, small pencil, and
/// reconstruction of the stabilized eigenfunctions on K^t.
StabilizedCluster stabilize_cluster(const MatchedMeshPair& pair, ClusterSpec cluster,
                                    const StabilizeOptions& opts = {});

/// L2-normalized copy whose largest-magnitude nodal value is positive.
FEFunction normalized_with_sign(const FEFunction& f);

}  // namespace eigstab
