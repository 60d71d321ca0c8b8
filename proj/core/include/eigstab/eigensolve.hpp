#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "eigstab/fem.hpp"

namespace eigstab {

struct EigenPair {
  double value = 0.0;
  Eigen::VectorXd vector;  // interior DOFs, B-normalized
};

struct SolverOptions {
  double tol = 1e-12;            // relative residual |Ax - lBx| / |Ax|, floored at its rounding error
  std::size_t max_iter = 10000;  // cap on applications of A^{-1}B
  std::uint64_t seed = 0x9e3779b97f4a7c15ULL;
  std::size_t dense_threshold = 200;  // solve densely at or below this dimension
};

/// Smallest `m` eigenpairs of A x = lambda B x for symmetric positive definite
/// A and B, ascending, B-orthonormal.
///
/// Vectors inside a cluster of (nearly) equal eigenvalues only span the
/// invariant subspace; which basis comes out is up to the solver.
std::vector<EigenPair> smallest_pairs(const SparseSym& A, const SparseSym& B, std::size_t m,
                                      const SolverOptions& opts = {});

/// |A x - lambda B x|_2 / |A x|_2.
double residual(const SparseSym& A, const SparseSym& B, const EigenPair& pair);

struct SmallEigenPair {
  std::complex<double> value;
  Eigen::VectorXcd vector;  // unit 2-norm
};

/// All eigenpairs of the dense pencil M s = mu N s (QZ), sorted by ascending
/// real part. N must be nonsingular.
std::vector<SmallEigenPair> dense_gep(const Eigen::MatrixXd& M, const Eigen::MatrixXd& N);

}  // namespace eigstab
