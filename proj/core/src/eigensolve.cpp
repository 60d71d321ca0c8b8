#include "eigstab/eigensolve.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>
#include <Eigen/SparseCholesky>

#include "eigstab/error.hpp"

namespace eigstab {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

void check_square(const SparseSym& A, const SparseSym& B) {
  if (A.matrix.rows() != A.matrix.cols() || B.matrix.rows() != B.matrix.cols() ||
      A.matrix.rows() != B.matrix.rows())
    throw Error(ErrorKind::DimensionMismatch, "A and B must be square of equal dimension");
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

double inf_norm(const Eigen::SparseMatrix<double>& M) {
  VectorXd rows = VectorXd::Zero(M.rows());
  for (Index k = 0; k < M.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(M, k); it; ++it) rows[it.row()] += std::abs(it.value());
  return rows.size() ? rows.maxCoeff() : 0.0;
}

void fix_sign(VectorXd& v) {
  Index imax = 0;
  v.cwiseAbs().maxCoeff(&imax);
  if (v[imax] < 0) v = -v;
}

std::vector<EigenPair> dense_pairs(const SparseSym& A, const SparseSym& B, std::size_t m) {
  const MatrixXd Ad(A.matrix), Bd(B.matrix);
  if (Eigen::LLT<MatrixXd>(Ad).info() != Eigen::Success)
    throw Error(ErrorKind::NotPositiveDefinite, "stiffness matrix is not positive definite");
  if (Eigen::LLT<MatrixXd>(Bd).info() != Eigen::Success)
    throw Error(ErrorKind::NotPositiveDefinite, "mass matrix is not positive definite");
  Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> ges(Ad, Bd);
  if (ges.info() != Eigen::Success) throw Error(ErrorKind::NoConvergence, "dense eigensolver failed");
  std::vector<EigenPair> out;
  for (std::size_t i = 0; i < m; ++i) {
    VectorXd v = ges.eigenvectors().col(static_cast<Index>(i));
    v /= std::sqrt(v.dot(Bd * v));
    fix_sign(v);
    out.push_back({ges.eigenvalues()[static_cast<Index>(i)], std::move(v)});
  }
  return out;
}

/// Growing B-orthonormal basis with cached B*V.
class BBasis {
 public:
  BBasis(const SparseSym& B, Index n, Index capacity, std::mt19937_64& rng)
      : B_(B), V_(n, capacity), BV_(n, capacity), rng_(rng) {}

  Index size() const { return used_; }
  const MatrixXd& V() const { return V_; }

  /// Orthogonalize `w` against the basis and append it. Directions that
  /// vanish numerically are replaced by random vectors.
  void append(VectorXd w) {
    for (int attempt = 0; attempt < 8; ++attempt) {
      const double n0 = std::sqrt(std::max(w.dot(B_.matrix * w), 0.0));
      VectorXd bw = B_.matrix * w;
      double nrm = n0;
      // Classical Gram-Schmidt, repeated while a pass still removes more than
      // half of the norm.
      for (int pass = 0; pass < 4 && used_ > 0; ++pass) {
        VectorXd c = BV_.leftCols(used_).transpose() * w;
        w.noalias() -= V_.leftCols(used_) * c;
        bw = B_.matrix * w;
        const double before = nrm;
        nrm = std::sqrt(std::max(w.dot(bw), 0.0));
        if (pass > 0 && nrm > 0.5 * before) break;
      }
      if (nrm > 1e-13 * n0 && nrm > 0.0) {
        V_.col(used_) = w / nrm;
        BV_.col(used_) = bw / nrm;
        ++used_;
        return;
      }
      w = random_vector();
    }
    throw Error(ErrorKind::NoConvergence, "could not extend the Krylov basis");
  }

  VectorXd random_vector() {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    VectorXd r(V_.rows());
    for (Index i = 0; i < r.size(); ++i) r[i] = dist(rng_);
    return r;
  }

 private:
  const SparseSym& B_;
  MatrixXd V_, BV_;
  Index used_ = 0;
  std::mt19937_64& rng_;
};

std::vector<EigenPair> krylov_pairs(const SparseSym& A, const SparseSym& B, std::size_t m,
                                    const SolverOptions& opts) {
  const Index n = A.matrix.rows();
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(A.matrix);
  if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().minCoeff() > 0.0))
    throw Error(ErrorKind::NotPositiveDefinite, "stiffness matrix is not positive definite");
  {
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(B.matrix);
    if (llt.info() != Eigen::Success)
      throw Error(ErrorKind::NotPositiveDefinite, "mass matrix is not positive definite");
  }

  const Index block = std::min<Index>(n, static_cast<Index>(m + std::max<std::size_t>(m, 4)));
  const Index steps = std::max<Index>(3, (40 + block - 1) / block);
  const Index capacity = std::min<Index>(n, block * (steps + 1));

  const double eps = std::numeric_limits<double>::epsilon();
  const double a_norm = inf_norm(A.matrix), b_norm = inf_norm(B.matrix);

  std::mt19937_64 rng(opts.seed);
  MatrixXd X(n, block);
  {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (Index j = 0; j < block; ++j)
      for (Index i = 0; i < n; ++i) X(i, j) = dist(rng);
  }

  std::size_t applications = 0;
  double best = std::numeric_limits<double>::infinity();
  int stagnant = 0;
  for (;;) {
    BBasis basis(B, n, capacity, rng);
    for (Index j = 0; j < block && basis.size() < capacity; ++j) basis.append(X.col(j));
    // Z = A^{-1} B V, filled while the basis grows.
    MatrixXd Z(n, capacity);
    Index solved = 0, start = 0;
    while (basis.size() < capacity) {
      const Index end = basis.size();
      for (Index j = start; j < end && basis.size() < capacity; ++j) {
        Z.col(j) = ldlt.solve(B.matrix * basis.V().col(j));
        ++applications;
        solved = j + 1;
        basis.append(Z.col(j));
      }
      start = end;
    }
    const MatrixXd V = basis.V().leftCols(basis.size());
    for (Index j = solved; j < V.cols(); ++j) {
      Z.col(j) = ldlt.solve(B.matrix * V.col(j));
      ++applications;
    }

    // Rayleigh-Ritz on the inverse operator: V^T B A^{-1} B V. Projecting A
    // directly would let the stiff modes in V limit the attainable residual.
    MatrixXd G = V.transpose() * (B.matrix * Z.leftCols(V.cols()));
    G = 0.5 * (G + G.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<MatrixXd> ritz(G);
    if (ritz.info() != Eigen::Success) throw Error(ErrorKind::NoConvergence, "Rayleigh-Ritz step failed");

    const Index keep = std::min<Index>(block, V.cols());
    X = V * ritz.eigenvectors().rightCols(keep).rowwise().reverse();
    const MatrixXd AX = A.matrix * X;
    const MatrixXd BX = B.matrix * X;
    VectorXd theta(keep);
    for (Index c = 0; c < keep; ++c) theta[c] = X.col(c).dot(AX.col(c)) / X.col(c).dot(BX.col(c));
    // Converged when every residual is below tol or below the rounding error of
    // forming x = V y and evaluating A x - theta B x, whichever is larger.
    const double round = 16.0 * std::sqrt(static_cast<double>(V.cols())) * eps;
    double worst = 0.0, worst_floor = 0.0;
    bool converged = true;
    for (std::size_t i = 0; i < m; ++i) {
      const auto c = static_cast<Index>(i);
      const double ax = AX.col(c).norm();
      const double r = (AX.col(c) - theta[c] * BX.col(c)).norm() / ax;
      const double floor = round * (a_norm + std::abs(theta[c]) * b_norm) * X.col(c).norm() / ax;
      if (r > worst) {
        worst = r;
        worst_floor = floor;
      }
      if (r > std::max(opts.tol, floor)) converged = false;
    }
    if (converged) {
      std::vector<EigenPair> out;
      for (std::size_t i = 0; i < m; ++i) {
        VectorXd v = X.col(static_cast<Index>(i));
        v /= std::sqrt(v.dot(B.matrix * v));
        fix_sign(v);
        out.push_back({theta[static_cast<Index>(i)], std::move(v)});
      }
      std::stable_sort(out.begin(), out.end(), [](const EigenPair& a, const EigenPair& b) { return a.value < b.value; });
      return out;
    }
    if (worst < 0.5 * best) {
      best = worst;
      stagnant = 0;
    } else if (++stagnant >= 5) {
      throw Error(ErrorKind::NoConvergence, "residual stagnated at " + sci(worst) + " (rounding floor " + sci(worst_floor) + ") after " +
                                                std::to_string(applications) + " iterations");
    }
    if (applications >= opts.max_iter)
      throw Error(ErrorKind::NoConvergence, "no convergence after " + std::to_string(applications) +
                                                " iterations (residual " + sci(worst) + ")");
  }
}

}  // namespace

std::vector<EigenPair> smallest_pairs(const SparseSym& A, const SparseSym& B, std::size_t m,
                                      const SolverOptions& opts) {
  check_square(A, B);
  const auto n = static_cast<std::size_t>(A.matrix.rows());
  if (m < 1 || m > n)
    throw Error(ErrorKind::InvalidArgument,
                "requested " + std::to_string(m) + " eigenpairs of a " + std::to_string(n) + "-dimensional problem");
  if (n <= opts.dense_threshold || n <= 2 * (m + std::max<std::size_t>(m, 4))) return dense_pairs(A, B, m);
  return krylov_pairs(A, B, m, opts);
}

double residual(const SparseSym& A, const SparseSym& B, const EigenPair& pair) {
  check_square(A, B);
  if (pair.vector.size() != A.matrix.rows())
    throw Error(ErrorKind::DimensionMismatch, "eigenvector length does not match the matrices");
  const VectorXd ax = A.matrix * pair.vector;
  const double denom = ax.norm();
  const VectorXd r = ax - pair.value * (B.matrix * pair.vector);
  return denom > 0 ? r.norm() / denom : r.norm();
}

std::vector<SmallEigenPair> dense_gep(const Eigen::MatrixXd& M, const Eigen::MatrixXd& N) {
  if (M.rows() != M.cols() || N.rows() != N.cols() || M.rows() != N.rows())
    throw Error(ErrorKind::DimensionMismatch, "pencil matrices must be square of equal size");
  const Index size = M.rows();
  if (size < 1 || size > 8) throw Error(ErrorKind::InvalidArgument, "dense_gep supports sizes 1..8");
  const double nnorm = N.norm();
  Eigen::FullPivLU<MatrixXd> lu(N);
  lu.setThreshold(1e-12);
  if (!(nnorm > 0.0) || lu.rank() < size) throw Error(ErrorKind::SingularN, "N is singular");

  Eigen::GeneralizedEigenSolver<MatrixXd> qz(M, N, false);
  if (qz.info() != Eigen::Success) throw Error(ErrorKind::NoConvergence, "QZ iteration failed");

  std::vector<SmallEigenPair> out;
  for (Index i = 0; i < size; ++i) {
    const std::complex<double> mu = qz.alphas()[i] / qz.betas()[i];
    // Eigenvector: right singular vector of the smallest singular value of M - mu N.
    const Eigen::MatrixXcd pencil = M.cast<std::complex<double>>() - mu * N.cast<std::complex<double>>();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(pencil, Eigen::ComputeFullV);
    Eigen::VectorXcd s = svd.matrixV().col(size - 1);
    Index imax = 0;
    s.cwiseAbs().maxCoeff(&imax);
    s *= std::conj(s[imax]) / std::abs(s[imax]);
    s.normalize();
    out.push_back({mu, std::move(s)});
  }
  std::stable_sort(out.begin(), out.end(), [](const SmallEigenPair& a, const SmallEigenPair& b) {
    if (a.value.real() != b.value.real()) return a.value.real() < b.value.real();
    return a.value.imag() < b.value.imag();
  });
  return out;
}

}  // namespace eigstab
