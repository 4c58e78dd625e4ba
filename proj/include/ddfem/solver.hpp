#pragma once

#include "ddfem/assembly.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include <optional>
#include <vector>

namespace ddfem {

/// z = M^{-1} r for a symmetric positive definite M.
class Preconditioner {
 public:
  virtual ~Preconditioner() = default;
  virtual Eigen::VectorXd apply(const Eigen::VectorXd& r) const = 0;
};

class IdentityPreconditioner final : public Preconditioner {
 public:
  Eigen::VectorXd apply(const Eigen::VectorXd& r) const override { return r; }
};

/// Sparse LL^T with approximate minimum degree ordering.
class SparseCholesky final : public Preconditioner {
 public:
  /// Throws SingularMatrix when the factorization breaks down.
  explicit SparseCholesky(const SparseSymmetricMatrix& m);
  Eigen::VectorXd apply(const Eigen::VectorXd& r) const override { return solve(r); }
  Eigen::VectorXd solve(const Eigen::VectorXd& r) const;
  int dim() const noexcept { return dim_; }

 private:
  int dim_;
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>, Eigen::Lower, Eigen::AMDOrdering<int>> llt_;
};

/// Factors Kbar after confirming that every connected component of its graph
/// touches the Dirichlet boundary (has a row with strictly positive excess
/// diagonal). A floating component raises SingularMatrix naming its smallest node.
SparseCholesky factor_kbar(const SparseSymmetricMatrix& kbar);

struct SolveOptions {
  double tol = 1e-10;
  int max_iter = 10000;
};

struct SolveResult {
  Eigen::VectorXd x;
  int iterations = 0;
  bool converged = false;
  double relative_residual = 0.0;      // ||f - K x|| / ||f||, recomputed each iteration
  std::vector<double> residual_history;  // one entry per iteration, starting with the initial guess
  /// Extreme Ritz values of the preconditioned operator from the CG coefficients.
  double ritz_min = 0.0;
  double ritz_max = 0.0;
  double seconds = 0.0;
  double ritz_condition() const noexcept { return ritz_min > 0.0 ? ritz_max / ritz_min : 0.0; }
};

/// Preconditioned conjugate gradients from x = 0. `pre` may be null (plain CG).
/// Non-convergence within max_iter is reported, not thrown.
SolveResult pcg_solve(const SparseSymmetricMatrix& k, const Eigen::VectorXd& f, const Preconditioner* pre,
                      const SolveOptions& opts = {});

/// ceil(sqrt(kappa)/2 * ln(2/tol)) + 5, the iteration ceiling used to judge PCG runs.
int cg_iteration_bound(double kappa, double tol);

}  // namespace ddfem
