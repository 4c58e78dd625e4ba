#include "ddfem/solver.hpp"

#include "ddfem/errors.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

namespace ddfem {

SparseCholesky::SparseCholesky(const SparseSymmetricMatrix& m) : dim_(m.dim()) {
  if (dim_ == 0) return;
  llt_.compute(m.matrix());
  if (llt_.info() != Eigen::Success) throw SingularMatrix("sparse Cholesky factorization failed: matrix is not SPD");
}

Eigen::VectorXd SparseCholesky::solve(const Eigen::VectorXd& r) const {
  if (dim_ == 0) return r;
  return llt_.solve(r);
}

SparseCholesky factor_kbar(const SparseSymmetricMatrix& kbar) {
  const auto& m = kbar.matrix();
  const int n = kbar.dim();
  // Union-find over the off-diagonal graph.
  std::vector<int> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int i) {
    while (parent[static_cast<std::size_t>(i)] != i) {
      parent[static_cast<std::size_t>(i)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(i)])];
      i = parent[static_cast<std::size_t>(i)];
    }
    return i;
  };
  std::vector<double> excess(static_cast<std::size_t>(n), 0.0);
  std::vector<double> diag(static_cast<std::size_t>(n), 0.0);
  for (int j = 0; j < m.outerSize(); ++j) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(m, j); it; ++it) {
      const int i = static_cast<int>(it.row());
      if (i == j) {
        diag[static_cast<std::size_t>(i)] = it.value();
        excess[static_cast<std::size_t>(i)] += it.value();
      } else if (it.value() != 0.0) {
        excess[static_cast<std::size_t>(i)] -= std::abs(it.value());
        parent[static_cast<std::size_t>(find(i))] = find(j);
      }
    }
  }
  std::vector<char> grounded(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i)
    if (excess[static_cast<std::size_t>(i)] > 1e-12 * diag[static_cast<std::size_t>(i)]) grounded[static_cast<std::size_t>(find(i))] = 1;
  for (int i = 0; i < n; ++i) {
    if (!grounded[static_cast<std::size_t>(find(i))]) {
      throw SingularMatrix("diagonally dominant approximation is singular: the component containing node " +
                           std::to_string(i + 1) + " has no Dirichlet node");
    }
  }
  return SparseCholesky(kbar);
}

int cg_iteration_bound(double kappa, double tol) {
  return static_cast<int>(std::ceil(0.5 * std::sqrt(kappa) * std::log(2.0 / tol))) + 5;
}

SolveResult pcg_solve(const SparseSymmetricMatrix& k, const Eigen::VectorXd& f, const Preconditioner* pre,
                      const SolveOptions& opts) {
  const auto start = std::chrono::steady_clock::now();
  const auto& a = k.matrix();
  SolveResult res;
  res.x = Eigen::VectorXd::Zero(f.size());
  const double fnorm = f.norm();
  auto finish = [&]() {
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return res;
  };
  if (fnorm == 0.0) {
    res.converged = true;
    res.residual_history.push_back(0.0);
    return finish();
  }
  const IdentityPreconditioner identity;
  const Preconditioner& m = pre ? *pre : identity;

  Eigen::VectorXd r = f;
  Eigen::VectorXd z = m.apply(r);
  Eigen::VectorXd p = z;
  double rz = r.dot(z);
  res.relative_residual = 1.0;
  res.residual_history.push_back(1.0);

  // Lanczos tridiagonal from the CG coefficients, for Ritz values.
  std::vector<double> alphas;
  std::vector<double> betas;

  while (res.iterations < opts.max_iter) {
    const Eigen::VectorXd ap = a * p;
    const double pap = p.dot(ap);
    if (!(pap > 0.0)) break;
    const double alpha = rz / pap;
    res.x += alpha * p;
    r -= alpha * ap;
    ++res.iterations;
    alphas.push_back(alpha);

    res.relative_residual = (f - a * res.x).norm() / fnorm;
    res.residual_history.push_back(res.relative_residual);
    if (res.relative_residual <= opts.tol) {
      res.converged = true;
      break;
    }
    z = m.apply(r);
    const double rz_new = r.dot(z);
    const double beta = rz_new / rz;
    betas.push_back(beta);
    rz = rz_new;
    p = z + beta * p;
  }

  const auto steps = static_cast<Eigen::Index>(alphas.size());
  if (steps > 0) {
    Eigen::VectorXd diag(steps);
    Eigen::VectorXd off(std::max<Eigen::Index>(steps - 1, 0));
    for (Eigen::Index j = 0; j < steps; ++j) {
      diag(j) = 1.0 / alphas[static_cast<std::size_t>(j)];
      if (j > 0) diag(j) += betas[static_cast<std::size_t>(j - 1)] / alphas[static_cast<std::size_t>(j - 1)];
      if (j + 1 < steps) off(j) = std::sqrt(betas[static_cast<std::size_t>(j)]) / alphas[static_cast<std::size_t>(j)];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, off, Eigen::EigenvaluesOnly);
    res.ritz_min = es.eigenvalues().minCoeff();
    res.ritz_max = es.eigenvalues().maxCoeff();
  }
  return finish();
}

}  // namespace ddfem
