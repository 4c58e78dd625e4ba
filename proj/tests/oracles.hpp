#pragma once

// Independent reference computations used only by the tests. Nothing here
// calls into the code path being checked.

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <vector>

namespace oracle {

inline double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

/// Barycentric coordinates (1 - sum z, z_1, .., z_d) of a reference point.
inline Eigen::VectorXd barycentric(const Eigen::VectorXd& z) {
  Eigen::VectorXd lam(z.size() + 1);
  lam(0) = 1.0 - z.sum();
  lam.tail(z.size()) = z;
  return lam;
}

/// Closed-form Lagrange shape function attached to reference node `node`
/// (p = 1: lambda_j; p = 2: lambda_j (2 lambda_j - 1) or 4 lambda_a lambda_b).
inline double lagrange_shape(int order, const Eigen::VectorXd& node, const Eigen::VectorXd& z) {
  const Eigen::VectorXd at_node = barycentric(node) * order;
  const Eigen::VectorXd lam = barycentric(z);
  std::vector<int> support;
  for (int j = 0; j < at_node.size(); ++j)
    for (int c = 0; c < static_cast<int>(std::lround(at_node(j))); ++c) support.push_back(j);
  if (order == 1) return lam(support[0]);
  if (support[0] == support[1]) return lam(support[0]) * (2.0 * lam(support[0]) - 1.0);
  return 4.0 * lam(support[0]) * lam(support[1]);
}

/// Integral of prod lambda_j^a_j over a simplex of volume `vol` in d dims.
inline double barycentric_monomial_integral(const std::vector<int>& a, double vol) {
  int total = 0;
  double num = factorial(static_cast<int>(a.size()) - 1);
  for (int e : a) {
    num *= factorial(e);
    total += e;
  }
  return vol * num / factorial(static_cast<int>(a.size()) - 1 + total);
}

/// Exactly integrated stiffness matrix of an affine p = 1 or p = 2 element with
/// constant conductivity. `verts` is d x (d+1) in reference vertex order and
/// `nodes` lists, per local node, its supporting vertices (one or two).
inline Eigen::MatrixXd exact_affine_stiffness(const Eigen::MatrixXd& verts, const std::vector<std::vector<int>>& nodes,
                                              double theta) {
  const int d = static_cast<int>(verts.rows());
  Eigen::MatrixXd p(d + 1, d + 1);
  p.row(0).setOnes();
  p.bottomRows(d) = verts;
  const double vol = std::abs(p.determinant()) / factorial(d);
  const Eigen::MatrixXd pinv = p.inverse();
  // grad lambda_j is row j of pinv, columns 1..d.
  auto glam = [&](int j) -> Eigen::VectorXd { return pinv.row(j).tail(d).transpose(); };

  // Each gradient is sum_c coeff_c * lambda_c * vector_c + constant vector:
  // represent grad N as list of (lambda index or -1 for constant, vector).
  struct Term {
    int lam;
    Eigen::VectorXd v;
  };
  auto grad_terms = [&](const std::vector<int>& s) {
    std::vector<Term> terms;
    if (s.size() == 1) {
      terms.push_back({-1, glam(s[0])});
    } else if (s[0] == s[1]) {
      terms.push_back({s[0], 4.0 * glam(s[0])});
      terms.push_back({-1, -glam(s[0])});
    } else {
      terms.push_back({s[1], 4.0 * glam(s[0])});
      terms.push_back({s[0], 4.0 * glam(s[1])});
    }
    return terms;
  };

  const int l = static_cast<int>(nodes.size());
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(l, l);
  for (int mu = 0; mu < l; ++mu) {
    for (int nu = 0; nu < l; ++nu) {
      double s = 0.0;
      for (const Term& a : grad_terms(nodes[static_cast<std::size_t>(mu)])) {
        for (const Term& b : grad_terms(nodes[static_cast<std::size_t>(nu)])) {
          std::vector<int> expo(static_cast<std::size_t>(d + 1), 0);
          if (a.lam >= 0) ++expo[static_cast<std::size_t>(a.lam)];
          if (b.lam >= 0) ++expo[static_cast<std::size_t>(b.lam)];
          s += a.v.dot(b.v) * barycentric_monomial_integral(expo, vol);
        }
      }
      k(mu, nu) = theta * s;
    }
  }
  return k;
}

/// Pencil eigenvalues on range(B) by the symmetric inverse square root route.
inline Eigen::VectorXd pencil_by_inverse_sqrt(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double tol = 1e-10) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eb(b);
  const double cutoff = tol * eb.eigenvalues().maxCoeff();
  std::vector<int> keep;
  for (int i = 0; i < b.rows(); ++i)
    if (eb.eigenvalues()(i) > cutoff) keep.push_back(i);
  Eigen::MatrixXd q(b.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) q.col(static_cast<Eigen::Index>(c)) = eb.eigenvectors().col(keep[c]);
  const Eigen::MatrixXd br = q.transpose() * b * q;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(br);
  const Eigen::MatrixXd inv_sqrt =
      es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
  const Eigen::MatrixXd c = inv_sqrt * (q.transpose() * a * q) * inv_sqrt;
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(c).eigenvalues();
}

/// Random symmetric positive semidefinite n x n matrix of the given rank.
template <class Rng>
Eigen::MatrixXd random_spsd(int n, int rank, Rng& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd f(n, rank);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < rank; ++j) f(i, j) = g(rng);
  return f * f.transpose();
}

}  // namespace oracle
