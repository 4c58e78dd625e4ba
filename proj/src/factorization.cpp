#include "ddfem/factorization.hpp"

#include "ddfem/parallel.hpp"

#include <cmath>
#include <ostream>

namespace ddfem {

IncidenceMatrix build_incidence(const Mesh& mesh) {
  const int n = mesh.num_free();
  const int l = mesh.nodes_per_element();
  std::vector<Arc> arcs;
  arcs.reserve(static_cast<std::size_t>(mesh.num_elements() * (l - 1)));
  for (int t = 0; t < mesh.num_elements(); ++t) {
    const auto el = mesh.element(t);
    const int tail = el[0] < n ? el[0] : -1;
    for (int mu = 1; mu < l; ++mu) {
      const int g = el[static_cast<std::size_t>(mu)];
      arcs.push_back({g < n ? g : -1, tail});
    }
  }
  return {n, l - 1, std::move(arcs)};
}

Eigen::SparseMatrix<double> IncidenceMatrix::to_sparse() const {
  std::vector<Eigen::Triplet<double>> trips;
  for (int r = 0; r < num_rows(); ++r) {
    const Arc& a = arcs_[static_cast<std::size_t>(r)];
    if (a.head >= 0) trips.emplace_back(r, a.head, 1.0);
    if (a.tail >= 0) trips.emplace_back(r, a.tail, -1.0);
  }
  Eigen::SparseMatrix<double> m(num_rows(), num_free_);
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

void IncidenceMatrix::write_arcs(std::ostream& out) const {
  for (const Arc& a : arcs_) out << "arc " << a.head + 1 << ' ' << a.tail + 1 << '\n';
}

Eigen::MatrixXd local_incidence(int nodes_per_element) {
  const int l = nodes_per_element;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(l - 1, l);
  a.col(0).setConstant(-1.0);
  a.rightCols(l - 1).setIdentity();
  return a;
}

double small_norm2(const Eigen::MatrixXd& a) {
  if (a.rows() == 2 && a.cols() == 2) {
    const double p = std::hypot(a(0, 0) + a(1, 1), a(0, 1) - a(1, 0));
    const double q = std::hypot(a(0, 0) - a(1, 1), a(0, 1) + a(1, 0));
    return 0.5 * (p + q);
  }
  const Eigen::Matrix3d ata = (a.transpose() * a).eval();
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(ata, Eigen::EigenvaluesOnly);
  return std::sqrt(es.eigenvalues().maxCoeff());
}

ElementFactors build_element_factors(const ElementGeometry& geom, const SqpMatrix& sqp, const QuadratureRule& rule) {
  const int q = rule.size();
  const int d = rule.dim();
  ElementFactors f;
  f.element = geom.element;
  for (int k = 0; k < q; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    f.alpha = std::max(f.alpha, small_norm2(geom.inverse_transposes[ku]));
    f.beta = std::max(f.beta, small_norm2(geom.jacobians[ku]));
  }
  f.r = Eigen::MatrixXd::Zero(q * d, q * d);
  f.d.resize(q * d);
  for (int k = 0; k < q; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    f.r.block(k * d, k * d, d, d) = geom.inverse_transposes[ku] / f.alpha;
    f.d.segment(k * d, d).setConstant(f.alpha * f.alpha * geom.theta[ku] * geom.dets[ku] * rule.weight(k));
  }
  f.j = f.r * sqp.entries;
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(f.j);
  f.j_sigma_max = svd.singularValues()(0);
  f.j_sigma_min = svd.singularValues()(svd.singularValues().size() - 1);
  return f;
}

std::vector<ElementFactors> all_element_factors(const std::vector<ElementGeometry>& geoms, const SqpMatrix& sqp,
                                                const QuadratureRule& rule, int threads) {
  std::vector<ElementFactors> out(geoms.size());
  parallel_for(static_cast<int>(geoms.size()), threads, [&](int t) {
    out[static_cast<std::size_t>(t)] = build_element_factors(geoms[static_cast<std::size_t>(t)], sqp, rule);
  });
  return out;
}

Eigen::MatrixXd middle_product(const ElementFactors& f) {
  return f.j.transpose() * f.d.asDiagonal() * f.j;
}

FactorizationReport verify_first_factorization(const Mesh& mesh, const std::vector<ElementFactors>& factors,
                                               const IncidenceMatrix& a, const std::vector<Eigen::MatrixXd>& element_k,
                                               const SparseSymmetricMatrix& k, double tol) {
  FactorizationReport rep;
  const Eigen::MatrixXd at = local_incidence(mesh.nodes_per_element());
  const int rows = a.arcs_per_element();
  std::vector<Eigen::Triplet<double>> trips;
  for (int t = 0; t < mesh.num_elements(); ++t) {
    const auto tu = static_cast<std::size_t>(t);
    const Eigen::MatrixXd mid = middle_product(factors[tu]);
    const Eigen::MatrixXd rebuilt = at.transpose() * mid * at;
    const double norm = element_k[tu].norm();
    const double res = (element_k[tu] - rebuilt).norm() / (norm > 0.0 ? norm : 1.0);
    if (rep.worst_element < 0 || res > rep.max_element_residual) {
      rep.max_element_residual = res;
      rep.worst_element = t;
    }
    // Reduced global product A_t^T M_t A_t, scattered through the incidence arcs.
    for (int r = 0; r < rows; ++r) {
      const Arc& ar = a.arc(t, r);
      for (int s = 0; s < rows; ++s) {
        const Arc& as = a.arc(t, s);
        const double v = mid(r, s);
        for (const auto& [i, si] : {std::pair{ar.head, 1.0}, std::pair{ar.tail, -1.0}}) {
          if (i < 0) continue;
          for (const auto& [j, sj] : {std::pair{as.head, 1.0}, std::pair{as.tail, -1.0}}) {
            if (j >= 0) trips.emplace_back(i, j, si * sj * v);
          }
        }
      }
    }
  }
  Eigen::SparseMatrix<double> product(a.num_columns(), a.num_columns());
  product.setFromTriplets(trips.begin(), trips.end());
  const double knorm = k.matrix().norm();
  rep.global_residual = (k.matrix() - product).norm() / (knorm > 0.0 ? knorm : 1.0);
  rep.passed = rep.max_element_residual <= tol && rep.global_residual <= tol;
  return rep;
}

}  // namespace ddfem
