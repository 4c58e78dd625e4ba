#include "ddfem/dd_approx.hpp"

#include "ddfem/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ddfem {

std::vector<double> build_dbar(const std::vector<ElementFactors>& factors, const std::vector<ElementGeometry>& geoms,
                               const QuadratureRule& rule) {
  std::vector<double> dbar(factors.size());
  for (std::size_t t = 0; t < factors.size(); ++t) {
    const auto& g = geoms[t];
    const double f = *std::min_element(g.theta.begin(), g.theta.end());
    const double gt = *std::min_element(g.dets.begin(), g.dets.end());
    dbar[t] = rule.min_weight() * f * gt * factors[t].alpha * factors[t].alpha;
  }
  return dbar;
}

SparseSymmetricMatrix build_kbar(const IncidenceMatrix& a, const std::vector<double>& dbar) {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(a.num_rows()) * 4);
  for (int r = 0; r < a.num_rows(); ++r) {
    const Arc& arc = a.arcs()[static_cast<std::size_t>(r)];
    const double c = dbar[static_cast<std::size_t>(r / a.arcs_per_element())];
    if (arc.head >= 0) trips.emplace_back(arc.head, arc.head, c);
    if (arc.tail >= 0) trips.emplace_back(arc.tail, arc.tail, c);
    if (arc.head >= 0 && arc.tail >= 0) {
      trips.emplace_back(arc.head, arc.tail, -c);
      trips.emplace_back(arc.tail, arc.head, -c);
    }
  }
  Eigen::SparseMatrix<double> m(a.num_columns(), a.num_columns());
  m.setFromTriplets(trips.begin(), trips.end());
  return SparseSymmetricMatrix(std::move(m));
}

Eigen::MatrixXd element_kbar(int nodes_per_element, double dbar) {
  const Eigen::MatrixXd at = local_incidence(nodes_per_element);
  return dbar * (at.transpose() * at);
}

HBlock build_h_block(const ElementFactors& f, double dbar) {
  HBlock b;
  b.jbar = (f.d.array().sqrt() / std::sqrt(dbar)).matrix().asDiagonal() * f.j;
  b.h = b.jbar.transpose() * b.jbar;
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(b.jbar);
  b.sigma_max = svd.singularValues()(0);
  b.sigma_min = svd.singularValues()(svd.singularValues().size() - 1);
  return b;
}

HReport build_h_blocks(const std::vector<ElementFactors>& factors, const std::vector<double>& dbar, int threads) {
  HReport rep;
  rep.blocks.resize(factors.size());
  parallel_for(static_cast<int>(factors.size()), threads, [&](int t) {
    const auto tu = static_cast<std::size_t>(t);
    rep.blocks[tu] = build_h_block(factors[tu], dbar[tu]);
  });
  double smax = 0.0;
  double smin = std::numeric_limits<double>::infinity();
  for (const auto& b : rep.blocks) {
    smax = std::max(smax, b.sigma_max);
    smin = std::min(smin, b.sigma_min);
    rep.kappa_max_element = std::max(rep.kappa_max_element, b.kappa());
  }
  if (!rep.blocks.empty()) rep.kappa_global = (smax / smin) * (smax / smin);
  return rep;
}

double chi3_bound(const QualityReport& q) {
  return q.theta_hat * q.kappa1 * q.kappa1 * q.kappa2 * q.rule_factor();
}

double element_chi3_bound(const ElementQuality& e, const QualityReport& q) {
  return e.theta_ratio * e.shape() * e.shape() * e.det_ratio * q.rule_factor();
}

DDApproximation build_dd_approximation(const IncidenceMatrix& a, const std::vector<ElementFactors>& factors,
                                       const std::vector<ElementGeometry>& geoms, const QuadratureRule& rule,
                                       const QualityReport& quality, int threads) {
  DDApproximation dd;
  dd.dbar = build_dbar(factors, geoms, rule);
  dd.kbar = build_kbar(a, dd.dbar);
  dd.h = build_h_blocks(factors, dd.dbar, threads);
  dd.chi3 = chi3_bound(quality);
  return dd;
}

}  // namespace ddfem
