#include "ddfem/quality.hpp"

#include "ddfem/factorization.hpp"

#include <algorithm>

namespace ddfem {

ElementQuality element_quality(const ElementGeometry& geom) {
  ElementQuality e;
  const auto [dmin, dmax] = std::minmax_element(geom.dets.begin(), geom.dets.end());
  const auto [tmin, tmax] = std::minmax_element(geom.theta.begin(), geom.theta.end());
  e.min_det = *dmin;
  e.det_ratio = *dmax / *dmin;
  e.min_theta = *tmin;
  e.theta_ratio = *tmax / *tmin;
  for (std::size_t k = 0; k < geom.jacobians.size(); ++k) {
    e.alpha = std::max(e.alpha, small_norm2(geom.inverse_transposes[k]));
    e.beta = std::max(e.beta, small_norm2(geom.jacobians[k]));
  }
  return e;
}

QualityReport compute_quality(const std::vector<ElementGeometry>& geoms, const QuadratureRule& rule,
                              const SqpMatrix& sqp) {
  QualityReport rep;
  rep.sigma_qp = sqp.sigma;
  rep.tau_qp = sqp.tau;
  rep.min_weight = rule.min_weight();
  rep.max_weight = rule.max_weight();
  rep.elements.reserve(geoms.size());
  for (const auto& g : geoms) {
    const ElementQuality e = element_quality(g);
    rep.kappa1 = std::max(rep.kappa1, e.shape());
    rep.kappa2 = std::max(rep.kappa2, e.det_ratio);
    rep.theta_hat = std::max(rep.theta_hat, e.theta_ratio);
    rep.elements.push_back(e);
  }
  return rep;
}

}  // namespace ddfem
