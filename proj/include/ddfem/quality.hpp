#pragma once

#include "ddfem/assembly.hpp"
#include "ddfem/reference_element.hpp"

#include <vector>

namespace ddfem {

struct ElementQuality {
  double alpha = 0.0;        // max_k ||grad phi_t(r_k)^{-1}||
  double beta = 0.0;         // max_k ||grad phi_t(r_k)||
  double det_ratio = 1.0;    // max_k det / min_k det
  double theta_ratio = 1.0;  // max_k theta / min_k theta
  double min_det = 0.0;      // g_t
  double min_theta = 0.0;    // f_t
  double shape() const noexcept { return alpha * beta; }
};

/// Mesh, conductivity and quadrature scalars, all sampled at Gauss points.
struct QualityReport {
  std::vector<ElementQuality> elements;
  double kappa1 = 1.0;     // max_t alpha_t beta_t
  double kappa2 = 1.0;     // max_t det ratio
  double theta_hat = 1.0;  // max_t theta ratio
  double sigma_qp = 1.0;
  double tau_qp = 1.0;
  double min_weight = 1.0;
  double max_weight = 1.0;

  double weight_ratio() const noexcept { return max_weight / min_weight; }
  /// sigma_qp^2 M_Q / (tau_qp^2 m_Q), the part of the bound fixed by the rule.
  double rule_factor() const noexcept { return weight_ratio() * sigma_qp * sigma_qp / (tau_qp * tau_qp); }
};

ElementQuality element_quality(const ElementGeometry& geom);
QualityReport compute_quality(const std::vector<ElementGeometry>& geoms, const QuadratureRule& rule,
                              const SqpMatrix& sqp);

}  // namespace ddfem
