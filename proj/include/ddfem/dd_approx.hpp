#pragma once

#include "ddfem/assembly.hpp"
#include "ddfem/factorization.hpp"
#include "ddfem/quality.hpp"

#include <Eigen/Dense>

#include <vector>

namespace ddfem {

/// Scalar multiplier of the identity block of Dbar for every element:
/// m_Q * f_t * g_t * alpha_t^2, with f_t the smallest Gauss-point conductivity
/// and g_t the smallest Jacobian determinant of element t.
std::vector<double> build_dbar(const std::vector<ElementFactors>& factors, const std::vector<ElementGeometry>& geoms,
                               const QuadratureRule& rule);

/// Kbar = A^T Dbar A: a weighted graph Laplacian on the element stars with
/// Dirichlet rows and columns removed.
SparseSymmetricMatrix build_kbar(const IncidenceMatrix& a, const std::vector<double>& dbar);

/// Unreduced element approximation A_t^T (c I) A_t, l x l.
Eigen::MatrixXd element_kbar(int nodes_per_element, double dbar);

struct HBlock {
  Eigen::MatrixXd jbar;  // D_t^{1/2} J_t / sqrt(dbar_t)
  Eigen::MatrixXd h;     // jbar^T jbar
  double sigma_max = 0.0;
  double sigma_min = 0.0;
  double kappa() const noexcept { return (sigma_max / sigma_min) * (sigma_max / sigma_min); }
};

struct HReport {
  std::vector<HBlock> blocks;
  /// Condition number of the block-diagonal H: (max_t sigma_max)^2 / (min_t sigma_min)^2.
  double kappa_global = 1.0;
  /// max_t kappa(H_t).
  double kappa_max_element = 1.0;
};

HBlock build_h_block(const ElementFactors& f, double dbar);
HReport build_h_blocks(const std::vector<ElementFactors>& factors, const std::vector<double>& dbar, int threads = 1);

/// theta_hat kappa1^2 kappa2 M_Q sigma^2 / (m_Q tau^2) with global mesh maxima.
double chi3_bound(const QualityReport& quality);
/// Same bound with the element's own theta ratio, alpha beta and det ratio.
double element_chi3_bound(const ElementQuality& element, const QualityReport& quality);

/// Everything needed to precondition K by Kbar.
struct DDApproximation {
  std::vector<double> dbar;
  SparseSymmetricMatrix kbar;
  HReport h;
  double chi3 = 1.0;
};

DDApproximation build_dd_approximation(const IncidenceMatrix& a, const std::vector<ElementFactors>& factors,
                                       const std::vector<ElementGeometry>& geoms, const QuadratureRule& rule,
                                       const QualityReport& quality, int threads = 1);

}  // namespace ddfem
