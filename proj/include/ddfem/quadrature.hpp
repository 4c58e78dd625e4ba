#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <vector>

namespace ddfem {

/// Quadrature rule on the reference simplex with positive weights and
/// interior points. Points are stored column-wise (d x q).
class QuadratureRule {
 public:
  /// Validates positivity of weights and strict interiority of the points;
  /// throws AssumptionViolation(3) for a nonpositive weight and
  /// UnsupportedConfiguration for a point outside the open simplex.
  QuadratureRule(int dim, Eigen::MatrixXd points, Eigen::VectorXd weights);

  int dim() const noexcept { return dim_; }
  int size() const noexcept { return static_cast<int>(weights_.size()); }
  const Eigen::MatrixXd& points() const noexcept { return points_; }
  Eigen::VectorXd point(int k) const { return points_.col(k); }
  const Eigen::VectorXd& weights() const noexcept { return weights_; }
  double weight(int k) const { return weights_(k); }
  double min_weight() const noexcept { return min_weight_; }
  double max_weight() const noexcept { return max_weight_; }
  double weight_ratio() const noexcept { return max_weight_ / min_weight_; }

 private:
  int dim_;
  Eigen::MatrixXd points_;
  Eigen::VectorXd weights_;
  double min_weight_;
  double max_weight_;
};

/// Midpoint rule for p = 1 and the symmetric (d+1)-point degree-2 rule for p = 2.
QuadratureRule standard_rule(int dim, int order);

/// Reads a custom rule: one `point <z_1> .. <z_d> <weight>` record per line.
/// Blank lines and `#` comments are ignored.
QuadratureRule load_rule(std::istream& in, int dim);

/// Exact integral of z_1^a_1 ... z_d^a_d over the unit d-simplex:
/// a_1! ... a_d! / (a_1 + ... + a_d + d)!.
double simplex_monomial_integral(const std::vector<int>& exponents);

/// Volume of the unit d-simplex, 1/d!.
double simplex_volume(int dim);

struct ExactnessReport {
  int degree = 0;
  double max_error = 0.0;
  /// Exponents of the monomial attaining max_error.
  std::vector<int> worst_monomial;
  /// Every monomial of total degree <= `degree` whose error exceeds the tolerance.
  std::vector<std::vector<int>> failures;
  bool passed = true;
};

/// Compares the rule against the exact monomial integrals up to `degree`.
ExactnessReport verify_exactness(const QuadratureRule& rule, int degree, double tol = 1e-12);

}  // namespace ddfem
