#include "ddfem/quadrature.hpp"

#include "ddfem/errors.hpp"

#include <cmath>
#include <istream>
#include <sstream>
#include <string>

namespace ddfem {

QuadratureRule::QuadratureRule(int dim, Eigen::MatrixXd points, Eigen::VectorXd weights)
    : dim_(dim), points_(std::move(points)), weights_(std::move(weights)) {
  if (dim_ != 2 && dim_ != 3) {
    throw UnsupportedConfiguration("quadrature dimension must be 2 or 3, got " + std::to_string(dim_));
  }
  if (points_.rows() != dim_ || points_.cols() != weights_.size() || weights_.size() == 0) {
    throw UnsupportedConfiguration("quadrature rule needs q >= 1 points of dimension " + std::to_string(dim_) +
                                   " and one weight per point");
  }
  for (int k = 0; k < size(); ++k) {
    if (!(weights_(k) > 0.0)) {
      std::ostringstream msg;
      msg << "quadrature weight " << k + 1 << " is " << weights_(k) << ", must be positive";
      throw AssumptionViolation(3, msg.str());
    }
    const auto r = points_.col(k);
    if (!((r.array() > 0.0).all() && r.sum() < 1.0)) {
      throw UnsupportedConfiguration("quadrature point " + std::to_string(k + 1) +
                                     " is not in the interior of the reference simplex");
    }
  }
  min_weight_ = weights_.minCoeff();
  max_weight_ = weights_.maxCoeff();
}

QuadratureRule standard_rule(int dim, int order) {
  if (dim == 2 && order == 1) {
    Eigen::MatrixXd pts(2, 1);
    pts << 1.0 / 3.0, 1.0 / 3.0;
    return {2, pts, Eigen::VectorXd::Constant(1, 0.5)};
  }
  if (dim == 2 && order == 2) {
    Eigen::MatrixXd pts(2, 3);
    pts << 1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0,  //
        1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0;
    return {2, pts, Eigen::VectorXd::Constant(3, 1.0 / 6.0)};
  }
  if (dim == 3 && order == 1) {
    Eigen::MatrixXd pts = Eigen::MatrixXd::Constant(3, 1, 0.25);
    return {3, pts, Eigen::VectorXd::Constant(1, 1.0 / 6.0)};
  }
  if (dim == 3 && order == 2) {
    const double a = (10.0 - std::sqrt(20.0)) / 40.0;
    const double b = 1.0 - 3.0 * a;
    Eigen::MatrixXd pts(3, 4);
    pts << a, a, a, b,  //
        a, a, b, a,     //
        a, b, a, a;
    return {3, pts, Eigen::VectorXd::Constant(4, 1.0 / 24.0)};
  }
  throw UnsupportedConfiguration("no standard quadrature rule for d=" + std::to_string(dim) +
                                 " p=" + std::to_string(order));
}

QuadratureRule load_rule(std::istream& in, int dim) {
  std::vector<double> coords;
  std::vector<double> weights;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag != "point") throw ParseError(lineno, "expected 'point', got '" + tag + "'");
    std::vector<double> vals;
    double v = 0.0;
    while (ls >> v) vals.push_back(v);
    if (!ls.eof()) throw ParseError(lineno, "non-numeric field in quadrature record");
    if (static_cast<int>(vals.size()) != dim + 1) {
      throw ParseError(lineno, "expected " + std::to_string(dim) + " coordinates and a weight");
    }
    coords.insert(coords.end(), vals.begin(), vals.end() - 1);
    weights.push_back(vals.back());
  }
  if (weights.empty()) throw ParseError(lineno, "quadrature rule has no points");
  const auto q = static_cast<Eigen::Index>(weights.size());
  Eigen::MatrixXd pts = Eigen::Map<Eigen::MatrixXd>(coords.data(), dim, q);
  return {dim, pts, Eigen::Map<Eigen::VectorXd>(weights.data(), q)};
}

double simplex_monomial_integral(const std::vector<int>& exponents) {
  // Dirichlet integral, evaluated with lgamma to stay finite for large degree.
  double log_num = 0.0;
  int total = 0;
  for (int a : exponents) {
    log_num += std::lgamma(a + 1.0);
    total += a;
  }
  const int d = static_cast<int>(exponents.size());
  return std::exp(log_num - std::lgamma(total + d + 1.0));
}

double simplex_volume(int dim) { return simplex_monomial_integral(std::vector<int>(dim, 0)); }

namespace {

void enumerate_exponents(int dim, int degree, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (static_cast<int>(cur.size()) == dim) {
    out.push_back(cur);
    return;
  }
  for (int a = 0; a <= degree; ++a) {
    cur.push_back(a);
    enumerate_exponents(dim, degree - a, cur, out);
    cur.pop_back();
  }
}

}  // namespace

ExactnessReport verify_exactness(const QuadratureRule& rule, int degree, double tol) {
  ExactnessReport report;
  report.degree = degree;
  std::vector<std::vector<int>> monomials;
  std::vector<int> cur;
  enumerate_exponents(rule.dim(), degree, cur, monomials);
  for (const auto& e : monomials) {
    double approx = 0.0;
    for (int k = 0; k < rule.size(); ++k) {
      double v = rule.weight(k);
      for (int i = 0; i < rule.dim(); ++i) v *= std::pow(rule.points()(i, k), e[i]);
      approx += v;
    }
    const double err = std::abs(approx - simplex_monomial_integral(e));
    if (report.worst_monomial.empty() || err > report.max_error) {
      report.max_error = err;
      report.worst_monomial = e;
    }
    if (err > tol) report.failures.push_back(e);
  }
  report.passed = report.failures.empty();
  return report;
}

}  // namespace ddfem
