#include "ddfem/reference_element.hpp"

#include "ddfem/errors.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace ddfem {

namespace {

void total_degree_exponents(int dim, int degree, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (static_cast<int>(cur.size()) == dim) {
    out.push_back(cur);
    return;
  }
  for (int a = 0; a <= degree; ++a) {
    cur.push_back(a);
    total_degree_exponents(dim, degree - a, cur, out);
    cur.pop_back();
  }
}

double ipow(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

}  // namespace

ReferenceElement::ReferenceElement(int dim, int order) : dim_(dim), order_(order) {
  if ((dim != 2 && dim != 3) || (order != 1 && order != 2)) {
    throw UnsupportedConfiguration("unsupported reference element d=" + std::to_string(dim) +
                                   " p=" + std::to_string(order) + " (need d in {2,3}, p in {1,2})");
  }
  // Last coordinate most significant; origin first.
  if (dim == 2) {
    for (int j = 0; j <= order; ++j)
      for (int i = 0; i + j <= order; ++i) lattice_.push_back({i, j});
  } else {
    for (int k = 0; k <= order; ++k)
      for (int j = 0; j + k <= order; ++j)
        for (int i = 0; i + j + k <= order; ++i) lattice_.push_back({i, j, k});
  }
  const int l = num_nodes();
  nodes_.resize(dim, l);
  for (int mu = 0; mu < l; ++mu)
    for (int a = 0; a < dim; ++a) nodes_(a, mu) = static_cast<double>(lattice_[mu][a]) / order;

  std::vector<int> cur;
  total_degree_exponents(dim, order, cur, exponents_);

  Eigen::MatrixXd vandermonde(l, l);
  for (int nu = 0; nu < l; ++nu) vandermonde.row(nu) = monomials(nodes_.col(nu)).transpose();
  coefficients_ = vandermonde.fullPivLu().inverse();
}

Eigen::VectorXd ReferenceElement::monomials(const Eigen::VectorXd& z) const {
  Eigen::VectorXd m(exponents_.size());
  for (std::size_t e = 0; e < exponents_.size(); ++e) {
    double v = 1.0;
    for (int a = 0; a < dim_; ++a) v *= ipow(z(a), exponents_[e][a]);
    m(static_cast<Eigen::Index>(e)) = v;
  }
  return m;
}

Eigen::MatrixXd ReferenceElement::monomial_gradients(const Eigen::VectorXd& z) const {
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(dim_, static_cast<Eigen::Index>(exponents_.size()));
  for (std::size_t e = 0; e < exponents_.size(); ++e) {
    for (int b = 0; b < dim_; ++b) {
      const int eb = exponents_[e][b];
      if (eb == 0) continue;
      double v = eb;
      for (int a = 0; a < dim_; ++a) v *= ipow(z(a), a == b ? eb - 1 : exponents_[e][a]);
      g(b, static_cast<Eigen::Index>(e)) = v;
    }
  }
  return g;
}

void ReferenceElement::check_index(int mu) const {
  if (mu < 0 || mu >= num_nodes()) {
    throw std::out_of_range("shape function index " + std::to_string(mu) + " out of range [0, " +
                            std::to_string(num_nodes()) + ")");
  }
}

std::vector<int> ReferenceElement::node_vertices(int mu) const {
  check_index(mu);
  const auto& lat = lattice_[mu];
  std::vector<int> verts;
  const int rest = order_ - std::accumulate(lat.begin(), lat.end(), 0);
  verts.insert(verts.end(), rest, 0);
  for (int a = 0; a < dim_; ++a) verts.insert(verts.end(), lat[a], a + 1);
  return verts;
}

double ReferenceElement::shape(int mu, const Eigen::VectorXd& z) const {
  check_index(mu);
  return monomials(z).dot(coefficients_.col(mu));
}

Eigen::VectorXd ReferenceElement::shape_gradient(int mu, const Eigen::VectorXd& z) const {
  check_index(mu);
  return monomial_gradients(z) * coefficients_.col(mu);
}

Eigen::VectorXd ReferenceElement::shape_values(const Eigen::VectorXd& z) const {
  return coefficients_.transpose() * monomials(z);
}

Eigen::MatrixXd ReferenceElement::shape_gradients(const Eigen::VectorXd& z) const {
  return monomial_gradients(z) * coefficients_;
}

Tabulation tabulate(const ReferenceElement& ref, const QuadratureRule& rule) {
  if (ref.dim() != rule.dim()) throw UnsupportedConfiguration("quadrature rule and reference element differ in dimension");
  Tabulation tab;
  for (int k = 0; k < rule.size(); ++k) {
    tab.values.push_back(ref.shape_values(rule.point(k)));
    tab.gradients.push_back(ref.shape_gradients(rule.point(k)));
  }
  return tab;
}

SqpMatrix build_sqp(const ReferenceElement& ref, const QuadratureRule& rule) {
  const int d = ref.dim();
  const int l = ref.num_nodes();
  const Tabulation tab = tabulate(ref, rule);
  SqpMatrix s;
  s.entries.resize(d * rule.size(), l - 1);
  for (int k = 0; k < rule.size(); ++k) s.entries.block(k * d, 0, d, l - 1) = tab.gradients[k].rightCols(l - 1);

  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(s.entries);
  const auto& sv = svd.singularValues();
  s.sigma = sv(0);
  // A wide matrix (dq < l-1) has a nontrivial nullspace; its smallest singular value is 0.
  s.tau = s.entries.rows() < s.entries.cols() ? 0.0 : sv(sv.size() - 1);
  if (!(s.tau >= 1e-10 * s.sigma)) {
    throw AssumptionViolation(4, "shape-gradient matrix at the Gauss points is rank deficient (smallest singular value " +
                                     std::to_string(s.tau) + ")");
  }
  return s;
}

}  // namespace ddfem
