#pragma once

#include "ddfem/quadrature.hpp"

#include <Eigen/Dense>

#include <vector>

namespace ddfem {

/// Lagrange element of order p on the unit d-simplex.
///
/// Reference nodes are the lattice points (i_1/p, .., i_d/p) with
/// i_1 + .. + i_d <= p, enumerated with the last coordinate most significant,
/// so node 0 is the origin vertex. Shape functions are stored as coefficients
/// in the monomial basis of total degree <= p, obtained by inverting the
/// interpolation (Vandermonde) matrix at the nodes.
///
/// Node indices are 0-based throughout the library.
class ReferenceElement {
 public:
  ReferenceElement(int dim, int order);

  int dim() const noexcept { return dim_; }
  int order() const noexcept { return order_; }
  int num_nodes() const noexcept { return static_cast<int>(lattice_.size()); }

  /// d x l matrix of node coordinates.
  const Eigen::MatrixXd& nodes() const noexcept { return nodes_; }
  Eigen::VectorXd node(int mu) const { return nodes_.col(mu); }
  /// Integer lattice coordinates of node mu (node = lattice / p).
  const std::vector<int>& lattice(int mu) const { return lattice_.at(mu); }
  /// Reference vertices (0 = origin, j = unit vector e_j) whose average is node mu;
  /// a vertex node lists the same vertex p times.
  std::vector<int> node_vertices(int mu) const;

  double shape(int mu, const Eigen::VectorXd& z) const;
  Eigen::VectorXd shape_gradient(int mu, const Eigen::VectorXd& z) const;
  /// All l shape values at z.
  Eigen::VectorXd shape_values(const Eigen::VectorXd& z) const;
  /// d x l matrix whose column mu is grad N_mu(z).
  Eigen::MatrixXd shape_gradients(const Eigen::VectorXd& z) const;

 private:
  Eigen::VectorXd monomials(const Eigen::VectorXd& z) const;
  Eigen::MatrixXd monomial_gradients(const Eigen::VectorXd& z) const;
  void check_index(int mu) const;

  int dim_;
  int order_;
  std::vector<std::vector<int>> lattice_;
  std::vector<std::vector<int>> exponents_;
  Eigen::MatrixXd nodes_;
  Eigen::MatrixXd coefficients_;  // row = monomial, column = shape function
};

/// Same as the ReferenceElement constructor; named for symmetry with standard_rule.
inline ReferenceElement make_reference(int dim, int order) { return ReferenceElement(dim, order); }

/// Shape values and gradients tabulated at the points of a quadrature rule.
struct Tabulation {
  std::vector<Eigen::VectorXd> values;     // per Gauss point, length l
  std::vector<Eigen::MatrixXd> gradients;  // per Gauss point, d x l
};

Tabulation tabulate(const ReferenceElement& ref, const QuadratureRule& rule);

/// The dq x (l-1) matrix stacking grad N_2 .. grad N_l at every Gauss point,
/// with its extremal singular values.
struct SqpMatrix {
  Eigen::MatrixXd entries;
  double sigma = 0.0;  // largest singular value
  double tau = 0.0;    // smallest singular value
};

/// Throws AssumptionViolation(4) when the matrix is numerically rank deficient
/// (tau < 1e-10 sigma).
SqpMatrix build_sqp(const ReferenceElement& ref, const QuadratureRule& rule);

}  // namespace ddfem
