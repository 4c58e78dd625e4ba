#pragma once

#include "ddfem/mesh.hpp"
#include "ddfem/quadrature.hpp"
#include "ddfem/reference_element.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <iosfwd>
#include <vector>

namespace ddfem {

/// Everything one element contributes at the Gauss points.
struct ElementGeometry {
  int element = 0;
  std::vector<Eigen::MatrixXd> jacobians;           // grad phi_t(r_k), d x d
  std::vector<Eigen::MatrixXd> inverse_transposes;  // grad phi_t(r_k)^{-T}
  std::vector<double> dets;                         // det grad phi_t(r_k)
  std::vector<double> theta;                        // theta(phi_t(r_k))
  std::vector<Eigen::VectorXd> points;              // phi_t(r_k)
};

/// Precomputed per-problem data shared by every element routine.
struct Discretization {
  Discretization(const Mesh& mesh, ReferenceElement ref, QuadratureRule rule, ConductivityField theta);
  /// Reference element and standard rule of the mesh order.
  Discretization(const Mesh& mesh, ConductivityField theta);

  Mesh mesh;
  ReferenceElement ref;
  QuadratureRule rule;
  ConductivityField theta;
  Tabulation tab;
};

/// Computes the Jacobians of the element map at the Gauss points. Throws
/// AssumptionViolation(2) naming (t, k) for a determinant at or below
/// 1e-14 * scale^d, and AssumptionViolation(1) for nonpositive conductivity.
ElementGeometry element_geometry(const Discretization& disc, int t);

/// All elements in order; `threads` > 1 splits the loop (results are identical).
std::vector<ElementGeometry> all_geometries(const Discretization& disc, int threads = 1);

/// Closed-form determinant and inverse of a 2x2 or 3x3 matrix.
double small_det(const Eigen::MatrixXd& a);
Eigen::MatrixXd small_inverse(const Eigen::MatrixXd& a);

/// Dense l x l element stiffness matrix by quadrature, exactly symmetric.
Eigen::MatrixXd element_stiffness(const ElementGeometry& geom, const Discretization& disc);

/// Symmetric sparse matrix assembled entry by entry in mirrored order, so
/// that A(i,j) and A(j,i) are bitwise equal.
class SparseSymmetricMatrix {
 public:
  SparseSymmetricMatrix() = default;
  explicit SparseSymmetricMatrix(Eigen::SparseMatrix<double> m) : m_(std::move(m)) { m_.makeCompressed(); }

  int dim() const noexcept { return static_cast<int>(m_.rows()); }
  const Eigen::SparseMatrix<double>& matrix() const noexcept { return m_; }
  Eigen::SparseMatrix<double>& matrix() noexcept { return m_; }
  Eigen::MatrixXd to_dense() const { return Eigen::MatrixXd(m_); }
  double coeff(int i, int j) const { return m_.coeff(i, j); }
  bool is_symmetric() const;
  /// `entry i j v` lines (1-based) for the stored nonzeros, 17 significant digits,
  /// preceded by a `sparse-symmetric n=<n> nnz=<nnz>` header.
  void write_triplets(std::ostream& out) const;

 private:
  Eigen::SparseMatrix<double> m_;
};

/// Reads the triplet format written by write_triplets.
SparseSymmetricMatrix read_triplets(std::istream& in);

/// Global stiffness matrix restricted to the free nodes (n x n).
SparseSymmetricMatrix assemble_global(const Discretization& disc);
/// Same, reusing precomputed element matrices (indexed by element).
SparseSymmetricMatrix assemble_global(const Mesh& mesh, const std::vector<Eigen::MatrixXd>& element_matrices);

/// Load vector for the free nodes: quadrature of f against the shape functions
/// minus the coupling to prescribed Dirichlet values. `dirichlet_values` holds
/// one value per Dirichlet node in internal order (empty = homogeneous).
/// Neumann data is the natural condition g = 0.
Eigen::VectorXd assemble_load(const Discretization& disc, const Expression& source,
                              const Eigen::VectorXd& dirichlet_values = {});

}  // namespace ddfem
