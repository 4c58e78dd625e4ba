#pragma once

#include "ddfem/assembly.hpp"
#include "ddfem/reference_element.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <iosfwd>
#include <vector>

namespace ddfem {

/// One arc of the element star: node `head` (local mu >= 1) minus node `tail`
/// (local node 0). An endpoint is -1 when that node is Dirichlet and its
/// column is omitted from the reduced incidence matrix.
struct Arc {
  int head = -1;
  int tail = -1;
};

/// Reduced node-arc incidence matrix A, stored as l-1 arcs per element.
class IncidenceMatrix {
 public:
  IncidenceMatrix(int num_free, int arcs_per_element, std::vector<Arc> arcs)
      : num_free_(num_free), arcs_per_element_(arcs_per_element), arcs_(std::move(arcs)) {}

  int num_columns() const noexcept { return num_free_; }
  int num_rows() const noexcept { return static_cast<int>(arcs_.size()); }
  int arcs_per_element() const noexcept { return arcs_per_element_; }
  const std::vector<Arc>& arcs() const noexcept { return arcs_; }
  const Arc& arc(int element, int row) const {
    return arcs_.at(static_cast<std::size_t>(element * arcs_per_element_ + row));
  }

  /// (l-1)m x n sparse matrix with entries in {-1, 0, +1}.
  Eigen::SparseMatrix<double> to_sparse() const;
  /// `arc <head> <tail>` lines, 1-based, 0 for an omitted endpoint.
  void write_arcs(std::ostream& out) const;

 private:
  int num_free_;
  int arcs_per_element_;
  std::vector<Arc> arcs_;
};

IncidenceMatrix build_incidence(const Mesh& mesh);

/// Unreduced local incidence block, (l-1) x l: row mu-1 is e_mu - e_0.
Eigen::MatrixXd local_incidence(int nodes_per_element);

/// Per-element factors of K_t = A_t^T J_t^T D_t J_t A_t.
struct ElementFactors {
  int element = 0;
  double alpha = 0.0;     // max_k ||grad phi_t(r_k)^{-1}||_2
  double beta = 0.0;      // max_k ||grad phi_t(r_k)||_2
  Eigen::MatrixXd r;      // qd x qd block diagonal of grad phi_t(r_k)^{-T} / alpha
  Eigen::VectorXd d;      // diagonal of D_t, length qd
  Eigen::MatrixXd j;      // R_t S_{Q,p}, qd x (l-1)
  double j_sigma_max = 0.0;
  double j_sigma_min = 0.0;
};

/// Spectral norm of a 2x2 (closed form) or 3x3 (direct eigen-solve of A^T A) matrix.
double small_norm2(const Eigen::MatrixXd& a);

ElementFactors build_element_factors(const ElementGeometry& geom, const SqpMatrix& sqp, const QuadratureRule& rule);
std::vector<ElementFactors> all_element_factors(const std::vector<ElementGeometry>& geoms, const SqpMatrix& sqp,
                                                const QuadratureRule& rule, int threads = 1);

/// J_t^T D_t J_t, the (l-1) x (l-1) middle of the element factorization.
Eigen::MatrixXd middle_product(const ElementFactors& f);

struct FactorizationReport {
  double max_element_residual = 0.0;  // max_t ||K_t - A_t^T J_t^T D_t J_t A_t||_F / ||K_t||_F
  int worst_element = -1;
  double global_residual = 0.0;       // ||K - A^T J^T D J A||_F / ||K||_F (reduced)
  bool passed = true;
};

/// Checks the factorization element by element and on the assembled reduced matrix.
FactorizationReport verify_first_factorization(const Mesh& mesh, const std::vector<ElementFactors>& factors,
                                               const IncidenceMatrix& a, const std::vector<Eigen::MatrixXd>& element_k,
                                               const SparseSymmetricMatrix& k, double tol = 1e-10);

}  // namespace ddfem
