#pragma once

#include "ddfem/expression.hpp"

#include <Eigen/Dense>

#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <variant>
#include <vector>

namespace ddfem {

/// Simplicial mesh of order p with Dirichlet flags.
///
/// Internally the nodes are numbered so that the n free (non-Dirichlet) nodes
/// come first and the Dirichlet nodes last; `source_index()` maps each
/// internal node back to the index it was created with. Element node lists
/// follow the reference-node enumeration of ReferenceElement.
class Mesh {
 public:
  /// Validates and renumbers (stable, Dirichlet last). `nodes` is d x n'.
  /// `connectivity` holds l indices per element, 0-based in the caller's numbering.
  /// Throws InvalidMesh on structural errors.
  Mesh(int dim, int order, Eigen::MatrixXd nodes, std::vector<int> connectivity, std::vector<bool> dirichlet,
       std::vector<double> element_theta = {});

  int dim() const noexcept { return dim_; }
  int order() const noexcept { return order_; }
  int nodes_per_element() const noexcept { return nodes_per_element_; }
  int num_nodes() const noexcept { return static_cast<int>(nodes_.cols()); }
  int num_free() const noexcept { return num_free_; }
  int num_elements() const noexcept { return static_cast<int>(connectivity_.size()) / nodes_per_element_; }

  const Eigen::MatrixXd& nodes() const noexcept { return nodes_; }
  Eigen::VectorXd node(int i) const { return nodes_.col(i); }
  bool is_dirichlet(int i) const { return i >= num_free_; }
  std::span<const int> element(int t) const {
    return {connectivity_.data() + static_cast<std::size_t>(t) * nodes_per_element_,
            static_cast<std::size_t>(nodes_per_element_)};
  }
  const std::vector<int>& connectivity() const noexcept { return connectivity_; }
  /// Per-element conductivity from the mesh file; empty when absent.
  const std::vector<double>& element_theta() const noexcept { return element_theta_; }
  /// Original 0-based index of each internal node.
  const std::vector<int>& source_index() const noexcept { return source_index_; }
  /// True when load/construction had to move Dirichlet nodes to the end.
  bool renumbered() const noexcept { return renumbered_; }

  /// Dirichlet flags in internal numbering.
  std::vector<bool> dirichlet_flags() const;

  friend bool operator==(const Mesh& a, const Mesh& b);

 private:
  int dim_;
  int order_;
  int nodes_per_element_;
  int num_free_ = 0;
  Eigen::MatrixXd nodes_;
  std::vector<int> connectivity_;
  std::vector<double> element_theta_;
  std::vector<int> source_index_;
  bool renumbered_ = false;
};

/// Reads the `ddfem-mesh v1` text format. Throws ParseError naming the line,
/// or InvalidMesh for structural problems.
Mesh load_mesh(std::istream& in);
Mesh load_mesh_file(const std::string& path);
/// Writes the mesh in internal numbering with 17 significant digits.
void save_mesh(const Mesh& mesh, std::ostream& out);
void save_mesh_file(const Mesh& mesh, const std::string& path);

/// Unit square split into 2k^2 right triangles along the (0,0)-(1,1) diagonals;
/// every boundary node is Dirichlet.
Mesh gen_structured_square(int k, int order);
/// Unit cube split into 6k^3 positively oriented tetrahedra (Kuhn split);
/// every boundary node is Dirichlet.
Mesh gen_structured_cube(int k, int order);
/// Annulus r_inner <= |x| <= r_outer, radial_cells x angular_cells quads split
/// in two; both circles Dirichlet. For order 2 the boundary midpoints are snapped
/// onto the circles.
Mesh gen_annulus(int radial_cells, int angular_cells, double r_inner, double r_outer, int order);

/// Maps a midpoint of a boundary edge onto the true boundary.
using BoundaryProjector = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Converts an order-1 mesh into an order-2 mesh with one node per unique edge.
/// Boundary edges (edges of facets owned by a single element) get their midpoint
/// passed through `snap` when supplied; a midpoint is Dirichlet iff its edge is a
/// boundary edge with both endpoints Dirichlet.
Mesh insert_midpoints(const Mesh& mesh, const BoundaryProjector& snap = {});

/// Applies `map` to every node coordinate; connectivity and flags are unchanged.
Mesh transform_nodes(const Mesh& mesh, const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& map);

/// Conductivity theta: constant, one value per element, or a closed-form expression.
class ConductivityField {
 public:
  static ConductivityField constant(double value);
  static ConductivityField per_element(std::vector<double> values);
  static ConductivityField expression(Expression expr);
  /// Per-element field from the mesh file when present, otherwise constant 1.
  static ConductivityField from_mesh(const Mesh& mesh);

  /// Value at physical point x inside element t (0-based). Throws
  /// AssumptionViolation(1) for a nonpositive or non-finite value.
  double operator()(const Eigen::VectorXd& x, int element) const;
  /// Multiplies every value by c.
  ConductivityField scaled(double c) const;

 private:
  struct Constant {
    double value;
  };
  struct PerElement {
    std::vector<double> values;
  };
  struct Expr {
    Expression expr;
  };
  explicit ConductivityField(std::variant<Constant, PerElement, Expr> v, double scale = 1.0)
      : mode_(std::move(v)), scale_(scale) {}

  std::variant<Constant, PerElement, Expr> mode_;
  double scale_;
};

inline double eval_conductivity(const ConductivityField& field, const Eigen::VectorXd& x, int element) {
  return field(x, element);
}

/// Per-element field equal to `high` on elements whose centroid has x > split and 1 elsewhere.
ConductivityField jump_field(const Mesh& mesh, double high, double split = 0.5);

/// Centroid of element t (mean of its nodes).
Eigen::VectorXd element_centroid(const Mesh& mesh, int t);

}  // namespace ddfem
