#include "ddfem/assembly.hpp"

#include "ddfem/errors.hpp"
#include "ddfem/parallel.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace ddfem {

Discretization::Discretization(const Mesh& mesh_, ReferenceElement ref_, QuadratureRule rule_, ConductivityField theta_)
    : mesh(mesh_), ref(std::move(ref_)), rule(std::move(rule_)), theta(std::move(theta_)), tab(tabulate(ref, rule)) {
  if (ref.dim() != mesh.dim() || ref.order() != mesh.order() || rule.dim() != mesh.dim()) {
    throw UnsupportedConfiguration("mesh, reference element and quadrature rule disagree on (d, p)");
  }
}

Discretization::Discretization(const Mesh& mesh_, ConductivityField theta_)
    : Discretization(mesh_, ReferenceElement(mesh_.dim(), mesh_.order()), standard_rule(mesh_.dim(), mesh_.order()),
                     std::move(theta_)) {}

double small_det(const Eigen::MatrixXd& a) {
  if (a.rows() == 2) return a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
  return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
         a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
}

Eigen::MatrixXd small_inverse(const Eigen::MatrixXd& a) {
  const double det = small_det(a);
  Eigen::MatrixXd inv(a.rows(), a.cols());
  if (a.rows() == 2) {
    inv << a(1, 1), -a(0, 1), -a(1, 0), a(0, 0);
    return inv / det;
  }
  // Adjugate.
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const int r0 = (j + 1) % 3, r1 = (j + 2) % 3;
      const int c0 = (i + 1) % 3, c1 = (i + 2) % 3;
      inv(i, j) = a(r0, c0) * a(r1, c1) - a(r0, c1) * a(r1, c0);
    }
  }
  return inv / det;
}

ElementGeometry element_geometry(const Discretization& disc, int t) {
  const Mesh& mesh = disc.mesh;
  const int d = mesh.dim();
  const int l = mesh.nodes_per_element();
  const auto el = mesh.element(t);
  Eigen::MatrixXd zeta(d, l);
  for (int mu = 0; mu < l; ++mu) zeta.col(mu) = mesh.node(el[static_cast<std::size_t>(mu)]);

  ElementGeometry g;
  g.element = t;
  for (int k = 0; k < disc.rule.size(); ++k) {
    Eigen::MatrixXd jac = zeta * disc.tab.gradients[static_cast<std::size_t>(k)].transpose();
    const double det = small_det(jac);
    const double scale = jac.colwise().norm().maxCoeff();
    if (!(det > 1e-14 * std::pow(scale, d))) {
      std::ostringstream msg;
      msg << "element " << t + 1 << " has Jacobian determinant " << det << " at Gauss point " << k + 1;
      throw AssumptionViolation(2, msg.str());
    }
    Eigen::VectorXd x = zeta * disc.tab.values[static_cast<std::size_t>(k)];
    g.theta.push_back(disc.theta(x, t));
    g.points.push_back(std::move(x));
    g.inverse_transposes.push_back(small_inverse(jac).transpose());
    g.dets.push_back(det);
    g.jacobians.push_back(std::move(jac));
  }
  return g;
}

std::vector<ElementGeometry> all_geometries(const Discretization& disc, int threads) {
  std::vector<ElementGeometry> out(static_cast<std::size_t>(disc.mesh.num_elements()));
  parallel_for(disc.mesh.num_elements(), threads,
               [&](int t) { out[static_cast<std::size_t>(t)] = element_geometry(disc, t); });
  return out;
}

Eigen::MatrixXd element_stiffness(const ElementGeometry& geom, const Discretization& disc) {
  const int l = disc.ref.num_nodes();
  Eigen::MatrixXd kt = Eigen::MatrixXd::Zero(l, l);
  for (int k = 0; k < disc.rule.size(); ++k) {
    const auto ku = static_cast<std::size_t>(k);
    const Eigen::MatrixXd b = geom.inverse_transposes[ku] * disc.tab.gradients[ku];
    const double w = geom.theta[ku] * geom.dets[ku] * disc.rule.weight(k);
    for (int mu = 0; mu < l; ++mu)
      for (int nu = mu; nu < l; ++nu) kt(mu, nu) += w * b.col(mu).dot(b.col(nu));
  }
  for (int mu = 0; mu < l; ++mu)
    for (int nu = 0; nu < mu; ++nu) kt(mu, nu) = kt(nu, mu);
  return kt;
}

bool SparseSymmetricMatrix::is_symmetric() const {
  const Eigen::SparseMatrix<double> t = m_.transpose();
  if (t.nonZeros() != m_.nonZeros()) return false;
  for (int j = 0; j < m_.outerSize(); ++j) {
    Eigen::SparseMatrix<double>::InnerIterator a(m_, j), b(t, j);
    for (; a && b; ++a, ++b)
      if (a.index() != b.index() || a.value() != b.value()) return false;
    if (a || b) return false;
  }
  return true;
}

void SparseSymmetricMatrix::write_triplets(std::ostream& out) const {
  const auto old = out.precision(17);
  out << "sparse-symmetric n=" << m_.rows() << " nnz=" << m_.nonZeros() << '\n';
  for (int j = 0; j < m_.outerSize(); ++j)
    for (Eigen::SparseMatrix<double>::InnerIterator it(m_, j); it; ++it)
      out << "entry " << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
  out.precision(old);
}

SparseSymmetricMatrix read_triplets(std::istream& in) {
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line)) throw ParseError(1, "empty matrix file");
  long n = -1;
  if (std::sscanf(line.c_str(), "sparse-symmetric n=%ld", &n) != 1 || n < 0) {
    throw ParseError(1, "expected 'sparse-symmetric n=<n> nnz=<nnz>' header");
  }
  std::vector<Eigen::Triplet<double>> trips;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    long i = 0, j = 0;
    double v = 0.0;
    if (tag != "entry" || !(ls >> i >> j >> v) || i < 1 || j < 1 || i > n || j > n) {
      throw ParseError(lineno, "expected 'entry i j v' with 1 <= i, j <= " + std::to_string(n));
    }
    trips.emplace_back(static_cast<int>(i - 1), static_cast<int>(j - 1), v);
  }
  Eigen::SparseMatrix<double> m(n, n);
  m.setFromTriplets(trips.begin(), trips.end());
  return SparseSymmetricMatrix(std::move(m));
}

SparseSymmetricMatrix assemble_global(const Mesh& mesh, const std::vector<Eigen::MatrixXd>& element_matrices) {
  const int n = mesh.num_free();
  std::vector<Eigen::Triplet<double>> trips;
  for (int t = 0; t < mesh.num_elements(); ++t) {
    const auto el = mesh.element(t);
    const auto& kt = element_matrices[static_cast<std::size_t>(t)];
    for (int mu = 0; mu < static_cast<int>(el.size()); ++mu) {
      const int i = el[static_cast<std::size_t>(mu)];
      if (i >= n) continue;
      for (int nu = 0; nu < static_cast<int>(el.size()); ++nu) {
        const int j = el[static_cast<std::size_t>(nu)];
        if (j >= n) continue;
        trips.emplace_back(i, j, kt(mu, nu));
      }
    }
  }
  Eigen::SparseMatrix<double> k(n, n);
  k.setFromTriplets(trips.begin(), trips.end());
  return SparseSymmetricMatrix(std::move(k));
}

SparseSymmetricMatrix assemble_global(const Discretization& disc) {
  std::vector<Eigen::MatrixXd> mats;
  mats.reserve(static_cast<std::size_t>(disc.mesh.num_elements()));
  for (int t = 0; t < disc.mesh.num_elements(); ++t) mats.push_back(element_stiffness(element_geometry(disc, t), disc));
  return assemble_global(disc.mesh, mats);
}

Eigen::VectorXd assemble_load(const Discretization& disc, const Expression& source,
                              const Eigen::VectorXd& dirichlet_values) {
  const Mesh& mesh = disc.mesh;
  const int n = mesh.num_free();
  const int nd = mesh.num_nodes() - n;
  if (dirichlet_values.size() != 0 && dirichlet_values.size() != nd) {
    throw std::invalid_argument("expected " + std::to_string(nd) + " Dirichlet values");
  }
  Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
  for (int t = 0; t < mesh.num_elements(); ++t) {
    const auto el = mesh.element(t);
    const ElementGeometry geom = element_geometry(disc, t);
    for (int k = 0; k < disc.rule.size(); ++k) {
      const auto ku = static_cast<std::size_t>(k);
      const double w = source(geom.points[ku]) * geom.dets[ku] * disc.rule.weight(k);
      for (std::size_t mu = 0; mu < el.size(); ++mu)
        if (el[mu] < n) f(el[mu]) += w * disc.tab.values[ku](static_cast<Eigen::Index>(mu));
    }
    if (dirichlet_values.size() == 0) continue;
    const Eigen::MatrixXd kt = element_stiffness(geom, disc);
    for (std::size_t mu = 0; mu < el.size(); ++mu) {
      if (el[mu] >= n) continue;
      for (std::size_t nu = 0; nu < el.size(); ++nu)
        if (el[nu] >= n) {
          f(el[mu]) -= kt(static_cast<Eigen::Index>(mu), static_cast<Eigen::Index>(nu)) * dirichlet_values(el[nu] - n);
        }
    }
  }
  return f;
}

}  // namespace ddfem
