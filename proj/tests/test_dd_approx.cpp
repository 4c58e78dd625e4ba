#include "doctest.h"

#include "ddfem/dd_approx.hpp"
#include "ddfem/factorization.hpp"
#include "ddfem/pipeline.hpp"

using namespace ddfem;

namespace {

Mesh triangle(const Eigen::MatrixXd& v) { return Mesh(2, 1, v, {0, 1, 2}, {false, false, false}); }

Eigen::MatrixXd unit_triangle() {
  Eigen::MatrixXd v(2, 3);
  v << 0, 1, 0, 0, 0, 1;
  return v;
}

// Explicit sparse product A^T diag(Dbar) A, built independently of build_kbar.
Eigen::MatrixXd explicit_kbar(const IncidenceMatrix& a, const std::vector<double>& dbar) {
  const Eigen::SparseMatrix<double> s = a.to_sparse();
  Eigen::VectorXd w(s.rows());
  for (Eigen::Index r = 0; r < s.rows(); ++r) w(r) = dbar[static_cast<std::size_t>(r / a.arcs_per_element())];
  return Eigen::MatrixXd(s.transpose() * w.asDiagonal() * s);
}

}  // namespace

TEST_CASE("unit triangle approximation") {
  const Analysis an = analyze(Discretization(triangle(unit_triangle()), ConductivityField::constant(1.0)));
  REQUIRE(an.dd.dbar.size() == 1);
  CHECK(an.dd.dbar[0] == doctest::Approx(0.5));
  Eigen::Matrix3d expect;
  expect << 2, -1, -1, -1, 1, 0, -1, 0, 1;
  CHECK((an.dd.kbar.to_dense() - 0.5 * expect).norm() < 1e-14);
  CHECK((element_kbar(3, 0.5) - 0.5 * expect).norm() < 1e-14);
  // With exact midpoint quadrature H_t = I.
  CHECK((an.dd.h.blocks[0].h - Eigen::Matrix2d::Identity()).norm() < 1e-14);
  CHECK(an.dd.h.kappa_global == doctest::Approx(1.0));
}

TEST_CASE("Kbar equals the explicit incidence product") {
  for (const Mesh& m : {gen_structured_square(4, 2), gen_structured_cube(2, 1), gen_annulus(2, 9, 0.4, 1.0, 2)}) {
    const Analysis an = analyze(Discretization(m, ConductivityField::expression(Expression("2 + sin(x)"))));
    const Eigen::MatrixXd ex = explicit_kbar(an.a, an.dd.dbar);
    CHECK((an.dd.kbar.to_dense() - ex).norm() <= 1e-14 * ex.norm());
    CHECK(an.dd.kbar.is_symmetric());
  }
}

TEST_CASE("Kbar is a diagonally dominant M-matrix") {
  const Analysis an = analyze(Discretization(gen_structured_square(5, 2), jump_field(gen_structured_square(5, 2), 1e6)));
  const Eigen::MatrixXd kb = an.dd.kbar.to_dense();
  for (Eigen::Index i = 0; i < kb.rows(); ++i) {
    double off = 0.0;
    for (Eigen::Index j = 0; j < kb.cols(); ++j) {
      if (i == j) continue;
      CHECK(kb(i, j) <= 0.0);
      off += std::abs(kb(i, j));
    }
    CHECK(kb(i, i) >= off * (1.0 - 1e-14));
  }
  for (double c : an.dd.dbar) CHECK(c > 0.0);
}

TEST_CASE("disconnected floating components give a nullspace per component") {
  Eigen::MatrixXd v(2, 6);
  v << 0, 1, 0, 5, 6, 5, 0, 0, 1, 0, 0, 1;
  const Mesh two(2, 1, v, {0, 1, 2, 3, 4, 5}, std::vector<bool>(6, false));
  const Analysis an = analyze(Discretization(two, ConductivityField::constant(1.0)));
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(an.dd.kbar.to_dense());
  int zeros = 0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) zeros += std::abs(es.eigenvalues()(i)) < 1e-12;
  CHECK(zeros == 2);
}

TEST_CASE("refactorization identity K_t = A_t^T (c_t^{1/2} Jbar)^T (c_t^{1/2} Jbar) A_t") {
  const Analysis an = analyze(Discretization(gen_structured_cube(1, 2), ConductivityField::constant(3.0)));
  const Eigen::MatrixXd at = local_incidence(an.disc.mesh.nodes_per_element());
  for (std::size_t t = 0; t < an.factors.size(); ++t) {
    const auto& h = an.dd.h.blocks[t].h;
    const Eigen::MatrixXd rebuilt = at.transpose() * (an.dd.dbar[t] * h) * at;
    CHECK((rebuilt - an.element_k[t]).norm() <= 1e-10 * an.element_k[t].norm());
  }
}

TEST_CASE("uniform rescaling leaves H and the bound unchanged") {
  const Mesh base = gen_structured_square(3, 2);
  const Analysis a1 = analyze(Discretization(base, ConductivityField::constant(1.0)));
  for (double s : {1e-3, 1e3}) {
    const Mesh scaled = transform_nodes(base, [s](const Eigen::VectorXd& x) -> Eigen::VectorXd { return s * x; });
    const Analysis a2 = analyze(Discretization(scaled, ConductivityField::constant(1.0)));
    CHECK(std::abs(a2.dd.chi3 - a1.dd.chi3) <= 1e-10 * a1.dd.chi3);
    CHECK(std::abs(a2.dd.h.kappa_global - a1.dd.h.kappa_global) <= 1e-10 * a1.dd.h.kappa_global);
    for (std::size_t t = 0; t < a1.dd.h.blocks.size(); ++t)
      CHECK((a2.dd.h.blocks[t].h - a1.dd.h.blocks[t].h).norm() <= 1e-10 * a1.dd.h.blocks[t].h.norm());
  }
}

TEST_CASE("Jbar singular values are bounded by the quality scalars") {
  const Mesh m = gen_annulus(2, 12, 0.5, 1.0, 2);
  const Analysis an = analyze(Discretization(m, ConductivityField::expression(Expression("1 + x^2"))));
  const double mq = an.quality.min_weight, big = an.quality.max_weight;
  for (std::size_t t = 0; t < an.dd.h.blocks.size(); ++t) {
    const auto& e = an.quality.elements[t];
    const double upper = std::sqrt(big / mq * e.theta_ratio * e.det_ratio) * an.sqp.sigma;
    const double lower = an.sqp.tau / (e.alpha * e.beta);
    CHECK(an.dd.h.blocks[t].sigma_max <= upper * (1.0 + 1e-10));
    CHECK(an.dd.h.blocks[t].sigma_min >= lower * (1.0 - 1e-10));
  }
}
