#include "doctest.h"

#include "ddfem/errors.hpp"
#include "ddfem/pipeline.hpp"
#include "ddfem/solver.hpp"
#include "ddfem/spectral.hpp"

using namespace ddfem;

namespace {

SparseSymmetricMatrix from_dense(const Eigen::MatrixXd& d) { return SparseSymmetricMatrix(d.sparseView()); }

}  // namespace

TEST_CASE("trivial systems") {
  Eigen::MatrixXd one(1, 1);
  one << 4.0;
  Eigen::VectorXd f(1);
  f << 2.0;
  SolveResult r = pcg_solve(from_dense(one), f, nullptr);
  CHECK(r.converged);
  CHECK(r.x(0) == doctest::Approx(0.5));
  CHECK(r.iterations == 1);

  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(6, 6);
  r = pcg_solve(from_dense(id), Eigen::VectorXd::LinSpaced(6, 1, 6), nullptr);
  CHECK(r.iterations == 1);
  CHECK(r.relative_residual < 1e-14);

  r = pcg_solve(from_dense(id), Eigen::VectorXd::Zero(6), nullptr);
  CHECK(r.converged);
  CHECK(r.iterations == 0);
  CHECK(r.x.isZero());
}

TEST_CASE("exact preconditioner converges in one iteration") {
  const Analysis an = analyze(Discretization(gen_structured_square(5, 2), ConductivityField::constant(1.0)));
  const SparseCholesky exact(an.k);
  const Eigen::VectorXd f = Eigen::VectorXd::Ones(an.k.dim());
  const SolveResult r = pcg_solve(an.k, f, &exact);
  CHECK(r.converged);
  CHECK(r.iterations == 1);
}

TEST_CASE("floating Kbar is rejected") {
  Eigen::MatrixXd v(2, 3);
  v << 0, 1, 0, 0, 0, 1;
  const Mesh m(2, 1, v, {0, 1, 2}, {false, false, false});
  const Analysis an = analyze(Discretization(m, ConductivityField::constant(1.0)));
  CHECK_THROWS_AS(factor_kbar(an.dd.kbar), SingularMatrix);
  try {
    factor_kbar(an.dd.kbar);
  } catch (const SingularMatrix& e) {
    CHECK(std::string(e.what()).find("node 1") != std::string::npos);
  }
}

TEST_CASE("empty system") {
  const Analysis an = analyze(Discretization(gen_structured_square(1, 1), ConductivityField::constant(1.0)));
  CHECK(an.k.dim() == 0);
  const SparseCholesky pre = factor_kbar(an.dd.kbar);
  const SolveResult r = pcg_solve(an.k, Eigen::VectorXd(0), &pre);
  CHECK(r.converged);
  CHECK(r.x.size() == 0);
}

TEST_CASE("PCG with Kbar matches a dense solve and beats plain CG") {
  const Mesh m = gen_structured_square(8, 2);
  const Analysis an = analyze(Discretization(m, jump_field(m, 1e4)));
  const Eigen::VectorXd f = Eigen::VectorXd::LinSpaced(an.k.dim(), 0.5, 2.0);
  const Eigen::VectorXd dense = an.k.to_dense().ldlt().solve(f);
  const SparseCholesky pre = factor_kbar(an.dd.kbar);
  const SolveResult r = pcg_solve(an.k, f, &pre, {1e-12, 10000});
  const SolveResult plain = pcg_solve(an.k, f, nullptr, {1e-12, 10000});
  REQUIRE(r.converged);
  REQUIRE(plain.converged);
  CHECK((r.x - dense).norm() <= 1e-8 * dense.norm());
  CHECK(r.iterations <= plain.iterations);
  CHECK(r.residual_history.size() == static_cast<std::size_t>(r.iterations) + 1);
  CHECK(r.relative_residual <= 1e-12);

  // Ritz values lie inside the pencil spectrum (Lanczos interlacing), up to 5%.
  const PencilSpectrum ps = condition_pair(an.k.to_dense(), an.dd.kbar.to_dense());
  const double lo = ps.eigenvalues.minCoeff(), hi = ps.eigenvalues.maxCoeff();
  CHECK(r.ritz_min >= lo * 0.95);
  CHECK(r.ritz_max <= hi * 1.05);
  CHECK(r.ritz_condition() <= ps.kappa * 1.05);
  CHECK(r.iterations <= cg_iteration_bound(ps.kappa, 1e-12));
}

TEST_CASE("iteration bound") {
  CHECK(cg_iteration_bound(1.0, 1e-10) == static_cast<int>(std::ceil(0.5 * std::log(2e10))) + 5);
  CHECK(cg_iteration_bound(100.0, 1e-10) > cg_iteration_bound(4.0, 1e-10));
}

TEST_CASE("iteration limit is reported, not thrown") {
  const Analysis an = analyze(Discretization(gen_structured_square(10, 1), ConductivityField::constant(1.0)));
  const SolveResult r = pcg_solve(an.k, Eigen::VectorXd::Ones(an.k.dim()), nullptr, {1e-14, 3});
  CHECK_FALSE(r.converged);
  CHECK(r.iterations == 3);
}

TEST_CASE("preconditioned iterations are insensitive to a conductivity jump") {
  const Mesh m = gen_structured_square(8, 1);
  int iters[2];
  int plain[2];
  double kappa_h = 0.0;
  const double jumps[2] = {1.0, 1e6};
  for (int i = 0; i < 2; ++i) {
    const Analysis an = analyze(Discretization(m, jump_field(m, jumps[i])));
    kappa_h = std::max(kappa_h, an.dd.h.kappa_global);
    const SparseCholesky pre = factor_kbar(an.dd.kbar);
    const Eigen::VectorXd f = Eigen::VectorXd::Ones(an.k.dim());
    iters[i] = pcg_solve(an.k, f, &pre).iterations;
    plain[i] = pcg_solve(an.k, f, nullptr).iterations;
  }
  CHECK(iters[1] <= iters[0] * std::sqrt(kappa_h));
  CHECK(plain[1] > plain[0]);
}
