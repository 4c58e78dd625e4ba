#include "doctest.h"

#include "ddfem/pipeline.hpp"
#include "ddfem/quality.hpp"

#include <cmath>

using namespace ddfem;

namespace {

QualityReport quality_of(const Mesh& m, const ConductivityField& theta = ConductivityField::constant(1.0)) {
  const Discretization disc(m, theta);
  return compute_quality(all_geometries(disc), disc.rule, build_sqp(disc.ref, disc.rule));
}

}  // namespace

TEST_CASE("affine order-1 meshes have kappa2 = 1") {
  for (const Mesh& m : {gen_structured_square(3, 1), gen_structured_cube(2, 1), gen_annulus(2, 8, 0.5, 1.0, 1)}) {
    const QualityReport q = quality_of(m);
    CHECK(q.kappa2 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(q.sigma_qp == doctest::Approx(1.0));
    CHECK(q.tau_qp == doctest::Approx(1.0));
    CHECK(q.weight_ratio() == doctest::Approx(1.0));
  }
}

TEST_CASE("structured square kappa1 is the golden ratio squared") {
  // Both Jacobians are shears with singular values phi and 1/phi (times k^{-1}).
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  for (int k : {1, 2, 5}) {
    CHECK(quality_of(gen_structured_square(k, 1)).kappa1 == doctest::Approx(phi * phi).epsilon(1e-12));
    CHECK(quality_of(gen_structured_square(k, 2)).kappa1 == doctest::Approx(phi * phi).epsilon(1e-12));
  }
}

TEST_CASE("theta_hat measures variation inside elements only") {
  const Mesh m = gen_structured_square(4, 2);
  CHECK(quality_of(m, jump_field(m, 1e6)).theta_hat == doctest::Approx(1.0));
  CHECK(quality_of(m, ConductivityField::constant(7.0)).theta_hat == doctest::Approx(1.0));
  const QualityReport smooth = quality_of(m, ConductivityField::expression(Expression("1 + 10*x")));
  CHECK(smooth.theta_hat > 1.0);
  CHECK(smooth.theta_hat < 11.0);
}

TEST_CASE("kappa2 <= kappa1^d and kappa1 >= 1") {
  for (const Mesh& m : {gen_structured_square(3, 2), gen_structured_cube(2, 2), gen_annulus(2, 8, 0.5, 1.0, 2),
                        gen_annulus(1, 6, 0.2, 1.0, 2)}) {
    const QualityReport q = quality_of(m);
    CHECK(q.kappa1 >= 1.0);
    CHECK(q.kappa2 <= std::pow(q.kappa1, m.dim()) * (1.0 + 1e-12));
  }
}

TEST_CASE("curved elements have a varying Jacobian determinant") {
  const QualityReport q = quality_of(gen_annulus(2, 8, 0.5, 1.0, 2));
  CHECK(q.kappa2 > 1.0 + 1e-6);
  int curved = 0;
  for (const auto& e : q.elements) curved += e.det_ratio > 1.0 + 1e-9;
  CHECK(curved > 0);
}

TEST_CASE("element quality of a scaled right triangle") {
  Eigen::MatrixXd v(2, 3);
  v << 0, 2, 0, 0, 0, 2;
  const Mesh m(2, 1, v, {0, 1, 2}, {false, false, false});
  const Discretization disc(m, ConductivityField::constant(3.0));
  const ElementQuality e = element_quality(element_geometry(disc, 0));
  CHECK(e.alpha == doctest::Approx(0.5));
  CHECK(e.beta == doctest::Approx(2.0));
  CHECK(e.shape() == doctest::Approx(1.0));
  CHECK(e.min_det == doctest::Approx(4.0));
  CHECK(e.min_theta == doctest::Approx(3.0));
}
