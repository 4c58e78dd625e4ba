#include "doctest.h"

#include "ddfem/assembly.hpp"
#include "ddfem/errors.hpp"
#include "ddfem/mesh.hpp"

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

using namespace ddfem;

namespace {

const char* kTriangle =
    "ddfem-mesh v1 d=2 p=1\n"
    "node 1 0 0 0\n"
    "node 2 1 0 0\n"
    "node 3 0 1 0\n"
    "elem 1 1 2 3\n";

Mesh parse(const std::string& s) {
  std::istringstream in(s);
  return load_mesh(in);
}

std::string serialize(const Mesh& m) {
  std::ostringstream out;
  save_mesh(m, out);
  return out.str();
}

}  // namespace

TEST_CASE("load a single triangle") {
  const Mesh m = parse(kTriangle);
  CHECK(m.num_elements() == 1);
  CHECK(m.num_nodes() == 3);
  CHECK(m.num_free() == 3);
  CHECK_FALSE(m.renumbered());
}

TEST_CASE("Dirichlet nodes are renumbered last") {
  std::string s = kTriangle;
  s.replace(s.find("node 1 0 0 0"), 12, "node 1 0 0 1");
  const Mesh m = parse(s);
  CHECK(m.num_free() == 2);
  CHECK(m.renumbered());
  CHECK(m.is_dirichlet(2));
  CHECK(m.node(2).isZero());
  CHECK(m.source_index() == std::vector<int>{1, 2, 0});
  // Element connectivity follows the renumbering.
  CHECK(m.element(0)[0] == 2);
  CHECK(m.element(0)[1] == 0);
}

TEST_CASE("parse errors name the line") {
  auto line_of = [](const std::string& s) -> std::size_t {
    try {
      parse(s);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  CHECK(line_of(std::string(kTriangle).replace(std::string(kTriangle).find("elem 1 1 2 3"), 12, "elem 1 1 2")) == 5);
  CHECK(line_of("ddfem-mesh v2 d=2 p=1\n") == 1);
  CHECK(line_of("ddfem-mesh v1 d=2 p=1\nnode 1 0 0 2\n") == 2);
  CHECK(line_of("ddfem-mesh v1 d=2 p=1\nnode 1 0 0 0\nnode 1 1 0 0\n") == 3);
  CHECK(line_of("ddfem-mesh v1 d=2 p=1\nfoo\n") == 2);
}

TEST_CASE("structural mesh errors") {
  CHECK_THROWS_AS(parse("ddfem-mesh v1 d=2 p=1\nnode 1 0 0 0\nnode 2 1 0 0\nnode 3 0 1 0\nelem 1 1 2 2\n"),
                  InvalidMesh);
  CHECK_THROWS_AS(parse("ddfem-mesh v1 d=2 p=1\nnode 1 0 0 0\nnode 2 1 0 0\nnode 3 0 1 0\nelem 1 1 2 4\n"),
                  InvalidMesh);
  CHECK_THROWS_AS(
      parse("ddfem-mesh v1 d=2 p=1\nnode 1 0 0 0\nnode 2 1 0 0\nnode 3 0 1 0\nnode 4 1 1 0\nelem 1 1 2 3\n"),
      InvalidMesh);
}

TEST_CASE("save/load round trip is the identity on the data model") {
  for (const Mesh& m : {gen_structured_square(3, 1), gen_structured_square(2, 2), gen_structured_cube(2, 2),
                        gen_annulus(2, 8, 0.5, 1.0, 2), parse(kTriangle)}) {
    const std::string text = serialize(m);
    const Mesh back = parse(text);
    CHECK(back == m);
    CHECK(serialize(back) == text);
  }
  // Per-element conductivity survives too.
  const Mesh withtheta = parse(std::string(kTriangle) + "theta elem 1 2.5\n");
  CHECK(withtheta.element_theta() == std::vector<double>{2.5});
  CHECK(parse(serialize(withtheta)) == withtheta);
}

TEST_CASE("structured square generator") {
  const Mesh a = gen_structured_square(1, 1);
  CHECK(a.num_elements() == 2);
  CHECK(a.num_nodes() == 4);
  CHECK(a.num_free() == 0);
  const Mesh b = gen_structured_square(2, 1);
  CHECK(b.num_elements() == 8);
  CHECK(b.num_nodes() == 9);
  CHECK(b.num_free() == 1);
  const Mesh c = gen_structured_square(1, 2);
  CHECK(c.num_nodes() == 9);
  CHECK(c.nodes_per_element() == 6);
  // The diagonal midpoint is interior, the four edge midpoints are Dirichlet.
  CHECK(c.num_free() == 1);
  CHECK(c.node(0).isApprox(Eigen::Vector2d(0.5, 0.5)));
}

TEST_CASE("structured cube generator") {
  const Mesh a = gen_structured_cube(1, 1);
  CHECK(a.num_elements() == 6);
  CHECK(a.num_nodes() == 8);
  CHECK(gen_structured_cube(2, 1).num_elements() == 48);
  const Mesh q = gen_structured_cube(1, 2);
  CHECK(q.nodes_per_element() == 10);
  // 8 corners + 19 edges (12 cube edges, 6 face diagonals, 1 space diagonal).
  CHECK(q.num_nodes() == 27);
  CHECK(q.num_free() == 1);
}

TEST_CASE("generated meshes are positively oriented at every Gauss point") {
  for (const Mesh& m : {gen_structured_square(4, 1), gen_structured_square(3, 2), gen_structured_cube(2, 1),
                        gen_structured_cube(2, 2), gen_annulus(2, 12, 0.5, 1.0, 1), gen_annulus(2, 12, 0.5, 1.0, 2)}) {
    const Discretization disc(m, ConductivityField::constant(1.0));
    for (int t = 0; t < m.num_elements(); ++t) {
      const ElementGeometry g = element_geometry(disc, t);
      for (double det : g.dets) CHECK(det > 0.0);
    }
  }
}

TEST_CASE("midpoint insertion") {
  SUBCASE("two-triangle square gains five shared midpoints") {
    const Mesh lin = gen_structured_square(1, 1);
    const Mesh quad = insert_midpoints(lin);
    CHECK(quad.num_nodes() - lin.num_nodes() == 5);
    std::set<int> used;
    for (int t = 0; t < quad.num_elements(); ++t)
      for (int g : quad.element(t)) used.insert(g);
    CHECK(static_cast<int>(used.size()) == quad.num_nodes());
  }
  SUBCASE("unsnapped midpoints are arithmetic means") {
    const Mesh lin = gen_structured_square(2, 1);
    const Mesh quad = insert_midpoints(lin);
    const ReferenceElement ref(2, 2);
    for (int t = 0; t < quad.num_elements(); ++t) {
      const auto el = quad.element(t);
      for (int mu = 0; mu < ref.num_nodes(); ++mu) {
        const auto v = ref.node_vertices(mu);
        const Eigen::VectorXd expect = 0.5 * (lin.node(lin.element(t)[static_cast<std::size_t>(v[0])]) +
                                              lin.node(lin.element(t)[static_cast<std::size_t>(v[1])]));
        CHECK(quad.node(el[static_cast<std::size_t>(mu)]).isApprox(expect));
      }
    }
  }
  SUBCASE("projector snaps only boundary midpoints") {
    // Hexagon with a centre node: the six rim edges are on the boundary.
    Eigen::MatrixXd nodes(2, 7);
    nodes.col(0) << 0.0, 0.0;
    std::vector<int> conn;
    for (int j = 0; j < 6; ++j) {
      const double phi = j * std::numbers::pi / 3.0;
      nodes.col(j + 1) << std::cos(phi), std::sin(phi);
      conn.insert(conn.end(), {0, 1 + j, 1 + (j + 1) % 6});
    }
    std::vector<bool> dir{false, true, true, true, true, true, true};
    const Mesh hex(2, 1, nodes, conn, dir);
    const Mesh quad = insert_midpoints(hex, [](const Eigen::VectorXd& x) -> Eigen::VectorXd { return x / x.norm(); });
    CHECK(quad.num_nodes() == 7 + 12);
    int on_circle = 0;
    for (int i = 0; i < quad.num_nodes(); ++i) {
      const double r = quad.node(i).norm();
      if (std::abs(r - 1.0) < 1e-14) ++on_circle;
      if (quad.is_dirichlet(i)) CHECK(std::abs(r - 1.0) < 1e-14);
    }
    CHECK(on_circle == 12);  // 6 vertices + 6 snapped midpoints
    CHECK(quad.num_free() == 1 + 6);
  }
  SUBCASE("order-2 input is rejected") {
    CHECK_THROWS_AS(insert_midpoints(gen_structured_square(1, 2)), UnsupportedConfiguration);
  }
}

TEST_CASE("annulus boundary midpoints lie on the circles") {
  const Mesh m = gen_annulus(2, 10, 0.5, 1.0, 2);
  for (int i = m.num_free(); i < m.num_nodes(); ++i) {
    const double r = m.node(i).norm();
    CHECK((std::abs(r - 0.5) < 1e-14 || std::abs(r - 1.0) < 1e-14));
  }
}

TEST_CASE("conductivity fields") {
  const Eigen::Vector2d x(1.0, 0.0);
  CHECK(ConductivityField::constant(1.0)(x, 0) == 1.0);
  const auto pe = ConductivityField::per_element({1.0, 100.0});
  CHECK(eval_conductivity(pe, x, 1) == 100.0);
  CHECK(ConductivityField::expression(Expression("1+x^2"))(x, 0) == doctest::Approx(2.0));
  CHECK(ConductivityField::constant(2.0).scaled(3.0)(x, 0) == doctest::Approx(6.0));
  CHECK_THROWS_AS(ConductivityField::constant(0.0)(x, 0), AssumptionViolation);
  CHECK_THROWS_AS(ConductivityField::expression(Expression("x - 2"))(x, 0), AssumptionViolation);

  const Mesh sq = gen_structured_square(4, 1);
  const auto jump = jump_field(sq, 1e6);
  int high = 0;
  for (int t = 0; t < sq.num_elements(); ++t) high += jump(element_centroid(sq, t), t) > 1.0;
  CHECK(high == sq.num_elements() / 2);
}

TEST_CASE("expression parser") {
  const Eigen::Vector3d x(2.0, 3.0, 0.5);
  CHECK(Expression("2^3^2")(x) == doctest::Approx(512.0));
  CHECK(Expression("-x^2")(x) == doctest::Approx(-4.0));
  CHECK(Expression("(x + y) * z / 2")(x) == doctest::Approx(1.25));
  CHECK(Expression("sqrt(abs(-16)) + exp(0) + cos(pi)")(x) == doctest::Approx(4.0));
  CHECK(Expression("1e-3*x")(x) == doctest::Approx(2e-3));
  CHECK_THROWS_AS(Expression("1 +"), ParseError);
  CHECK_THROWS_AS(Expression("foo(1)"), ParseError);
  CHECK_THROWS_AS(Expression("(1"), ParseError);
}
