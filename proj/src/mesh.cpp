#include "ddfem/mesh.hpp"

#include "ddfem/errors.hpp"
#include "ddfem/reference_element.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <string>

namespace ddfem {

namespace {

int lattice_size(int dim, int order) {
  return dim == 2 ? (order + 1) * (order + 2) / 2 : (order + 1) * (order + 2) * (order + 3) / 6;
}

}  // namespace

Mesh::Mesh(int dim, int order, Eigen::MatrixXd nodes, std::vector<int> connectivity, std::vector<bool> dirichlet,
           std::vector<double> element_theta)
    : dim_(dim), order_(order), element_theta_(std::move(element_theta)) {
  if ((dim != 2 && dim != 3) || (order != 1 && order != 2)) {
    throw UnsupportedConfiguration("unsupported mesh d=" + std::to_string(dim) + " p=" + std::to_string(order));
  }
  nodes_per_element_ = lattice_size(dim, order);
  const int nn = static_cast<int>(nodes.cols());
  if (nodes.rows() != dim) throw InvalidMesh("node coordinates must have " + std::to_string(dim) + " rows");
  if (static_cast<int>(dirichlet.size()) != nn) throw InvalidMesh("one Dirichlet flag per node required");
  if (connectivity.size() % static_cast<std::size_t>(nodes_per_element_) != 0) {
    throw InvalidMesh("connectivity length is not a multiple of " + std::to_string(nodes_per_element_));
  }
  const int m = static_cast<int>(connectivity.size()) / nodes_per_element_;
  if (!element_theta_.empty() && static_cast<int>(element_theta_.size()) != m) {
    throw InvalidMesh("per-element conductivity must have one value per element");
  }

  std::vector<char> referenced(static_cast<std::size_t>(nn), 0);
  for (int t = 0; t < m; ++t) {
    auto first = connectivity.begin() + static_cast<std::ptrdiff_t>(t) * nodes_per_element_;
    std::vector<int> sorted(first, first + nodes_per_element_);
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      if (sorted[i] < 0 || sorted[i] >= nn) {
        throw InvalidMesh("element " + std::to_string(t + 1) + " references node " + std::to_string(sorted[i] + 1) +
                          " outside 1.." + std::to_string(nn));
      }
      if (i > 0 && sorted[i] == sorted[i - 1]) {
        throw InvalidMesh("element " + std::to_string(t + 1) + " lists node " + std::to_string(sorted[i] + 1) +
                          " twice");
      }
      referenced[static_cast<std::size_t>(sorted[i])] = 1;
    }
  }
  for (int i = 0; i < nn; ++i) {
    if (!referenced[static_cast<std::size_t>(i)]) {
      throw InvalidMesh("node " + std::to_string(i + 1) + " is not used by any element");
    }
  }

  // Stable partition: free nodes first, then Dirichlet nodes.
  std::vector<int> new_index(static_cast<std::size_t>(nn));
  source_index_.reserve(static_cast<std::size_t>(nn));
  for (int pass = 0; pass < 2; ++pass) {
    for (int i = 0; i < nn; ++i) {
      if (static_cast<int>(dirichlet[static_cast<std::size_t>(i)]) == pass) {
        new_index[static_cast<std::size_t>(i)] = static_cast<int>(source_index_.size());
        source_index_.push_back(i);
      }
    }
    if (pass == 0) num_free_ = static_cast<int>(source_index_.size());
  }
  for (int i = 0; i < nn; ++i) renumbered_ = renumbered_ || source_index_[static_cast<std::size_t>(i)] != i;

  nodes_.resize(dim, nn);
  for (int i = 0; i < nn; ++i) nodes_.col(i) = nodes.col(source_index_[static_cast<std::size_t>(i)]);
  connectivity_ = std::move(connectivity);
  for (int& g : connectivity_) g = new_index[static_cast<std::size_t>(g)];
}

std::vector<bool> Mesh::dirichlet_flags() const {
  std::vector<bool> flags(static_cast<std::size_t>(num_nodes()), false);
  for (int i = num_free_; i < num_nodes(); ++i) flags[static_cast<std::size_t>(i)] = true;
  return flags;
}

bool operator==(const Mesh& a, const Mesh& b) {
  return a.dim_ == b.dim_ && a.order_ == b.order_ && a.num_free_ == b.num_free_ && a.nodes_ == b.nodes_ &&
         a.connectivity_ == b.connectivity_ && a.element_theta_ == b.element_theta_;
}

Mesh load_mesh(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  int dim = 0;
  int order = 0;

  auto next_content = [&](std::string& out) {
    while (std::getline(in, out)) {
      ++lineno;
      if (auto hash = out.find('#'); hash != std::string::npos) out.erase(hash);
      if (out.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
  };

  if (!next_content(line)) throw ParseError(lineno, "empty mesh file");
  {
    std::istringstream hs(line);
    std::string magic, version, dfield, pfield, extra;
    hs >> magic >> version >> dfield >> pfield;
    if (magic != "ddfem-mesh" || version != "v1" || dfield.rfind("d=", 0) != 0 || pfield.rfind("p=", 0) != 0 ||
        (hs >> extra)) {
      throw ParseError(lineno, "expected header 'ddfem-mesh v1 d=<2|3> p=<1|2>'");
    }
    try {
      dim = std::stoi(dfield.substr(2));
      order = std::stoi(pfield.substr(2));
    } catch (const std::exception&) {
      throw ParseError(lineno, "bad d= or p= value in header");
    }
    if ((dim != 2 && dim != 3) || (order != 1 && order != 2)) {
      throw ParseError(lineno, "unsupported d=" + std::to_string(dim) + " p=" + std::to_string(order));
    }
  }
  const int l = lattice_size(dim, order);

  std::map<long, std::pair<std::vector<double>, bool>> nodes;
  std::map<long, std::vector<int>> elems;
  std::map<long, double> thetas;

  while (next_content(line)) {
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    auto fail = [&](const std::string& what) -> ParseError { return ParseError(lineno, what); };
    auto read_index = [&](const char* what) {
      long idx = 0;
      if (!(ls >> idx) || idx < 1) throw fail(std::string("bad ") + what + " index");
      return idx;
    };
    auto expect_end = [&]() {
      std::string extra;
      if (ls >> extra) throw fail("unexpected trailing field '" + extra + "'");
    };
    if (tag == "node") {
      const long idx = read_index("node");
      std::vector<double> x(static_cast<std::size_t>(dim));
      for (double& v : x)
        if (!(ls >> v)) throw fail("node line needs " + std::to_string(dim) + " coordinates and a Dirichlet flag");
      int flag = -1;
      if (!(ls >> flag) || (flag != 0 && flag != 1)) throw fail("Dirichlet flag must be 0 or 1");
      expect_end();
      if (!nodes.emplace(idx, std::make_pair(x, flag == 1)).second) throw fail("duplicate node " + std::to_string(idx));
    } else if (tag == "elem") {
      const long idx = read_index("element");
      std::vector<int> conn(static_cast<std::size_t>(l));
      for (int& g : conn) {
        long v = 0;
        if (!(ls >> v)) throw fail("element line needs " + std::to_string(l) + " node indices");
        if (v < 1) throw fail("node index must be >= 1");
        g = static_cast<int>(v - 1);
      }
      expect_end();
      if (!elems.emplace(idx, conn).second) throw fail("duplicate element " + std::to_string(idx));
    } else if (tag == "theta") {
      std::string kind;
      ls >> kind;
      if (kind != "elem") throw fail("expected 'theta elem <t> <value>'");
      const long idx = read_index("element");
      double v = 0.0;
      if (!(ls >> v)) throw fail("missing conductivity value");
      expect_end();
      if (!thetas.emplace(idx, v).second) throw fail("duplicate conductivity for element " + std::to_string(idx));
    } else {
      throw fail("unknown record '" + tag + "'");
    }
  }

  const long nn = static_cast<long>(nodes.size());
  if (nn == 0) throw ParseError(lineno, "mesh has no nodes");
  if (nodes.rbegin()->first != nn) throw InvalidMesh("node indices must be exactly 1.." + std::to_string(nn));
  const long m = static_cast<long>(elems.size());
  if (m == 0) throw ParseError(lineno, "mesh has no elements");
  if (elems.rbegin()->first != m) throw InvalidMesh("element indices must be exactly 1.." + std::to_string(m));

  Eigen::MatrixXd coords(dim, nn);
  std::vector<bool> dirichlet(static_cast<std::size_t>(nn));
  for (const auto& [idx, rec] : nodes) {
    for (int a = 0; a < dim; ++a) coords(a, idx - 1) = rec.first[static_cast<std::size_t>(a)];
    dirichlet[static_cast<std::size_t>(idx - 1)] = rec.second;
  }
  std::vector<int> connectivity;
  connectivity.reserve(static_cast<std::size_t>(m * l));
  for (const auto& [idx, conn] : elems) connectivity.insert(connectivity.end(), conn.begin(), conn.end());

  std::vector<double> element_theta;
  if (!thetas.empty()) {
    if (static_cast<long>(thetas.size()) != m || thetas.rbegin()->first != m) {
      throw InvalidMesh("theta records must cover every element exactly once");
    }
    for (const auto& [idx, v] : thetas) element_theta.push_back(v);
  }
  return Mesh(dim, order, std::move(coords), std::move(connectivity), std::move(dirichlet), std::move(element_theta));
}

Mesh load_mesh_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open mesh file '" + path + "'");
  return load_mesh(in);
}

void save_mesh(const Mesh& mesh, std::ostream& out) {
  const auto old_precision = out.precision(17);
  out << "ddfem-mesh v1 d=" << mesh.dim() << " p=" << mesh.order() << '\n';
  for (int i = 0; i < mesh.num_nodes(); ++i) {
    out << "node " << i + 1;
    for (int a = 0; a < mesh.dim(); ++a) out << ' ' << mesh.nodes()(a, i);
    out << ' ' << (mesh.is_dirichlet(i) ? 1 : 0) << '\n';
  }
  for (int t = 0; t < mesh.num_elements(); ++t) {
    out << "elem " << t + 1;
    for (int g : mesh.element(t)) out << ' ' << g + 1;
    out << '\n';
  }
  for (std::size_t t = 0; t < mesh.element_theta().size(); ++t) {
    out << "theta elem " << t + 1 << ' ' << mesh.element_theta()[t] << '\n';
  }
  out.precision(old_precision);
}

void save_mesh_file(const Mesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::ios_base::failure("cannot write mesh file '" + path + "'");
  save_mesh(mesh, out);
}

namespace {

/// Edges of a simplex with d+1 vertices, as local vertex pairs.
std::vector<std::array<int, 2>> simplex_edges(int dim) {
  std::vector<std::array<int, 2>> edges;
  for (int a = 0; a <= dim; ++a)
    for (int b = a + 1; b <= dim; ++b) edges.push_back({a, b});
  return edges;
}

std::pair<int, int> ordered(int a, int b) { return a < b ? std::make_pair(a, b) : std::make_pair(b, a); }

}  // namespace

Mesh insert_midpoints(const Mesh& mesh, const BoundaryProjector& snap) {
  if (mesh.order() != 1) throw UnsupportedConfiguration("midpoint insertion needs an order-1 mesh");
  const int d = mesh.dim();
  const int m = mesh.num_elements();

  // Boundary facets appear in exactly one element.
  std::map<std::vector<int>, int> facet_count;
  for (int t = 0; t < m; ++t) {
    const auto el = mesh.element(t);
    for (int skip = 0; skip <= d; ++skip) {
      std::vector<int> facet;
      for (int a = 0; a <= d; ++a)
        if (a != skip) facet.push_back(el[static_cast<std::size_t>(a)]);
      std::sort(facet.begin(), facet.end());
      ++facet_count[facet];
    }
  }
  std::map<std::pair<int, int>, bool> boundary_edge;
  for (const auto& [facet, count] : facet_count) {
    if (count != 1) continue;
    for (std::size_t a = 0; a < facet.size(); ++a)
      for (std::size_t b = a + 1; b < facet.size(); ++b) boundary_edge[ordered(facet[a], facet[b])] = true;
  }

  std::vector<Eigen::VectorXd> coords;
  std::vector<bool> dirichlet = mesh.dirichlet_flags();
  for (int i = 0; i < mesh.num_nodes(); ++i) coords.push_back(mesh.node(i));

  std::map<std::pair<int, int>, int> edge_node;
  const auto edges = simplex_edges(d);
  for (int t = 0; t < m; ++t) {
    const auto el = mesh.element(t);
    for (const auto& e : edges) {
      const auto key = ordered(el[static_cast<std::size_t>(e[0])], el[static_cast<std::size_t>(e[1])]);
      if (edge_node.contains(key)) continue;
      Eigen::VectorXd mid = 0.5 * (coords[static_cast<std::size_t>(key.first)] + coords[static_cast<std::size_t>(key.second)]);
      const bool on_boundary = boundary_edge.contains(key);
      if (on_boundary && snap) mid = snap(mid);
      edge_node.emplace(key, static_cast<int>(coords.size()));
      coords.push_back(mid);
      dirichlet.push_back(on_boundary && mesh.is_dirichlet(key.first) && mesh.is_dirichlet(key.second));
    }
  }

  const ReferenceElement ref(d, 2);
  std::vector<int> connectivity;
  connectivity.reserve(static_cast<std::size_t>(m * ref.num_nodes()));
  for (int t = 0; t < m; ++t) {
    const auto el = mesh.element(t);
    for (int mu = 0; mu < ref.num_nodes(); ++mu) {
      const auto verts = ref.node_vertices(mu);
      const int a = el[static_cast<std::size_t>(verts[0])];
      const int b = el[static_cast<std::size_t>(verts[1])];
      connectivity.push_back(a == b ? a : edge_node.at(ordered(a, b)));
    }
  }

  Eigen::MatrixXd nodes(d, static_cast<Eigen::Index>(coords.size()));
  for (std::size_t i = 0; i < coords.size(); ++i) nodes.col(static_cast<Eigen::Index>(i)) = coords[i];
  return Mesh(d, 2, std::move(nodes), std::move(connectivity), std::move(dirichlet), mesh.element_theta());
}

Mesh gen_structured_square(int k, int order) {
  if (k < 1) throw UnsupportedConfiguration("subdivision count must be >= 1");
  const int side = k + 1;
  Eigen::MatrixXd nodes(2, side * side);
  std::vector<bool> dirichlet(static_cast<std::size_t>(side * side));
  auto id = [side](int i, int j) { return j * side + i; };
  for (int j = 0; j < side; ++j) {
    for (int i = 0; i < side; ++i) {
      nodes.col(id(i, j)) << static_cast<double>(i) / k, static_cast<double>(j) / k;
      dirichlet[static_cast<std::size_t>(id(i, j))] = i == 0 || j == 0 || i == k || j == k;
    }
  }
  std::vector<int> conn;
  for (int j = 0; j < k; ++j) {
    for (int i = 0; i < k; ++i) {
      conn.insert(conn.end(), {id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      conn.insert(conn.end(), {id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  Mesh linear(2, 1, std::move(nodes), std::move(conn), std::move(dirichlet));
  return order == 1 ? linear : insert_midpoints(linear);
}

Mesh gen_structured_cube(int k, int order) {
  if (k < 1) throw UnsupportedConfiguration("subdivision count must be >= 1");
  const int side = k + 1;
  Eigen::MatrixXd nodes(3, side * side * side);
  std::vector<bool> dirichlet(static_cast<std::size_t>(side * side * side));
  auto id = [side](int i, int j, int l) { return (l * side + j) * side + i; };
  for (int l = 0; l < side; ++l)
    for (int j = 0; j < side; ++j)
      for (int i = 0; i < side; ++i) {
        nodes.col(id(i, j, l)) << static_cast<double>(i) / k, static_cast<double>(j) / k, static_cast<double>(l) / k;
        dirichlet[static_cast<std::size_t>(id(i, j, l))] = i == 0 || j == 0 || l == 0 || i == k || j == k || l == k;
      }

  // Each permutation of the axes gives one tetrahedron of the path 000 -> 111.
  const std::array<std::array<int, 3>, 6> perms{{{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
  const std::array<int, 6> parity{1, -1, -1, 1, 1, -1};
  std::vector<int> conn;
  for (int l = 0; l < k; ++l)
    for (int j = 0; j < k; ++j)
      for (int i = 0; i < k; ++i) {
        for (std::size_t p = 0; p < perms.size(); ++p) {
          std::array<int, 3> c{i, j, l};
          std::array<int, 4> tet{};
          tet[0] = id(c[0], c[1], c[2]);
          for (int s = 0; s < 3; ++s) {
            ++c[static_cast<std::size_t>(perms[p][static_cast<std::size_t>(s)])];
            tet[static_cast<std::size_t>(s + 1)] = id(c[0], c[1], c[2]);
          }
          if (parity[p] < 0) std::swap(tet[2], tet[3]);
          conn.insert(conn.end(), tet.begin(), tet.end());
        }
      }
  Mesh linear(3, 1, std::move(nodes), std::move(conn), std::move(dirichlet));
  return order == 1 ? linear : insert_midpoints(linear);
}

Mesh gen_annulus(int radial_cells, int angular_cells, double r_inner, double r_outer, int order) {
  if (radial_cells < 1 || angular_cells < 3 || !(r_inner > 0.0) || !(r_outer > r_inner)) {
    throw UnsupportedConfiguration("annulus needs radial_cells >= 1, angular_cells >= 3, 0 < r_inner < r_outer");
  }
  const int rings = radial_cells + 1;
  Eigen::MatrixXd nodes(2, rings * angular_cells);
  std::vector<bool> dirichlet(static_cast<std::size_t>(rings * angular_cells));
  auto id = [angular_cells](int i, int j) { return i * angular_cells + (j % angular_cells); };
  for (int i = 0; i < rings; ++i) {
    const double r = r_inner + (r_outer - r_inner) * i / radial_cells;
    for (int j = 0; j < angular_cells; ++j) {
      const double phi = 2.0 * std::numbers::pi * j / angular_cells;
      nodes.col(id(i, j)) << r * std::cos(phi), r * std::sin(phi);
      dirichlet[static_cast<std::size_t>(id(i, j))] = i == 0 || i == radial_cells;
    }
  }
  std::vector<int> conn;
  for (int i = 0; i < radial_cells; ++i)
    for (int j = 0; j < angular_cells; ++j) {
      conn.insert(conn.end(), {id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      conn.insert(conn.end(), {id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  Mesh linear(2, 1, std::move(nodes), std::move(conn), std::move(dirichlet));
  if (order == 1) return linear;
  const double r_mid = 0.5 * (r_inner + r_outer);
  return insert_midpoints(linear, [=](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    const double r = x.norm();
    return x * ((r < r_mid ? r_inner : r_outer) / r);
  });
}

Mesh transform_nodes(const Mesh& mesh, const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& map) {
  Eigen::MatrixXd nodes(mesh.dim(), mesh.num_nodes());
  for (int i = 0; i < mesh.num_nodes(); ++i) nodes.col(i) = map(mesh.node(i));
  return Mesh(mesh.dim(), mesh.order(), std::move(nodes), mesh.connectivity(), mesh.dirichlet_flags(),
              mesh.element_theta());
}

ConductivityField ConductivityField::constant(double value) { return ConductivityField(Constant{value}); }

ConductivityField ConductivityField::per_element(std::vector<double> values) {
  return ConductivityField(PerElement{std::move(values)});
}

ConductivityField ConductivityField::expression(Expression expr) { return ConductivityField(Expr{std::move(expr)}); }

ConductivityField ConductivityField::from_mesh(const Mesh& mesh) {
  if (mesh.element_theta().empty()) return constant(1.0);
  return per_element(mesh.element_theta());
}

double ConductivityField::operator()(const Eigen::VectorXd& x, int element) const {
  double v = std::visit(
      [&](const auto& mode) -> double {
        using T = std::decay_t<decltype(mode)>;
        if constexpr (std::is_same_v<T, Constant>) {
          return mode.value;
        } else if constexpr (std::is_same_v<T, PerElement>) {
          if (element < 0 || element >= static_cast<int>(mode.values.size())) {
            throw std::out_of_range("no conductivity value for element " + std::to_string(element + 1));
          }
          return mode.values[static_cast<std::size_t>(element)];
        } else {
          return mode.expr(x);
        }
      },
      mode_);
  v *= scale_;
  if (!(v > 0.0) || !std::isfinite(v)) {
    std::ostringstream msg;
    msg << "conductivity " << v << " at element " << element + 1 << " point (" << x.transpose() << ") is not positive";
    throw AssumptionViolation(1, msg.str());
  }
  return v;
}

ConductivityField ConductivityField::scaled(double c) const { return ConductivityField(mode_, scale_ * c); }

Eigen::VectorXd element_centroid(const Mesh& mesh, int t) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(mesh.dim());
  for (int g : mesh.element(t)) c += mesh.node(g);
  return c / mesh.nodes_per_element();
}

ConductivityField jump_field(const Mesh& mesh, double high, double split) {
  std::vector<double> values(static_cast<std::size_t>(mesh.num_elements()), 1.0);
  for (int t = 0; t < mesh.num_elements(); ++t)
    if (element_centroid(mesh, t)(0) > split) values[static_cast<std::size_t>(t)] = high;
  return ConductivityField::per_element(std::move(values));
}

}  // namespace ddfem
