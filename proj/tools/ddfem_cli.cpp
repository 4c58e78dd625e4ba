// ddfem: generate meshes, assemble K and Kbar, report quality scalars,
// verify the factorization invariants and solve with PCG.

#include "ddfem/errors.hpp"
#include "ddfem/parallel.hpp"
#include "ddfem/pipeline.hpp"
#include "ddfem/solver.hpp"
#include "ddfem/spectral.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>

using namespace ddfem;
using nlohmann::json;

namespace {

constexpr int kExitVerification = 2;
constexpr int kExitAssumption = 3;
constexpr int kExitIo = 4;

struct Options {
  std::string mesh_file;
  std::string gen;
  int k = 4;
  int p = 1;
  int angular = 0;
  double shear = 1.0;
  double scale = 1.0;

  std::optional<double> theta;
  std::string theta_expr;
  std::optional<double> theta_jump;
  std::string quadrature_file;

  std::string format = "text";
  std::string output;
  int threads = default_threads();

  // command specific
  std::string arcs_file;
  double tol = 1e-10;
  int max_iter = 10000;
  std::string source = "1";
  bool timing = false;
  int dense_limit = 500;
  bool corrupt_kbar = false;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Mesh build_mesh(const Options& o) {
  if (o.mesh_file.empty() == o.gen.empty()) throw UsageError("give exactly one of --mesh and --gen");
  Mesh mesh = [&] {
    if (!o.mesh_file.empty()) return load_mesh_file(o.mesh_file);
    if (o.gen == "square") return gen_structured_square(o.k, o.p);
    if (o.gen == "cube") return gen_structured_cube(o.k, o.p);
    return gen_annulus(o.k, o.angular > 0 ? o.angular : 4 * o.k, 0.5, 1.0, o.p);
  }();
  if (o.shear != 1.0 || o.scale != 1.0) {
    const double s = o.shear - 1.0, c = o.scale;
    mesh = transform_nodes(mesh, [s, c](const Eigen::VectorXd& x) -> Eigen::VectorXd {
      Eigen::VectorXd y = x;
      y(0) += s * x(1);
      return c * y;
    });
  }
  return mesh;
}

ConductivityField build_theta(const Options& o, const Mesh& mesh) {
  const int given = o.theta.has_value() + !o.theta_expr.empty() + o.theta_jump.has_value();
  if (given > 1) throw UsageError("give at most one of --theta, --theta-expr and --theta-jump");
  if (o.theta) return ConductivityField::constant(*o.theta);
  if (!o.theta_expr.empty()) return ConductivityField::expression(Expression(o.theta_expr));
  if (o.theta_jump) return jump_field(mesh, *o.theta_jump);
  return ConductivityField::from_mesh(mesh);
}

Discretization build_discretization(const Options& o) {
  Mesh mesh = build_mesh(o);
  ConductivityField theta = build_theta(o, mesh);
  if (o.quadrature_file.empty()) return Discretization(mesh, std::move(theta));
  std::ifstream in(o.quadrature_file);
  if (!in) throw IoError("cannot open quadrature file '" + o.quadrature_file + "'");
  QuadratureRule rule = load_rule(in, mesh.dim());
  ReferenceElement ref(mesh.dim(), mesh.order());
  return Discretization(mesh, std::move(ref), std::move(rule), std::move(theta));
}

// Writes to --output when given, stdout otherwise.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (path.empty()) return;
    file_ = std::make_unique<std::ofstream>(path);
    if (!*file_) throw IoError("cannot write '" + path + "'");
  }
  std::ostream& out() { return file_ ? *file_ : std::cout; }
  void finish() {
    out().flush();
    if (!out()) throw IoError("write failed");
  }

 private:
  std::unique_ptr<std::ofstream> file_;
};

std::string vec_number(double v) { return format_number(v, 17); }

json triplets_json(const SparseSymmetricMatrix& m) {
  json entries = json::array();
  const auto& mat = m.matrix();
  for (int j = 0; j < mat.outerSize(); ++j)
    for (Eigen::SparseMatrix<double>::InnerIterator it(mat, j); it; ++it)
      entries.push_back({it.row() + 1, j + 1, it.value()});
  return {{"n", m.dim()}, {"nnz", mat.nonZeros()}, {"entries", entries}};
}

int cmd_gen(const Options& o) {
  const Mesh mesh = build_mesh(o);
  Sink sink(o.output);
  save_mesh(mesh, sink.out());
  sink.finish();
  return 0;
}

int cmd_assemble(const Options& o) {
  const Discretization disc = build_discretization(o);
  const SparseSymmetricMatrix k = assemble_global(disc);
  Sink sink(o.output);
  if (o.format == "json") {
    sink.out() << triplets_json(k).dump(2) << '\n';
  } else {
    k.write_triplets(sink.out());
  }
  sink.finish();
  return 0;
}

int cmd_approx(const Options& o) {
  const Analysis an = analyze(build_discretization(o), o.threads);
  if (!o.arcs_file.empty()) {
    std::ofstream arcs(o.arcs_file);
    if (!arcs) throw IoError("cannot write '" + o.arcs_file + "'");
    an.a.write_arcs(arcs);
  }
  Sink sink(o.output);
  if (o.format == "json") {
    json j = triplets_json(an.dd.kbar);
    j["dbar"] = an.dd.dbar;
    j["chi3"] = an.dd.chi3;
    j["kappa_h"] = an.dd.h.kappa_global;
    j["kappa_h_max_element"] = an.dd.h.kappa_max_element;
    sink.out() << j.dump(2) << '\n';
  } else {
    an.dd.kbar.write_triplets(sink.out());
  }
  sink.finish();
  return 0;
}

int cmd_report(const Options& o) {
  const Analysis an = analyze(build_discretization(o), o.threads);
  const ChiReport chi = chi_report(an.disc.mesh, an.element_k, an.dd.dbar, an.dd.h, an.quality, false, o.threads);
  const TableRow row = make_table_row(an, chi);
  Sink sink(o.output);
  if (o.format == "json") {
    sink.out() << table_json(row).dump(2) << '\n';
  } else {
    write_table_text(sink.out(), row);
    if (!row.ordering_violations.empty()) {
      sink.out() << "chi ordering violated on " << row.ordering_violations.size() << " element(s), first "
                 << row.ordering_violations.front() + 1 << '\n';
    }
  }
  sink.finish();
  return row.ordering_violations.empty() ? 0 : kExitVerification;
}

int cmd_verify(const Options& o) {
  const Analysis an = analyze(build_discretization(o), o.threads);
  VerifyOptions vo;
  vo.dense_limit = o.dense_limit;
  vo.corrupt_kbar = o.corrupt_kbar;
  vo.threads = o.threads;
  const VerifyReport rep = run_verification(an, vo);
  Sink sink(o.output);
  if (o.format == "json") {
    sink.out() << verify_json(rep).dump(2) << '\n';
  } else {
    write_verify_text(sink.out(), rep);
  }
  sink.finish();
  return rep.passed() ? 0 : kExitVerification;
}

json solve_json(const SolveResult& r, bool timing) {
  json j{{"iterations", r.iterations},
         {"converged", r.converged},
         {"relative_residual", r.relative_residual},
         {"ritz_min", r.ritz_min},
         {"ritz_max", r.ritz_max},
         {"ritz_condition", r.ritz_condition()}};
  if (timing) j["seconds"] = r.seconds;
  return j;
}

void write_solve_text(std::ostream& out, const std::string& label, const SolveResult& r, bool timing) {
  out << label << " iterations " << r.iterations << " converged " << (r.converged ? "yes" : "no")
      << " relative_residual " << format_number(r.relative_residual) << " ritz_condition "
      << format_number(r.ritz_condition());
  if (timing) out << " seconds " << format_number(r.seconds);
  out << '\n';
}

int cmd_solve(const Options& o) {
  const Analysis an = analyze(build_discretization(o), o.threads);
  const Mesh& mesh = an.disc.mesh;
  if (mesh.num_free() == mesh.num_nodes()) {
    throw SingularMatrix("K and Kbar are singular: the mesh has no Dirichlet nodes");
  }
  const SparseCholesky pre = factor_kbar(an.dd.kbar);
  const Eigen::VectorXd f = assemble_load(an.disc, Expression(o.source));
  const SolveOptions so{o.tol, o.max_iter};
  const SolveResult r = pcg_solve(an.k, f, &pre, so);
  const SolveResult plain = pcg_solve(an.k, f, nullptr, so);

  Sink sink(o.output);
  if (o.format == "json") {
    json x = json::array();
    for (int i = 0; i < mesh.num_free(); ++i) {
      x.push_back({{"node", mesh.source_index()[static_cast<std::size_t>(i)] + 1}, {"value", r.x(i)}});
    }
    const json j{{"n", mesh.num_free()},
                 {"tol", o.tol},
                 {"preconditioned", solve_json(r, o.timing)},
                 {"unpreconditioned", solve_json(plain, o.timing)},
                 {"solution", x}};
    sink.out() << j.dump(2) << '\n';
  } else {
    sink.out() << "n " << mesh.num_free() << " tol " << format_number(o.tol) << '\n';
    write_solve_text(sink.out(), "preconditioned", r, o.timing);
    write_solve_text(sink.out(), "unpreconditioned", plain, o.timing);
    for (int i = 0; i < mesh.num_free(); ++i) {
      sink.out() << "x " << mesh.source_index()[static_cast<std::size_t>(i)] + 1 << ' ' << vec_number(r.x(i)) << '\n';
    }
  }
  sink.finish();
  return r.converged ? 0 : kExitVerification;
}

void add_shared_options(CLI::App& app, Options& o) {
  auto* src = app.add_option_group("mesh source");
  src->add_option("--mesh", o.mesh_file, "mesh file in ddfem-mesh v1 format");
  src->add_option("--gen", o.gen, "generated mesh")->check(CLI::IsMember({"square", "cube", "annulus"}));
  app.add_option("--k", o.k, "cells per side (square, cube) or radial cells (annulus)")->check(CLI::PositiveNumber);
  app.add_option("--p", o.p, "element order")->check(CLI::Range(1, 2));
  app.add_option("--angular", o.angular, "angular cells of the annulus (default 4k)");
  app.add_option("--shear", o.shear, "map x -> x + (s-1) y after generation");
  app.add_option("--scale", o.scale, "multiply all coordinates by this factor")->check(CLI::PositiveNumber);
  app.add_option("--theta", o.theta, "constant conductivity");
  app.add_option("--theta-expr", o.theta_expr, "conductivity as an expression in x, y, z");
  app.add_option("--theta-jump", o.theta_jump, "conductivity equal to this value on elements with centroid x > 1/2");
  app.add_option("--quadrature-file", o.quadrature_file, "custom rule, lines 'point z_1 .. z_d w'");
  app.add_option("--format", o.format, "output format")->check(CLI::IsMember({"text", "json"}));
  app.add_option("--output", o.output, "output file (default stdout)");
  app.add_option("--threads", o.threads, "worker threads for element loops (default $DDFEM_THREADS or 1)")
      ->check(CLI::PositiveNumber);
}

int run(int argc, char** argv) {
  Options o;
  CLI::App app{"Diagonally dominant approximation of finite element stiffness matrices"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.set_config("--config", "", "key = value file; command-line flags take precedence");
  app.require_subcommand(1, 1);
  add_shared_options(app, o);

  auto* gen = app.add_subcommand("gen", "write a generated mesh")->fallthrough();
  auto* assemble = app.add_subcommand("assemble", "write the reduced stiffness matrix K")->fallthrough();
  auto* approx = app.add_subcommand("approx", "write the diagonally dominant approximation Kbar")->fallthrough();
  approx->add_option("--arcs", o.arcs_file, "also write the incidence arcs to this file");
  auto* report = app.add_subcommand("report", "quadrature, quality and chi table")->fallthrough();
  auto* verify = app.add_subcommand("verify", "run the invariant battery")->fallthrough();
  verify->add_option("--dense-limit", o.dense_limit, "largest n for the dense global pencil checks");
  verify->add_flag("--debug-corrupt-kbar", o.corrupt_kbar, "flip one off-diagonal of Kbar (negative test)");
  auto* solve = app.add_subcommand("solve", "PCG with the Kbar preconditioner")->fallthrough();
  solve->add_option("--tol", o.tol, "relative residual tolerance")->check(CLI::PositiveNumber);
  solve->add_option("--max-iter", o.max_iter, "iteration limit")->check(CLI::PositiveNumber);
  solve->add_option("--source", o.source, "right-hand side f as an expression");
  solve->add_flag("--timing", o.timing, "include wall time in the output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  if (gen->parsed()) return cmd_gen(o);
  if (assemble->parsed()) return cmd_assemble(o);
  if (approx->parsed()) return cmd_approx(o);
  if (report->parsed()) return cmd_report(o);
  if (verify->parsed()) return cmd_verify(o);
  if (solve->parsed()) return cmd_solve(o);
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const VerificationFailure& e) {
    std::cerr << "verification failure: " << e.what() << '\n';
    return kExitVerification;
  } catch (const AssumptionViolation& e) {
    std::cerr << "assumption " << e.assumption() << " violated: " << e.what() << '\n';
    return kExitAssumption;
  } catch (const SingularMatrix& e) {
    std::cerr << "singular matrix: " << e.what() << '\n';
    return kExitAssumption;
  } catch (const UnsupportedConfiguration& e) {
    std::cerr << "unsupported configuration: " << e.what() << '\n';
    return kExitAssumption;
  } catch (const InfiniteSupport& e) {
    std::cerr << "infinite support: " << e.what() << '\n';
    return kExitAssumption;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kExitIo;
  } catch (const InvalidMesh& e) {
    std::cerr << "invalid mesh: " << e.what() << '\n';
    return kExitIo;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
