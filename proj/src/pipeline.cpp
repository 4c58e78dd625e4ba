#include "ddfem/pipeline.hpp"

#include "ddfem/errors.hpp"
#include "ddfem/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <ostream>

namespace ddfem {

Analysis analyze(Discretization disc, int threads) {
  SqpMatrix sqp = build_sqp(disc.ref, disc.rule);
  std::vector<ElementGeometry> geoms = all_geometries(disc, threads);
  std::vector<Eigen::MatrixXd> element_k(geoms.size());
  parallel_for(static_cast<int>(geoms.size()), threads, [&](int t) {
    element_k[static_cast<std::size_t>(t)] = element_stiffness(geoms[static_cast<std::size_t>(t)], disc);
  });
  SparseSymmetricMatrix k = assemble_global(disc.mesh, element_k);
  IncidenceMatrix a = build_incidence(disc.mesh);
  std::vector<ElementFactors> factors = all_element_factors(geoms, sqp, disc.rule, threads);
  QualityReport quality = compute_quality(geoms, disc.rule, sqp);
  DDApproximation dd = build_dd_approximation(a, factors, geoms, disc.rule, quality, threads);
  return Analysis{std::move(disc), std::move(sqp),     std::move(geoms),   std::move(element_k), std::move(k),
                  std::move(a),    std::move(factors), std::move(quality), std::move(dd)};
}

bool VerifyReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

namespace {

Check make_check(std::string name, bool passed, double value, double limit, std::string detail = {}) {
  return Check{std::move(name), passed, value, limit, std::move(detail)};
}

}  // namespace

VerifyReport run_verification(const Analysis& an, const VerifyOptions& opts) {
  VerifyReport rep;
  auto& out = rep.checks;
  const Mesh& mesh = an.disc.mesh;
  const auto& q = an.quality;
  const int m = mesh.num_elements();

  out.push_back(make_check("sqp_full_rank", an.sqp.tau > 1e-10 * an.sqp.sigma, an.sqp.tau, 1e-10 * an.sqp.sigma));

  const int degree = 2 * mesh.order() - 2;
  const ExactnessReport ex = verify_exactness(an.disc.rule, degree);
  out.push_back(make_check("quadrature_exactness", ex.passed, ex.max_error, 1e-12,
                           "degree " + std::to_string(degree)));

  out.push_back(make_check("quality_kappa1_at_least_one", q.kappa1 >= 1.0 - 1e-12, q.kappa1, 1.0));
  out.push_back(make_check("quality_kappa2_below_kappa1_pow_d",
                           q.kappa2 <= std::pow(q.kappa1, mesh.dim()) * (1.0 + 1e-12), q.kappa2,
                           std::pow(q.kappa1, mesh.dim())));

  const FactorizationReport fr = verify_first_factorization(mesh, an.factors, an.a, an.element_k, an.k);
  out.push_back(make_check("factorization_identity_element", fr.max_element_residual <= 1e-10,
                           fr.max_element_residual, 1e-10,
                           fr.worst_element >= 0 ? "worst element " + std::to_string(fr.worst_element + 1) : ""));
  out.push_back(make_check("factorization_identity_global", fr.global_residual <= 1e-10, fr.global_residual, 1e-10));

  // Singular value bounds, reported as worst signed margin (negative = violated).
  double jmax_margin = std::numeric_limits<double>::infinity();
  double jmin_margin = std::numeric_limits<double>::infinity();
  double jbar_max_margin = std::numeric_limits<double>::infinity();
  double jbar_min_margin = std::numeric_limits<double>::infinity();
  double refactor_residual = 0.0;
  double min_dbar = std::numeric_limits<double>::infinity();
  for (int t = 0; t < m; ++t) {
    const auto tu = static_cast<std::size_t>(t);
    const ElementFactors& f = an.factors[tu];
    const ElementQuality& e = q.elements[tu];
    const HBlock& hb = an.dd.h.blocks[tu];
    const double shape = f.alpha * f.beta;
    jmax_margin = std::min(jmax_margin, an.sqp.sigma - f.j_sigma_max);
    jmin_margin = std::min(jmin_margin, f.j_sigma_min - an.sqp.tau / shape);
    const double upper = std::sqrt(e.theta_ratio * e.det_ratio * q.weight_ratio()) * an.sqp.sigma;
    jbar_max_margin = std::min(jbar_max_margin, upper - hb.sigma_max);
    jbar_min_margin = std::min(jbar_min_margin, hb.sigma_min - an.sqp.tau / shape);

    const Eigen::MatrixXd mid = middle_product(f);
    const double c = an.dd.dbar[tu];
    const double res = (mid - c * hb.h).norm() / std::max(mid.norm(), 1e-300);
    refactor_residual = std::max(refactor_residual, res);
    min_dbar = std::min(min_dbar, c);
  }
  if (m > 0) {
    out.push_back(make_check("j_sigma_max_bound", jmax_margin >= -1e-10, jmax_margin, -1e-10,
                             "margin sigma_Qp - sigma_max(J_t)"));
    out.push_back(make_check("j_sigma_min_bound", jmin_margin >= -1e-10, jmin_margin, -1e-10,
                             "margin sigma_min(J_t) - tau_Qp/(alpha_t beta_t)"));
    out.push_back(make_check("jbar_sigma_max_bound", jbar_max_margin >= -1e-10, jbar_max_margin, -1e-10,
                             "margin (theta_t kappa2_t M/m)^(1/2) sigma_Qp - sigma_max(Jbar_t)"));
    out.push_back(make_check("jbar_sigma_min_bound", jbar_min_margin >= -1e-10, jbar_min_margin, -1e-10,
                             "margin sigma_min(Jbar_t) - tau_Qp/(alpha_t beta_t)"));
    out.push_back(make_check("refactorization_identity", refactor_residual <= 1e-10, refactor_residual, 1e-10));
    out.push_back(make_check("dbar_positive", min_dbar > 0.0, min_dbar, 0.0));
  }

  SparseSymmetricMatrix kbar = an.dd.kbar;
  if (opts.corrupt_kbar) {
    auto& mat = kbar.matrix();
    bool done = false;
    for (int j = 0; j < mat.outerSize() && !done; ++j) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(mat, j); it; ++it) {
        if (it.row() != j && it.value() != 0.0) {
          const auto i = it.row();
          mat.coeffRef(i, j) = -mat.coeff(i, j);
          mat.coeffRef(j, i) = -mat.coeff(j, i);
          done = true;
          break;
        }
      }
    }
  }

  double max_offdiag = -std::numeric_limits<double>::infinity();
  double worst_dominance = std::numeric_limits<double>::infinity();
  {
    const auto& mat = kbar.matrix();
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(kbar.dim());
    Eigen::VectorXd offsum = Eigen::VectorXd::Zero(kbar.dim());
    for (int j = 0; j < mat.outerSize(); ++j) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(mat, j); it; ++it) {
        if (it.row() == j) {
          diag(j) = it.value();
        } else {
          max_offdiag = std::max(max_offdiag, it.value());
          offsum(it.row()) += std::abs(it.value());
        }
      }
    }
    for (int i = 0; i < kbar.dim(); ++i) {
      worst_dominance = std::min(worst_dominance, (diag(i) - offsum(i)) / std::max(diag(i), 1e-300));
    }
  }
  out.push_back(make_check("kbar_symmetric", kbar.is_symmetric(), 0.0, 0.0));
  if (kbar.dim() > 0) {
    out.push_back(make_check("kbar_offdiagonal_nonpositive", max_offdiag <= 1e-14, max_offdiag, 1e-14));
    out.push_back(make_check("kbar_diagonally_dominant", worst_dominance >= -1e-12, worst_dominance, -1e-12,
                             "min_i (Kbar_ii - sum_j |Kbar_ij|) / Kbar_ii"));
  }

  const ChiReport chi = chi_report(mesh, an.element_k, an.dd.dbar, an.dd.h, q, false, opts.threads);
  out.push_back(make_check("chi_chain", chi.ordering_violations.empty(), static_cast<double>(chi.ordering_violations.size()),
                           0.0, chi.ordering_violations.empty()
                                    ? ""
                                    : "first violating element " + std::to_string(chi.ordering_violations.front() + 1)));
  out.push_back(make_check("chi3_element_below_global", chi.max_element_chi3 <= chi.chi3 * (1.0 + kChainSlack),
                           chi.max_element_chi3, chi.chi3));

  if (kbar.dim() > 0 && kbar.dim() <= opts.dense_limit) {
    try {
      const GlobalSupportReport g = global_support_check(an.k, kbar, chi, an.dd.h, opts.dense_limit);
      out.push_back(make_check("splitting_lemma", g.splitting_ok, g.pencil.support_ab, chi.max_support_k_kbar,
                               "sigma(K,Kbar) vs max_t sigma(K_t,Kbar_t); sigma(Kbar,K) " +
                                   format_number(g.pencil.support_ba) + " vs " +
                                   format_number(chi.max_support_kbar_k)));
      out.push_back(make_check("condition_number_theorem", g.condno_ok, g.pencil.kappa, g.kappa_h_global,
                               "kappa(K,Kbar) <= kappa(H)"));
      out.push_back(make_check("condition_number_element_max", g.element_kappa_ok, g.pencil.kappa,
                               g.kappa_h_max_element, "kappa(K,Kbar) <= max_t kappa(H_t)"));
    } catch (const Error& e) {
      out.push_back(make_check("global_pencil", false, 0.0, 0.0, e.what()));
    }
  }
  return rep;
}

std::string format_number(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

TableRow make_table_row(const Analysis& an, const ChiReport& chi) {
  TableRow r;
  r.d = an.disc.mesh.dim();
  r.p = an.disc.mesh.order();
  r.q = an.disc.rule.size();
  r.m = an.disc.mesh.num_elements();
  r.n = an.disc.mesh.num_free();
  r.sigma_qp = an.sqp.sigma;
  r.tau_qp = an.sqp.tau;
  r.weight_ratio = an.quality.weight_ratio();
  r.kappa1 = an.quality.kappa1;
  r.kappa2 = an.quality.kappa2;
  r.theta_hat = an.quality.theta_hat;
  r.chi1 = chi.max_chi1;
  r.chi2 = chi.max_chi2;
  r.chi3 = chi.chi3;
  r.kappa_h_global = an.dd.h.kappa_global;
  r.ordering_violations = chi.ordering_violations;
  return r;
}

void write_table_text(std::ostream& out, const TableRow& r) {
  auto col = [&](const std::string& s, int w) { out << std::setw(w) << s; };
  col("d", 3);
  col("p", 3);
  col("q", 3);
  col("m", 9);
  col("n", 9);
  for (const char* h : {"sigma_Qp", "tau_Qp", "M_Q/m_Q", "kappa1", "kappa2", "theta_hat", "chi1", "chi2", "chi3"}) col(h, 13);
  out << '\n';
  col(std::to_string(r.d), 3);
  col(std::to_string(r.p), 3);
  col(std::to_string(r.q), 3);
  col(std::to_string(r.m), 9);
  col(std::to_string(r.n), 9);
  for (double v : {r.sigma_qp, r.tau_qp, r.weight_ratio, r.kappa1, r.kappa2, r.theta_hat, r.chi1, r.chi2, r.chi3}) {
    col(format_number(v), 13);
  }
  out << '\n';
}

nlohmann::json table_json(const TableRow& r) {
  return nlohmann::json{{"d", r.d},
                        {"p", r.p},
                        {"q", r.q},
                        {"m", r.m},
                        {"n", r.n},
                        {"sigma_qp", r.sigma_qp},
                        {"tau_qp", r.tau_qp},
                        {"weight_ratio", r.weight_ratio},
                        {"kappa1", r.kappa1},
                        {"kappa2", r.kappa2},
                        {"theta_hat", r.theta_hat},
                        {"chi1", r.chi1},
                        {"chi2", r.chi2},
                        {"chi3", r.chi3},
                        {"kappa_h", r.kappa_h_global},
                        {"chi_ordering_violations", r.ordering_violations}};
}

nlohmann::json verify_json(const VerifyReport& rep) {
  nlohmann::json checks = nlohmann::json::array();
  for (const Check& c : rep.checks) {
    checks.push_back({{"name", c.name}, {"passed", c.passed}, {"value", c.value}, {"limit", c.limit}, {"detail", c.detail}});
  }
  return {{"passed", rep.passed()}, {"checks", checks}};
}

void write_verify_text(std::ostream& out, const VerifyReport& rep) {
  for (const Check& c : rep.checks) {
    out << (c.passed ? "PASS " : "FAIL ") << std::left << std::setw(36) << c.name << std::right << std::setw(14)
        << format_number(c.value) << "  limit " << format_number(c.limit);
    if (!c.detail.empty()) out << "  (" << c.detail << ')';
    out << '\n';
  }
  out << (rep.passed() ? "verification passed" : "verification FAILED") << '\n';
}

}  // namespace ddfem
