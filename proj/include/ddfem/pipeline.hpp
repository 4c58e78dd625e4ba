#pragma once

#include "ddfem/assembly.hpp"
#include "ddfem/dd_approx.hpp"
#include "ddfem/factorization.hpp"
#include "ddfem/quality.hpp"
#include "ddfem/spectral.hpp"

#include "json.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ddfem {

/// Every intermediate of K = A^T J^T D J A and Kbar = A^T Dbar A for one problem.
struct Analysis {
  Discretization disc;
  SqpMatrix sqp;
  std::vector<ElementGeometry> geoms;
  std::vector<Eigen::MatrixXd> element_k;
  SparseSymmetricMatrix k;
  IncidenceMatrix a;
  std::vector<ElementFactors> factors;
  QualityReport quality;
  DDApproximation dd;
};

/// Runs geometry, assembly, both factorizations and the quality scalars.
/// Assumption violations propagate as AssumptionViolation.
Analysis analyze(Discretization disc, int threads = 1);

struct Check {
  std::string name;
  bool passed = true;
  double value = 0.0;  // measured quantity, meaning depends on the check
  double limit = 0.0;  // threshold it was compared against
  std::string detail;
};

struct VerifyOptions {
  int dense_limit = 500;  // run the global pencil checks up to this many unknowns
  bool corrupt_kbar = false;  // debug: flip the sign of one off-diagonal of Kbar
  int threads = 1;
};

struct VerifyReport {
  std::vector<Check> checks;
  bool passed() const;
};

/// The full invariant battery: factorization identity, singular value bounds
/// on J_t and Jbar_t, refactorization identity, chi chain, Dbar positivity,
/// Kbar diagonal dominance, and the global pencil checks when small enough.
VerifyReport run_verification(const Analysis& an, const VerifyOptions& opts = {});

/// One row of the summary table.
struct TableRow {
  int d = 0, p = 0, q = 0, m = 0, n = 0;
  double sigma_qp = 0.0, tau_qp = 0.0, weight_ratio = 0.0;
  double kappa1 = 0.0, kappa2 = 0.0, theta_hat = 0.0;
  double chi1 = 0.0, chi2 = 0.0, chi3 = 0.0;
  double kappa_h_global = 0.0;
  std::vector<int> ordering_violations;
};

TableRow make_table_row(const Analysis& an, const ChiReport& chi);

/// Fixed-width table, numbers at 6 significant digits.
void write_table_text(std::ostream& out, const TableRow& row);
nlohmann::json table_json(const TableRow& row);
nlohmann::json verify_json(const VerifyReport& rep);
void write_verify_text(std::ostream& out, const VerifyReport& rep);

/// printf-style "%.<digits>g".
std::string format_number(double v, int digits = 6);

}  // namespace ddfem
