#pragma once

#include "ddfem/assembly.hpp"
#include "ddfem/dd_approx.hpp"
#include "ddfem/quality.hpp"

#include <Eigen/Dense>

#include <vector>

namespace ddfem {

/// Finite spectrum of the pencil (A, B) on the complement of N(B).
struct PencilSpectrum {
  Eigen::VectorXd eigenvalues;  // ascending
  double support_ab = 0.0;      // sigma(A, B)
  double support_ba = 0.0;      // sigma(B, A)
  double kappa = 0.0;           // sigma(A, B) sigma(B, A)
  int nullity = 0;              // dimension of the common nullspace
};

/// An eigenvalue of B below null_tol * lambda_max(B) counts as zero.
inline constexpr double kNullTolerance = 1e-10;

/// Eigenvalues of the pencil restricted to range(B). Throws InfiniteSupport
/// when some direction of N(B) is not annihilated by A.
Eigen::VectorXd restricted_pencil_eigenvalues(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, int* nullity = nullptr);

/// sup over x outside N(B) of x^T A x / x^T B x.
double support_number(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Both support numbers and their product; needs N(A) = N(B).
PencilSpectrum condition_pair(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

struct ElementChi {
  double chi1 = 0.0;            // kappa(K_t, Kbar_t)
  double chi2 = 0.0;            // kappa(H_t)
  double chi3 = 0.0;            // element-local bound
  double support_k_kbar = 0.0;  // sigma(K_t, Kbar_t)
  double support_kbar_k = 0.0;  // sigma(Kbar_t, K_t)
};

struct ChiReport {
  std::vector<ElementChi> elements;
  double max_chi1 = 0.0;
  double max_chi2 = 0.0;
  double max_element_chi3 = 0.0;
  double chi3 = 0.0;  // global bound
  double max_support_k_kbar = 0.0;
  double max_support_kbar_k = 0.0;
  /// Elements breaking chi1 <= chi2 <= chi3 beyond the relative slack.
  std::vector<int> ordering_violations;
};

inline constexpr double kChainSlack = 1e-8;

/// Per-element chi1, chi2 and chi3 with maxima. When `enforce` is set an
/// ordering violation raises VerificationFailure naming the element.
ChiReport chi_report(const Mesh& mesh, const std::vector<Eigen::MatrixXd>& element_k, const std::vector<double>& dbar,
                     const HReport& h, const QualityReport& quality, bool enforce = true, int threads = 1);

struct GlobalSupportReport {
  int n = 0;
  PencilSpectrum pencil;           // (K, Kbar)
  double max_element_support_k_kbar = 0.0;
  double max_element_support_kbar_k = 0.0;
  double kappa_h_global = 0.0;
  double kappa_h_max_element = 0.0;
  bool splitting_ok = true;        // both global support numbers below element maxima
  bool condno_ok = true;           // kappa(K, Kbar) <= kappa(H)
  bool element_kappa_ok = true;    // kappa(K, Kbar) <= max_t kappa(H_t)
  bool passed() const noexcept { return splitting_ok && condno_ok && element_kappa_ok; }
};

inline constexpr int kDenseLimit = 2000;

/// Dense comparison of the assembled pencil against the element-wise bounds.
/// Throws SizeLimitExceeded above `size_limit` unknowns.
GlobalSupportReport global_support_check(const SparseSymmetricMatrix& k, const SparseSymmetricMatrix& kbar,
                                         const ChiReport& chi, const HReport& h, int size_limit = kDenseLimit);

}  // namespace ddfem
