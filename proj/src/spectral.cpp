#include "ddfem/spectral.hpp"

#include "ddfem/errors.hpp"
#include "ddfem/parallel.hpp"

#include <algorithm>
#include <sstream>

namespace ddfem {

Eigen::VectorXd restricted_pencil_eigenvalues(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, int* nullity) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols()) {
    throw std::invalid_argument("pencil matrices must be square and of equal size");
  }
  const Eigen::Index n = a.rows();
  if (n == 0) {
    if (nullity) *nullity = 0;
    return {};
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eb(b);
  const Eigen::VectorXd& lam = eb.eigenvalues();
  const double cutoff = kNullTolerance * std::max(lam(n - 1), 0.0);
  Eigen::Index first = 0;
  while (first < n && lam(first) <= cutoff) ++first;
  if (nullity) *nullity = static_cast<int>(first);
  if (first == n) throw InfiniteSupport("B is zero; support number undefined");

  if (first > 0) {
    const Eigen::MatrixXd null_basis = eb.eigenvectors().leftCols(first);
    const double anorm = a.cwiseAbs().rowwise().sum().maxCoeff();
    const Eigen::MatrixXd an = a * null_basis;
    for (Eigen::Index c = 0; c < first; ++c) {
      if (an.col(c).norm() > kNullTolerance * std::max(anorm, 1e-300)) {
        std::ostringstream msg;
        msg.precision(4);
        msg << "direction (" << null_basis.col(c).transpose() << ") lies in N(B) but not in N(A)";
        throw InfiniteSupport(msg.str());
      }
    }
  }
  const Eigen::MatrixXd q = eb.eigenvectors().rightCols(n - first);
  const Eigen::MatrixXd ar = q.transpose() * a * q;
  const Eigen::MatrixXd br = q.transpose() * b * q;
  const Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(ar, br, Eigen::EigenvaluesOnly);
  return ges.eigenvalues();
}

double support_number(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const Eigen::VectorXd ev = restricted_pencil_eigenvalues(a, b);
  return ev.size() == 0 ? 0.0 : ev.maxCoeff();
}

PencilSpectrum condition_pair(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  PencilSpectrum s;
  s.eigenvalues = restricted_pencil_eigenvalues(a, b, &s.nullity);
  if (s.eigenvalues.size() == 0) {
    s.support_ab = s.support_ba = s.kappa = 1.0;
    return s;
  }
  s.support_ab = s.eigenvalues.maxCoeff();
  s.support_ba = support_number(b, a);
  s.kappa = s.support_ab * s.support_ba;
  return s;
}

ChiReport chi_report(const Mesh& mesh, const std::vector<Eigen::MatrixXd>& element_k, const std::vector<double>& dbar,
                     const HReport& h, const QualityReport& quality, bool enforce, int threads) {
  ChiReport rep;
  const int m = mesh.num_elements();
  rep.elements.resize(static_cast<std::size_t>(m));
  rep.chi3 = chi3_bound(quality);
  parallel_for(m, threads, [&](int t) {
    const auto tu = static_cast<std::size_t>(t);
    const Eigen::MatrixXd kbar_t = element_kbar(mesh.nodes_per_element(), dbar[tu]);
    const PencilSpectrum ps = condition_pair(element_k[tu], kbar_t);
    ElementChi& e = rep.elements[tu];
    e.support_k_kbar = ps.support_ab;
    e.support_kbar_k = ps.support_ba;
    e.chi1 = ps.kappa;
    e.chi2 = h.blocks[tu].kappa();
    e.chi3 = element_chi3_bound(quality.elements[tu], quality);
  });
  for (int t = 0; t < m; ++t) {
    const ElementChi& e = rep.elements[static_cast<std::size_t>(t)];
    rep.max_chi1 = std::max(rep.max_chi1, e.chi1);
    rep.max_chi2 = std::max(rep.max_chi2, e.chi2);
    rep.max_element_chi3 = std::max(rep.max_element_chi3, e.chi3);
    rep.max_support_k_kbar = std::max(rep.max_support_k_kbar, e.support_k_kbar);
    rep.max_support_kbar_k = std::max(rep.max_support_kbar_k, e.support_kbar_k);
    if (e.chi1 > e.chi2 * (1.0 + kChainSlack) || e.chi2 > e.chi3 * (1.0 + kChainSlack)) {
      rep.ordering_violations.push_back(t);
    }
  }
  if (enforce && !rep.ordering_violations.empty()) {
    const int t = rep.ordering_violations.front();
    const ElementChi& e = rep.elements[static_cast<std::size_t>(t)];
    std::ostringstream msg;
    msg << "chi1 <= chi2 <= chi3 fails on element " << t + 1 << ": " << e.chi1 << ", " << e.chi2 << ", " << e.chi3;
    throw VerificationFailure(msg.str());
  }
  return rep;
}

GlobalSupportReport global_support_check(const SparseSymmetricMatrix& k, const SparseSymmetricMatrix& kbar,
                                         const ChiReport& chi, const HReport& h, int size_limit) {
  GlobalSupportReport rep;
  rep.n = k.dim();
  if (rep.n > size_limit) {
    throw SizeLimitExceeded("dense pencil check limited to " + std::to_string(size_limit) + " unknowns, got " +
                            std::to_string(rep.n));
  }
  rep.pencil = condition_pair(k.to_dense(), kbar.to_dense());
  rep.max_element_support_k_kbar = chi.max_support_k_kbar;
  rep.max_element_support_kbar_k = chi.max_support_kbar_k;
  rep.kappa_h_global = h.kappa_global;
  rep.kappa_h_max_element = h.kappa_max_element;
  const double slack = 1.0 + kChainSlack;
  rep.splitting_ok = rep.pencil.support_ab <= chi.max_support_k_kbar * slack &&
                     rep.pencil.support_ba <= chi.max_support_kbar_k * slack;
  rep.condno_ok = rep.pencil.kappa <= h.kappa_global * slack;
  rep.element_kappa_ok = rep.pencil.kappa <= h.kappa_max_element * slack;
  return rep;
}

}  // namespace ddfem
