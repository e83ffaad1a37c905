#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "ltn/linalg.hpp"

namespace ltn {

struct MatClassOptions {
  double tol = kDefaultTolerance;
  /// Largest n accepted by the 2^n principal-submatrix sweeps.
  std::size_t exhaustive_limit = 20;
  /// Largest n accepted by the common-Lyapunov search (2^n constraint blocks).
  std::size_t lyapunov_limit = 12;
  double lyapunov_eps = 1e-6;
  double lyapunov_delta = 1e-6;
  std::size_t lyapunov_iterations = 5000;
};

/// Outcome of a sweep over principal submatrices.
struct SubsetCertificate {
  Verdict verdict = Verdict::True;
  /// First violating index set (cardinality, then lexicographic order). For a
  /// marginal verdict, the first index set inside the tolerance band.
  std::optional<IndexSet> witness;
  /// Decisive quantity over all index sets visited: the smallest principal
  /// minor for P, the largest spectral abscissa for H.
  double extreme = 0.0;
};

/// Principal minors of A, all 2^n - 1 of them. Throws LimitExceeded.
SubsetCertificate is_p_matrix(const Matrix& a, const MatClassOptions& opt = {});

/// Every principal submatrix of A Hurwitz. Throws LimitExceeded.
SubsetCertificate is_totally_hurwitz(const Matrix& a, const MatClassOptions& opt = {});

struct ScalarCertificate {
  Verdict verdict = Verdict::False;
  double value = 0.0;
};

/// rho(|W|) < 1
ScalarCertificate is_absolutely_schur(const Matrix& w, const MatClassOptions& opt = {});
/// ||W|| < 1
ScalarCertificate has_small_norm(const Matrix& w, const MatClassOptions& opt = {});

struct LyapunovCertificate {
  Verdict verdict = Verdict::False;
  /// Symmetric positive definite witness (unit trace) when verdict is True.
  std::optional<Matrix> p;
  /// Best objective max_sigma lambda_max(A_sigma^T P + P A_sigma) reached.
  double objective = 0.0;
  /// The search hit its iteration budget with a positive best objective.
  bool budget_limited = false;
  std::size_t iterations = 0;
};

/// Largest eigenvalue of the symmetric matrices (-I + S W)^T P + P (-I + S W)
/// over all 0/1 diagonal S.
double lyapunov_objective(const Matrix& w, const Matrix& p);

/// Searches for a common Lyapunov matrix of the 2^n modes -I + S W.
/// Throws LimitExceeded.
LyapunovCertificate is_totally_l_stable(const Matrix& w, const MatClassOptions& opt = {});

struct ClassCertificate {
  SubsetCertificate p;          ///< I - W in P
  SubsetCertificate h;          ///< -I + W in H
  LyapunovCertificate l;        ///< W in L
  ScalarCertificate abs_schur;  ///< rho(|W|) < 1
  ScalarCertificate norm;       ///< ||W|| < 1
};

/// Runs all five tests on W.
ClassCertificate certify(const Matrix& w, const MatClassOptions& opt = {});

struct HierarchyReport {
  /// Human-readable description of each violated implication; empty when the
  /// inclusion chain holds.
  std::vector<std::string> violations;
  bool consistent() const { return violations.empty(); }
};

/// Checks rho(|W|)<1 => -I+W in H, ||W||<1 => W in L, W in L => -I+W in H and
/// -I+W in H => I-W in P on a certificate. Marginal verdicts never count as
/// violations.
HierarchyReport hierarchy_consistency(const ClassCertificate& c);
HierarchyReport hierarchy_consistency(const Matrix& w, const MatClassOptions& opt = {});

}  // namespace ltn
