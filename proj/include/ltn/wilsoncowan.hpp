#pragma once

#include <array>
#include <string>
#include <vector>

#include "ltn/matclass.hpp"
#include "ltn/model.hpp"

namespace ltn {

/// Two-population excitatory/inhibitory network. alpha * n excitatory and
/// (1 - alpha) * n inhibitory nodes; both counts are kept real-valued.
struct WilsonCowanParams {
  double n = 2.0;
  double alpha = 0.5;
  double w_ee = 0.0, w_ei = 0.0, w_ie = 0.0, w_ii = 0.0;
  double d_e = 0.0, d_i = 0.0;
  double m_e = kInfiniteCap, m_i = kInfiniteCap;
  double tau = 1.0;

  /// Throws InvalidArgument unless w_ee, w_ie >= 0, w_ei, w_ii <= 0,
  /// alpha in (0, 1), n > 0 and the caps are positive.
  void validate() const;

  /// Parameters whose reduced matrix is exactly `w_ei_matrix` (n = 2,
  /// alpha = 1/2, so both effective sizes are 1).
  static WilsonCowanParams from_effective(const Matrix& w_ei_matrix, double d_e = 0.0,
                                          double d_i = 0.0);
};

/// [[alpha n w_ee, (1-alpha) n w_ei], [alpha n w_ie, (1-alpha) n w_ii]]
Matrix wilson_cowan_matrix(const WilsonCowanParams& p);

/// The 2-node network with d = [d_e, d_i] returned alongside.
struct ReducedNetwork {
  NetworkSpec net;
  Vector d;
};
ReducedNetwork reduce(const WilsonCowanParams& p);

struct ConditionCheck {
  std::string name;
  /// Closed-form verdict.
  bool analytic = false;
  /// Slack of the closest inequality (negative when violated).
  double margin = 0.0;
  Verdict numeric = Verdict::Marginal;
  /// Within the band around a boundary; agreement is not required there.
  bool marginal = false;
  bool agree = true;
};

struct WilsonCowanReport {
  /// P: I - W in P. H: -I + W totally Hurwitz. Excitatory: rho(max(W, 0)) < 1.
  /// Schur: rho(|W|) < 1. Hurwitz: -I + W Hurwitz (the full matrix only).
  std::array<ConditionCheck, 5> checks;
  bool consistent() const;
};

enum WilsonCowanCondition : std::size_t { kWcP, kWcH, kWcExcitatory, kWcSchur, kWcHurwitz };

/// Evaluates every closed-form condition and compares it with the numeric
/// matrix-class test on the reduced matrix. `band` is the marginal band on
/// each inequality's slack.
WilsonCowanReport analytic_conditions(const WilsonCowanParams& p, double band = 1e-6);

}  // namespace ltn
