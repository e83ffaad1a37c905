#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ltn/dynamics.hpp"
#include "ltn/matclass.hpp"
#include "ltn/model.hpp"

namespace ltn {

/// Split of the lower layer into task-irrelevant nodes (to be inhibited) and
/// task-relevant nodes. Node order of the network is kept; blocks are
/// extracted by index set.
struct BilayerPartition {
  IndexSet irrelevant;
  IndexSet relevant;
  /// r x p, nonpositive.
  Matrix b_minus;
  /// Constant drive of the relevant nodes (n - r).
  Vector d_relevant;

  std::size_t n() const { return irrelevant.dimension(); }
  std::size_t r() const { return irrelevant.size(); }
  std::size_t p() const { return b_minus.cols(); }

  /// Throws InvalidArgument on overlapping sets, size mismatches or a
  /// positive entry in b_minus.
  void validate(std::size_t n) const;
  /// B = [B-; 0] in network order (n x p).
  Matrix b_full() const;
  /// d~ = [0; d~+] in network order.
  Vector d_full() const;
};

BilayerPartition make_partition(std::size_t n, std::vector<std::size_t> irrelevant,
                                Matrix b_minus, Vector d_relevant);

/// Rows of W on the irrelevant nodes, all columns in network order: [W-- W-+].
Matrix irrelevant_rows(const Matrix& w, const BilayerPartition& part);
/// [W+- W++] in network column order.
Matrix relevant_rows(const Matrix& w, const BilayerPartition& part);
/// W++.
Matrix relevant_block(const Matrix& w, const BilayerPartition& part);

struct RangeReport {
  bool holds = false;
  /// ||B- X - [W-- W-+]||_F at the least-squares X.
  double residual = 0.0;
  std::size_t rank_b = 0;
  std::size_t p = 0, r = 0;
  /// p >= r: the condition holds for almost every B- exactly in this case.
  bool generic = false;
};

constexpr double kRangeTolerance = 1e-8;

RangeReport check_range_condition(const NetworkSpec& net, const BilayerPartition& part);

enum class InhibitionMode { Feedforward, Feedback };

struct InhibitionDesign {
  InhibitionMode mode = InhibitionMode::Feedforward;
  /// Feedforward: constant input threshold (any u >= u_bar works).
  Vector u_bar;
  /// Feedforward: the trajectory bound the threshold was built from.
  Vector nu;
  /// Feedback: gain with B- K = -[W-- W-+] (p x n, minimum norm).
  Matrix k_bar;
  /// Feedback: use u = max(K x, 0) instead of K x.
  bool rectified = false;
  /// Feedback: W + B K.
  Matrix closed_loop;
  std::optional<ClassCertificate> certificate;
  /// Residual of the defining linear equation.
  double residual = 0.0;
};

/// Constant input threshold from the trajectory bound nu(d~):
/// u_bar = max(u_s, 0) with B- u_s = -max([W-- W-+], 0) nu. Throws
/// RangeConditionError, or AssumptionViolated when no bound nu exists.
InhibitionDesign design_feedforward(const NetworkSpec& net, const BilayerPartition& part,
                                   double tol = kDefaultTolerance);

struct FeedbackOptions {
  bool rectified = false;
  /// Certify W + B K (skipped automatically above the L-test limit).
  bool certify = true;
  MatClassOptions classes;
};

/// Minimum-norm K with B- K = -[W-- W-+]. Throws RangeConditionError.
InhibitionDesign design_feedback_gain(const NetworkSpec& net, const BilayerPartition& part,
                                      const FeedbackOptions& opt = {});

/// W + B K for an arbitrary gain.
Matrix closed_loop_matrix(const NetworkSpec& net, const BilayerPartition& part, const Matrix& k);

struct EquivalenceItem {
  std::string name;
  Verdict closed_loop = Verdict::Marginal;
  Verdict subnetwork = Verdict::Marginal;
  /// Both verdicts definite and different.
  bool discrepancy = false;
};

struct EquivalenceReport {
  std::array<EquivalenceItem, 5> items;
  bool consistent() const;
};

/// Compares each closed-loop class of W + B K with the matching class of the
/// relevant subnetwork: P, H and L on W++, rho(|W++|) < 1, ||[W+- W++]|| < 1.
EquivalenceReport verify_equivalences(const NetworkSpec& net, const BilayerPartition& part,
                                      const Matrix& k, const MatClassOptions& opt = {});
EquivalenceReport verify_equivalences(const NetworkSpec& net, const BilayerPartition& part,
                                      const InhibitionDesign& design,
                                      const MatClassOptions& opt = {});

/// max(K x, 0).
Vector rectified_feedback_input(const InhibitionDesign& design, std::span<const double> x);

struct ClosedLoopOptions {
  double horizon = 20.0;
  double h = 0.0;
  /// Feedforward only: u = u_scale * u_bar.
  double u_scale = 1.0;
  /// Feedback only: overrides design.rectified when set.
  std::optional<bool> rectified;
};

struct ClosedLoopResult {
  Trajectory trajectory;
  /// u(t) realized at each recorded time (constant for feedforward).
  std::vector<Vector> u;
  double final_irrelevant_norm = 0.0;
  /// Fitted slope of log ||x-(t)||; tau times it is -1 for exact cancellation.
  std::optional<double> irrelevant_rate;
  /// max over t of ||x-(t)|| - ||x-(0)|| exp(-t / tau).
  double max_decay_excess = 0.0;
  Vector final_relevant;
  /// Unique equilibrium of the isolated relevant subnetwork, if it has one
  /// and it is small enough to enumerate.
  std::optional<Vector> isolated_equilibrium;
  /// ||final_relevant - isolated_equilibrium||_inf (infinite when absent).
  double relevant_gap = INFINITY;
};

ClosedLoopResult closed_loop_simulate(const NetworkSpec& net, const BilayerPartition& part,
                                      const InhibitionDesign& design, std::span<const double> x0,
                                      const ClosedLoopOptions& opt = {});

/// The relevant subnetwork tau x+' = -x+ + [W++ x+ + d~+] clipped to m+.
NetworkSpec relevant_subnetwork(const NetworkSpec& net, const BilayerPartition& part);

}  // namespace ltn
