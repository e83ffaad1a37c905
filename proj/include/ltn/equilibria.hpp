#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ltn/matclass.hpp"
#include "ltn/model.hpp"

namespace ltn {

enum class Stability { Stable, Unstable, Marginal, Boundary };

const char* to_string(Stability s);

struct Equilibrium {
  Vector state;
  SwitchingIndex sigma;
  /// The candidate lies in the closed region of sigma.
  bool valid = false;
  Stability stability = Stability::Marginal;
  /// Extreme real parts of the eigenvalues of -I + Sigma_l W.
  double max_real = 0.0;
  double min_real = 0.0;
};

struct EquilibriumOptions {
  double tol = kDefaultTolerance;
  /// Enumeration limits: every cap infinite / at least one cap finite.
  std::size_t unbounded_limit = 16;
  std::size_t bounded_limit = 10;
  unsigned threads = 0;
};

/// x = (I - Sigma_l W)^{-1} (Sigma_l d + Sigma_s m) with its membership and
/// stability. Throws AssumptionViolated when I - Sigma_l W is singular.
Equilibrium candidate(const NetworkSpec& net, std::span<const double> d,
                      const SwitchingIndex& sigma, double tol = kDefaultTolerance);

/// Per-network cache of the mode factorizations. A mode depends only on its
/// linear set, so 2^n factorizations serve all 2^n or 3^n regions.
class RegionSolver {
 public:
  explicit RegionSolver(const NetworkSpec& net, const EquilibriumOptions& opt = {});

  const NetworkSpec& network() const { return net_; }
  std::size_t region_count() const { return regions_.size(); }
  const std::vector<SwitchingIndex>& regions() const { return regions_; }
  /// Some mode matrix is singular within tolerance; its regions are skipped.
  bool assumption_marginal() const { return assumption_marginal_; }

  /// Candidate for region k; nullopt when its mode is singular.
  std::optional<Equilibrium> solve(std::size_t k, std::span<const double> d) const;

 private:
  struct Mode {
    std::vector<std::size_t> linear;
    std::vector<std::size_t> rest;
    Matrix inverse;  // (I - W_LL)^{-1}
    bool singular = false;
    double max_real = -1.0, min_real = -1.0;
  };

  std::uint64_t linear_mask(const SwitchingIndex& s) const;

  NetworkSpec net_;
  EquilibriumOptions opt_;
  std::vector<SwitchingIndex> regions_;
  std::vector<Mode> modes_;  // indexed by linear-set bitmask
  bool assumption_marginal_ = false;
};

struct EquilibriumSet {
  /// Valid equilibria, one per duplicate group, sorted by sigma.
  std::vector<Equilibrium> equilibria;
  /// Regions sharing each reported equilibrium (same order), sorted.
  std::vector<std::vector<SwitchingIndex>> duplicate_groups;
  std::size_t regions = 0;
  bool assumption_marginal = false;
  /// Unbounded case only: coincidence of candidates agreed with equality of
  /// M_sigma d for every pair of valid regions.
  bool lemma_consistent = true;
};

/// Exhaustive region enumeration. Throws LimitExceeded.
EquilibriumSet enumerate_equilibria(const NetworkSpec& net, std::span<const double> d,
                                    const EquilibriumOptions& opt = {});
EquilibriumSet enumerate_equilibria(const RegionSolver& solver, std::span<const double> d);

/// M_sigma = (2 Sigma_l - I)(I - W Sigma_l)^{-1}. Requires every cap infinite
/// and a binary sigma. Throws AssumptionViolated when singular.
Matrix m_sigma(const NetworkSpec& net, const SwitchingIndex& sigma);

struct EueCertificate {
  SubsetCertificate p;
  /// Random inputs on which uniqueness was re-checked by enumeration (only
  /// when p is True).
  std::size_t spot_checks = 0;
  /// Every spot check found exactly one valid equilibrium.
  bool spot_checks_consistent = true;
};

EueCertificate eue_certificate(const NetworkSpec& net, std::size_t spot_checks = 100,
                               std::uint64_t seed = 1, const EquilibriumOptions& opt = {});

struct DirectionOptions {
  std::size_t samples = 10000;
  std::size_t refine_starts = 10;
  std::size_t refine_iterations = 400;
  std::uint64_t seed = 1;
  double tol = kDefaultTolerance;
  /// Largest n accepted (2^n solves per evaluated direction).
  std::size_t limit = 10;
};

struct MultiplicityWitness {
  Vector d;
  SwitchingIndex first, second;
  Vector first_state, second_state;
};

struct DirectionSearchResult {
  /// Best mu1(d) mu2(d) found over unit d.
  double best_product = -INFINITY;
  Vector best_product_direction;
  /// Best mu2(d); a positive value places two candidates strictly inside
  /// distinct regions.
  double best_mu2 = -INFINITY;
  Vector best_mu2_direction;
  std::optional<MultiplicityWitness> witness;
  std::size_t evaluations = 0;
};

/// (mu1, mu2): the two largest values of min_i (M_sigma d)_i over binary sigma.
std::pair<double, double> mu_pair(const NetworkSpec& net, std::span<const double> d);

/// Sampling plus Nelder-Mead search over the unit sphere for inputs with
/// several equilibria, using the network's weights with every cap removed.
/// A heuristic, never a certificate.
DirectionSearchResult direction_search(const NetworkSpec& net, const DirectionOptions& opt = {});

/// Runs direction_search on the uncapped network and, on success, scales the
/// witnessing input until both equilibria sit strictly below the caps.
/// The returned witness is re-verified by capped enumeration.
std::optional<MultiplicityWitness> find_multistable_input(const NetworkSpec& net,
                                                          const DirectionOptions& opt = {});

struct PivotPairReport {
  Verdict verdict = Verdict::True;
  std::size_t pairs = 0;
  std::optional<std::pair<SwitchingIndex, SwitchingIndex>> failing_pair;
};

/// For every unordered pair of distinct binary regions, tests -M_s1 M_s2^{-1}
/// restricted to the nodes where s1 and s2 differ for membership in P. The
/// unrestricted product is the identity on the agreeing nodes, so its negation
/// is never in P. Requires every cap infinite; throws LimitExceeded above
/// `limit`.
PivotPairReport pivot_pair_check(const NetworkSpec& net, std::size_t limit = 5,
                                 const MatClassOptions& opt = {});

struct PartialEueReport {
  /// I - W restricted to the linear nodes of sigma_bar.
  SubsetCertificate sub_p;
  std::size_t draws = 0;
  /// Largest number of distinct equilibria seen in the down-set of sigma_bar.
  std::size_t max_count = 0;
  /// sub_p True implied at most one equilibrium in every draw.
  bool holds = true;
};

/// Enumerates the regions sigma <= sigma_bar for random inputs. Requires
/// every cap infinite.
PartialEueReport partial_eue(const NetworkSpec& net, const SwitchingIndex& sigma_bar,
                             std::size_t draws = 100, std::uint64_t seed = 1,
                             const EquilibriumOptions& opt = {});

}  // namespace ltn
