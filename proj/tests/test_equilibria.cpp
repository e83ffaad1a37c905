#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "ltn/dynamics.hpp"
#include "ltn/equilibria.hpp"
#include "ltn/errors.hpp"

using namespace ltn;

namespace {

const Matrix kWeiStable{{0.9, -2}, {5, -1.5}};
const Matrix kWeiBistable{{1.1, -2}, {5, -1.5}};
const Vector kBistableInput{-0.01, -1};

Matrix random_matrix(std::mt19937_64& rng, std::size_t n, double scale) {
  std::normal_distribution<double> g(0.0, scale);
  Matrix a(n, n);
  for (double& v : a.data()) v = g(rng);
  return a;
}

Vector random_vector(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> g;
  Vector v(n);
  for (double& x : v) x = g(rng);
  return v;
}

// Rescales to operator norm `target`.
Matrix with_norm(Matrix w, double target) {
  w *= target / operator_norm(w);
  return w;
}

// Fixed-point residual ||x - [W x + d]_0^m||_inf.
double residual(const NetworkSpec& net, std::span<const double> d, const Vector& x) {
  Vector v = net.w * x;
  double r = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double t = std::clamp(v[i] + d[i], 0.0, net.m[i]);
    r = std::max(r, std::abs(t - x[i]));
  }
  return r;
}

// Membership of the candidate by direct region test, computed from scratch.
bool direct_membership(const Matrix& w, std::span<const double> d, const SwitchingIndex& s) {
  const std::size_t n = w.rows();
  Matrix a = Matrix::identity(n);
  Vector b(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    if (s[i] == Regime::Linear) {
      for (std::size_t j = 0; j < n; ++j) a(i, j) -= w(i, j);
      b[i] = d[i];
    }
  const Vector x = solve(a, b);
  const Vector v = w * x;
  for (std::size_t i = 0; i < n; ++i) {
    const double vi = v[i] + d[i];
    if (s[i] == Regime::Linear ? vi < -1e-9 : vi > 1e-9) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("candidate with zero weights equals the input") {
  const auto net = make_network(Matrix(3, 3), CapVector::uniform(3, 2.0));
  const auto all_linear = SwitchingIndex::uniform(3, Regime::Linear);
  const auto in = candidate(net, Vector{0.5, 1.0, 1.5}, all_linear);
  CHECK(in.state == Vector{0.5, 1.0, 1.5});
  CHECK(in.valid);
  CHECK(in.stability == Stability::Stable);
  const auto out = candidate(net, Vector{0.5, -1.0, 2.5}, all_linear);
  CHECK(out.state == Vector{0.5, -1.0, 2.5});
  CHECK_FALSE(out.valid);
}

TEST_CASE("binary target input places the equilibrium at the target") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 4;
    const Matrix w = random_matrix(rng, n, 0.7);
    const auto net = make_unbounded_network(w);
    for (const auto& s : binary_switching_indices(n)) {
      Vector target(n);
      for (std::size_t i = 0; i < n; ++i) target[i] = s[i] == Regime::Linear ? 1.0 : 0.0;
      // d = (2I - W) target - 1
      Vector d = w * target;
      for (std::size_t i = 0; i < n; ++i) d[i] = 2 * target[i] - d[i] - 1;
      try {
        const auto e = candidate(net, d, s);
        CHECK(max_abs_diff(e.state, target) < 1e-9);
        CHECK(e.valid);
        CHECK(e.stability != Stability::Boundary);
      } catch (const AssumptionViolated&) {
      }
    }
  }
}

TEST_CASE("candidate refuses a singular mode") {
  const auto net = make_unbounded_network(Matrix{{1, 0}, {0, 0}});
  CHECK_THROWS_AS(candidate(net, Vector{1, 1}, SwitchingIndex::parse("ll")), AssumptionViolated);
  CHECK_NOTHROW(candidate(net, Vector{1, 1}, SwitchingIndex::parse("0l")));
}

TEST_CASE("bistable pair: all-linear candidate matches brute force") {
  const auto net = make_unbounded_network(kWeiBistable);
  const auto e = candidate(net, kBistableInput, SwitchingIndex::parse("ll"));
  // (I - W) x = d by Cramer's rule.
  const double det = (1 - 1.1) * 2.5 - (2.0 * -5.0);
  const Vector x{(2.5 * -0.01 - 2.0 * -1.0) / det, ((1 - 1.1) * -1.0 - (-5.0) * -0.01) / det};
  CHECK(max_abs_diff(e.state, x) < 1e-12);
  CHECK(e.valid);
  CHECK(e.stability == Stability::Stable);
}

TEST_CASE("zero weights give the clipped input as the only equilibrium") {
  const auto net = make_network(Matrix(3, 3), CapVector({1.0, kInfiniteCap, 2.0}));
  const Vector d{-0.5, 3.0, 2.5};
  const auto set = enumerate_equilibria(net, d);
  CHECK(set.regions == 18);
  REQUIRE(set.equilibria.size() == 1);
  CHECK(max_abs_diff(set.equilibria[0].state, Vector{0, 3, 2}) < 1e-12);
  CHECK(set.equilibria[0].stability == Stability::Stable);
}

TEST_CASE("stable Wilson-Cowan pair has exactly one stable equilibrium") {
  const auto set = enumerate_equilibria(make_unbounded_network(kWeiStable), Vector{1, 1});
  REQUIRE(set.equilibria.size() == 1);
  const auto& e = set.equilibria[0];
  CHECK(e.sigma.str() == "ll");
  CHECK(e.stability == Stability::Stable);
  CHECK(max_abs_diff(e.state, Vector{0.5 / 10.25, 5.1 / 10.25}) < 1e-12);
}

TEST_CASE("bistable Wilson-Cowan pair: exhaustive list") {
  const auto net = make_unbounded_network(kWeiBistable);
  const auto set = enumerate_equilibria(net, kBistableInput);
  CHECK(set.regions == 4);
  REQUIRE(set.equilibria.size() == 3);
  CHECK(set.equilibria[0].sigma.str() == "00");
  CHECK(set.equilibria[0].state == Vector{0, 0});
  CHECK(set.equilibria[0].stability == Stability::Stable);
  CHECK(set.equilibria[1].sigma.str() == "l0");
  CHECK(max_abs_diff(set.equilibria[1].state, Vector{0.1, 0}) < 1e-12);
  CHECK(set.equilibria[1].stability == Stability::Unstable);
  CHECK(set.equilibria[2].sigma.str() == "ll");
  CHECK(max_abs_diff(set.equilibria[2].state, Vector{1.975 / 9.75, 0.05 / 9.75}) < 1e-12);
  CHECK(set.equilibria[2].stability == Stability::Stable);
  const auto stable = std::count_if(set.equilibria.begin(), set.equilibria.end(),
                                    [](const auto& e) { return e.stability == Stability::Stable; });
  CHECK(stable == 2);
  for (const auto& e : set.equilibria) CHECK(residual(net, kBistableInput, e.state) < 1e-9);
}

TEST_CASE("face equilibria are reported once") {
  // d = 0, W = 0: the origin sits on every face.
  const auto set = enumerate_equilibria(make_unbounded_network(Matrix(2, 2)), Vector{0, 0});
  REQUIRE(set.equilibria.size() == 1);
  CHECK(set.duplicate_groups[0].size() == 4);
  CHECK(set.equilibria[0].stability == Stability::Boundary);
  CHECK(set.lemma_consistent);

  // A capped node driven exactly to its cap.
  const auto capped = make_network(Matrix(1, 1), CapVector::uniform(1, 1.0));
  const auto c = enumerate_equilibria(capped, Vector{1.0});
  REQUIRE(c.equilibria.size() == 1);
  CHECK(c.duplicate_groups[0].size() == 2);
  CHECK(c.equilibria[0].stability == Stability::Boundary);
}

TEST_CASE("enumeration: fixed-point residual and ordering on random networks") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> cap(0.5, 3.0);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 2 + trial % 4;
    std::vector<double> m(n);
    for (double& v : m) v = trial % 2 ? cap(rng) : kInfiniteCap;
    const auto net = make_network(random_matrix(rng, n, 1.0), CapVector(m));
    const Vector d = random_vector(rng, n);
    const auto set = enumerate_equilibria(net, d);
    CHECK(std::is_sorted(set.equilibria.begin(), set.equilibria.end(),
                         [](const auto& a, const auto& b) { return a.sigma < b.sigma; }));
    CHECK(set.lemma_consistent);
    for (const auto& e : set.equilibria) {
      CHECK(residual(net, d, e.state) < 1e-9);
      for (std::size_t i = 0; i < n; ++i) CHECK((e.state[i] >= -1e-9 && e.state[i] <= m[i] + 1e-9));
    }
  }
}

TEST_CASE("enumeration limits") {
  CHECK_THROWS_AS(enumerate_equilibria(make_unbounded_network(Matrix(17, 17)), Vector(17, 0.0)),
                  LimitExceeded);
  CHECK_THROWS_AS(enumerate_equilibria(make_network(Matrix(11, 11), CapVector::uniform(11, 1.0)),
                                       Vector(11, 0.0)),
                  LimitExceeded);
  CHECK_THROWS_AS(enumerate_equilibria(make_unbounded_network(Matrix(2, 2)), Vector(3, 0.0)),
                  InvalidArgument);
}

TEST_CASE("singular modes are flagged") {
  const auto set = enumerate_equilibria(make_unbounded_network(Matrix{{1, 0}, {0, 0.5}}), Vector{-1, 1});
  CHECK(set.assumption_marginal);
  REQUIRE(set.equilibria.size() == 1);
  CHECK(max_abs_diff(set.equilibria[0].state, Vector{0, 2}) < 1e-12);
}

TEST_CASE("M_sigma closed forms") {
  std::mt19937_64 rng(2);
  const Matrix w = random_matrix(rng, 3, 0.5);
  const auto net = make_unbounded_network(w);
  const Matrix m0 = m_sigma(net, SwitchingIndex::uniform(3, Regime::Inactive));
  CHECK(max_abs_diff(m0.data(), (Matrix::identity(3) * -1.0).data()) < 1e-15);
  const Matrix ml = m_sigma(net, SwitchingIndex::uniform(3, Regime::Linear));
  CHECK(max_abs_diff(ml.data(), inverse(Matrix::identity(3) - w).data()) < 1e-12);
  CHECK_THROWS_AS(m_sigma(make_network(w, CapVector::uniform(3, 1.0)), SwitchingIndex::parse("lll")),
                  InvalidArgument);
  CHECK_THROWS_AS(m_sigma(make_unbounded_network(Matrix{{1}}), SwitchingIndex::parse("l")),
                  AssumptionViolated);
}

TEST_CASE("M_sigma d >= 0 matches the direct region test") {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> pick(0, 15);
  int agree = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Matrix w = random_matrix(rng, 4, 0.8);
    const Vector d = random_vector(rng, 4);
    const auto s = binary_switching_indices(4)[static_cast<std::size_t>(pick(rng))];
    const Vector md = m_sigma(make_unbounded_network(w), s) * d;
    const bool sign_test = *std::min_element(md.begin(), md.end()) >= -1e-9;
    agree += sign_test == direct_membership(w, d, s);
  }
  CHECK(agree == 1000);
}

TEST_CASE("EUE certificate") {
  const auto stable = eue_certificate(make_unbounded_network(kWeiStable));
  CHECK(stable.p.verdict == Verdict::True);
  CHECK(stable.spot_checks == 100);
  CHECK(stable.spot_checks_consistent);

  const auto bistable = eue_certificate(make_unbounded_network(kWeiBistable));
  CHECK(bistable.p.verdict == Verdict::False);
  CHECK(bistable.spot_checks == 0);

  CHECK(eue_certificate(make_unbounded_network(Matrix(3, 3))).p.verdict == Verdict::True);
}

TEST_CASE("P-matrix instances have a unique equilibrium for every input") {
  std::mt19937_64 rng(23);
  int certified = 0;
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 3 + trial % 3;
    const auto net = make_unbounded_network(random_matrix(rng, n, 0.6));
    if (is_p_matrix(Matrix::identity(n) - net.w).verdict != Verdict::True) continue;
    ++certified;
    const RegionSolver solver(net);
    for (int k = 0; k < 100; ++k) CHECK(enumerate_equilibria(solver, random_vector(rng, n)).equilibria.size() == 1);
  }
  CHECK(certified > 5);
}

TEST_CASE("mu pair on the bistable input") {
  const auto net = make_unbounded_network(kWeiBistable);
  const auto [mu1, mu2] = mu_pair(net, kBistableInput);
  // Regions l0 (min 0.1) and 00 (min 0.01) lead; ll follows at 0.05/9.75.
  CHECK(mu1 == doctest::Approx(0.1));
  CHECK(mu2 == doctest::Approx(0.01));
  CHECK_THROWS_AS(mu_pair(net, Vector{0, 0}), InvalidArgument);
}

TEST_CASE("direction search finds multistability for the bistable pair") {
  const auto net = make_unbounded_network(kWeiBistable);
  DirectionOptions o;
  o.samples = 2000;
  const auto res = direction_search(net, o);
  CHECK(res.best_product >= 0);
  REQUIRE(res.witness);
  const auto& w = *res.witness;
  CHECK(norm2(w.d) == doctest::Approx(1.0));
  CHECK(w.first != w.second);
  CHECK(max_abs_diff(w.first_state, w.second_state) > 1e-6);
  const auto set = enumerate_equilibria(net, w.d);
  CHECK(set.equilibria.size() >= 2);
  // The published input lies on a ray with the same property.
  const auto [mu1, mu2] = mu_pair(net, kBistableInput);
  CHECK(mu1 * mu2 > 0);
}

TEST_CASE("direction search stays negative on P-matrix instances") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 5; ++trial) {
    const auto net = make_unbounded_network(with_norm(random_matrix(rng, 3, 1.0), 0.9));
    DirectionOptions o;
    o.samples = 1000;
    o.refine_starts = 3;
    o.seed = static_cast<std::uint64_t>(trial + 1);
    const auto res = direction_search(net, o);
    CHECK(res.best_product < 0);
    CHECK_FALSE(res.witness);
  }
}

TEST_CASE("multistable input under finite caps") {
  const auto net = make_network(kWeiBistable, CapVector::uniform(2, 0.05));
  DirectionOptions o;
  o.samples = 2000;
  const auto w = find_multistable_input(net, o);
  REQUIRE(w);
  const auto set = enumerate_equilibria(net, w->d);
  CHECK(set.equilibria.size() >= 2);
  for (double v : w->first_state) CHECK(v < 0.05);
  for (double v : w->second_state) CHECK(v < 0.05);
  CHECK_THROWS_AS(direction_search(make_unbounded_network(Matrix(11, 11))), LimitExceeded);
}

TEST_CASE("pivot pairs: all-inactive against all-linear gives I - W") {
  std::mt19937_64 rng(31);
  const Matrix w = random_matrix(rng, 3, 0.5);
  const auto net = make_unbounded_network(w);
  const Matrix c = (m_sigma(net, SwitchingIndex::uniform(3, Regime::Inactive)) *
                    inverse(m_sigma(net, SwitchingIndex::uniform(3, Regime::Linear)))) *
                   -1.0;
  CHECK(max_abs_diff(c.data(), (Matrix::identity(3) - w).data()) < 1e-12);
}

TEST_CASE("pivot pair check agrees with the P test") {
  std::mt19937_64 rng(37);
  int pass = 0, fail = 0;
  for (int trial = 0; trial < 30; ++trial) {
    Matrix w = random_matrix(rng, 4, 0.5);
    if (trial % 2) w(trial % 4, trial % 4) = 1.5;
    const auto net = make_unbounded_network(w);
    const auto p = is_p_matrix(Matrix::identity(4) - w).verdict;
    if (p == Verdict::Marginal) continue;
    const auto rep = pivot_pair_check(net);
    CHECK(rep.verdict == p);
    if (p == Verdict::True) {
      ++pass;
      CHECK(rep.pairs == 120);
    } else {
      ++fail;
      CHECK(rep.failing_pair);
    }
  }
  CHECK(pass > 3);
  CHECK(fail > 3);
  CHECK_THROWS_AS(pivot_pair_check(make_unbounded_network(Matrix(6, 6))), LimitExceeded);
}

TEST_CASE("partial EUE") {
  SUBCASE("all-inactive region holds at most one equilibrium") {
    std::mt19937_64 rng(41);
    const auto net = make_unbounded_network(random_matrix(rng, 4, 2.0));
    const auto r = partial_eue(net, SwitchingIndex::uniform(4, Regime::Inactive));
    CHECK(r.sub_p.verdict == Verdict::True);
    CHECK(r.max_count <= 1);
    CHECK(r.holds);
  }
  SUBCASE("stable sub-block of an unstable network") {
    const Matrix w{{0.2, 0.1, 0.5, -0.3}, {0.1, 0.3, -0.4, 0.2}, {0.3, 0.1, 2.0, 0}, {-0.2, 0.4, 0, 2.0}};
    const auto net = make_unbounded_network(w);
    CHECK(is_p_matrix(Matrix::identity(4) - w).verdict == Verdict::False);
    const auto r = partial_eue(net, SwitchingIndex::parse("ll00"), 200);
    CHECK(r.sub_p.verdict == Verdict::True);
    CHECK(r.draws == 200);
    CHECK(r.max_count <= 1);
    CHECK(r.holds);
    // Outside the down-set several equilibria appear.
    std::mt19937_64 rng(43);
    std::size_t most = 0;
    for (int k = 0; k < 50; ++k) most = std::max(most, enumerate_equilibria(net, random_vector(rng, 4)).equilibria.size());
    CHECK(most >= 2);
  }
  SUBCASE("all-linear coincides with the global certificate") {
    const auto net = make_unbounded_network(kWeiStable);
    const auto r = partial_eue(net, SwitchingIndex::parse("ll"));
    CHECK(r.sub_p.verdict == eue_certificate(net, 0).p.verdict);
    CHECK(r.max_count == 1);
  }
}

TEST_CASE("probe attractors coincide with stable equilibria") {
  std::mt19937_64 rng(47);
  std::uniform_real_distribution<double> cap(1.0, 3.0);
  int matched = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + trial % 4;
    std::vector<double> m(n);
    for (double& v : m) v = cap(rng);
    const auto net = make_network(random_matrix(rng, n, 0.9), CapVector(m));
    const Vector d = random_vector(rng, n);
    const auto set = enumerate_equilibria(net, d);
    ProbeOptions o;
    o.trials = 8;
    o.seed = static_cast<std::uint64_t>(trial + 1);
    o.max_horizon = 200;
    const auto probe = ges_probe(net, d, o);
    for (const auto& c : probe.clusters) {
      // Only settled clusters are point attractors.
      if (norm_inf(vector_field(net, d, c.center)) > 1e-8) continue;
      const bool near = std::any_of(set.equilibria.begin(), set.equilibria.end(), [&](const auto& e) {
        return e.stability != Stability::Unstable && max_abs_diff(e.state, c.center) < 1e-3;
      });
      CHECK(near);
      ++matched;
    }
  }
  CHECK(matched >= 50);
}
