#include <random>

#include "doctest.h"
#include "ltn/dynamics.hpp"
#include "ltn/errors.hpp"
#include "ltn/wilsoncowan.hpp"

using namespace ltn;

namespace {

// Effective weights drawn uniformly, then converted back to per-synapse
// values for a random population size and excitatory fraction.
WilsonCowanParams random_params(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  WilsonCowanParams p;
  p.n = 1 + 19 * u(rng);
  p.alpha = 0.05 + 0.9 * u(rng);
  const double ne = p.alpha * p.n, ni = (1 - p.alpha) * p.n;
  p.w_ee = 2 * u(rng) / ne;
  p.w_ie = 3 * u(rng) / ne;
  p.w_ei = -3 * u(rng) / ni;
  p.w_ii = -2 * u(rng) / ni;
  return p;
}

}  // namespace

TEST_CASE("reduction reproduces the published weight matrices") {
  const auto stable = WilsonCowanParams::from_effective(Matrix{{0.9, -2}, {5, -1.5}}, 1, 1);
  const auto r = reduce(stable);
  CHECK(r.net.w == Matrix{{0.9, -2}, {5, -1.5}});
  CHECK(r.d == Vector{1, 1});
  CHECK(r.net.m.all_infinite());

  WilsonCowanParams p;
  p.n = 10;
  p.alpha = 0.8;
  p.w_ee = 0.9 / 8;
  p.w_ei = -2.0 / 2;
  p.w_ie = 5.0 / 8;
  p.w_ii = -1.5 / 2;
  const Matrix w = wilson_cowan_matrix(p);
  CHECK(max_abs_diff(w.data(), Matrix{{0.9, -2}, {5, -1.5}}.data()) < 1e-15);

  p.w_ee = p.w_ei = p.w_ie = p.w_ii = 0;
  CHECK(wilson_cowan_matrix(p) == Matrix(2, 2));
}

TEST_CASE("parameter validation") {
  WilsonCowanParams p;
  p.w_ei = 0.1;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
  p = {};
  p.alpha = 1.0;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
  p = {};
  p.w_ee = -0.1;
  CHECK_THROWS_AS(reduce(p), InvalidArgument);
  p = {};
  p.m_e = 0;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
}

TEST_CASE("closed-form conditions on the published cases") {
  const auto stable = analytic_conditions(WilsonCowanParams::from_effective(Matrix{{0.9, -2}, {5, -1.5}}));
  CHECK(stable.consistent());
  CHECK(stable.checks[kWcP].analytic);
  CHECK(stable.checks[kWcH].analytic);
  CHECK(stable.checks[kWcExcitatory].analytic);
  // (1 - alpha) n |w_ii| = 1.5 >= 1 rules out absolute Schur stability.
  CHECK_FALSE(stable.checks[kWcSchur].analytic);
  CHECK(stable.checks[kWcSchur].numeric == Verdict::False);
  CHECK(stable.checks[kWcHurwitz].analytic);

  const auto bistable = analytic_conditions(WilsonCowanParams::from_effective(Matrix{{1.1, -2}, {5, -1.5}}));
  CHECK(bistable.consistent());
  CHECK_FALSE(bistable.checks[kWcP].analytic);
  CHECK_FALSE(bistable.checks[kWcH].analytic);
  CHECK_FALSE(bistable.checks[kWcExcitatory].analytic);
  CHECK(bistable.checks[kWcP].numeric == Verdict::False);
  // The full matrix is still Hurwitz.
  CHECK(bistable.checks[kWcHurwitz].analytic);
  CHECK(bistable.checks[kWcHurwitz].numeric == Verdict::True);

  const auto weak = analytic_conditions(WilsonCowanParams::from_effective(Matrix{{0.3, -0.2}, {0.4, -0.5}}));
  CHECK(weak.checks[kWcSchur].analytic);
  CHECK(weak.checks[kWcSchur].numeric == Verdict::True);
}

TEST_CASE("closed forms agree with the numeric tests on random draws") {
  std::mt19937_64 rng(2024);
  int marginal = 0, disagree = 0;
  std::array<int, 5> truths{};
  for (int k = 0; k < 10000; ++k) {
    const auto rep = analytic_conditions(random_params(rng));
    for (std::size_t c = 0; c < 5; ++c) {
      marginal += rep.checks[c].marginal;
      disagree += !rep.checks[c].agree;
      truths[c] += rep.checks[c].analytic;
    }
  }
  CHECK(disagree == 0);
  CHECK(marginal < 50);
  // Both outcomes occur for every condition.
  for (int t : truths) CHECK_MESSAGE((t > 100 && t < 9900), t);
}

TEST_CASE("Hurwitz without excitatory stability still gives bounded runs") {
  std::mt19937_64 rng(5);
  int found = 0;
  for (int k = 0; k < 2000 && found < 20; ++k) {
    const auto p = random_params(rng);
    const auto rep = analytic_conditions(p);
    if (!rep.checks[kWcHurwitz].analytic || rep.checks[kWcExcitatory].analytic) continue;
    ++found;
    const auto r = reduce(p);
    BoundednessOptions o;
    o.horizon = 100 * r.net.tau;
    o.escape_bound = 1e6;
    o.seed = static_cast<std::uint64_t>(k);
    const auto b = boundedness_probe(r.net, Vector{1, 1}, o);
    CHECK(b.status == Boundedness::Unknown);
    CHECK_FALSE(b.probe_escaped);
  }
  CHECK(found == 20);
}
