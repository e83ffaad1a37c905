#include <cmath>
#include <random>

#include "doctest.h"
#include "ltn/errors.hpp"
#include "ltn/matclass.hpp"

using namespace ltn;

namespace {

const Matrix kWeiStable{{0.9, -2}, {5, -1.5}};
const Matrix kCounterA{{-1, -5, 0}, {0, -1, -6}, {-1, 0, -1}};

Matrix eye(std::size_t n) { return Matrix::identity(n); }

Matrix random_matrix(std::mt19937_64& rng, std::size_t n, double scale) {
  std::normal_distribution<double> g(0.0, scale);
  Matrix a(n, n);
  for (double& v : a.data()) v = g(rng);
  return a;
}

// Independent re-check of a Lyapunov witness: P > 0 and every mode
// inequality holds with margin, each through its own eigen solve.
bool witness_holds(const Matrix& w, const Matrix& p, double margin) {
  const std::size_t n = w.rows();
  if (symmetric_eigen(p).values.front() <= 0) return false;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    Matrix a = eye(n) * -1.0;
    for (std::size_t i = 0; i < n; ++i)
      if ((mask >> i) & 1)
        for (std::size_t j = 0; j < n; ++j) a(i, j) += w(i, j);
    const Matrix s = a.transpose() * p + p * a;
    if (symmetric_eigen(s).values.back() > -margin) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("P-matrix examples") {
  CHECK(is_p_matrix(eye(2) - kWeiStable).verdict == Verdict::True);
  CHECK(is_p_matrix(eye(3)).verdict == Verdict::True);
  CHECK(is_p_matrix(kCounterA * -1.0).verdict == Verdict::True);
  const auto bad = is_p_matrix(Matrix{{1, 2}, {3, 1}});
  CHECK(bad.verdict == Verdict::False);
  REQUIRE(bad.witness);
  CHECK(bad.witness->indices() == std::vector<std::size_t>{0, 1});
  CHECK(determinant(principal_submatrix(Matrix{{1, 2}, {3, 1}}, *bad.witness)) <= 0);
  // First violation in cardinality-then-lexicographic order.
  const auto first = is_p_matrix(Matrix{{1, 0, 0}, {0, -1, 0}, {0, 0, -1}});
  CHECK(first.witness->indices() == std::vector<std::size_t>{1});
  CHECK(is_p_matrix(Matrix{{1, 1}, {1, 1}}).verdict == Verdict::Marginal);
}

TEST_CASE("totally Hurwitz examples") {
  CHECK(is_totally_hurwitz(kWeiStable - eye(2)).verdict == Verdict::True);
  CHECK(is_totally_hurwitz(eye(3) * -1.0).verdict == Verdict::True);
  const auto h = is_totally_hurwitz(kCounterA);
  CHECK(h.verdict == Verdict::False);
  REQUIRE(h.witness);
  CHECK(spectral_abscissa(principal_submatrix(kCounterA, *h.witness)) >= 0);
}

TEST_CASE("exhaustive limits are enforced") {
  CHECK_THROWS_AS(is_p_matrix(eye(21)), LimitExceeded);
  CHECK_THROWS_AS(is_totally_l_stable(Matrix(13, 13)), LimitExceeded);
  MatClassOptions opt;
  opt.exhaustive_limit = 3;
  CHECK_THROWS_AS(is_totally_hurwitz(eye(4), opt), LimitExceeded);
}

TEST_CASE("absolute Schur and norm") {
  CHECK(is_absolutely_schur(Matrix(3, 3)).verdict == Verdict::True);
  const Matrix nil{{0, 0}, {1, 0}};
  CHECK(is_absolutely_schur(nil).verdict == Verdict::True);
  CHECK(has_small_norm(nil).value == doctest::Approx(1.0));
  CHECK(has_small_norm(nil).verdict == Verdict::Marginal);
  CHECK(is_absolutely_schur(eye(2) * -2.0).verdict == Verdict::False);
}

TEST_CASE("totally L-stable examples") {
  SUBCASE("small norm certifies at the starting point") {
    const Matrix w{{0.3, -0.2}, {0.25, 0.1}};
    REQUIRE(operator_norm(w) < 1);
    const auto l = is_totally_l_stable(w);
    CHECK(l.verdict == Verdict::True);
    CHECK(l.iterations == 1);
    CHECK(witness_holds(w, *l.p, 0.5e-6));
  }
  SUBCASE("-2I") {
    const auto l = is_totally_l_stable(eye(2) * -2.0);
    CHECK(l.verdict == Verdict::True);
    CHECK(witness_holds(eye(2) * -2.0, *l.p, 0.5e-6));
  }
  SUBCASE("H but not L") {
    const Matrix w{{0.5, -3}, {4, -1}};
    CHECK(is_totally_hurwitz(w - eye(2)).verdict == Verdict::True);
    const auto l = is_totally_l_stable(w);
    CHECK(l.verdict == Verdict::False);
    CHECK(l.budget_limited);
  }
  SUBCASE("a non-Hurwitz mode settles the verdict without search") {
    const auto l = is_totally_l_stable(Matrix{{2, 0}, {0, 0}});
    CHECK(l.verdict == Verdict::False);
    CHECK_FALSE(l.budget_limited);
    CHECK(l.iterations == 0);
  }
}

TEST_CASE("Lyapunov witnesses re-verify on random instances") {
  std::mt19937_64 rng(21);
  int certified = 0;
  for (int t = 0; t < 40; ++t) {
    const Matrix w = random_matrix(rng, 4, 0.45);
    const auto l = is_totally_l_stable(w);
    if (l.verdict != Verdict::True) continue;
    ++certified;
    CHECK(witness_holds(w, *l.p, 0.5e-6));
    CHECK(l.objective == doctest::Approx(lyapunov_objective(w, *l.p)));
  }
  CHECK(certified > 5);
}

TEST_CASE("P-matrix invariance under inversion and pivoting") {
  std::mt19937_64 rng(22);
  int tested = 0;
  for (int t = 0; t < 200 && tested < 30; ++t) {
    const Matrix a = eye(3) + random_matrix(rng, 3, 0.6);
    if (is_p_matrix(a).verdict != Verdict::True) continue;
    ++tested;
    CHECK(is_p_matrix(inverse(a)).verdict == Verdict::True);
    CHECK(is_p_matrix(principal_pivot_transform(a, IndexSet({0, 2}, 3))).verdict ==
          Verdict::True);
    CHECK(is_p_matrix(principal_pivot_transform(a, IndexSet({1}, 3))).verdict == Verdict::True);
  }
  CHECK(tested == 30);
}

TEST_CASE("inclusion hierarchy on random contractions") {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 1000; ++t) {
    Matrix w = random_matrix(rng, 4, 1.0);
    w *= 0.9 / operator_norm(w);
    const auto c = certify(w);
    CHECK(c.norm.verdict == Verdict::True);
    CHECK(c.l.verdict == Verdict::True);
    CHECK(hierarchy_consistency(c).consistent());
  }
}

TEST_CASE("zero matrix belongs to every class") {
  const auto c = certify(Matrix(3, 3));
  CHECK(c.p.verdict == Verdict::True);
  CHECK(c.h.verdict == Verdict::True);
  CHECK(c.l.verdict == Verdict::True);
  CHECK(c.abs_schur.verdict == Verdict::True);
  CHECK(c.norm.verdict == Verdict::True);
}

TEST_CASE("absolute Schur implies totally Hurwitz on random draws") {
  std::mt19937_64 rng(24);
  for (int t = 0; t < 300; ++t) {
    const Matrix w = random_matrix(rng, 5, 0.3);
    if (is_absolutely_schur(w).verdict == Verdict::True)
      CHECK(is_totally_hurwitz(w - eye(5)).verdict == Verdict::True);
  }
}
