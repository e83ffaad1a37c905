#include <algorithm>
#include <cmath>
#include <complex>
#include <random>

#include "doctest.h"
#include "ltn/errors.hpp"
#include "ltn/linalg.hpp"

using namespace ltn;

namespace {

Matrix random_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Matrix a(r, c);
  for (double& v : a.data()) v = g(rng);
  return a;
}

// Roots of the 2x2 characteristic polynomial lambda^2 - tr lambda + det.
std::pair<std::complex<double>, std::complex<double>> char_roots(const Matrix& a) {
  const double tr = a(0, 0) + a(1, 1);
  const double det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
  const std::complex<double> disc = std::sqrt(std::complex<double>(tr * tr - 4 * det));
  return {(tr + disc) / 2.0, (tr - disc) / 2.0};
}

double max_abs(const Matrix& a) {
  double m = 0;
  for (double v : a.data()) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

TEST_CASE("matrix arithmetic") {
  const Matrix a{{1, 2}, {3, 4}};
  const Matrix b{{0, 1}, {1, 0}};
  CHECK(a * b == Matrix{{2, 1}, {4, 3}});
  CHECK(a.transpose() == Matrix{{1, 3}, {2, 4}});
  CHECK(a + b == Matrix{{1, 3}, {4, 4}});
  const Vector x{1, -1};
  CHECK(a * x == Vector{-1, -1});
  CHECK_THROWS_AS(Matrix(2, 3) * Matrix(2, 3), InvalidArgument);
}

TEST_CASE("index sets") {
  const IndexSet s({0, 2}, 4);
  CHECK(s.complement().indices() == std::vector<std::size_t>{1, 3});
  CHECK(IndexSet::from_mask(0b101, 3).indices() == std::vector<std::size_t>{0, 2});
  CHECK_THROWS_AS(IndexSet({2, 1}, 4), InvalidArgument);
  CHECK_THROWS_AS(IndexSet({4}, 4), InvalidArgument);
}

TEST_CASE("LU determinant and solve") {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 20; ++t) {
    const Matrix a = random_matrix(rng, 5, 5);
    const Vector b{1, 2, 3, 4, 5};
    const Vector x = solve(a, b);
    CHECK(max_abs_diff(a * x, b) < 1e-9);
    const Matrix inv = inverse(a);
    CHECK(max_abs(a * inv - Matrix::identity(5)) < 1e-9);
  }
  CHECK(determinant(Matrix{{2, 1}, {1, 3}}) == doctest::Approx(5.0));
  CHECK_THROWS_AS(inverse(Matrix{{1, 2}, {2, 4}}), SingularMatrix);
}

TEST_CASE("2x2 eigenvalues match the characteristic polynomial") {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 200; ++t) {
    const Matrix a = random_matrix(rng, 2, 2, 3.0);
    auto ev = eigenvalues(a);
    auto [r1, r2] = char_roots(a);
    auto key = [](std::complex<double> z) { return std::make_pair(z.real(), z.imag()); };
    std::sort(ev.begin(), ev.end(), [&](auto p, auto q) { return key(p) < key(q); });
    std::vector<std::complex<double>> ref{r1, r2};
    std::sort(ref.begin(), ref.end(), [&](auto p, auto q) { return key(p) < key(q); });
    for (int k = 0; k < 2; ++k) CHECK(std::abs(ev[k] - ref[k]) < 1e-9 * (1 + std::abs(ref[k])));
  }
}

TEST_CASE("spectral radius of a known nonnegative matrix") {
  const Matrix a{{8, 3}, {2, 1}};
  CHECK(spectral_radius(a) == doctest::Approx((9 + std::sqrt(73.0)) / 2).epsilon(1e-12));
}

TEST_CASE("eigenvalues: trace and determinant invariants") {
  std::mt19937_64 rng(3);
  for (std::size_t n : {3u, 5u, 8u, 13u, 24u}) {
    const Matrix a = random_matrix(rng, n, n);
    const auto ev = eigenvalues(a);
    REQUIRE(ev.size() == n);
    std::complex<double> sum = 0, prod = 1;
    double tr = 0;
    for (std::size_t i = 0; i < n; ++i) tr += a(i, i);
    for (auto z : ev) {
      sum += z;
      prod *= z;
    }
    CHECK(std::abs(sum - tr) < 1e-8 * n);
    CHECK(std::abs(prod - determinant(a)) < 1e-7 * std::max(1.0, std::abs(determinant(a))));
  }
}

TEST_CASE("eigenvalues of special matrices") {
  CHECK(spectral_radius(Matrix::identity(4)) == doctest::Approx(1.0));
  const Matrix rot{{0, -1}, {1, 0}};
  const auto ev = eigenvalues(rot);
  CHECK(std::abs(ev[0].imag()) == doctest::Approx(1.0));
  CHECK(spectral_abscissa(rot) == doctest::Approx(0.0).epsilon(1e-12));
  const Matrix nil{{0, 0}, {1, 0}};
  CHECK(spectral_radius(nil) < 1e-12);
  CHECK(operator_norm(nil) == doctest::Approx(1.0));
}

TEST_CASE("operator norm agrees with symmetric eigen of the Gram matrix") {
  std::mt19937_64 rng(4);
  const Matrix a = random_matrix(rng, 6, 4);
  const auto se = symmetric_eigen(a.transpose() * a);
  CHECK(operator_norm(a) == doctest::Approx(std::sqrt(se.values.back())).epsilon(1e-10));
}

TEST_CASE("symmetric eigen decomposition") {
  std::mt19937_64 rng(5);
  Matrix a = random_matrix(rng, 7, 7);
  a = a + a.transpose();
  const auto se = symmetric_eigen(a);
  CHECK(std::is_sorted(se.values.begin(), se.values.end()));
  for (std::size_t k = 0; k < 7; ++k) {
    const Vector v = se.vectors.column(k);
    const Vector av = a * v;
    for (std::size_t i = 0; i < 7; ++i) CHECK(av[i] == doctest::Approx(se.values[k] * v[i]).epsilon(1e-9).scale(1));
  }
}

TEST_CASE("principal pivot transform is an involution") {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 20; ++t) {
    const Matrix a = random_matrix(rng, 5, 5);
    const IndexSet piv({1, 3}, 5);
    const Matrix p = principal_pivot_transform(a, piv);
    const Matrix back = principal_pivot_transform(p, piv);
    CHECK(max_abs(back - a) < 1e-9);
  }
  // Full pivot is the inverse.
  const Matrix a{{2, 1}, {1, 3}};
  CHECK(max_abs(principal_pivot_transform(a, IndexSet::all(2)) - inverse(a)) < 1e-12);
  // Empty pivot is the identity map.
  CHECK(principal_pivot_transform(a, IndexSet({}, 2)) == a);
}

TEST_CASE("least squares") {
  std::mt19937_64 rng(7);
  SUBCASE("consistent overdetermined system") {
    const Matrix a = random_matrix(rng, 6, 3);
    const Matrix x0 = random_matrix(rng, 3, 2);
    const auto ls = least_squares(a, a * x0);
    CHECK(ls.rank == 3);
    CHECK(ls.residual < 1e-9);
    CHECK(max_abs(ls.x - x0) < 1e-9);
  }
  SUBCASE("underdetermined gives the minimum-norm solution") {
    const Matrix a = random_matrix(rng, 2, 5);
    const Matrix y = random_matrix(rng, 2, 1);
    const auto ls = least_squares(a, y);
    const Matrix ref = a.transpose() * inverse(a * a.transpose()) * y;
    CHECK(ls.rank == 2);
    CHECK(max_abs(ls.x - ref) < 1e-9);
  }
  SUBCASE("rank-deficient inconsistent system") {
    const Matrix a{{1, 1}, {1, 1}, {0, 0}};
    const Matrix y{{1}, {3}, {1}};
    const auto ls = least_squares(a, y);
    CHECK(ls.rank == 1);
    CHECK(ls.x(0, 0) == doctest::Approx(1.0));
    CHECK(ls.x(1, 0) == doctest::Approx(1.0));
    CHECK(ls.residual == doctest::Approx(std::sqrt(3.0)));
  }
  CHECK(rank(Matrix{{1, 2}, {2, 4}}) == 1);
}

TEST_CASE("strict inequality verdicts") {
  CHECK(strictly_less(0.5, 1.0, 1e-9) == Verdict::True);
  CHECK(strictly_less(1.5, 1.0, 1e-9) == Verdict::False);
  CHECK(strictly_less(1.0, 1.0, 1e-9) == Verdict::Marginal);
}

TEST_CASE("spectrum invariants on random matrices") {
  std::mt19937_64 rng(31);
  auto sorted = [](std::vector<std::complex<double>> v) {
    std::sort(v.begin(), v.end(), [](auto a, auto b) {
      return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    return v;
  };
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + t % 9;
    const Matrix a = random_matrix(rng, n, n);
    // Same spectrum for A and its transpose; matching after sorting can pair
    // a conjugate couple in either order, so compare real parts and |imag|.
    const auto ea = sorted(eigenvalues(a)), et = sorted(eigenvalues(a.transpose()));
    REQUIRE(ea.size() == n);
    std::vector<double> ra, rt, ia, it;
    for (std::size_t k = 0; k < n; ++k) {
      ra.push_back(ea[k].real());
      rt.push_back(et[k].real());
      ia.push_back(std::abs(ea[k].imag()));
      it.push_back(std::abs(et[k].imag()));
    }
    std::sort(ia.begin(), ia.end());
    std::sort(it.begin(), it.end());
    CHECK(max_abs_diff(ra, rt) < 1e-8 * (1 + operator_norm(a)));
    CHECK(max_abs_diff(ia, it) < 1e-8 * (1 + operator_norm(a)));
    CHECK(spectral_radius(a) <= operator_norm(a) * (1 + 1e-12) + 1e-12);
    CHECK(spectral_radius(abs(a)) >= spectral_radius(a) - 1e-9);
  }
}
