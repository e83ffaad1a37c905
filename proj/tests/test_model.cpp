#include <cmath>
#include <random>

#include "doctest.h"
#include "ltn/errors.hpp"
#include "ltn/model.hpp"

using namespace ltn;

TEST_CASE("caps and network validation") {
  CHECK_THROWS_AS(CapVector({1.0, 0.0}), InvalidArgument);
  CHECK_THROWS_AS(CapVector({-1.0}), InvalidArgument);
  CHECK_THROWS_AS(CapVector({NAN}), InvalidArgument);
  CHECK(CapVector::unbounded(3).all_infinite());
  CHECK_THROWS_AS(make_network(Matrix(2, 3), CapVector::unbounded(2)), InvalidArgument);
  CHECK_THROWS_AS(make_network(Matrix(2, 2), CapVector::unbounded(3)), InvalidArgument);
  CHECK_THROWS_AS(make_network(Matrix(2, 2), CapVector::unbounded(2), 0.0), InvalidArgument);
}

TEST_CASE("threshold projects onto the box") {
  const CapVector m({kInfiniteCap, 1.0, 2.0});
  CHECK(threshold(Vector{-1, 5, 1.5}, m) == Vector{0, 1, 1.5});
  CHECK(threshold(Vector{7, -3, 9}, m) == Vector{7, 0, 2});
}

TEST_CASE("switching index enumeration") {
  const auto all = all_switching_indices(CapVector({kInfiniteCap, 1.0}));
  REQUIRE(all.size() == 6);
  CHECK(all.front().str() == "00");
  CHECK(all[1].str() == "0l");
  CHECK(all[2].str() == "0s");
  CHECK(all.back().str() == "ls");
  CHECK(switching_index_count(CapVector::uniform(10, 1.0)) == 59049);
  CHECK(binary_switching_indices(3).size() == 8);
  CHECK(SwitchingIndex::parse("0ls").str() == "0ls");
  CHECK_THROWS_AS(SwitchingIndex::parse("0x"), InvalidArgument);
  CHECK(binary_switching_indices(0).size() == 1);
}

TEST_CASE("region classification and tie-breaking") {
  const auto net = make_network(Matrix(2, 2), CapVector({kInfiniteCap, 1.0}));
  CHECK(classify_region(net, Vector{0, 0}, Vector{0, 0}).str() == "00");
  CHECK(classify_region(net, Vector{0.5, 1.0}, Vector{0, 0}).str() == "ls");
  CHECK(classify_region(net, Vector{0.5, 0.999}, Vector{0, 0}).str() == "ll");
}

TEST_CASE("mode system reproduces the vector field inside its region") {
  const auto net = make_network(Matrix{{0.2, -0.5, 0.1}, {0.3, 0.1, -0.4}, {0.6, 0.2, 0.0}},
                                CapVector({kInfiniteCap, 1.0, 0.8}), 2.0);
  const Vector d{0.4, 0.9, 0.5};
  for (const Vector& x : {Vector{0.1, 0.2, 0.3}, Vector{1.0, 0.0, 0.5}, Vector{0.0, 1.0, 0.8}}) {
    const auto sigma = classify_region(net, d, x);
    const auto ms = mode_system(net, d, sigma);
    Vector f = ms.a * x;
    for (std::size_t i = 0; i < 3; ++i) f[i] = (f[i] + ms.b[i]) / net.tau;
    const Vector g = vector_field(net, d, x);
    CHECK(max_abs_diff(f, g) < 1e-12);
  }
  CHECK_THROWS_AS(mode_system(net, d, SwitchingIndex::parse("sll")), InvalidArgument);
}

TEST_CASE("lipschitz constant") {
  const auto net = make_unbounded_network(Matrix{{0, 0}, {1, 0}}, 0.5);
  CHECK(lipschitz_constant(net) == doctest::Approx(4.0));
}

namespace {

NetworkSpec random_network(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> g(0.0, 0.6);
  std::uniform_real_distribution<double> u(0.5, 3.0);
  Matrix w(n, n);
  for (double& v : w.data()) v = g(rng);
  std::vector<double> caps(n);
  for (double& c : caps) c = u(rng) < 1.5 ? kInfiniteCap : u(rng);
  return make_network(w, CapVector(caps), u(rng));
}

}  // namespace

TEST_CASE("threshold is idempotent and lands in the box") {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g(0.0, 3.0);
  for (int t = 0; t < 500; ++t) {
    const auto net = random_network(rng, 1 + t % 6);
    Vector v(net.size());
    for (double& x : v) x = g(rng);
    const Vector once = threshold(v, net.m);
    CHECK(threshold(once, net.m) == once);
    for (std::size_t i = 0; i < once.size(); ++i) {
      CHECK(once[i] >= 0);
      CHECK(once[i] <= net.m[i]);
    }
  }
}

TEST_CASE("mode systems match the vector field on random states") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int t = 0; t < 1000; ++t) {
    const auto net = random_network(rng, 1 + t % 7);
    const std::size_t n = net.size();
    Vector d(n), x(n);
    for (double& v : d) v = g(rng);
    for (std::size_t i = 0; i < n; ++i) x[i] = u(rng) * (net.m.finite(i) ? net.m[i] : 4.0);
    const auto ms = mode_system(net, d, classify_region(net, d, x));
    Vector f = ms.a * x;
    for (std::size_t i = 0; i < n; ++i) f[i] = (f[i] + ms.b[i]) / net.tau;
    CHECK(max_abs_diff(f, vector_field(net, d, x)) < 1e-12 * (1 + norm_inf(x)) * (1 + operator_norm(net.w)));
  }
}

TEST_CASE("vector field respects its Lipschitz bound") {
  std::mt19937_64 rng(14);
  std::normal_distribution<double> g(0.0, 2.0);
  for (int t = 0; t < 1000; ++t) {
    const auto net = random_network(rng, 1 + t % 6);
    const std::size_t n = net.size();
    Vector d(n), x(n), y(n);
    for (double& v : d) v = g(rng);
    for (std::size_t i = 0; i < n; ++i) {
      const double top = net.m.finite(i) ? net.m[i] : 10.0;
      x[i] = std::min(top, std::abs(g(rng)));
      y[i] = std::min(top, std::abs(g(rng)));
    }
    Vector fx = vector_field(net, d, x), fy = vector_field(net, d, y), dx(n);
    for (std::size_t i = 0; i < n; ++i) {
      fx[i] -= fy[i];
      dx[i] = x[i] - y[i];
    }
    CHECK(norm2(fx) <= lipschitz_constant(net) * norm2(dx) * (1 + 1e-12) + 1e-14);
  }
}
