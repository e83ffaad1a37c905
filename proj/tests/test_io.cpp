#include <random>

#include "doctest.h"
#include "ltn/errors.hpp"
#include "ltn/io.hpp"
#include "ltn/svg.hpp"

using namespace ltn;

namespace {

std::string field_of(const std::string& text) {
  try {
    parse_network(text);
  } catch (const ParseError& e) {
    return e.field();
  }
  return "<no error>";
}

std::size_t count(const std::string& s, const std::string& needle) {
  std::size_t c = 0;
  for (auto p = s.find(needle); p != std::string::npos; p = s.find(needle, p + 1)) ++c;
  return c;
}

}  // namespace

TEST_CASE("network documents: accepted forms") {
  const auto nested = parse_network(R"({"n": 2, "W": [[0.9, -2], [5, -1.5]], "d": [1, 1]})");
  CHECK(nested.net.w == Matrix{{0.9, -2}, {5, -1.5}});
  CHECK(nested.net.m.all_infinite());
  CHECK(nested.net.tau == 1.0);
  CHECK(nested.d == Vector{1, 1});
  CHECK_FALSE(nested.partition);

  const auto flat = parse_network(R"({"W": [0.9, -2, 5, -1.5], "m": ["inf", 3], "tau": 0.5})");
  CHECK(flat.net.w == nested.net.w);
  CHECK_FALSE(flat.net.m.finite(0));
  CHECK(flat.net.m[1] == 3);
  CHECK(flat.net.tau == 0.5);

  const auto scalar_cap = parse_network(R"({"W": [[0, 1], [1, 0]], "m": 2, "labels": ["e", "i"]})");
  CHECK(scalar_cap.net.m == CapVector::uniform(2, 2));
  CHECK(scalar_cap.net.labels == std::vector<std::string>{"e", "i"});

  const auto part = parse_network(R"({"n": 3, "W": [[0,0.5,0],[0.2,0,0.1],[0,0.3,0]], "d": [1, 2, 3],
      "partition": {"irrelevant": [2, 0], "B_minus": [[-1], [-2]]}})");
  REQUIRE(part.partition);
  CHECK(part.partition->irrelevant == std::vector<std::size_t>{0, 2});
  CHECK(part.partition->relevant == std::vector<std::size_t>{1});
  const BilayerPartition bp = document_partition(part);
  CHECK(bp.d_relevant == Vector{2});
  CHECK(bp.b_minus == Matrix{{-1}, {-2}});
}

TEST_CASE("network documents: errors name the field") {
  CHECK(field_of("{") == "<document>");
  CHECK(field_of("[1, 2]") == "<document>");
  CHECK(field_of(R"({"n": 2})") == "W");
  CHECK(field_of(R"({"n": 2, "W": [[1, 0], [0]]})") == "W[1]");
  CHECK(field_of(R"({"n": 2, "W": [[1, "x"], [0, 1]]})") == "W[0][1]");
  CHECK(field_of(R"({"W": [1, 2, 3]})") == "W");
  CHECK(field_of(R"({"n": 0, "W": [[1]]})") == "n");
  CHECK(field_of(R"({"W": [[0]], "m": [-1]})") == "m[0]");
  CHECK(field_of(R"({"W": [[0]], "m": [1, 2]})") == "m");
  CHECK(field_of(R"({"W": [[0]], "tau": 0})") == "tau");
  CHECK(field_of(R"({"W": [[0]], "tau": "fast"})") == "tau");
  CHECK(field_of(R"({"W": [[0]], "d": [1, 2]})") == "d");
  CHECK(field_of(R"({"W": [[0]], "weights": 1})") == "weights");
  CHECK(field_of(R"({"W": [[0]], "labels": [1]})") == "labels[0]");
  CHECK(field_of(R"({"W": [[0,0],[0,0]], "partition": {"irrelevant": [2]}})") ==
        "partition.irrelevant[0]");
  CHECK(field_of(R"({"W": [[0,0],[0,0]], "partition": {"irrelevant": [0, 1]}})") ==
        "partition.irrelevant");
  CHECK(field_of(R"({"W": [[0,0],[0,0]], "partition": {"irrelevant": [0], "relevant": [0]}})") ==
        "partition.relevant");
  CHECK(field_of(R"({"W": [[0,0],[0,0]], "partition": {"irrelevant": [0], "B_minus": [[1]]}})") ==
        "partition.B_minus");
  CHECK(field_of(R"({"W": [[0,0],[0,0]], "partition": {"irrelevant": [0], "gain": 1}})") ==
        "partition.gain");

  const auto doc = parse_network(R"({"W": [[0,0],[0,0]], "partition": {"irrelevant": [0]}})");
  CHECK_THROWS_AS(document_partition(doc), ParseError);
  CHECK_THROWS_AS(document_input(doc), ParseError);
  CHECK(document_input(doc, Vector{1, 2}) == Vector{1, 2});
  CHECK_THROWS_AS(read_network_file("/nonexistent/net.json"), ParseError);
}

TEST_CASE("network documents round-trip exactly") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> size(1, 7);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = size(rng);
    NetworkDocument doc;
    Matrix w(n, n);
    for (double& v : w.data()) v = g(rng) * std::pow(10.0, static_cast<int>(g(rng) * 3));
    std::vector<double> caps(n);
    for (double& c : caps) c = g(rng) > 0 ? kInfiniteCap : std::abs(g(rng)) + 1e-3;
    doc.net = make_network(w, CapVector(caps), 0.1 + std::abs(g(rng)));
    if (trial % 2) {
      Vector d(n);
      for (double& v : d) v = g(rng) / 3.0;
      doc.d = d;
    }
    if (trial % 3 == 0 && n >= 2) {
      PartitionSpec p;
      p.irrelevant = {0};
      for (std::size_t i = 1; i < n; ++i) p.relevant.push_back(i);
      p.b_minus = Matrix{{-std::abs(g(rng)), -0.1 / 3.0}};
      if (trial % 2 == 0) p.d_relevant = Vector(n - 1, 1.0 / 7.0);
      doc.partition = p;
    }
    if (trial % 5 == 0) {
      for (std::size_t i = 0; i < n; ++i) doc.net.labels.push_back("node " + std::to_string(i));
    }
    const std::string text = write_network(doc);
    const NetworkDocument back = parse_network(text);
    CHECK(back == doc);
    CHECK(write_network(back) == text);
  }
}

TEST_CASE("CSV exports") {
  Trajectory t;
  t.t = {0, 0.5};
  t.x = {{1, 2}, {1.5, 0.25}};
  t.input = "constant";
  const std::string csv = trajectory_csv(t);
  CHECK(csv.starts_with("# ltnet trajectory v1\n"));
  CHECK(csv.find("\nt,x0,x1\n0,1,2\n0.5,1.5,0.25\n") != std::string::npos);

  const auto net = make_unbounded_network(Matrix{{1.1, -2}, {5, -1.5}});
  const Vector d{-0.01, -1};
  const auto set = enumerate_equilibria(net, d);
  const std::string eq = equilibria_csv(set.equilibria);
  CHECK(eq.starts_with("# ltnet equilibria v1\nsigma,x0,x1,valid,stability,max_real,min_real\n"));
  CHECK(count(eq, "\n") == 2 + set.equilibria.size());
  CHECK(count(eq, ",true,") == set.equilibria.size());

  EnsembleConfig cfg;
  cfg.samples = 20;
  cfg.n_values = {2, 3};
  const std::string ens = ensemble_csv(class_probability_curve(cfg));
  CHECK(ens.starts_with("# ltnet ensemble v1\n"));
  CHECK(count(ens, "\n") == 4);
  CHECK(ens.find("\n2,,20,") != std::string::npos);
}

TEST_CASE("text reports") {
  const auto cert = certify(Matrix{{0.9, -2}, {5, -1.5}});
  const std::string txt = certificate_text(cert);
  CHECK(txt.find("I - W in P:      true") != std::string::npos);
  CHECK(txt.find("-I + W in H:     true") != std::string::npos);
  CHECK(txt.find("rho(|W|) < 1:    false") != std::string::npos);
  CHECK(txt.find("hierarchy:       consistent") != std::string::npos);

  const auto wc = WilsonCowanParams::from_effective(Matrix{{0.9, -2}, {5, -1.5}});
  const std::string wtxt = wilson_cowan_text(wc, analytic_conditions(wc));
  CHECK(count(wtxt, "numeric") == 5);
  CHECK(wtxt.find("DISAGREE") == std::string::npos);
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(kInfiniteCap) == "inf");
}

TEST_CASE("nullclines lie on the zero set of the vector field") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    const bool capped = trial % 2;
    const auto net = make_network(Matrix{{u(rng), u(rng)}, {u(rng), u(rng)}},
                                  capped ? CapVector::uniform(2, 3.0) : CapVector::unbounded(2));
    const Vector d{u(rng), u(rng)};
    for (std::size_t node = 0; node < 2; ++node) {
      for (const auto& pl : nullcline(net, d, node, 5, 5, 101)) {
        for (const auto& [x, y] : pl) {
          const Vector f = vector_field(net, d, Vector{x, y});
          CHECK(std::abs(f[node]) < 1e-12);
          CHECK(x >= 0);
          CHECK(y >= 0);
          CHECK(x <= 5);
          CHECK(y <= 5);
        }
      }
    }
  }
  const auto net = make_unbounded_network(Matrix{{0.9, -2}, {5, -1.5}});
  CHECK_THROWS_AS(nullcline(make_unbounded_network(Matrix::identity(3)), Vector{0, 0, 0}, 0, 1, 1),
                  InvalidArgument);
  CHECK_FALSE(nullcline(net, Vector{1, 1}, 0, 1, 1, 2001).empty());
}

TEST_CASE("SVG output is self-contained") {
  const auto net = make_unbounded_network(Matrix{{1.1, -2}, {5, -1.5}});
  const Vector d{-0.01, -1};
  const auto set = enumerate_equilibria(net, d);
  SimulationOptions so;
  so.horizon = 5;
  std::vector<Trajectory> trajs{simulate(net, InputSignal::constant(d), Vector{1, 1}, so)};
  const std::string svg = phase_portrait_svg(net, d, trajs, set.equilibria, {});
  CHECK(svg.starts_with("<svg xmlns=\"http://www.w3.org/2000/svg\""));
  CHECK(svg.ends_with("</svg>\n"));
  CHECK(count(svg, "<title>") == set.equilibria.size());
  CHECK(svg.find("href") == std::string::npos);
  CHECK(svg.find("<style") == std::string::npos);
  CHECK(svg.find("nan") == std::string::npos);

  EnsembleConfig cfg;
  cfg.samples = 30;
  cfg.n_values = {2, 4};
  const auto fit = spectral_scaling_fit(cfg, {4, 8, 16});
  const std::string ens = ensemble_svg(class_probability_curve(cfg), &fit);
  CHECK(count(ens, "<clipPath") == 2);
  CHECK(ens.find("alpha = ") != std::string::npos);
}
