#include "ltn/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "ltn/errors.hpp"
#include "ltn/matclass.hpp"
#include "ltn/parallel.hpp"
#include "ltn/rng.hpp"

namespace ltn {

void EnsembleConfig::validate() const {
  auto prob = [](double v, const char* what) {
    if (!(v >= 0 && v <= 1)) throw InvalidArgument(std::string("ensemble: ") + what + " must lie in [0, 1]");
  };
  prob(sparsity, "sparsity");
  prob(excitatory, "excitatory fraction");
  if (samples < 1) throw InvalidArgument("ensemble: sample count must be at least 1");
  if (!(sigma >= 0)) throw InvalidArgument("ensemble: sigma must be nonnegative");
  if (samples > UINT32_MAX) throw InvalidArgument("ensemble: too many samples");
  for (std::size_t n : n_values)
    if (n < 1) throw InvalidArgument("ensemble: n must be positive");
}

Matrix sample_weights(const EnsembleConfig& cfg, std::size_t n, std::uint64_t stream,
                      std::uint32_t sample) {
  Philox4x32 g(cfg.seed, stream, sample);
  const double mu_e = cfg.mu_excitatory.value_or(cfg.mu);
  const double mu_i = cfg.mu_inhibitory.value_or(cfg.mu);
  Matrix w(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    const bool excit = uniform01(g) < cfg.excitatory;
    const double mu = excit ? mu_e : mu_i;
    for (std::size_t i = 0; i < n; ++i) {
      // Both draws happen for every entry so the stream layout is fixed.
      const bool present = uniform01(g) >= cfg.sparsity;
      const double mag = std::exp(mu + cfg.sigma * normal01(g));
      if (i != j && present) w(i, j) = excit ? mag : -mag;
    }
  }
  return w;
}

NetworkSpec sample_network(const EnsembleConfig& cfg, std::size_t n, std::uint32_t sample) {
  cfg.validate();
  return make_unbounded_network(sample_weights(cfg, n, 0, sample));
}

Estimate make_estimate(std::size_t count, std::size_t samples) {
  Estimate e;
  e.count = count;
  e.samples = samples;
  e.p = static_cast<double>(count) / static_cast<double>(samples);
  e.sem = std::sqrt(e.p * (1 - e.p) / static_cast<double>(samples));
  return e;
}

namespace {

struct SampleResult {
  Verdict p = Verdict::Marginal, h = Verdict::Marginal, schur = Verdict::Marginal;
  double rho = 0.0;
};

EnsembleRow evaluate(const EnsembleConfig& cfg, std::size_t n, std::uint64_t stream,
                     double parameter) {
  const bool classes = n <= cfg.class_limit;
  std::vector<SampleResult> results(cfg.samples);
  MatClassOptions opt;
  opt.exhaustive_limit = std::max(opt.exhaustive_limit, cfg.class_limit);
  parallel_for(
      cfg.samples,
      [&](std::size_t s) {
        const Matrix w = sample_weights(cfg, n, stream, static_cast<std::uint32_t>(s));
        const Matrix id = Matrix::identity(n);
        SampleResult& r = results[s];
        const ScalarCertificate sc = is_absolutely_schur(w, opt);
        r.schur = sc.verdict;
        r.rho = sc.value;
        if (classes) {
          r.p = is_p_matrix(id - w, opt).verdict;
          r.h = is_totally_hurwitz(w - id, opt).verdict;
        }
      },
      cfg.threads);

  EnsembleRow row;
  row.n = n;
  row.parameter = parameter;
  std::size_t np = 0, nh = 0, ns = 0, positive = 0;
  double logs = 0;
  for (const auto& r : results) {
    np += r.p == Verdict::True;
    nh += r.h == Verdict::True;
    ns += r.schur == Verdict::True;
    row.marginal += (classes && (r.p == Verdict::Marginal || r.h == Verdict::Marginal)) ||
                    r.schur == Verdict::Marginal;
    if (r.rho > 0) {
      logs += std::log(r.rho);
      ++positive;
    }
  }
  if (classes) {
    row.p_matrix = make_estimate(np, cfg.samples);
    row.hurwitz = make_estimate(nh, cfg.samples);
  }
  row.abs_schur = make_estimate(ns, cfg.samples);
  row.mean_log_rho = positive ? logs / static_cast<double>(positive) : -INFINITY;
  return row;
}

}  // namespace

EnsembleReport class_probability_curve(const EnsembleConfig& cfg) {
  cfg.validate();
  EnsembleReport rep;
  for (std::size_t k = 0; k < cfg.n_values.size(); ++k)
    rep.rows.push_back(evaluate(cfg, cfg.n_values[k], k, NAN));
  return rep;
}

EnsembleReport mu_sweep(const EnsembleConfig& cfg, std::size_t n, const std::vector<double>& mus,
                        SweepTarget target) {
  cfg.validate();
  EnsembleReport rep;
  for (std::size_t k = 0; k < mus.size(); ++k) {
    EnsembleConfig c = cfg;
    if (target != SweepTarget::Inhibitory) c.mu_excitatory = mus[k];
    if (target != SweepTarget::Excitatory) c.mu_inhibitory = mus[k];
    rep.rows.push_back(evaluate(c, n, 1000 + k, mus[k]));
  }
  return rep;
}

std::vector<double> linspace(double lo, double hi, std::size_t count) {
  std::vector<double> v(count);
  for (std::size_t k = 0; k < count; ++k)
    v[k] = count == 1 ? lo : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(count - 1);
  return v;
}

ScalingFit spectral_scaling_fit(const EnsembleConfig& cfg, const std::vector<std::size_t>& n_values,
                                double log_base) {
  cfg.validate();
  if (std::set<std::size_t>(n_values.begin(), n_values.end()).size() < 3)
    throw InvalidArgument("scaling fit needs at least 3 distinct n");
  if (!(log_base > 1)) throw InvalidArgument("scaling fit: log base must exceed 1");
  EnsembleConfig c = cfg;
  c.class_limit = 0;
  ScalingFit fit;
  fit.n_values = n_values;
  fit.log_base = log_base;
  const double lb = std::log(log_base);
  std::vector<double> xs;
  for (std::size_t k = 0; k < n_values.size(); ++k) {
    const EnsembleRow row = evaluate(c, n_values[k], 2000 + k, NAN);
    fit.mean_log_rho.push_back(row.mean_log_rho / lb);
    xs.push_back(std::log(static_cast<double>(n_values[k])) / lb);
  }
  const double m = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    mx += xs[k] / m;
    my += fit.mean_log_rho[k] / m;
  }
  double sxy = 0, sxx = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxy += (xs[k] - mx) * (fit.mean_log_rho[k] - my);
    sxx += (xs[k] - mx) * (xs[k] - mx);
  }
  fit.alpha = sxy / sxx;
  fit.beta = my - fit.alpha * mx;
  return fit;
}

}  // namespace ltn
