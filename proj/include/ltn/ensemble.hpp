#pragma once

#include <cstdint>
#include <numbers>
#include <optional>
#include <vector>

#include "ltn/model.hpp"

namespace ltn {

/// Random synaptic matrices: log-normal magnitudes, a fraction of entries
/// set to zero, one sign per column (excitatory or inhibitory presynaptic
/// node), and no self-connections.
struct EnsembleConfig {
  std::vector<std::size_t> n_values{2, 4, 6, 8, 10, 12, 14, 16};
  std::size_t samples = 1000;
  double mu = -0.7;
  double sigma = 0.9;
  /// Probability that an entry is zero.
  double sparsity = 0.2;
  /// Probability that a column is excitatory.
  double excitatory = 0.8;
  /// Per-type overrides of mu (used by the weight-scale sweeps).
  std::optional<double> mu_excitatory, mu_inhibitory;
  std::uint64_t seed = 1;
  /// P and H are only estimated up to this size.
  std::size_t class_limit = 16;
  unsigned threads = 0;

  /// Throws InvalidArgument.
  void validate() const;
};

/// Deterministic in (config, n, stream, sample): Philox with key = seed,
/// stream = configuration index, counter = sample index.
Matrix sample_weights(const EnsembleConfig& cfg, std::size_t n, std::uint64_t stream,
                      std::uint32_t sample);

/// Unbounded network with sampled weights (stream 0, sample `sample`).
NetworkSpec sample_network(const EnsembleConfig& cfg, std::size_t n, std::uint32_t sample = 0);

struct Estimate {
  double p = 0.0;
  double sem = 0.0;
  std::size_t count = 0;
  std::size_t samples = 0;
};

/// p = count / N, sem = sqrt(p (1 - p) / N).
Estimate make_estimate(std::size_t count, std::size_t samples);

struct EnsembleRow {
  std::size_t n = 0;
  /// Value of the swept parameter (mu) or NaN for the size curve.
  double parameter = 0.0;
  std::optional<Estimate> p_matrix;  ///< I - W in P
  std::optional<Estimate> hurwitz;   ///< -I + W in H
  Estimate abs_schur;                ///< rho(|W|) < 1
  /// Mean of ln rho(|W|) over samples with rho > 0.
  double mean_log_rho = 0.0;
  /// Number of samples whose class test hit the marginal band.
  std::size_t marginal = 0;
};

struct EnsembleReport {
  std::vector<EnsembleRow> rows;
};

/// Class probabilities for each n in cfg.n_values (stream = index of n).
EnsembleReport class_probability_curve(const EnsembleConfig& cfg);

enum class SweepTarget { Both, Excitatory, Inhibitory };

/// Class probabilities at fixed n while mu of the chosen synapse type runs
/// over `mus` (stream = 1000 + index of mu).
EnsembleReport mu_sweep(const EnsembleConfig& cfg, std::size_t n, const std::vector<double>& mus,
                        SweepTarget target);

/// mu values spaced evenly over [lo, hi].
std::vector<double> linspace(double lo, double hi, std::size_t count);

struct ScalingFit {
  double alpha = 0.0;
  double beta = 0.0;
  std::vector<std::size_t> n_values;
  /// Mean of log rho(|W|) per n, in the fit's base.
  std::vector<double> mean_log_rho;
  double log_base = 0.0;
};

/// Least-squares fit of mean log rho(|W|) = alpha log n + beta. Throws
/// InvalidArgument with fewer than 3 distinct n.
ScalingFit spectral_scaling_fit(const EnsembleConfig& cfg, const std::vector<std::size_t>& n_values,
                                double log_base = std::numbers::e);

}  // namespace ltn
