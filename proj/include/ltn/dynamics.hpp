#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ltn/model.hpp"

namespace ltn {

/// External input d(t) of the network. Either constant, sampled on a uniform
/// grid (zero-order hold), or an arbitrary function of time and state.
class InputSignal {
 public:
  using Feedback = std::function<void(double t, std::span<const double> x, std::span<double> d)>;

  static InputSignal constant(Vector d);
  /// samples[k] is held on [t0 + k dt, t0 + (k+1) dt); the last sample is
  /// held forever and times before t0 use the first sample.
  static InputSignal sampled(double t0, double dt, std::vector<Vector> samples);
  static InputSignal feedback(std::size_t n, Feedback f, std::string description = "feedback");

  std::size_t size() const { return n_; }
  bool is_constant() const { return kind_ == Kind::Constant; }
  const Vector& constant_value() const { return d_; }
  void evaluate(double t, std::span<const double> x, std::span<double> d) const;
  const std::string& description() const { return description_; }

 private:
  enum class Kind { Constant, Sampled, Feedback };
  Kind kind_ = Kind::Constant;
  std::size_t n_ = 0;
  Vector d_;
  double t0_ = 0.0, dt_ = 1.0;
  std::vector<Vector> samples_;
  Feedback f_;
  std::string description_;
};

struct SimulationOptions {
  double horizon = 10.0;
  /// Step size; 0 selects default_step(net).
  double h = 0.0;
  /// Keep every k-th state (the final state is always kept).
  std::size_t record_every = 1;
  /// Stop early once ||x||_inf exceeds this (only reachable with infinite caps).
  double divergence_bound = 1e12;
};

struct Trajectory {
  double h = 0.0;
  std::vector<double> t;
  std::vector<Vector> x;
  std::string input;
  bool diverged = false;

  const Vector& final_state() const { return x.back(); }
};

/// min(tau/20, 0.2 tau / (1 + ||W||))
double default_step(const NetworkSpec& net);

/// Fixed-step RK4 with clamping to the box [0, m]. Throws InvalidArgument
/// when x0 leaves the box and StepSizeError when h > tau/20 or a step lands
/// farther than 1e-9 outside the box.
Trajectory simulate(const NetworkSpec& net, const InputSignal& d, std::span<const double> x0,
                    const SimulationOptions& opt);

struct ComparisonResult {
  bool holds = true;
  /// max over grid points and nodes of x_i(t) - xbar_i(t).
  double max_excess = 0.0;
  Trajectory original;
  Trajectory excitatory;
};

/// Simulates the network and its excitatory-only comparison system
/// (W replaced by max(W, 0)) from the same x0 on the same grid, and checks
/// x(t) <= xbar(t) + tol. Requires every cap infinite.
ComparisonResult comparison_check(const NetworkSpec& net, const InputSignal& d,
                                  std::span<const double> x0, double horizon,
                                  double tol = 1e-6);

enum class Boundedness { Certified, Unknown };

struct BoundednessReport {
  Boundedness status = Boundedness::Unknown;
  /// rho(max(W, 0))
  double excitatory_radius = 0.0;
  /// Componentwise bound on trajectories under inputs <= dbar.
  std::optional<Vector> nu;
  /// Largest ||x||_inf seen by the simulation probe (Unknown case only).
  double max_state = 0.0;
  bool probe_escaped = false;
};

struct BoundednessOptions {
  double tol = kDefaultTolerance;
  double horizon = 100.0;
  double escape_bound = 1e6;
  std::size_t trials = 8;
  std::uint64_t seed = 1;
};

/// nu(dbar) = (I - max(W,0))^{-1} max(dbar, 0) when rho(max(W,0)) < 1; with
/// every cap finite the box itself bounds the state and nu = m otherwise.
/// Falls back to simulation with constant input dbar.
BoundednessReport boundedness_probe(const NetworkSpec& net, std::span<const double> dbar,
                                    const BoundednessOptions& opt = {});

/// The closed-form bound alone; nullopt when rho(max(W,0)) >= 1 - tol.
std::optional<Vector> monotone_bound(const Matrix& w, std::span<const double> dbar,
                                     double tol = kDefaultTolerance);

struct Cluster {
  Vector center;
  std::vector<std::size_t> members;
};

/// Single-linkage clustering in the max norm.
std::vector<Cluster> cluster_points(const std::vector<Vector>& points, double radius);

struct ProbeOptions {
  std::size_t trials = 20;
  std::uint64_t seed = 1;
  /// Initial conditions are uniform in [0, m_i], or [0, box] for m_i = inf.
  double box = 5.0;
  /// Simulation chunk; runs are extended until settled or max_horizon.
  double horizon = 40.0;
  double max_horizon = 400.0;
  /// A run counts as settled once ||f(x)||_inf < settle_tol max(1, ||x||_inf).
  double settle_tol = 1e-11;
  double cluster_radius = 1e-4;
  unsigned threads = 0;
};

struct StabilityProbe {
  std::vector<Vector> initial;
  std::vector<Vector> finals;
  std::vector<Cluster> clusters;
  /// Every run settled and all final states form one cluster.
  bool converged = false;
  /// Median fitted slope of log||x(t) - x*|| (1/time); present only when
  /// converged and at least one run had a usable tail.
  std::optional<double> rate;
  bool any_diverged = false;
};

StabilityProbe ges_probe(const NetworkSpec& net, std::span<const double> d,
                         const ProbeOptions& opt = {});

}  // namespace ltn
