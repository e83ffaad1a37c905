#include "ltn/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ltn/errors.hpp"
#include "ltn/kernels.hpp"
#include "ltn/parallel.hpp"
#include "ltn/rng.hpp"

namespace ltn {

// ---------------------------------------------------------------- input

InputSignal InputSignal::constant(Vector d) {
  for (double v : d)
    if (!std::isfinite(v)) throw InvalidArgument("input d must be finite");
  InputSignal s;
  s.kind_ = Kind::Constant;
  s.n_ = d.size();
  s.d_ = std::move(d);
  s.description_ = "constant";
  return s;
}

InputSignal InputSignal::sampled(double t0, double dt, std::vector<Vector> samples) {
  if (samples.empty()) throw InvalidArgument("sampled input needs at least one sample");
  if (!(dt > 0)) throw InvalidArgument("sampled input needs dt > 0");
  for (const Vector& v : samples)
    if (v.size() != samples.front().size()) throw InvalidArgument("sampled input: ragged samples");
  InputSignal s;
  s.kind_ = Kind::Sampled;
  s.n_ = samples.front().size();
  s.t0_ = t0;
  s.dt_ = dt;
  s.samples_ = std::move(samples);
  s.description_ = "sampled(dt=" + std::to_string(dt) + ")";
  return s;
}

InputSignal InputSignal::feedback(std::size_t n, Feedback f, std::string description) {
  InputSignal s;
  s.kind_ = Kind::Feedback;
  s.n_ = n;
  s.f_ = std::move(f);
  s.description_ = std::move(description);
  return s;
}

void InputSignal::evaluate(double t, std::span<const double> x, std::span<double> d) const {
  switch (kind_) {
    case Kind::Constant:
      std::copy(d_.begin(), d_.end(), d.begin());
      return;
    case Kind::Sampled: {
      const double k = std::floor((t - t0_) / dt_);
      const std::size_t idx =
          k <= 0 ? 0 : std::min(samples_.size() - 1, static_cast<std::size_t>(k));
      std::copy(samples_[idx].begin(), samples_[idx].end(), d.begin());
      return;
    }
    case Kind::Feedback:
      f_(t, x, d);
      return;
  }
}

// ---------------------------------------------------------------- simulate

double default_step(const NetworkSpec& net) {
  return std::min(net.tau / 20.0, 0.2 * net.tau / (1.0 + operator_norm(net.w)));
}

namespace {

constexpr double kBoxTolerance = 1e-9;

void check_in_box(const NetworkSpec& net, std::span<const double> x) {
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!(x[i] >= -kBoxTolerance && x[i] <= net.m[i] + kBoxTolerance))
      throw InvalidArgument("initial state x0[" + std::to_string(i) + "] outside [0, m]");
}

// Scratch buffers for one RK4 integration.
class Stepper {
 public:
  Stepper(const NetworkSpec& net, const InputSignal& input)
      : net_(net), in_(input), k_(kernels::active()), n_(net.size()), d_(n_), k1_(n_), k2_(n_),
        k3_(n_), k4_(n_), y_(n_) {}

  void field(double t, const double* x, double* out) {
    const double* d;
    if (in_.is_constant()) {
      d = in_.constant_value().data();
    } else {
      in_.evaluate(t, {x, n_}, d_);
      d = d_.data();
    }
    k_.lt_field(net_.w.data().data(), n_, x, d, net_.m.data(), 1.0 / net_.tau, out);
  }

  // Advances x in place by one step; returns the largest clamp distance.
  double step(double t, double h, Vector& x) {
    field(t, x.data(), k1_.data());
    k_.axpy(n_, 0.5 * h, k1_.data(), x.data(), y_.data());
    field(t + 0.5 * h, y_.data(), k2_.data());
    k_.axpy(n_, 0.5 * h, k2_.data(), x.data(), y_.data());
    field(t + 0.5 * h, y_.data(), k3_.data());
    k_.axpy(n_, h, k3_.data(), x.data(), y_.data());
    field(t + h, y_.data(), k4_.data());
    k_.rk4_combine(n_, h / 6.0, x.data(), k1_.data(), k2_.data(), k3_.data(), k4_.data(),
                   x.data());
    double worst = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      if (x[i] < 0.0) {
        worst = std::max(worst, -x[i]);
        x[i] = 0.0;
      } else if (x[i] > net_.m[i]) {
        worst = std::max(worst, x[i] - net_.m[i]);
        x[i] = net_.m[i];
      }
    }
    return worst;
  }

 private:
  const NetworkSpec& net_;
  const InputSignal& in_;
  const kernels::KernelTable& k_;
  std::size_t n_;
  Vector d_, k1_, k2_, k3_, k4_, y_;
};

}  // namespace

Trajectory simulate(const NetworkSpec& net, const InputSignal& d, std::span<const double> x0,
                    const SimulationOptions& opt) {
  const std::size_t n = net.size();
  if (x0.size() != n || d.size() != n)
    throw InvalidArgument("simulate: dimension mismatch with network size " + std::to_string(n));
  if (!(opt.horizon >= 0)) throw InvalidArgument("simulate: horizon must be nonnegative");
  check_in_box(net, x0);
  const double h = opt.h > 0 ? opt.h : default_step(net);
  if (h > net.tau / 20.0 * (1 + 1e-12))
    throw StepSizeError("step " + std::to_string(h) + " exceeds tau/20");
  const std::size_t every = std::max<std::size_t>(1, opt.record_every);
  const auto steps = static_cast<std::size_t>(std::ceil(opt.horizon / h - 1e-9));

  Trajectory tr;
  tr.h = h;
  tr.input = d.description();
  Vector x(x0.begin(), x0.end());
  for (std::size_t i = 0; i < n; ++i) x[i] = std::clamp(x[i], 0.0, net.m[i]);
  tr.t.reserve(steps / every + 2);
  tr.x.reserve(steps / every + 2);
  tr.t.push_back(0.0);
  tr.x.push_back(x);

  Stepper stepper(net, d);
  for (std::size_t k = 1; k <= steps; ++k) {
    const double t = static_cast<double>(k - 1) * h;
    const double clamp = stepper.step(t, h, x);
    if (clamp > kBoxTolerance)
      throw StepSizeError("integration left the box by " + std::to_string(clamp));
    const bool diverged = norm_inf(x) > opt.divergence_bound;
    if (k % every == 0 || k == steps || diverged) {
      tr.t.push_back(static_cast<double>(k) * h);
      tr.x.push_back(x);
    }
    if (diverged) {
      tr.diverged = true;
      break;
    }
  }
  return tr;
}

// ---------------------------------------------------------------- comparison

ComparisonResult comparison_check(const NetworkSpec& net, const InputSignal& d,
                                  std::span<const double> x0, double horizon, double tol) {
  if (!net.m.all_infinite())
    throw InvalidArgument("comparison_check requires every cap to be infinite");
  NetworkSpec exc = net;
  exc.w = positive_part(net.w);
  SimulationOptions opt;
  opt.horizon = horizon;
  opt.h = std::min(default_step(net), default_step(exc));
  ComparisonResult r;
  r.original = simulate(net, d, x0, opt);
  r.excitatory = simulate(exc, d, x0, opt);
  const std::size_t len = std::min(r.original.x.size(), r.excitatory.x.size());
  r.max_excess = -INFINITY;
  for (std::size_t k = 0; k < len; ++k)
    for (std::size_t i = 0; i < net.size(); ++i)
      r.max_excess = std::max(r.max_excess, r.original.x[k][i] - r.excitatory.x[k][i]);
  r.holds = r.max_excess <= tol && r.original.x.size() == r.excitatory.x.size();
  return r;
}

// ---------------------------------------------------------------- boundedness

std::optional<Vector> monotone_bound(const Matrix& w, std::span<const double> dbar, double tol) {
  const Matrix wp = positive_part(w);
  if (spectral_radius(wp) >= 1.0 - tol) return std::nullopt;
  Vector dp(dbar.begin(), dbar.end());
  for (double& v : dp) v = std::max(v, 0.0);
  return solve(Matrix::identity(w.rows()) - wp, dp);
}

BoundednessReport boundedness_probe(const NetworkSpec& net, std::span<const double> dbar,
                                    const BoundednessOptions& opt) {
  const std::size_t n = net.size();
  if (dbar.size() != n) throw InvalidArgument("boundedness_probe: dimension mismatch");
  BoundednessReport r;
  r.excitatory_radius = spectral_radius(positive_part(net.w));
  if (auto nu = monotone_bound(net.w, dbar, opt.tol)) {
    for (std::size_t i = 0; i < n; ++i) (*nu)[i] = std::min((*nu)[i], net.m[i]);
    r.status = Boundedness::Certified;
    r.nu = std::move(nu);
    return r;
  }
  const bool all_finite = std::all_of(net.m.values().begin(), net.m.values().end(),
                                      [](double c) { return std::isfinite(c); });
  if (!all_finite) {
    SimulationOptions so;
    so.horizon = opt.horizon * net.tau;
    so.divergence_bound = opt.escape_bound;
    const InputSignal input = InputSignal::constant(Vector(dbar.begin(), dbar.end()));
    for (std::size_t trial = 0; trial < opt.trials; ++trial) {
      Philox4x32 g(opt.seed, 0, static_cast<std::uint32_t>(trial));
      Vector x0(n);
      for (std::size_t i = 0; i < n; ++i) x0[i] = std::min(uniform01(g), net.m[i]);
      const Trajectory tr = simulate(net, input, x0, so);
      for (const Vector& x : tr.x) r.max_state = std::max(r.max_state, norm_inf(x));
      if (tr.diverged) r.probe_escaped = true;
    }
    r.probe_escaped = r.probe_escaped || r.max_state > opt.escape_bound;
    return r;
  }
  r.status = Boundedness::Certified;
  r.nu = net.m.values();
  return r;
}

// ---------------------------------------------------------------- GES probe

std::vector<Cluster> cluster_points(const std::vector<Vector>& points, double radius) {
  const std::size_t n = points.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (max_abs_diff(points[i], points[j]) <= radius) parent[find(i)] = find(j);

  std::vector<Cluster> out;
  std::vector<std::size_t> slot(n, SIZE_MAX);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t root = find(i);
    if (slot[root] == SIZE_MAX) {
      slot[root] = out.size();
      out.push_back({Vector(points[i].size(), 0.0), {}});
    }
    out[slot[root]].members.push_back(i);
  }
  for (Cluster& c : out) {
    for (std::size_t i : c.members)
      for (std::size_t k = 0; k < c.center.size(); ++k) c.center[k] += points[i][k];
    for (double& v : c.center) v /= static_cast<double>(c.members.size());
  }
  return out;
}

namespace {

// Least-squares slope of y against t.
std::optional<double> fit_slope(const std::vector<double>& t, const std::vector<double>& y) {
  if (t.size() < 3) return std::nullopt;
  const double n = static_cast<double>(t.size());
  const double mt = std::accumulate(t.begin(), t.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    sxy += (t[i] - mt) * (y[i] - my);
    sxx += (t[i] - mt) * (t[i] - mt);
  }
  if (sxx <= 0) return std::nullopt;
  return sxy / sxx;
}

}  // namespace

StabilityProbe ges_probe(const NetworkSpec& net, std::span<const double> d,
                         const ProbeOptions& opt) {
  const std::size_t n = net.size();
  if (d.size() != n) throw InvalidArgument("ges_probe: dimension mismatch");
  if (opt.trials == 0) throw InvalidArgument("ges_probe: trials must be >= 1");
  const InputSignal input = InputSignal::constant(Vector(d.begin(), d.end()));
  const double h = default_step(net);
  const double chunk = opt.horizon * net.tau;
  const auto chunk_steps = static_cast<std::size_t>(std::ceil(chunk / h));

  StabilityProbe probe;
  probe.initial.resize(opt.trials);
  probe.finals.resize(opt.trials);
  std::vector<Trajectory> runs(opt.trials);
  std::vector<char> settled(opt.trials, 0), diverged(opt.trials, 0);

  parallel_for(
      opt.trials,
      [&](std::size_t trial) {
        Philox4x32 g(opt.seed, 0, static_cast<std::uint32_t>(trial));
        Vector x0(n);
        for (std::size_t i = 0; i < n; ++i)
          x0[i] = uniform01(g) * (net.m.finite(i) ? net.m[i] : opt.box);
        probe.initial[trial] = x0;

        SimulationOptions so;
        so.horizon = chunk;
        so.h = h;
        so.record_every = std::max<std::size_t>(1, chunk_steps / 2000);
        Trajectory all;
        Vector x = x0;
        double t0 = 0.0;
        Vector f(n);
        while (true) {
          Trajectory tr = simulate(net, input, x, so);
          const std::size_t skip = all.x.empty() ? 0 : 1;
          for (std::size_t k = skip; k < tr.x.size(); ++k) {
            all.t.push_back(t0 + tr.t[k]);
            all.x.push_back(std::move(tr.x[k]));
          }
          x = all.x.back();
          t0 = all.t.back();
          if (tr.diverged) {
            diverged[trial] = 1;
            break;
          }
          vector_field(net, d, x, f);
          if (norm_inf(f) < opt.settle_tol * std::max(1.0, norm_inf(x))) {
            settled[trial] = 1;
            break;
          }
          if (t0 >= opt.max_horizon * net.tau - 1e-9) break;
        }
        probe.finals[trial] = x;
        runs[trial] = std::move(all);
      },
      opt.threads);

  probe.any_diverged = std::any_of(diverged.begin(), diverged.end(), [](char c) { return c; });
  probe.clusters = cluster_points(probe.finals, opt.cluster_radius);
  const bool all_settled = std::all_of(settled.begin(), settled.end(), [](char c) { return c; });
  probe.converged = all_settled && !probe.any_diverged && probe.clusters.size() == 1;
  if (!probe.converged) return probe;

  const Vector& xs = probe.clusters.front().center;
  std::vector<double> slopes;
  for (const Trajectory& tr : runs) {
    std::vector<double> ts, ys;
    for (std::size_t k = 0; k < tr.x.size(); ++k) {
      const double dist = max_abs_diff(tr.x[k], xs);
      if (dist >= 1e-8 && dist <= 1e-2) {
        ts.push_back(tr.t[k]);
        ys.push_back(std::log(dist));
      }
    }
    if (auto s = fit_slope(ts, ys)) slopes.push_back(*s);
  }
  if (!slopes.empty()) {
    std::sort(slopes.begin(), slopes.end());
    const std::size_t m = slopes.size();
    probe.rate = m % 2 ? slopes[m / 2] : 0.5 * (slopes[m / 2 - 1] + slopes[m / 2]);
  }
  return probe;
}

}  // namespace ltn
