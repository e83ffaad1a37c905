#include "ltn/inhibition.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "ltn/equilibria.hpp"
#include "ltn/errors.hpp"

namespace ltn {

void BilayerPartition::validate(std::size_t size) const {
  if (irrelevant.dimension() != size || relevant.dimension() != size)
    throw InvalidArgument("partition: index sets do not match the network size");
  if (irrelevant.size() + relevant.size() != size)
    throw InvalidArgument("partition: irrelevant and relevant sets must cover every node");
  for (std::size_t i : irrelevant)
    if (relevant.contains(i)) throw InvalidArgument("partition: node in both sets");
  if (b_minus.rows() != irrelevant.size())
    throw InvalidArgument("partition: B- must have one row per irrelevant node");
  for (double v : b_minus.data())
    if (v > 0) throw InvalidArgument("partition: B- must be nonpositive");
  if (d_relevant.size() != relevant.size())
    throw InvalidArgument("partition: d+ must have one entry per relevant node");
}

Matrix BilayerPartition::b_full() const {
  Matrix b(n(), p());
  for (std::size_t a = 0; a < r(); ++a)
    for (std::size_t j = 0; j < p(); ++j) b(irrelevant[a], j) = b_minus(a, j);
  return b;
}

Vector BilayerPartition::d_full() const {
  Vector d(n(), 0.0);
  for (std::size_t a = 0; a < relevant.size(); ++a) d[relevant[a]] = d_relevant[a];
  return d;
}

BilayerPartition make_partition(std::size_t n, std::vector<std::size_t> irrelevant,
                                Matrix b_minus, Vector d_relevant) {
  std::sort(irrelevant.begin(), irrelevant.end());
  BilayerPartition part;
  part.irrelevant = IndexSet(std::move(irrelevant), n);
  part.relevant = part.irrelevant.complement();
  part.b_minus = std::move(b_minus);
  part.d_relevant = std::move(d_relevant);
  part.validate(n);
  return part;
}

Matrix irrelevant_rows(const Matrix& w, const BilayerPartition& part) {
  return submatrix(w, part.irrelevant, IndexSet::all(w.cols()));
}

Matrix relevant_rows(const Matrix& w, const BilayerPartition& part) {
  return submatrix(w, part.relevant, IndexSet::all(w.cols()));
}

Matrix relevant_block(const Matrix& w, const BilayerPartition& part) {
  return principal_submatrix(w, part.relevant);
}

RangeReport check_range_condition(const NetworkSpec& net, const BilayerPartition& part) {
  part.validate(net.size());
  RangeReport rep;
  rep.p = part.p();
  rep.r = part.r();
  rep.generic = rep.p >= rep.r;
  if (rep.r == 0) {
    rep.holds = true;
    return rep;
  }
  const LeastSquares ls = least_squares(part.b_minus, irrelevant_rows(net.w, part));
  rep.residual = ls.residual;
  rep.rank_b = ls.rank;
  rep.holds = ls.residual <= kRangeTolerance;
  return rep;
}

namespace {

void require_range(const NetworkSpec& net, const BilayerPartition& part) {
  const RangeReport rep = check_range_condition(net, part);
  if (!rep.holds)
    throw RangeConditionError("range([W-- W-+]) is not contained in range(B-): residual " +
                              std::to_string(rep.residual));
}

}  // namespace

InhibitionDesign design_feedforward(const NetworkSpec& net, const BilayerPartition& part,
                                   double tol) {
  require_range(net, part);
  InhibitionDesign des;
  des.mode = InhibitionMode::Feedforward;
  const Vector d = part.d_full();
  if (auto nu = monotone_bound(net.w, d, tol)) {
    // Trajectories also stay below the caps.
    for (std::size_t i = 0; i < nu->size(); ++i) (*nu)[i] = std::min((*nu)[i], net.m[i]);
    des.nu = std::move(*nu);
  } else {
    const auto& caps = net.m.values();
    if (std::find(caps.begin(), caps.end(), kInfiniteCap) != caps.end())
      throw AssumptionViolated("no trajectory bound: rho(max(W, 0)) >= 1 and some cap is infinite");
    des.nu = caps;
  }
  if (part.r() == 0) {
    des.u_bar.assign(part.p(), 0.0);
    return des;
  }
  const Matrix excit = positive_part(irrelevant_rows(net.w, part));
  const Vector drive = excit * des.nu;
  Matrix rhs(part.r(), 1);
  for (std::size_t a = 0; a < part.r(); ++a) rhs(a, 0) = -drive[a];
  const LeastSquares ls = least_squares(part.b_minus, rhs);
  des.residual = ls.residual;
  des.u_bar.resize(part.p());
  for (std::size_t j = 0; j < part.p(); ++j) des.u_bar[j] = std::max(ls.x(j, 0), 0.0);
  return des;
}

Matrix closed_loop_matrix(const NetworkSpec& net, const BilayerPartition& part, const Matrix& k) {
  part.validate(net.size());
  if (k.rows() != part.p() || k.cols() != net.size())
    throw InvalidArgument("gain K must be p x n");
  return net.w + part.b_full() * k;
}

InhibitionDesign design_feedback_gain(const NetworkSpec& net, const BilayerPartition& part,
                                      const FeedbackOptions& opt) {
  require_range(net, part);
  InhibitionDesign des;
  des.mode = InhibitionMode::Feedback;
  des.rectified = opt.rectified;
  if (part.r() == 0) {
    des.k_bar = Matrix(part.p(), net.size());
  } else {
    const LeastSquares ls = least_squares(part.b_minus, irrelevant_rows(net.w, part) * -1.0);
    des.k_bar = ls.x;
    des.residual = ls.residual;
  }
  des.closed_loop = closed_loop_matrix(net, part, des.k_bar);
  if (opt.certify && net.size() <= opt.classes.lyapunov_limit)
    des.certificate = certify(des.closed_loop, opt.classes);
  return des;
}

bool EquivalenceReport::consistent() const {
  return std::none_of(items.begin(), items.end(), [](const auto& i) { return i.discrepancy; });
}

EquivalenceReport verify_equivalences(const NetworkSpec& net, const BilayerPartition& part,
                                      const Matrix& k, const MatClassOptions& opt) {
  const Matrix cl = closed_loop_matrix(net, part, k);
  const ClassCertificate c = certify(cl, opt);
  const Matrix sub = relevant_block(net.w, part);
  const std::size_t s = sub.rows();
  const Matrix id = Matrix::identity(s);

  EquivalenceReport rep;
  rep.items[0] = {"I - W in P", c.p.verdict, is_p_matrix(id - sub, opt).verdict, false};
  rep.items[1] = {"-I + W in H", c.h.verdict, is_totally_hurwitz(sub - id, opt).verdict, false};
  rep.items[2] = {"W in L", c.l.verdict, is_totally_l_stable(sub, opt).verdict, false};
  rep.items[3] = {"rho(|W|) < 1", c.abs_schur.verdict, is_absolutely_schur(sub, opt).verdict, false};
  rep.items[4] = {"||W|| < 1", c.norm.verdict,
                  strictly_less(operator_norm(relevant_rows(net.w, part)), 1.0, opt.tol), false};
  for (auto& item : rep.items)
    item.discrepancy = item.closed_loop != Verdict::Marginal &&
                       item.subnetwork != Verdict::Marginal && item.closed_loop != item.subnetwork;
  return rep;
}

EquivalenceReport verify_equivalences(const NetworkSpec& net, const BilayerPartition& part,
                                      const InhibitionDesign& design, const MatClassOptions& opt) {
  if (design.mode != InhibitionMode::Feedback)
    throw InvalidArgument("verify_equivalences needs a feedback design");
  return verify_equivalences(net, part, design.k_bar, opt);
}

Vector rectified_feedback_input(const InhibitionDesign& design, std::span<const double> x) {
  if (design.mode != InhibitionMode::Feedback)
    throw InvalidArgument("rectified_feedback_input needs a feedback design");
  Vector u = design.k_bar * x;
  for (double& v : u) v = std::max(v, 0.0);
  return u;
}

NetworkSpec relevant_subnetwork(const NetworkSpec& net, const BilayerPartition& part) {
  part.validate(net.size());
  std::vector<double> caps;
  for (std::size_t i : part.relevant) caps.push_back(net.m[i]);
  return make_network(relevant_block(net.w, part), CapVector(std::move(caps)), net.tau);
}

ClosedLoopResult closed_loop_simulate(const NetworkSpec& net, const BilayerPartition& part,
                                      const InhibitionDesign& design, std::span<const double> x0,
                                      const ClosedLoopOptions& opt) {
  part.validate(net.size());
  const std::size_t n = net.size();
  const Matrix b = part.b_full();
  const Vector dt = part.d_full();

  std::function<Vector(std::span<const double>)> control;
  if (design.mode == InhibitionMode::Feedforward) {
    if (design.u_bar.size() != part.p()) throw InvalidArgument("design: u_bar has wrong size");
    if (opt.u_scale < 1.0) throw InvalidArgument("feedforward input must be at least u_bar");
    Vector u = design.u_bar;
    for (double& v : u) v *= opt.u_scale;
    control = [u](std::span<const double>) { return u; };
  } else {
    if (design.k_bar.rows() != part.p() || design.k_bar.cols() != n)
      throw InvalidArgument("design: gain has wrong shape");
    const bool rect = opt.rectified.value_or(design.rectified);
    control = [&design, rect](std::span<const double> x) {
      Vector u = design.k_bar * x;
      if (rect)
        for (double& v : u) v = std::max(v, 0.0);
      return u;
    };
  }
  const InputSignal input = InputSignal::feedback(
      n,
      [&](double, std::span<const double> x, std::span<double> d) {
        const Vector u = control(x);
        const Vector bu = b * u;
        for (std::size_t i = 0; i < n; ++i) d[i] = bu[i] + dt[i];
      },
      design.mode == InhibitionMode::Feedforward ? "feedforward B u + d~" : "feedback B K x + d~");

  SimulationOptions so;
  so.horizon = opt.horizon;
  so.h = opt.h;
  ClosedLoopResult res;
  res.trajectory = simulate(net, input, x0, so);
  const Trajectory& tr = res.trajectory;
  for (const Vector& x : tr.x) res.u.push_back(control(x));

  auto irrelevant_norm = [&](const Vector& x) {
    double s = 0;
    for (std::size_t i : part.irrelevant) s += x[i] * x[i];
    return std::sqrt(s);
  };
  const double start = irrelevant_norm(tr.x.front());
  std::vector<double> ts, logs;
  for (std::size_t k = 0; k < tr.x.size(); ++k) {
    const double v = irrelevant_norm(tr.x[k]);
    res.max_decay_excess =
        std::max(res.max_decay_excess, v - start * std::exp(-tr.t[k] / net.tau));
    if (v > 1e-12) {
      ts.push_back(tr.t[k]);
      logs.push_back(std::log(v));
    }
  }
  res.final_irrelevant_norm = irrelevant_norm(tr.final_state());
  if (ts.size() >= 3) {
    const double mt = std::accumulate(ts.begin(), ts.end(), 0.0) / static_cast<double>(ts.size());
    const double ml = std::accumulate(logs.begin(), logs.end(), 0.0) / static_cast<double>(ts.size());
    double sxy = 0, sxx = 0;
    for (std::size_t k = 0; k < ts.size(); ++k) {
      sxy += (ts[k] - mt) * (logs[k] - ml);
      sxx += (ts[k] - mt) * (ts[k] - mt);
    }
    if (sxx > 0) res.irrelevant_rate = sxy / sxx;
  }

  for (std::size_t i : part.relevant) res.final_relevant.push_back(tr.final_state()[i]);
  try {
    const auto set = enumerate_equilibria(relevant_subnetwork(net, part), part.d_relevant);
    if (set.equilibria.size() == 1) {
      res.isolated_equilibrium = set.equilibria.front().state;
      res.relevant_gap = max_abs_diff(res.final_relevant, *res.isolated_equilibrium);
    }
  } catch (const LimitExceeded&) {
  }
  return res;
}

}  // namespace ltn
