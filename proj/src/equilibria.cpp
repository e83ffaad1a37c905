#include "ltn/equilibria.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "ltn/errors.hpp"
#include "ltn/kernels.hpp"
#include "ltn/parallel.hpp"
#include "ltn/rng.hpp"

namespace ltn {

const char* to_string(Stability s) {
  switch (s) {
    case Stability::Stable: return "stable";
    case Stability::Unstable: return "unstable";
    case Stability::Marginal: return "marginal";
    case Stability::Boundary: return "boundary";
  }
  return "?";
}

namespace {

// Fills validity and stability of a candidate whose state is already set.
void classify(const NetworkSpec& net, std::span<const double> d, Equilibrium& e, double tol) {
  const std::size_t n = net.size();
  Vector v(n);
  kernels::active().matvec(net.w.data().data(), n, n, e.state.data(), v.data());
  bool valid = true, face = false;
  for (std::size_t i = 0; i < n; ++i) {
    const double vi = v[i] + d[i];
    const bool finite = net.m.finite(i);
    switch (e.sigma[i]) {
      case Regime::Inactive: valid = valid && vi <= tol; break;
      case Regime::Linear: valid = valid && vi >= -tol && (!finite || vi <= net.m[i] + tol); break;
      case Regime::Saturated: valid = valid && vi >= net.m[i] - tol; break;
    }
    if (std::abs(vi) <= tol || (finite && std::abs(vi - net.m[i]) <= tol)) face = true;
  }
  e.valid = valid;
  if (valid && face) e.stability = Stability::Boundary;
  else if (e.max_real < -tol) e.stability = Stability::Stable;
  else if (e.max_real > tol) e.stability = Stability::Unstable;
  else e.stability = Stability::Marginal;
}

void require_unbounded(const NetworkSpec& net, const char* what) {
  if (!net.m.all_infinite())
    throw InvalidArgument(std::string(what) + " requires every cap to be infinite");
}

void require_size(const NetworkSpec& net, std::span<const double> d) {
  if (d.size() != net.size()) throw InvalidArgument("input d has wrong dimension");
}

std::uint64_t mask_of(const SwitchingIndex& s) {
  std::uint64_t mask = 0;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s[i] == Regime::Linear) mask |= std::uint64_t{1} << i;
  return mask;
}

NetworkSpec uncapped(const NetworkSpec& net) {
  NetworkSpec u = net;
  u.m = CapVector::unbounded(net.size());
  return u;
}

Vector gaussian_vector(Philox4x32& g, std::size_t n) {
  Vector v(n);
  for (double& x : v) x = normal01(g);
  return v;
}

}  // namespace

Equilibrium candidate(const NetworkSpec& net, std::span<const double> d,
                      const SwitchingIndex& sigma, double tol) {
  require_size(net, d);
  const ModeSystem ms = mode_system(net, d, sigma);
  // I - Sigma_l W = -A_sigma
  const Matrix a = ms.a * -1.0;
  const LU lu(a);
  if (lu.singular(tol))
    throw AssumptionViolated("I - Sigma_l W is singular for sigma = " + sigma.str());
  Equilibrium e;
  e.sigma = sigma;
  e.state = lu.solve(ms.b);
  double hi = -INFINITY, lo = INFINITY;
  for (const auto& z : eigenvalues(ms.a)) {
    hi = std::max(hi, z.real());
    lo = std::min(lo, z.real());
  }
  e.max_real = hi;
  e.min_real = lo;
  classify(net, d, e, tol);
  return e;
}

// ---------------------------------------------------------------- solver

RegionSolver::RegionSolver(const NetworkSpec& net, const EquilibriumOptions& opt)
    : net_(net), opt_(opt) {
  const std::size_t n = net.size();
  const bool bounded = net.m.any_finite();
  const std::size_t limit = bounded ? opt.bounded_limit : opt.unbounded_limit;
  if (n > limit)
    throw LimitExceeded(bounded ? "equilibrium enumeration (finite caps)"
                                : "equilibrium enumeration",
                        n, limit);
  regions_ = all_switching_indices(net.m);
  modes_.resize(std::size_t{1} << n);
  parallel_for(
      modes_.size(),
      [&](std::size_t mask) {
        Mode& md = modes_[mask];
        for (std::size_t i = 0; i < n; ++i)
          ((mask >> i) & 1 ? md.linear : md.rest).push_back(i);
        if (md.linear.empty()) return;
        const IndexSet l(md.linear, n);
        Matrix sub = principal_submatrix(net.w, l);
        const Matrix b = Matrix::identity(l.size()) - sub;
        const LU lu(b);
        if (lu.singular(opt.tol)) {
          md.singular = true;
          return;
        }
        md.inverse = lu.inverse();
        double hi = -INFINITY, lo = INFINITY;
        for (const auto& z : eigenvalues(b * -1.0)) {
          hi = std::max(hi, z.real());
          lo = std::min(lo, z.real());
        }
        if (!md.rest.empty()) {
          hi = std::max(hi, -1.0);
          lo = std::min(lo, -1.0);
        }
        md.max_real = hi;
        md.min_real = lo;
      },
      opt.threads);
  assumption_marginal_ =
      std::any_of(modes_.begin(), modes_.end(), [](const Mode& m) { return m.singular; });
}

std::uint64_t RegionSolver::linear_mask(const SwitchingIndex& s) const { return mask_of(s); }

std::optional<Equilibrium> RegionSolver::solve(std::size_t k, std::span<const double> d) const {
  require_size(net_, d);
  const SwitchingIndex& sigma = regions_[k];
  const Mode& md = modes_[linear_mask(sigma)];
  if (md.singular) return std::nullopt;
  const std::size_t n = net_.size();
  Equilibrium e;
  e.sigma = sigma;
  e.state.assign(n, 0.0);
  for (std::size_t j : md.rest)
    if (sigma[j] == Regime::Saturated) e.state[j] = net_.m[j];
  const std::size_t nl = md.linear.size();
  Vector rhs(nl);
  for (std::size_t a = 0; a < nl; ++a) {
    const std::size_t i = md.linear[a];
    double s = d[i];
    for (std::size_t j : md.rest) s += net_.w(i, j) * e.state[j];
    rhs[a] = s;
  }
  for (std::size_t a = 0; a < nl; ++a) {
    double s = 0;
    for (std::size_t b = 0; b < nl; ++b) s += md.inverse(a, b) * rhs[b];
    e.state[md.linear[a]] = s;
  }
  e.max_real = md.max_real;
  e.min_real = md.min_real;
  classify(net_, d, e, opt_.tol);
  return e;
}

// ---------------------------------------------------------------- enumeration

namespace {

// (2 Sigma_l - I)(W x + d): equals M_sigma d for a binary sigma.
Vector signed_drive(const NetworkSpec& net, std::span<const double> d, const Equilibrium& e) {
  Vector v = net.w * e.state;
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] += d[i];
    if (e.sigma[i] != Regime::Linear) v[i] = -v[i];
  }
  return v;
}

EquilibriumSet collect(const RegionSolver& solver, std::span<const double> d,
                       const std::function<bool(const SwitchingIndex&)>& keep) {
  const NetworkSpec& net = solver.network();
  const std::size_t count = solver.region_count();
  std::vector<std::optional<Equilibrium>> found(count);
  auto work = [&](std::size_t k) {
    if (keep && !keep(solver.regions()[k])) return;
    auto e = solver.solve(k, d);
    if (e && e->valid) found[k] = std::move(e);
  };
  if (count >= 4096) parallel_for(count, work);
  else
    for (std::size_t k = 0; k < count; ++k) work(k);

  EquilibriumSet out;
  out.regions = count;
  out.assumption_marginal = solver.assumption_marginal();
  const bool unbounded = net.m.all_infinite();
  std::vector<Vector> drives;
  for (std::size_t k = 0; k < count; ++k) {
    if (!found[k]) continue;
    Equilibrium& e = *found[k];
    const double scale = std::max(1.0, norm_inf(e.state));
    Vector md;
    if (unbounded) md = signed_drive(net, d, e);
    bool placed = false;
    for (std::size_t g = 0; g < out.equilibria.size() && !placed; ++g) {
      const bool same_state = max_abs_diff(out.equilibria[g].state, e.state) <= 1e-9 * scale;
      if (unbounded) {
        const bool same_md = max_abs_diff(drives[g], md) <= 1e-9 * scale;
        if (same_state != same_md) out.lemma_consistent = false;
      }
      if (same_state) {
        out.duplicate_groups[g].push_back(e.sigma);
        placed = true;
      }
    }
    if (!placed) {
      out.duplicate_groups.push_back({e.sigma});
      out.equilibria.push_back(std::move(e));
      if (unbounded) drives.push_back(std::move(md));
    }
  }
  // A point shared by several regions lies on a face.
  for (std::size_t g = 0; g < out.equilibria.size(); ++g)
    if (out.duplicate_groups[g].size() > 1) out.equilibria[g].stability = Stability::Boundary;
  return out;
}

}  // namespace

EquilibriumSet enumerate_equilibria(const RegionSolver& solver, std::span<const double> d) {
  return collect(solver, d, nullptr);
}

EquilibriumSet enumerate_equilibria(const NetworkSpec& net, std::span<const double> d,
                                    const EquilibriumOptions& opt) {
  require_size(net, d);
  return enumerate_equilibria(RegionSolver(net, opt), d);
}

Matrix m_sigma(const NetworkSpec& net, const SwitchingIndex& sigma) {
  require_unbounded(net, "m_sigma");
  const std::size_t n = net.size();
  if (sigma.size() != n) throw InvalidArgument("m_sigma: switching index size mismatch");
  Matrix a = Matrix::identity(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (sigma[i] == Regime::Saturated)
      throw InvalidArgument("m_sigma: saturated regime in the unbounded case");
    if (sigma[i] == Regime::Linear)
      for (std::size_t r = 0; r < n; ++r) a(r, i) -= net.w(r, i);
  }
  const LU lu(a);
  if (lu.singular()) throw AssumptionViolated("I - W Sigma_l is singular for sigma = " + sigma.str());
  Matrix m = lu.inverse();
  for (std::size_t i = 0; i < n; ++i)
    if (sigma[i] != Regime::Linear)
      for (std::size_t j = 0; j < n; ++j) m(i, j) = -m(i, j);
  return m;
}

// ---------------------------------------------------------------- EUE

EueCertificate eue_certificate(const NetworkSpec& net, std::size_t spot_checks,
                               std::uint64_t seed, const EquilibriumOptions& opt) {
  const std::size_t n = net.size();
  EueCertificate c;
  MatClassOptions mo;
  mo.tol = opt.tol;
  c.p = is_p_matrix(Matrix::identity(n) - net.w, mo);
  if (c.p.verdict != Verdict::True) return c;
  const RegionSolver solver(net, opt);
  for (std::size_t k = 0; k < spot_checks; ++k) {
    Philox4x32 g(seed, 1, static_cast<std::uint32_t>(k));
    const Vector d = gaussian_vector(g, n);
    const auto set = enumerate_equilibria(solver, d);
    ++c.spot_checks;
    if (set.equilibria.size() != 1) c.spot_checks_consistent = false;
  }
  return c;
}

// ---------------------------------------------------------------- direction search

namespace {

class MuEvaluator {
 public:
  explicit MuEvaluator(const NetworkSpec& net) : n_(net.size()) {
    for (const SwitchingIndex& s : binary_switching_indices(n_)) {
      try {
        ms_.push_back(m_sigma(net, s));
        sigmas_.push_back(s);
      } catch (const AssumptionViolated&) {
      }
    }
    buf_.resize(n_);
  }

  struct Result {
    double mu1 = -INFINITY, mu2 = -INFINITY;
    std::size_t first = SIZE_MAX, second = SIZE_MAX;
  };

  // d need not be normalized; the values are for d / ||d||.
  Result operator()(std::span<const double> d) {
    const double nrm = norm2(d);
    Result r;
    if (nrm == 0) return r;
    const auto& k = kernels::active();
    for (std::size_t s = 0; s < ms_.size(); ++s) {
      k.matvec(ms_[s].data().data(), n_, n_, d.data(), buf_.data());
      const double mu = k.min_element(n_, buf_.data()) / nrm;
      if (mu > r.mu1) {
        r.mu2 = r.mu1;
        r.second = r.first;
        r.mu1 = mu;
        r.first = s;
      } else if (mu > r.mu2) {
        r.mu2 = mu;
        r.second = s;
      }
    }
    ++evaluations;
    return r;
  }

  const SwitchingIndex& sigma(std::size_t s) const { return sigmas_[s]; }
  std::size_t evaluations = 0;

 private:
  std::size_t n_;
  std::vector<Matrix> ms_;
  std::vector<SwitchingIndex> sigmas_;
  Vector buf_;
};

// Minimizes f from x0 with a right-angled initial simplex.
Vector nelder_mead(const std::function<double(const Vector&)>& f, Vector x0, double step,
                   std::size_t iterations) {
  const std::size_t n = x0.size();
  std::vector<Vector> pts(n + 1, x0);
  std::vector<double> val(n + 1);
  for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += step;
  for (std::size_t i = 0; i <= n; ++i) val[i] = f(pts[i]);
  std::vector<std::size_t> order(n + 1);
  for (std::size_t it = 0; it < iterations; ++it) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return val[a] < val[b]; });
    const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];
    if (std::abs(val[worst] - val[best]) < 1e-14) break;
    Vector c(n, 0.0);
    for (std::size_t i = 0; i <= n; ++i)
      if (i != worst)
        for (std::size_t j = 0; j < n; ++j) c[j] += pts[i][j] / static_cast<double>(n);
    auto along = [&](double t) {
      Vector p(n);
      for (std::size_t j = 0; j < n; ++j) p[j] = c[j] + t * (pts[worst][j] - c[j]);
      return p;
    };
    const Vector xr = along(-1.0);
    const double fr = f(xr);
    if (fr < val[best]) {
      const Vector xe = along(-2.0);
      const double fe = f(xe);
      if (fe < fr) {
        pts[worst] = xe;
        val[worst] = fe;
      } else {
        pts[worst] = xr;
        val[worst] = fr;
      }
    } else if (fr < val[second]) {
      pts[worst] = xr;
      val[worst] = fr;
    } else {
      const Vector xc = fr < val[worst] ? along(-0.5) : along(0.5);
      const double fc = f(xc);
      if (fc < std::min(fr, val[worst])) {
        pts[worst] = xc;
        val[worst] = fc;
      } else {
        for (std::size_t i = 0; i <= n; ++i) {
          if (i == best) continue;
          for (std::size_t j = 0; j < n; ++j) pts[i][j] = pts[best][j] + 0.5 * (pts[i][j] - pts[best][j]);
          val[i] = f(pts[i]);
        }
      }
    }
  }
  const auto it = std::min_element(val.begin(), val.end());
  return pts[static_cast<std::size_t>(it - val.begin())];
}

Vector normalized(Vector v) {
  const double s = norm2(v);
  for (double& x : v) x /= s;
  return v;
}

}  // namespace

std::pair<double, double> mu_pair(const NetworkSpec& net, std::span<const double> d) {
  require_size(net, d);
  if (norm2(d) == 0.0) throw InvalidArgument("mu_pair: d = 0 is degenerate (the origin is the only equilibrium)");
  MuEvaluator eval(uncapped(net));
  const auto r = eval(d);
  const double nrm = norm2(d);
  return {r.mu1 * nrm, r.mu2 * nrm};
}

DirectionSearchResult direction_search(const NetworkSpec& net, const DirectionOptions& opt) {
  const std::size_t n = net.size();
  if (n > opt.limit) throw LimitExceeded("direction search", n, opt.limit);
  const NetworkSpec free = uncapped(net);
  MuEvaluator eval(free);
  DirectionSearchResult res;

  auto record = [&](const Vector& d, const MuEvaluator::Result& r) {
    if (r.second == SIZE_MAX) return;
    const double prod = r.mu1 * r.mu2;
    if (prod > res.best_product) {
      res.best_product = prod;
      res.best_product_direction = normalized(d);
    }
    if (r.mu2 > res.best_mu2) {
      res.best_mu2 = r.mu2;
      res.best_mu2_direction = normalized(d);
    }
  };

  // Keep the top starting points by mu2.
  std::vector<std::pair<double, Vector>> top;
  for (std::size_t k = 0; k < opt.samples; ++k) {
    Philox4x32 g(opt.seed, 2, static_cast<std::uint32_t>(k));
    const Vector d = normalized(gaussian_vector(g, n));
    const auto r = eval(d);
    record(d, r);
    if (r.second == SIZE_MAX) continue;
    if (top.size() < opt.refine_starts || r.mu2 > top.back().first) {
      top.emplace_back(r.mu2, d);
      std::sort(top.begin(), top.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
      if (top.size() > opt.refine_starts) top.pop_back();
    }
  }
  for (const auto& [mu2, start] : top) {
    if (res.best_mu2 > opt.tol) break;
    auto objective = [&](const Vector& d) {
      const auto r = eval(d);
      record(d, r);
      return r.second == SIZE_MAX ? INFINITY : -r.mu2;
    };
    nelder_mead(objective, start, 0.1, opt.refine_iterations);
  }
  res.evaluations = eval.evaluations;

  if (res.best_mu2 > opt.tol) {
    const auto r = eval(res.best_mu2_direction);
    MultiplicityWitness w;
    w.d = res.best_mu2_direction;
    w.first = eval.sigma(r.first);
    w.second = eval.sigma(r.second);
    w.first_state = candidate(free, w.d, w.first, opt.tol).state;
    w.second_state = candidate(free, w.d, w.second, opt.tol).state;
    res.witness = std::move(w);
  }
  return res;
}

std::optional<MultiplicityWitness> find_multistable_input(const NetworkSpec& net,
                                                          const DirectionOptions& opt) {
  const auto res = direction_search(net, opt);
  if (!res.witness) return std::nullopt;
  MultiplicityWitness w = *res.witness;
  // Positive homogeneity: scaling d scales both equilibria and their net
  // inputs, so a small enough multiple keeps every node below its cap.
  double scale = 1.0;
  const Vector y1 = net.w * w.first_state, y2 = net.w * w.second_state;
  for (std::size_t i = 0; i < net.size(); ++i) {
    if (!net.m.finite(i)) continue;
    const double peak = std::max({y1[i] + w.d[i], y2[i] + w.d[i], 0.0});
    if (peak > 0) scale = std::min(scale, 0.5 * net.m[i] / peak);
  }
  for (double& v : w.d) v *= scale;
  for (double& v : w.first_state) v *= scale;
  for (double& v : w.second_state) v *= scale;

  EquilibriumOptions eo;
  eo.tol = opt.tol;
  const auto set = enumerate_equilibria(net, w.d, eo);
  if (set.equilibria.size() < 2) return std::nullopt;
  return w;
}

// ---------------------------------------------------------------- pivot pairs

PivotPairReport pivot_pair_check(const NetworkSpec& net, std::size_t limit,
                                 const MatClassOptions& opt) {
  require_unbounded(net, "pivot_pair_check");
  const std::size_t n = net.size();
  if (n > limit) throw LimitExceeded("pivot pair check", n, limit);
  const auto sigmas = binary_switching_indices(n);
  std::vector<std::optional<Matrix>> ms(sigmas.size()), inv(sigmas.size());
  PivotPairReport rep;
  for (std::size_t s = 0; s < sigmas.size(); ++s) {
    try {
      ms[s] = m_sigma(net, sigmas[s]);
      inv[s] = inverse(*ms[s]);
    } catch (const Error&) {
      rep.verdict = Verdict::Marginal;
    }
  }
  for (std::size_t a = 0; a < sigmas.size(); ++a) {
    for (std::size_t b = a + 1; b < sigmas.size(); ++b) {
      if (!ms[a] || !inv[b]) continue;
      ++rep.pairs;
      // M_a M_b^{-1} is the identity on the nodes where the regions agree;
      // only the block on the differing nodes carries information.
      std::vector<std::size_t> differ;
      for (std::size_t i = 0; i < n; ++i)
        if (sigmas[a][i] != sigmas[b][i]) differ.push_back(i);
      const Matrix c = principal_submatrix(*ms[a] * *inv[b], IndexSet(differ, n)) * -1.0;
      const Verdict v = is_p_matrix(c, opt).verdict;
      if (v == Verdict::False) {
        rep.verdict = Verdict::False;
        rep.failing_pair = std::make_pair(sigmas[a], sigmas[b]);
        return rep;
      }
      if (v == Verdict::Marginal) rep.verdict = Verdict::Marginal;
    }
  }
  return rep;
}

// ---------------------------------------------------------------- partial EUE

PartialEueReport partial_eue(const NetworkSpec& net, const SwitchingIndex& sigma_bar,
                             std::size_t draws, std::uint64_t seed,
                             const EquilibriumOptions& opt) {
  require_unbounded(net, "partial_eue");
  const std::size_t n = net.size();
  if (sigma_bar.size() != n) throw InvalidArgument("partial_eue: switching index size mismatch");
  const IndexSet lbar = sigma_bar.linear_set();
  PartialEueReport rep;
  MatClassOptions mo;
  mo.tol = opt.tol;
  rep.sub_p = is_p_matrix(Matrix::identity(lbar.size()) - principal_submatrix(net.w, lbar), mo);

  const RegionSolver solver(net, opt);
  auto below = [&](const SwitchingIndex& s) { return s.below(sigma_bar); };
  for (std::size_t k = 0; k < draws; ++k) {
    Philox4x32 g(seed, 3, static_cast<std::uint32_t>(k));
    const Vector d = gaussian_vector(g, n);
    const auto set = collect(solver, d, below);
    rep.max_count = std::max(rep.max_count, set.equilibria.size());
    ++rep.draws;
  }
  rep.holds = rep.sub_p.verdict != Verdict::True || rep.max_count <= 1;
  return rep;
}

}  // namespace ltn
