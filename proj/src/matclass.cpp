#include "ltn/matclass.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "ltn/errors.hpp"

namespace ltn {

namespace {

void require_square(const Matrix& a, const char* what) {
  if (!a.square()) throw InvalidArgument(std::string(what) + ": matrix must be square");
}

// Visits every nonempty index set ordered by cardinality, then
// lexicographically. Stops when the visitor returns false.
void for_each_subset(std::size_t n, const std::function<bool(const IndexSet&)>& visit) {
  std::vector<std::size_t> c;
  for (std::size_t k = 1; k <= n; ++k) {
    c.resize(k);
    for (std::size_t i = 0; i < k; ++i) c[i] = i;
    while (true) {
      if (!visit(IndexSet(c, n))) return;
      // Next k-combination of [0, n).
      std::size_t i = k;
      while (i > 0 && c[i - 1] == n - k + i - 1) --i;
      if (i == 0) break;
      ++c[i - 1];
      for (std::size_t j = i; j < k; ++j) c[j] = c[j - 1] + 1;
    }
  }
}

// Shared driver for the P and H sweeps. `value` maps a principal submatrix to
// the decisive quantity and `bad` / `near` classify it.
SubsetCertificate subset_sweep(const Matrix& a, const MatClassOptions& opt, const char* what,
                               const std::function<double(const Matrix&)>& value,
                               bool want_positive) {
  require_square(a, what);
  const std::size_t n = a.rows();
  if (n > opt.exhaustive_limit) throw LimitExceeded(what, n, opt.exhaustive_limit);

  SubsetCertificate cert;
  cert.extreme = want_positive ? INFINITY : -INFINITY;
  if (n == 0) {
    cert.extreme = 0.0;
    return cert;
  }
  std::optional<IndexSet> first_marginal;
  for_each_subset(n, [&](const IndexSet& s) {
    const double v = value(principal_submatrix(a, s));
    // Orient so that "good" means signed > tol.
    const double signed_v = want_positive ? v : -v;
    cert.extreme = want_positive ? std::min(cert.extreme, v) : std::max(cert.extreme, v);
    if (signed_v <= -opt.tol) {
      cert.verdict = Verdict::False;
      cert.witness = s;
      return false;
    }
    if (signed_v <= opt.tol && !first_marginal) first_marginal = s;
    return true;
  });
  if (cert.verdict != Verdict::False && first_marginal) {
    cert.verdict = Verdict::Marginal;
    cert.witness = first_marginal;
  }
  return cert;
}

// Euclidean projection onto {P symmetric : P >= delta I, tr P = 1}.
Matrix project_unit_trace(const Matrix& p, double delta) {
  const std::size_t n = p.rows();
  const SymmetricEigen e = symmetric_eigen(p);
  // Shift theta so that sum max(w_i - theta, delta) = 1; the sum is monotone
  // in theta.
  double lo = e.values.front() - 1.0 - delta, hi = e.values.back() + 1.0;
  auto total = [&](double th) {
    double s = 0;
    for (double w : e.values) s += std::max(w - th, delta);
    return s;
  };
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (total(mid) > 1.0) lo = mid;
    else hi = mid;
  }
  const double th = 0.5 * (lo + hi);
  Matrix out(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const double w = std::max(e.values[k] - th, delta);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) out(i, j) += w * e.vectors(i, k) * e.vectors(j, k);
  }
  return out;
}

struct ModeMax {
  double value = -INFINITY;
  std::uint64_t mask = 0;
  Vector v;
};

// max over 0/1 diagonal S of lambda_max(A^T P + P A), A = -I + S W. The
// product P S W is updated in Gray-code order, one rank-one term per mode.
ModeMax mode_maximum(const Matrix& w, const Matrix& p) {
  const std::size_t n = w.rows();
  Matrix t(n, n);  // P S W
  Matrix s(n, n);
  ModeMax best;
  std::uint64_t mask = 0;
  const std::uint64_t count = std::uint64_t{1} << n;
  for (std::uint64_t g = 0; g < count; ++g) {
    if (g > 0) {
      const std::size_t bit = static_cast<std::size_t>(__builtin_ctzll(g));
      const double sign = (mask >> bit) & 1 ? -1.0 : 1.0;
      mask ^= std::uint64_t{1} << bit;
      for (std::size_t i = 0; i < n; ++i) {
        const double pi = sign * p(i, bit);
        if (pi == 0.0) continue;
        for (std::size_t j = 0; j < n; ++j) t(i, j) += pi * w(bit, j);
      }
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) s(i, j) = -2.0 * p(i, j) + t(i, j) + t(j, i);
    const SymmetricEigen e = symmetric_eigen(s);
    if (e.values.back() > best.value) {
      best.value = e.values.back();
      best.mask = mask;
      best.v = e.vectors.column(n - 1);
    }
  }
  return best;
}

}  // namespace

SubsetCertificate is_p_matrix(const Matrix& a, const MatClassOptions& opt) {
  return subset_sweep(a, opt, "P-matrix test",
                      [](const Matrix& s) { return LU(s).determinant(); }, true);
}

SubsetCertificate is_totally_hurwitz(const Matrix& a, const MatClassOptions& opt) {
  return subset_sweep(a, opt, "totally-Hurwitz test",
                      [](const Matrix& s) { return spectral_abscissa(s); }, false);
}

ScalarCertificate is_absolutely_schur(const Matrix& w, const MatClassOptions& opt) {
  require_square(w, "absolute Schur test");
  const double rho = spectral_radius(abs(w));
  return {strictly_less(rho, 1.0, opt.tol), rho};
}

ScalarCertificate has_small_norm(const Matrix& w, const MatClassOptions& opt) {
  const double nrm = operator_norm(w);
  return {strictly_less(nrm, 1.0, opt.tol), nrm};
}

double lyapunov_objective(const Matrix& w, const Matrix& p) {
  require_square(w, "Lyapunov objective");
  if (p.rows() != w.rows() || !p.square()) throw InvalidArgument("Lyapunov objective: P size");
  if (w.rows() >= 63) throw LimitExceeded("Lyapunov objective", w.rows(), 62);
  return mode_maximum(w, p).value;
}

LyapunovCertificate is_totally_l_stable(const Matrix& w, const MatClassOptions& opt) {
  require_square(w, "totally-L-stable test");
  const std::size_t n = w.rows();
  if (n > opt.lyapunov_limit) throw LimitExceeded("totally-L-stable test", n, opt.lyapunov_limit);
  LyapunovCertificate cert;
  if (n == 0) {
    cert.verdict = Verdict::True;
    cert.p = Matrix();
    return cert;
  }

  // W in L needs every mode Hurwitz; a non-Hurwitz mode settles it exactly.
  MatClassOptions hopt = opt;
  hopt.exhaustive_limit = std::max(opt.exhaustive_limit, n);
  const SubsetCertificate h = is_totally_hurwitz(Matrix::identity(n) * -1.0 + w, hopt);
  if (h.verdict == Verdict::False) {
    cert.verdict = Verdict::False;
    cert.objective = INFINITY;
    return cert;
  }

  constexpr double kStep = 0.1;
  Matrix p = Matrix::identity(n) * (1.0 / static_cast<double>(n));
  Matrix best_p = p;
  double best = INFINITY;
  std::size_t k = 1;
  for (; k <= opt.lyapunov_iterations; ++k) {
    const ModeMax mm = mode_maximum(w, p);
    if (mm.value < best) {
      best = mm.value;
      best_p = p;
    }
    if (best < -opt.lyapunov_eps) break;

    // Subgradient of v^T (A^T P + P A) v in P is (A v) v^T + v (A v)^T.
    Vector av(n);
    for (std::size_t i = 0; i < n; ++i) {
      double s = -mm.v[i];
      if ((mm.mask >> i) & 1)
        for (std::size_t j = 0; j < n; ++j) s += w(i, j) * mm.v[j];
      av[i] = s;
    }
    Matrix g(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) g(i, j) = av[i] * mm.v[j] + mm.v[i] * av[j];
    const double gn = frobenius_norm(g);
    if (gn == 0.0) break;
    g *= kStep / (std::sqrt(static_cast<double>(k)) * gn);
    p = project_unit_trace(p - g, opt.lyapunov_delta);
  }
  cert.iterations = std::min(k, opt.lyapunov_iterations);
  cert.objective = best;
  if (best < -opt.lyapunov_eps) {
    cert.verdict = Verdict::True;
    cert.p = best_p;
  } else if (best > opt.lyapunov_eps) {
    cert.verdict = Verdict::False;
    cert.budget_limited = true;
  } else {
    cert.verdict = Verdict::Marginal;
  }
  return cert;
}

ClassCertificate certify(const Matrix& w, const MatClassOptions& opt) {
  require_square(w, "certify");
  const std::size_t n = w.rows();
  const Matrix id = Matrix::identity(n);
  ClassCertificate c;
  c.p = is_p_matrix(id - w, opt);
  c.h = is_totally_hurwitz(w - id, opt);
  c.l = is_totally_l_stable(w, opt);
  c.abs_schur = is_absolutely_schur(w, opt);
  c.norm = has_small_norm(w, opt);
  return c;
}

HierarchyReport hierarchy_consistency(const ClassCertificate& c) {
  HierarchyReport r;
  auto check = [&](Verdict premise, Verdict conclusion, const char* what) {
    if (premise == Verdict::True && conclusion == Verdict::False) r.violations.emplace_back(what);
  };
  check(c.abs_schur.verdict, c.h.verdict, "rho(|W|) < 1 but -I+W not totally Hurwitz");
  check(c.norm.verdict, c.l.verdict, "||W|| < 1 but W not totally L-stable");
  check(c.l.verdict, c.h.verdict, "W totally L-stable but -I+W not totally Hurwitz");
  check(c.h.verdict, c.p.verdict, "-I+W totally Hurwitz but I-W not a P-matrix");
  return r;
}

HierarchyReport hierarchy_consistency(const Matrix& w, const MatClassOptions& opt) {
  return hierarchy_consistency(certify(w, opt));
}

}  // namespace ltn
