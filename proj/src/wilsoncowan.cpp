#include "ltn/wilsoncowan.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>

#include "ltn/errors.hpp"

namespace ltn {

void WilsonCowanParams::validate() const {
  if (!(n > 0) || !std::isfinite(n)) throw InvalidArgument("Wilson-Cowan: n must be positive");
  if (!(alpha > 0 && alpha < 1)) throw InvalidArgument("Wilson-Cowan: alpha must lie in (0, 1)");
  if (w_ee < 0) throw InvalidArgument("Wilson-Cowan: w_ee must be nonnegative");
  if (w_ie < 0) throw InvalidArgument("Wilson-Cowan: w_ie must be nonnegative");
  if (w_ei > 0) throw InvalidArgument("Wilson-Cowan: w_ei must be nonpositive");
  if (w_ii > 0) throw InvalidArgument("Wilson-Cowan: w_ii must be nonpositive");
  if (!(m_e > 0) || !(m_i > 0)) throw InvalidArgument("Wilson-Cowan: caps must be positive");
  if (!(tau > 0)) throw InvalidArgument("Wilson-Cowan: tau must be positive");
}

WilsonCowanParams WilsonCowanParams::from_effective(const Matrix& w, double d_e, double d_i) {
  if (w.rows() != 2 || w.cols() != 2) throw InvalidArgument("Wilson-Cowan: matrix must be 2 x 2");
  WilsonCowanParams p;
  p.w_ee = w(0, 0);
  p.w_ei = w(0, 1);
  p.w_ie = w(1, 0);
  p.w_ii = w(1, 1);
  p.d_e = d_e;
  p.d_i = d_i;
  p.validate();
  return p;
}

Matrix wilson_cowan_matrix(const WilsonCowanParams& p) {
  p.validate();
  const double ne = p.alpha * p.n, ni = (1 - p.alpha) * p.n;
  return Matrix{{ne * p.w_ee, ni * p.w_ei}, {ne * p.w_ie, ni * p.w_ii}};
}

ReducedNetwork reduce(const WilsonCowanParams& p) {
  return {make_network(wilson_cowan_matrix(p), CapVector({p.m_e, p.m_i}), p.tau), {p.d_e, p.d_i}};
}

bool WilsonCowanReport::consistent() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.agree; });
}

namespace {

ConditionCheck make_check(std::string name, std::initializer_list<double> slacks, Verdict numeric,
                          double band) {
  ConditionCheck c;
  c.name = std::move(name);
  c.margin = std::min(slacks);
  c.analytic = c.margin > 0;
  c.numeric = numeric;
  c.marginal = std::any_of(slacks.begin(), slacks.end(),
                           [band](double s) { return std::abs(s) <= band; });
  c.agree = c.marginal || (numeric != Verdict::Marginal &&
                           (numeric == Verdict::True) == c.analytic);
  return c;
}

}  // namespace

WilsonCowanReport analytic_conditions(const WilsonCowanParams& p, double band) {
  const Matrix w = wilson_cowan_matrix(p);
  const double a = w(0, 0), b = w(0, 1), c = w(1, 0), d = w(1, 1);
  const Matrix id = Matrix::identity(2);
  // The numeric tests run with a tolerance well inside the band.
  MatClassOptions opt;
  opt.tol = band * 1e-3;

  WilsonCowanReport r;
  const double excit = 1 - a;
  r.checks[kWcP] = make_check("I - W in P", {excit}, is_p_matrix(id - w, opt).verdict, band);
  r.checks[kWcH] = make_check("-I + W in H", {excit}, is_totally_hurwitz(w - id, opt).verdict, band);
  r.checks[kWcExcitatory] = make_check(
      "rho(max(W, 0)) < 1", {excit},
      strictly_less(spectral_radius(positive_part(w)), 1.0, opt.tol), band);
  r.checks[kWcSchur] = make_check(
      "rho(|W|) < 1", {excit, 1 - std::abs(d), (1 - a) * (1 - std::abs(d)) - c * std::abs(b)},
      is_absolutely_schur(w, opt).verdict, band);
  r.checks[kWcHurwitz] = make_check("-I + W Hurwitz", {(1 - a) + (1 - d), (1 - a) * (1 - d) - b * c},
                                    strictly_less(spectral_abscissa(w - id), 0.0, opt.tol), band);
  return r;
}

}  // namespace ltn
