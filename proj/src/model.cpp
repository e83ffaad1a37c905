#include "ltn/model.hpp"

#include <algorithm>
#include <cmath>

#include "ltn/errors.hpp"
#include "ltn/kernels.hpp"

namespace ltn {

CapVector::CapVector(std::vector<double> caps) : caps_(std::move(caps)) {
  for (std::size_t i = 0; i < caps_.size(); ++i) {
    const double c = caps_[i];
    if (std::isnan(c) || c <= 0.0 || c == -kInfiniteCap)
      throw InvalidArgument("cap m[" + std::to_string(i) + "] must be positive or infinite");
  }
}

CapVector CapVector::unbounded(std::size_t n) {
  return CapVector(std::vector<double>(n, kInfiniteCap));
}

CapVector CapVector::uniform(std::size_t n, double cap) {
  return CapVector(std::vector<double>(n, cap));
}

bool CapVector::all_infinite() const {
  return std::all_of(caps_.begin(), caps_.end(), [](double c) { return c == kInfiniteCap; });
}

bool CapVector::any_finite() const { return !all_infinite(); }

void NetworkSpec::validate() const {
  if (!w.square()) throw InvalidArgument("W must be square");
  if (m.size() != w.rows()) throw InvalidArgument("m must have n entries");
  if (!(tau > 0.0) || !std::isfinite(tau)) throw InvalidArgument("tau must be positive");
  for (double v : w.data())
    if (!std::isfinite(v)) throw InvalidArgument("W entries must be finite");
  if (!labels.empty() && labels.size() != w.rows())
    throw InvalidArgument("labels must be empty or have n entries");
}

NetworkSpec make_network(Matrix w, CapVector m, double tau) {
  NetworkSpec net{std::move(w), std::move(m), tau, {}};
  net.validate();
  return net;
}

NetworkSpec make_unbounded_network(Matrix w, double tau) {
  const std::size_t n = w.rows();
  return make_network(std::move(w), CapVector::unbounded(n), tau);
}

char regime_char(Regime r) {
  switch (r) {
    case Regime::Inactive: return '0';
    case Regime::Linear: return 'l';
    case Regime::Saturated: return 's';
  }
  return '?';
}

SwitchingIndex SwitchingIndex::parse(std::string_view s) {
  std::vector<Regime> r;
  r.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '0': r.push_back(Regime::Inactive); break;
      case 'l': r.push_back(Regime::Linear); break;
      case 's': r.push_back(Regime::Saturated); break;
      default: throw InvalidArgument(std::string("switching index: bad character '") + c + "'");
    }
  }
  return SwitchingIndex(std::move(r));
}

SwitchingIndex SwitchingIndex::uniform(std::size_t n, Regime r) {
  return SwitchingIndex(std::vector<Regime>(n, r));
}

IndexSet SwitchingIndex::linear_set() const {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < r_.size(); ++i)
    if (r_[i] == Regime::Linear) idx.push_back(i);
  return IndexSet(std::move(idx), r_.size());
}

bool SwitchingIndex::admissible(const CapVector& m) const {
  if (m.size() != r_.size()) return false;
  for (std::size_t i = 0; i < r_.size(); ++i)
    if (r_[i] == Regime::Saturated && !m.finite(i)) return false;
  return true;
}

bool SwitchingIndex::below(const SwitchingIndex& other) const {
  if (other.size() != size()) throw InvalidArgument("switching index size mismatch");
  for (std::size_t i = 0; i < r_.size(); ++i)
    if (r_[i] == Regime::Linear && other.r_[i] != Regime::Linear) return false;
  return true;
}

std::string SwitchingIndex::str() const {
  std::string s;
  s.reserve(r_.size());
  for (Regime r : r_) s.push_back(regime_char(r));
  return s;
}

std::size_t switching_index_count(const CapVector& m) {
  std::size_t count = 1;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const std::size_t k = m.finite(i) ? 3 : 2;
    if (count > SIZE_MAX / k) return SIZE_MAX;
    count *= k;
  }
  return count;
}

std::vector<SwitchingIndex> all_switching_indices(const CapVector& m) {
  const std::size_t n = m.size();
  std::vector<SwitchingIndex> out;
  std::vector<Regime> cur(n, Regime::Inactive);
  // Odometer with node 0 most significant.
  while (true) {
    out.emplace_back(cur);
    std::size_t i = n;
    while (i > 0) {
      --i;
      const Regime top = m.finite(i) ? Regime::Saturated : Regime::Linear;
      if (cur[i] != top) {
        cur[i] = static_cast<Regime>(static_cast<int>(cur[i]) + 1);
        for (std::size_t j = i + 1; j < n; ++j) cur[j] = Regime::Inactive;
        break;
      }
      if (i == 0) return out;
    }
    if (n == 0) return out;
  }
}

std::vector<SwitchingIndex> binary_switching_indices(std::size_t n) {
  return all_switching_indices(CapVector::unbounded(n));
}

Vector threshold(std::span<const double> v, const CapVector& m) {
  if (v.size() != m.size()) throw InvalidArgument("threshold: dimension mismatch");
  Vector out(v.size());
  kernels::active().threshold(v.size(), v.data(), m.data(), out.data());
  return out;
}

namespace {

void check_dims(const NetworkSpec& net, std::span<const double> d, std::span<const double> x) {
  if (d.size() != net.size() || x.size() != net.size())
    throw InvalidArgument("dimension mismatch with network size " + std::to_string(net.size()));
}

}  // namespace

SwitchingIndex classify_region(const NetworkSpec& net, std::span<const double> d,
                               std::span<const double> x) {
  check_dims(net, d, x);
  const std::size_t n = net.size();
  Vector u(n);
  kernels::active().matvec(net.w.data().data(), n, n, x.data(), u.data());
  std::vector<Regime> r(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = u[i] + d[i];
    if (v <= 0.0) r[i] = Regime::Inactive;
    else if (net.m.finite(i) && v >= net.m[i]) r[i] = Regime::Saturated;
    else r[i] = Regime::Linear;
  }
  return SwitchingIndex(std::move(r));
}

ModeSystem mode_system(const NetworkSpec& net, std::span<const double> d,
                       const SwitchingIndex& sigma) {
  const std::size_t n = net.size();
  if (d.size() != n || sigma.size() != n) throw InvalidArgument("mode_system: dimension mismatch");
  if (!sigma.admissible(net.m))
    throw InvalidArgument("mode_system: saturated regime on an unbounded node");
  ModeSystem ms{Matrix(n, n), Vector(n, 0.0)};
  for (std::size_t i = 0; i < n; ++i) {
    if (sigma[i] == Regime::Linear) {
      for (std::size_t j = 0; j < n; ++j) ms.a(i, j) = net.w(i, j);
      ms.b[i] = d[i];
    } else if (sigma[i] == Regime::Saturated) {
      ms.b[i] = net.m[i];
    }
    ms.a(i, i) -= 1.0;
  }
  return ms;
}

void vector_field(const NetworkSpec& net, std::span<const double> d, std::span<const double> x,
                  std::span<double> out) {
  check_dims(net, d, x);
  if (out.size() != net.size()) throw InvalidArgument("vector_field: output size mismatch");
  kernels::active().lt_field(net.w.data().data(), net.size(), x.data(), d.data(), net.m.data(),
                             1.0 / net.tau, out.data());
}

Vector vector_field(const NetworkSpec& net, std::span<const double> d,
                    std::span<const double> x) {
  Vector out(net.size());
  vector_field(net, d, x, out);
  return out;
}

double lipschitz_constant(const NetworkSpec& net) {
  return (1.0 + operator_norm(net.w)) / net.tau;
}

}  // namespace ltn
