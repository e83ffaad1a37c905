#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "ltn/linalg.hpp"

namespace ltn {

inline constexpr double kInfiniteCap = std::numeric_limits<double>::infinity();

/// Per-node maximal firing rates. Unbounded nodes hold kInfiniteCap, which is
/// only ever fed to min(); the saturated-mode constant treats it as zero.
class CapVector {
 public:
  CapVector() = default;
  /// Throws InvalidArgument unless every entry is > 0 (or infinite).
  explicit CapVector(std::vector<double> caps);

  static CapVector unbounded(std::size_t n);
  static CapVector uniform(std::size_t n, double cap);

  std::size_t size() const { return caps_.size(); }
  double operator[](std::size_t i) const { return caps_[i]; }
  bool finite(std::size_t i) const { return caps_[i] != kInfiniteCap; }
  bool all_infinite() const;
  bool any_finite() const;
  const double* data() const { return caps_.data(); }
  const std::vector<double>& values() const { return caps_; }

  friend bool operator==(const CapVector&, const CapVector&) = default;

 private:
  std::vector<double> caps_;
};

/// tau x' = -x + [W x + d]_0^m
struct NetworkSpec {
  Matrix w;
  CapVector m;
  double tau = 1.0;
  std::vector<std::string> labels;

  std::size_t size() const { return w.rows(); }
  /// Throws InvalidArgument on any violated invariant.
  void validate() const;

  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

/// Validated constructor.
NetworkSpec make_network(Matrix w, CapVector m, double tau = 1.0);
NetworkSpec make_unbounded_network(Matrix w, double tau = 1.0);

enum class Regime : std::uint8_t { Inactive, Linear, Saturated };

/// '0', 'l' or 's'.
char regime_char(Regime r);

class SwitchingIndex {
 public:
  SwitchingIndex() = default;
  explicit SwitchingIndex(std::vector<Regime> regimes) : r_(std::move(regimes)) {}
  /// Parses a string over {0, l, s}. Throws InvalidArgument.
  static SwitchingIndex parse(std::string_view s);
  static SwitchingIndex uniform(std::size_t n, Regime r);

  std::size_t size() const { return r_.size(); }
  Regime operator[](std::size_t i) const { return r_[i]; }
  Regime& operator[](std::size_t i) { return r_[i]; }
  const std::vector<Regime>& regimes() const { return r_; }

  /// Nodes in the linear regime.
  IndexSet linear_set() const;
  /// True if every saturated node has a finite cap.
  bool admissible(const CapVector& m) const;
  /// sigma <= other: linear here implies linear there (binary indices only).
  bool below(const SwitchingIndex& other) const;

  std::string str() const;

  friend bool operator==(const SwitchingIndex&, const SwitchingIndex&) = default;
  friend auto operator<=>(const SwitchingIndex&, const SwitchingIndex&) = default;

 private:
  std::vector<Regime> r_;
};

/// All admissible switching indices for the caps, lexicographic in 0 < l < s.
std::vector<SwitchingIndex> all_switching_indices(const CapVector& m);
/// The 2^n binary indices {0, l}^n, lexicographic. Bit i of the ordinal
/// (most significant first) selects node i.
std::vector<SwitchingIndex> binary_switching_indices(std::size_t n);
/// Number of admissible indices (saturating at SIZE_MAX).
std::size_t switching_index_count(const CapVector& m);

/// Affine dynamics valid inside one switching region:
///   tau x' = a x + b,  a = -I + Sigma_l W,  b = Sigma_l d + Sigma_s m.
struct ModeSystem {
  Matrix a;
  Vector b;
};

/// Componentwise projection onto [0, m_i].
Vector threshold(std::span<const double> v, const CapVector& m);

/// Regime of each node at state x. Ties: (Wx+d)_i <= 0 is inactive and
/// (Wx+d)_i >= m_i is saturated.
SwitchingIndex classify_region(const NetworkSpec& net, std::span<const double> d,
                               std::span<const double> x);

/// Throws InvalidArgument if sigma saturates an unbounded node.
ModeSystem mode_system(const NetworkSpec& net, std::span<const double> d,
                       const SwitchingIndex& sigma);

/// x' = (-x + [W x + d]_0^m) / tau
Vector vector_field(const NetworkSpec& net, std::span<const double> d,
                    std::span<const double> x);
/// Allocation-free variant; out must have size n.
void vector_field(const NetworkSpec& net, std::span<const double> d, std::span<const double> x,
                  std::span<double> out);

/// Global Lipschitz constant (1 + ||W||) / tau of the vector field.
double lipschitz_constant(const NetworkSpec& net);

}  // namespace ltn
