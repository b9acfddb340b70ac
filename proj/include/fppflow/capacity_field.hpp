// Capacity laws on [0, +inf], reproducible i.i.d. capacity fields and the
// Bernoulli coupling t_{G_p}(e) = 1{t_G(e) > 0}.
#pragma once

#include <concepts>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "fppflow/core.hpp"
#include "fppflow/rational.hpp"

namespace fppflow {

struct Atom {
  Capacity value;
  Rational prob;
};

/// Finite atomic law on [0, +inf].
class CapacityDistribution {
 public:
  explicit CapacityDistribution(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
    if (atoms_.empty()) throw ValidationError("distribution has no atoms");
    Rational total(0);
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      const Atom& a = atoms_[i];
      if (a.prob < Rational(0) || a.prob > Rational(1))
        throw ValidationError("atom probability outside [0,1]: " + a.prob.to_string());
      for (std::size_t j = 0; j < i; ++j)
        if (atoms_[j].value == a.value) throw ValidationError("duplicate atom value " + a.value.to_string());
      total += a.prob;
      if (a.value.is_zero()) zero_mass_ = zero_mass_ + a.prob;
      else if (a.value.is_infinite()) infinity_mass_ = infinity_mass_ + a.prob;
      else denominator_ = lcm_checked(denominator_, a.value.value().den());
    }
    if (total != Rational(1)) throw ValidationError("atom probabilities sum to " + total.to_string() + ", not 1");

    // Inverse-CDF thresholds on 53-bit uniforms: atom k is drawn when
    // u < floor(P[atoms 0..k] * 2^53).
    Rational cum(0);
    for (const Atom& a : atoms_) {
      cum += a.prob;
      thresholds_.push_back(static_cast<std::uint64_t>((int128(cum.num()) << 53) / cum.den()));
    }
    thresholds_.back() = std::uint64_t{1} << 53;
  }

  static CapacityDistribution point_mass(Capacity v) { return CapacityDistribution({{v, Rational(1)}}); }

  /// G({0}) = 1 - p, G({1}) = p.
  static CapacityDistribution bernoulli(Rational p) {
    if (p.is_zero()) return point_mass(Capacity(0));
    if (p == Rational(1)) return point_mass(Capacity(1));
    return CapacityDistribution({{Capacity(0), Rational(1) - p}, {Capacity(1), p}});
  }

  std::span<const Atom> atoms() const noexcept { return atoms_; }
  const Rational& zero_mass() const noexcept { return zero_mass_; }
  const Rational& infinity_mass() const noexcept { return infinity_mass_; }

  /// Least common denominator of the finite atom values.
  std::int64_t common_denominator() const noexcept { return denominator_; }

  /// Atom index selected by 64 uniform bits (the top 53 are used).
  std::size_t sample_index(std::uint64_t bits) const noexcept {
    std::uint64_t u = bits >> 11;
    std::size_t k = 0;
    while (u >= thresholds_[k]) ++k;
    return k;
  }

  const Capacity& sample(std::uint64_t bits) const noexcept { return atoms_[sample_index(bits)].value; }

  friend bool operator==(const CapacityDistribution& a, const CapacityDistribution& b) {
    if (a.atoms_.size() != b.atoms_.size()) return false;
    for (std::size_t i = 0; i < a.atoms_.size(); ++i)
      if (!(a.atoms_[i].value == b.atoms_[i].value) || a.atoms_[i].prob != b.atoms_[i].prob) return false;
    return true;
  }

 private:
  std::vector<Atom> atoms_;
  std::vector<std::uint64_t> thresholds_;
  Rational zero_mass_{0};
  Rational infinity_mass_{0};
  std::int64_t denominator_ = 1;
};

//---------------------------------------------------------------------------//

inline constexpr int kEdgeIdCoordBits = 12;
inline constexpr int kEdgeIdCoordLimit = 1 << (kEdgeIdCoordBits - 1);

/// Global 64-bit edge id: zig-zag coordinates packed 12 bits each, then the
/// axis. Independent of any region, so capacities survive region growth.
inline std::uint64_t global_edge_id(const EdgeKey& e) {
  std::uint64_t id = 0;
  for (int k = kMaxDim - 1; k >= 0; --k) {
    int c = e.lo[k];
    if (c <= -kEdgeIdCoordLimit || c >= kEdgeIdCoordLimit)
      throw ValidationError("lattice coordinate out of supported range: " + std::to_string(c));
    auto zz = static_cast<std::uint64_t>((static_cast<std::uint32_t>(c) << 1) ^ static_cast<std::uint32_t>(c >> 31));
    id = (id << kEdgeIdCoordBits) | zz;
  }
  return (id << 3) | static_cast<std::uint64_t>(e.axis);
}

/// Stateless 64-bit draw for (seed, counter).
inline std::uint64_t counter_bits(std::uint64_t seed, std::uint64_t counter) {
  return mix64(mix64(counter + 0x9e3779b97f4a7c15ull) ^ mix64(seed ^ 0x6a09e667f3bcc909ull));
}

/// Anything that assigns a capacity to every edge of Z^d.
template <class F>
concept EdgeField = requires(const F& f, const EdgeKey& e) {
  { f.capacity(e) } -> std::convertible_to<Capacity>;
};

/// Realization of i.i.d. capacities: capacity(e) is a pure function of
/// (seed, global edge id, distribution).
class CapacityField {
 public:
  CapacityField(std::uint64_t seed, CapacityDistribution dist)
      : seed_(seed), base_(std::make_shared<const CapacityDistribution>(std::move(dist))), law_(base_) {}

  std::uint64_t seed() const noexcept { return seed_; }

  /// Law of the reported capacities (G_p after coupling).
  const CapacityDistribution& distribution() const noexcept { return *law_; }
  /// Law the underlying draw uses.
  const CapacityDistribution& base_distribution() const noexcept { return *base_; }
  bool coupled() const noexcept { return coupled_; }

  Capacity capacity(std::uint64_t edge_id) const {
    const Capacity& c = base_->sample(counter_bits(seed_, edge_id));
    if (coupled_) return c.is_positive() ? Capacity(1) : Capacity(0);
    return c;
  }
  Capacity capacity(const EdgeKey& e) const { return capacity(global_edge_id(e)); }

  bool positive(const EdgeKey& e) const {
    return base_->sample(counter_bits(seed_, global_edge_id(e))).is_positive();
  }

  CapacityField with_seed(std::uint64_t seed) const {
    CapacityField f = *this;
    f.seed_ = seed;
    return f;
  }

  friend CapacityField couple_bernoulli(const CapacityField& field);

 private:
  std::uint64_t seed_;
  std::shared_ptr<const CapacityDistribution> base_;
  std::shared_ptr<const CapacityDistribution> law_;
  bool coupled_ = false;
};

inline Capacity edge_capacity(const CapacityField& field, std::uint64_t edge_id) { return field.capacity(edge_id); }

/// Field of G_p, p = 1 - G({0}), with t(e) = 1 iff the input capacity of e
/// is positive (infinity included).
inline CapacityField couple_bernoulli(const CapacityField& field) {
  CapacityField out = field;
  out.coupled_ = true;
  out.law_ = std::make_shared<const CapacityDistribution>(
      CapacityDistribution::bernoulli(Rational(1) - field.base_->zero_mass()));
  return out;
}

/// Explicit per-edge overrides on top of another field. Used to plant
/// specific configurations.
template <EdgeField Base>
class OverrideField {
 public:
  explicit OverrideField(Base base) : base_(std::move(base)) {}

  void set(const EdgeKey& e, Capacity c) { overrides_[e] = c; }

  Capacity capacity(const EdgeKey& e) const {
    auto it = overrides_.find(e);
    return it != overrides_.end() ? it->second : Capacity(base_.capacity(e));
  }
  bool positive(const EdgeKey& e) const { return capacity(e).is_positive(); }

 private:
  Base base_;
  std::unordered_map<EdgeKey, Capacity, EdgeKeyHash> overrides_;
};

template <EdgeField F>
bool edge_positive(const F& f, const EdgeKey& e) {
  if constexpr (requires { f.positive(e); }) return f.positive(e);
  else return Capacity(f.capacity(e)).is_positive();
}

//---------------------------------------------------------------------------//

/// Critical bond-percolation probability used for regime labels. Only the
/// planar value is exact; higher dimensions use published estimates and may
/// be overridden by configuration.
struct RegimeConstants {
  int d = 3;
  double pc = 0.2488126;

  static RegimeConstants defaults(int d) {
    switch (d) {
      case 2: return {2, 0.5};
      case 3: return {3, 0.2488126};
      case 4: return {4, 0.1601314};
      case 5: return {5, 0.1181718};
      default: throw ValidationError("no default p_c for dimension " + std::to_string(d));
    }
  }

  void validate() const {
    if (!(pc > 0.0 && pc < 1.0)) throw ValidationError("p_c must lie in (0,1)");
    if (d == 2 && pc != 0.5) throw ValidationError("p_c(2) is exactly 1/2");
  }
};

enum class ZeroRegime { supercritical, critical, subcritical };

inline const char* to_string(ZeroRegime r) {
  switch (r) {
    case ZeroRegime::supercritical: return "supercritical-zero";
    case ZeroRegime::critical: return "critical-zero";
    case ZeroRegime::subcritical: return "subcritical-zero";
  }
  return "?";
}

struct RegimeReport {
  ZeroRegime zero;
  bool infinity_ok;  ///< G({+inf}) < p_c
};

/// Compares G({0}) against 1 - p_c(d).
inline RegimeReport regime_of(const CapacityDistribution& dist, const RegimeConstants& k) {
  k.validate();
  // Exact for p_c = 1/2; long double otherwise.
  long double g0 = static_cast<long double>(dist.zero_mass().num()) / dist.zero_mass().den();
  long double threshold = 1.0L - static_cast<long double>(k.pc);
  ZeroRegime z = g0 > threshold ? ZeroRegime::supercritical
               : g0 < threshold ? ZeroRegime::subcritical
                                : ZeroRegime::critical;
  long double ginf = static_cast<long double>(dist.infinity_mass().num()) / dist.infinity_mass().den();
  return {z, ginf < static_cast<long double>(k.pc)};
}

}  // namespace fppflow
