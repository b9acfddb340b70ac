// Exact non-negative rationals and capacities on [0, +inf].
#pragma once

#include <charconv>
#include <compare>
#include <cstdint>
#include <numeric>
#include <string>
#include <string_view>

#include "fppflow/core.hpp"

namespace fppflow {

using int128 = __int128;

namespace detail {

inline std::int64_t narrow_checked(int128 v) {
  if (v > INT64_MAX || v < INT64_MIN) throw std::overflow_error("rational overflow");
  return static_cast<std::int64_t>(v);
}

inline int128 gcd128(int128 a, int128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    int128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

inline std::int64_t parse_int(std::string_view s) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
    throw ValidationError("not an integer: '" + std::string(s) + "'");
  return v;
}

inline std::string to_string128(int128 v) {
  if (v == 0) return "0";
  bool neg = v < 0;
  if (neg) v = -v;
  std::string out;
  while (v > 0) {
    out.insert(out.begin(), static_cast<char>('0' + static_cast<int>(v % 10)));
    v /= 10;
  }
  return neg ? "-" + out : out;
}

}  // namespace detail

/// Reduced fraction num/den with den > 0.
class Rational {
 public:
  constexpr Rational() = default;
  constexpr Rational(std::int64_t n) : num_(n) {}  // NOLINT(google-explicit-constructor)
  Rational(std::int64_t n, std::int64_t d) { assign(n, d); }

  static Rational from_wide(int128 n, int128 d) {
    if (d == 0) throw ValidationError("rational with zero denominator");
    if (d < 0) {
      n = -n;
      d = -d;
    }
    int128 g = detail::gcd128(n, d);
    if (g > 1) {
      n /= g;
      d /= g;
    }
    Rational r;
    r.num_ = detail::narrow_checked(n);
    r.den_ = detail::narrow_checked(d);
    return r;
  }

  /// Accepts "p", "p/q" and "-p/q".
  static Rational parse(std::string_view s) {
    auto slash = s.find('/');
    if (slash == std::string_view::npos) return Rational(detail::parse_int(s));
    return Rational(detail::parse_int(s.substr(0, slash)), detail::parse_int(s.substr(slash + 1)));
  }

  std::int64_t num() const noexcept { return num_; }
  std::int64_t den() const noexcept { return den_; }
  bool is_zero() const noexcept { return num_ == 0; }
  double to_double() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }

  std::string to_string() const {
    return den_ == 1 ? std::to_string(num_) : std::to_string(num_) + "/" + std::to_string(den_);
  }

  friend Rational operator+(const Rational& a, const Rational& b) {
    return from_wide(int128(a.num_) * b.den_ + int128(b.num_) * a.den_, int128(a.den_) * b.den_);
  }
  friend Rational operator-(const Rational& a, const Rational& b) {
    return from_wide(int128(a.num_) * b.den_ - int128(b.num_) * a.den_, int128(a.den_) * b.den_);
  }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return from_wide(int128(a.num_) * b.num_, int128(a.den_) * b.den_);
  }
  Rational& operator+=(const Rational& o) { return *this = *this + o; }

  friend bool operator==(const Rational&, const Rational&) = default;
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    return int128(a.num_) * b.den_ <=> int128(b.num_) * a.den_;
  }

 private:
  void assign(std::int64_t n, std::int64_t d) { *this = from_wide(n, d); }

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

inline std::int64_t lcm_checked(std::int64_t a, std::int64_t b) {
  return detail::narrow_checked(int128(a) / std::gcd(a, b) * b);
}

/// Edge capacity: an exact non-negative rational or the symbol +inf.
/// Infinity is never encoded as a float or a sentinel number.
class Capacity {
 public:
  constexpr Capacity() = default;
  Capacity(Rational v) : value_(v) {  // NOLINT(google-explicit-constructor)
    if (v < Rational(0)) throw ValidationError("negative capacity " + v.to_string());
  }
  Capacity(std::int64_t v) : Capacity(Rational(v)) {}  // NOLINT(google-explicit-constructor)

  static Capacity infinity() {
    Capacity c;
    c.infinite_ = true;
    return c;
  }

  static Capacity parse(std::string_view s) {
    if (s == "inf" || s == "+inf" || s == "infinity") return infinity();
    return Capacity(Rational::parse(s));
  }

  bool is_infinite() const noexcept { return infinite_; }
  bool is_zero() const noexcept { return !infinite_ && value_.is_zero(); }
  bool is_positive() const noexcept { return !is_zero(); }

  /// Finite value; meaningless when infinite.
  const Rational& value() const noexcept { return value_; }

  std::string to_string() const { return infinite_ ? "inf" : value_.to_string(); }

  friend Capacity operator+(const Capacity& a, const Capacity& b) {
    if (a.infinite_ || b.infinite_) return infinity();
    return Capacity(a.value_ + b.value_);
  }
  Capacity& operator+=(const Capacity& o) { return *this = *this + o; }

  friend bool operator==(const Capacity& a, const Capacity& b) {
    if (a.infinite_ || b.infinite_) return a.infinite_ == b.infinite_;
    return a.value_ == b.value_;
  }
  friend std::strong_ordering operator<=>(const Capacity& a, const Capacity& b) {
    if (a.infinite_ || b.infinite_) return int(a.infinite_) <=> int(b.infinite_);
    return a.value_ <=> b.value_;
  }

 private:
  Rational value_{};
  bool infinite_ = false;
};

}  // namespace fppflow
