// Basic lattice types and the error hierarchy shared by every module.
#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>

namespace fppflow {

inline constexpr int kMaxDim = 5;
inline constexpr int kMinDim = 2;

/// Integer lattice point. Coordinates past the working dimension stay zero.
using Point = std::array<int, kMaxDim>;

/// Nearest-neighbour edge of Z^d, stored as its lexicographically smaller
/// endpoint and the axis along which the other endpoint lies (+e_axis).
struct EdgeKey {
  Point lo{};
  int axis = 0;

  Point hi() const {
    Point p = lo;
    ++p[axis];
    return p;
  }

  friend auto operator<=>(const EdgeKey&, const EdgeKey&) = default;
  friend bool operator==(const EdgeKey&, const EdgeKey&) = default;
};

/// Edge joining two neighbouring points, in either order.
inline EdgeKey edge_between(const Point& a, const Point& b, int dim) {
  for (int i = 0; i < dim; ++i) {
    auto k = i;
    if (a[k] != b[k]) return a[k] < b[k] ? EdgeKey{a, i} : EdgeKey{b, i};
  }
  throw std::invalid_argument("edge_between: identical endpoints");
}

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

struct PointHash {
  std::size_t operator()(const Point& p) const noexcept {
    std::uint64_t h = 0x9e3779b97f4a7c15ull;
    for (int c : p) h = mix64(h ^ static_cast<std::uint32_t>(c)) + 0x9e3779b97f4a7c15ull;
    return h;
  }
};

struct EdgeKeyHash {
  std::size_t operator()(const EdgeKey& e) const noexcept {
    return PointHash{}(e.lo) ^ (e.axis * 0x9e3779b97f4a7c15ull);
  }
};

//---------------------------------------------------------------------------//
// Errors. Each category maps onto one CLI exit code.
//---------------------------------------------------------------------------//

class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

/// Malformed input: bad geometry, bad distribution, bad config.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what, std::string kind = "validation")
      : Error(std::move(kind), what) {}
};

class InvalidGeometry : public ValidationError {
 public:
  explicit InvalidGeometry(const std::string& what)
      : ValidationError(what, "invalid-geometry") {}
};

class DegenerateRegion : public ValidationError {
 public:
  explicit DegenerateRegion(const std::string& what)
      : ValidationError(what, "degenerate-region") {}
};

/// Raised when the positive-capacity edges appear to percolate, i.e. the
/// field is not in the regime an operation requires.
class RegimeError : public Error {
 public:
  explicit RegimeError(const std::string& what) : Error("regime", what) {}
};

class WindowOverflow : public Error {
 public:
  explicit WindowOverflow(const std::string& what) : Error("window-overflow", what) {}
};

/// A checked invariant failed at runtime.
class AssertionFailure : public Error {
 public:
  explicit AssertionFailure(const std::string& what) : Error("assertion", what) {}
};

#define FPPFLOW_CHECK(cond, msg)                                   \
  do {                                                             \
    if (!(cond)) throw ::fppflow::AssertionFailure(msg);           \
  } while (false)

}  // namespace fppflow
