/**
 * @file ad.hpp
 * @brief Scalar types for operator-level automatic differentiation.
 *
 * ad::Dual carries a value and one directional derivative (forward mode).
 * ad::Var records every operation on a thread-local tape; Tape::gradient
 * sweeps the tape backwards (reverse mode).
 *
 * Model code is written once as a template over the scalar type and is
 * instantiated with double, Dual and Var.
 */
#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace shadow::ad {

// ---------------------------------------------------------------------------
// Forward mode
// ---------------------------------------------------------------------------

struct Dual {
  double v = 0.0;
  double d = 0.0;

  constexpr Dual() = default;
  constexpr Dual(double value) : v(value) {}  // NOLINT(google-explicit-constructor)
  constexpr Dual(double value, double deriv) : v(value), d(deriv) {}

  Dual& operator+=(const Dual& o) {
    v += o.v;
    d += o.d;
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    v -= o.v;
    d -= o.d;
    return *this;
  }
  Dual& operator*=(const Dual& o) {
    d = d * o.v + v * o.d;
    v *= o.v;
    return *this;
  }
  Dual& operator/=(const Dual& o) {
    const double inv = 1.0 / o.v;
    v *= inv;
    d = (d - v * o.d) * inv;
    return *this;
  }
};

inline Dual operator-(const Dual& a) { return {-a.v, -a.d}; }
inline Dual operator+(Dual a, const Dual& b) { return a += b; }
inline Dual operator-(Dual a, const Dual& b) { return a -= b; }
inline Dual operator*(Dual a, const Dual& b) { return a *= b; }
inline Dual operator/(Dual a, const Dual& b) { return a /= b; }
inline Dual operator+(Dual a, double b) { return {a.v + b, a.d}; }
inline Dual operator+(double a, Dual b) { return {a + b.v, b.d}; }
inline Dual operator-(Dual a, double b) { return {a.v - b, a.d}; }
inline Dual operator-(double a, Dual b) { return {a - b.v, -b.d}; }
inline Dual operator*(Dual a, double b) { return {a.v * b, a.d * b}; }
inline Dual operator*(double a, Dual b) { return {a * b.v, a * b.d}; }
inline Dual operator/(Dual a, double b) { return {a.v / b, a.d / b}; }
inline Dual operator/(double a, Dual b) {
  const double q = a / b.v;
  return {q, -q * b.d / b.v};
}

inline bool operator<(const Dual& a, const Dual& b) { return a.v < b.v; }
inline bool operator>(const Dual& a, const Dual& b) { return a.v > b.v; }

inline Dual sqrt(const Dual& a) {
  const double s = std::sqrt(a.v);
  return {s, a.d / (2.0 * s)};
}
inline Dual abs(const Dual& a) { return a.v < 0.0 ? -a : a; }
inline Dual sin(const Dual& a) { return {std::sin(a.v), std::cos(a.v) * a.d}; }
inline Dual cos(const Dual& a) { return {std::cos(a.v), -std::sin(a.v) * a.d}; }
inline Dual exp(const Dual& a) {
  const double e = std::exp(a.v);
  return {e, e * a.d};
}

// ---------------------------------------------------------------------------
// Reverse mode
// ---------------------------------------------------------------------------

/// One recorded operation: up to two parents with local partial derivatives.
struct Node {
  std::int32_t lhs = -1;
  std::int32_t rhs = -1;
  double dlhs = 0.0;
  double drhs = 0.0;
};

class Tape;

struct Var {
  double v = 0.0;
  std::int32_t id = -1;  // -1: constant, not on the tape

  Var() = default;
  Var(double value) : v(value) {}  // NOLINT(google-explicit-constructor)
  Var(double value, std::int32_t index) : v(value), id(index) {}

  Var& operator+=(const Var& o);
  Var& operator-=(const Var& o);
  Var& operator*=(const Var& o);
  Var& operator/=(const Var& o);
};

/// Thread-local operation record. Construct a Tape to start recording; the
/// active tape is restored on destruction so tapes nest.
class Tape {
 public:
  Tape();
  ~Tape();
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Creates an independent variable.
  Var variable(double value);

  /// Back-propagates a seed through the tape. Returns adjoints of every
  /// node; index with Var::id.
  [[nodiscard]] std::vector<double> gradient(std::span<const Var> outputs,
                                             std::span<const double> seeds) const;

  [[nodiscard]] std::size_t size() const { return nodes_.size(); }

  static Tape* active();
  std::int32_t push(const Node& n);

 private:
  std::vector<Node> nodes_;
  Tape* previous_ = nullptr;
};

namespace detail {
Var unary(const Var& a, double value, double partial);
Var binary(const Var& a, const Var& b, double value, double da, double db);
}  // namespace detail

inline Var operator-(const Var& a) { return detail::unary(a, -a.v, -1.0); }
inline Var operator+(const Var& a, const Var& b) { return detail::binary(a, b, a.v + b.v, 1.0, 1.0); }
inline Var operator-(const Var& a, const Var& b) { return detail::binary(a, b, a.v - b.v, 1.0, -1.0); }
inline Var operator*(const Var& a, const Var& b) { return detail::binary(a, b, a.v * b.v, b.v, a.v); }
inline Var operator/(const Var& a, const Var& b) {
  const double q = a.v / b.v;
  return detail::binary(a, b, q, 1.0 / b.v, -q / b.v);
}
inline Var operator+(const Var& a, double b) { return detail::unary(a, a.v + b, 1.0); }
inline Var operator+(double a, const Var& b) { return detail::unary(b, a + b.v, 1.0); }
inline Var operator-(const Var& a, double b) { return detail::unary(a, a.v - b, 1.0); }
inline Var operator-(double a, const Var& b) { return detail::unary(b, a - b.v, -1.0); }
inline Var operator*(const Var& a, double b) { return detail::unary(a, a.v * b, b); }
inline Var operator*(double a, const Var& b) { return detail::unary(b, a * b.v, a); }
inline Var operator/(const Var& a, double b) { return detail::unary(a, a.v / b, 1.0 / b); }
inline Var operator/(double a, const Var& b) {
  const double q = a / b.v;
  return detail::unary(b, q, -q / b.v);
}

inline Var& Var::operator+=(const Var& o) { return *this = *this + o; }
inline Var& Var::operator-=(const Var& o) { return *this = *this - o; }
inline Var& Var::operator*=(const Var& o) { return *this = *this * o; }
inline Var& Var::operator/=(const Var& o) { return *this = *this / o; }

inline bool operator<(const Var& a, const Var& b) { return a.v < b.v; }
inline bool operator>(const Var& a, const Var& b) { return a.v > b.v; }

inline Var sqrt(const Var& a) {
  const double s = std::sqrt(a.v);
  return detail::unary(a, s, 0.5 / s);
}
inline Var abs(const Var& a) { return a.v < 0.0 ? -a : a; }
inline Var sin(const Var& a) { return detail::unary(a, std::sin(a.v), std::cos(a.v)); }
inline Var cos(const Var& a) { return detail::unary(a, std::cos(a.v), -std::sin(a.v)); }
inline Var exp(const Var& a) {
  const double e = std::exp(a.v);
  return detail::unary(a, e, e);
}

// ---------------------------------------------------------------------------
// Helpers shared by templated model code
// ---------------------------------------------------------------------------

inline double value_of(double x) { return x; }
inline double value_of(const Dual& x) { return x.v; }
inline double value_of(const Var& x) { return x.v; }

}  // namespace shadow::ad
