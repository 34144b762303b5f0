#pragma once

// Forward-mode automatic differentiation with a fixed-width tangent.
//
// Dual<double, N> carries a value and N directional derivatives. Nesting
// Dual<Dual<double, N>, N> yields exact second derivatives in one pass, which
// is how block Hessians are formed. Only smooth primitives are provided;
// min/max/abs are deliberately absent so that a model which needs them fails
// to compile instead of producing a kinked derivative.

#include <array>
#include <cmath>
#include <type_traits>

namespace raceopt::ad {

template <typename T, int N>
struct Dual;

template <typename T>
struct is_dual : std::false_type {};
template <typename T, int N>
struct is_dual<Dual<T, N>> : std::true_type {};

inline double value_of(double x) { return x; }
template <typename T, int N>
double value_of(const Dual<T, N>& x) {
  return value_of(x.v);
}

template <typename T, int N>
struct Dual {
  using Inner = T;
  static constexpr int width = N;

  T v{};
  std::array<T, N> d{};

  Dual() = default;
  Dual(double x) : v(x) {}  // NOLINT: constants promote implicitly
  Dual(int x) : v(static_cast<double>(x)) {}  // NOLINT
  explicit Dual(const T& x)
    requires(!std::is_same_v<T, double>)
      : v(x) {}

  /// Independent variable `i` with value x.
  static Dual variable(const T& x, int i) {
    Dual r(x, 0);
    r.d[static_cast<std::size_t>(i)] = T(1.0);
    return r;
  }

  Dual& operator+=(const Dual& o) {
    v += o.v;
    for (int i = 0; i < N; ++i) d[i] += o.d[i];
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    v -= o.v;
    for (int i = 0; i < N; ++i) d[i] -= o.d[i];
    return *this;
  }
  Dual& operator*=(const Dual& o) { return *this = *this * o; }
  Dual& operator/=(const Dual& o) { return *this = *this / o; }

  friend Dual operator+(const Dual& a, const Dual& b) {
    Dual r(a.v + b.v, 0);
    for (int i = 0; i < N; ++i) r.d[i] = a.d[i] + b.d[i];
    return r;
  }
  friend Dual operator-(const Dual& a, const Dual& b) {
    Dual r(a.v - b.v, 0);
    for (int i = 0; i < N; ++i) r.d[i] = a.d[i] - b.d[i];
    return r;
  }
  friend Dual operator-(const Dual& a) {
    Dual r(-a.v, 0);
    for (int i = 0; i < N; ++i) r.d[i] = -a.d[i];
    return r;
  }
  friend Dual operator*(const Dual& a, const Dual& b) {
    Dual r(a.v * b.v, 0);
    for (int i = 0; i < N; ++i) r.d[i] = a.v * b.d[i] + a.d[i] * b.v;
    return r;
  }
  friend Dual operator/(const Dual& a, const Dual& b) {
    const T inv = T(1.0) / b.v;
    const T q = a.v * inv;
    Dual r(q, 0);
    for (int i = 0; i < N; ++i) r.d[i] = (a.d[i] - q * b.d[i]) * inv;
    return r;
  }

  // Scalar-constant overloads avoid promoting a constant to a full dual.
  friend Dual operator+(const Dual& a, double b) {
    Dual r = a;
    r.v += b;
    return r;
  }
  friend Dual operator+(double a, const Dual& b) { return b + a; }
  friend Dual operator-(const Dual& a, double b) {
    Dual r = a;
    r.v -= b;
    return r;
  }
  friend Dual operator-(double a, const Dual& b) {
    Dual r(a - b.v, 0);
    for (int i = 0; i < N; ++i) r.d[i] = -b.d[i];
    return r;
  }
  friend Dual operator*(const Dual& a, double b) {
    Dual r(a.v * b, 0);
    for (int i = 0; i < N; ++i) r.d[i] = a.d[i] * b;
    return r;
  }
  friend Dual operator*(double a, const Dual& b) { return b * a; }
  friend Dual operator/(const Dual& a, double b) { return a * (1.0 / b); }
  friend Dual operator/(double a, const Dual& b) {
    const T inv = T(1.0) / b.v;
    const T q = a * inv;
    Dual r(q, 0);
    for (int i = 0; i < N; ++i) r.d[i] = -q * b.d[i] * inv;
    return r;
  }

  friend bool operator<(const Dual& a, const Dual& b) { return value_of(a) < value_of(b); }
  friend bool operator>(const Dual& a, const Dual& b) { return value_of(a) > value_of(b); }
  friend bool operator<(const Dual& a, double b) { return value_of(a) < b; }
  friend bool operator>(const Dual& a, double b) { return value_of(a) > b; }
  friend bool operator<(double a, const Dual& b) { return a < value_of(b); }
  friend bool operator>(double a, const Dual& b) { return a > value_of(b); }

 private:
  Dual(const T& x, int /*tag*/) : v(x) {}

  // f(a) given f(a.v) and f'(a.v).
  static Dual chain(const Dual& a, const T& f, const T& df) {
    Dual r(f, 0);
    for (int i = 0; i < N; ++i) r.d[i] = df * a.d[i];
    return r;
  }

  friend Dual sin(const Dual& a) {
    using std::cos;
    using std::sin;
    return chain(a, sin(a.v), cos(a.v));
  }
  friend Dual cos(const Dual& a) {
    using std::cos;
    using std::sin;
    return chain(a, cos(a.v), -sin(a.v));
  }
  friend Dual tan(const Dual& a) {
    using std::tan;
    const T t = tan(a.v);
    return chain(a, t, T(1.0) + t * t);
  }
  friend Dual atan(const Dual& a) {
    using std::atan;
    return chain(a, atan(a.v), T(1.0) / (T(1.0) + a.v * a.v));
  }
  friend Dual sqrt(const Dual& a) {
    using std::sqrt;
    const T s = sqrt(a.v);
    return chain(a, s, T(0.5) / s);
  }
  friend Dual exp(const Dual& a) {
    using std::exp;
    const T e = exp(a.v);
    return chain(a, e, e);
  }
  friend Dual log(const Dual& a) {
    using std::log;
    return chain(a, log(a.v), T(1.0) / a.v);
  }
  friend Dual pow(const Dual& a, double p) {
    using std::pow;
    return chain(a, pow(a.v, p), p * pow(a.v, p - 1.0));
  }
};

/// x*x without a pow() call.
template <typename T>
T square(const T& x) {
  return x * x;
}

/// Jacobian-width dual.
template <int N>
using Jet = Dual<double, N>;

/// Second-order dual used for exact block Hessians.
template <int N>
using Jet2 = Dual<Dual<double, N>, N>;

}  // namespace raceopt::ad
