#pragma once

#include <cmath>
#include <type_traits>

#include "svsnn/error.hpp"

namespace svsnn::autodiff {

// Forward-mode carrier. Nesting Dual<Dual<double>> yields second derivatives;
// Dual<Var> records the tangent on a tape (reverse-over-forward).
template <class T>
struct Dual {
  T v{};
  T d{};

  Dual() = default;
  Dual(double x) : v(x), d(0.0) {}  // NOLINT(google-explicit-constructor)
  template <class U = T, class = std::enable_if_t<!std::is_same_v<U, double>>>
  Dual(const T& x) : v(x), d(0.0) {}  // NOLINT(google-explicit-constructor)
  Dual(const T& value, const T& tangent) : v(value), d(tangent) {}
};

using Dual1 = Dual<double>;
using Dual2 = Dual<Dual<double>>;

inline double primal(double x) { return x; }
template <class T>
double primal(const Dual<T>& x) {
  return primal(x.v);
}

template <class T>
Dual<T> operator+(const Dual<T>& a, const Dual<T>& b) {
  return {a.v + b.v, a.d + b.d};
}
template <class T>
Dual<T> operator-(const Dual<T>& a, const Dual<T>& b) {
  return {a.v - b.v, a.d - b.d};
}
template <class T>
Dual<T> operator-(const Dual<T>& a) {
  return {-a.v, -a.d};
}
template <class T>
Dual<T> operator*(const Dual<T>& a, const Dual<T>& b) {
  return {a.v * b.v, a.d * b.v + a.v * b.d};
}
template <class T>
Dual<T> operator/(const Dual<T>& a, const Dual<T>& b) {
  if (primal(b) == 0.0) throw EvaluationError("dual: division by zero");
  const T q = a.v / b.v;
  return {q, (a.d - q * b.d) / b.v};
}

template <class T>
Dual<T> operator+(const Dual<T>& a, double b) { return a + Dual<T>(b); }
template <class T>
Dual<T> operator+(double a, const Dual<T>& b) { return Dual<T>(a) + b; }
template <class T>
Dual<T> operator-(const Dual<T>& a, double b) { return a - Dual<T>(b); }
template <class T>
Dual<T> operator-(double a, const Dual<T>& b) { return Dual<T>(a) - b; }
template <class T>
Dual<T> operator*(const Dual<T>& a, double b) { return {a.v * b, a.d * b}; }
template <class T>
Dual<T> operator*(double a, const Dual<T>& b) { return {b.v * a, b.d * a}; }
template <class T>
Dual<T> operator/(const Dual<T>& a, double b) { return a / Dual<T>(b); }
template <class T>
Dual<T> operator/(double a, const Dual<T>& b) { return Dual<T>(a) / b; }

template <class T>
Dual<T>& operator+=(Dual<T>& a, const Dual<T>& b) { return a = a + b; }
template <class T>
Dual<T>& operator-=(Dual<T>& a, const Dual<T>& b) { return a = a - b; }
template <class T>
Dual<T>& operator*=(Dual<T>& a, const Dual<T>& b) { return a = a * b; }

template <class T>
Dual<T> sin(const Dual<T>& a) {
  using std::cos;
  using std::sin;
  return {sin(a.v), cos(a.v) * a.d};
}
template <class T>
Dual<T> cos(const Dual<T>& a) {
  using std::cos;
  using std::sin;
  return {cos(a.v), -(sin(a.v) * a.d)};
}
template <class T>
Dual<T> tanh(const Dual<T>& a) {
  using std::tanh;
  const T h = tanh(a.v);
  return {h, (T(1.0) - h * h) * a.d};
}
template <class T>
Dual<T> exp(const Dual<T>& a) {
  using std::exp;
  const T e = exp(a.v);
  return {e, e * a.d};
}
template <class T>
Dual<T> pow(const Dual<T>& a, double c) {
  using std::pow;
  const double base = primal(a);
  if (base < 0.0 && c != std::floor(c)) throw EvaluationError("dual: pow of negative base");
  if (base == 0.0 && c < 1.0 && c != 0.0) throw EvaluationError("dual: pow derivative undefined at 0");
  if (c == 0.0) return Dual<T>(1.0);
  return {pow(a.v, c), T(c) * pow(a.v, c - 1.0) * a.d};
}

}  // namespace svsnn::autodiff
