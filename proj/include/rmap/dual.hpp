#pragma once

#include <cmath>

namespace rmap {

// Forward-mode dual number.  Nesting Dual<Dual<double>> propagates second
// derivatives exactly: seed the outer tangent along direction i and the inner
// tangent along direction j, and d.d of the result is the mixed partial
// d2f/dxi dxj.
template <class T>
struct Dual {
  T v{};  // value
  T d{};  // tangent

  Dual() = default;
  Dual(T value) : v(value) {}
  Dual(T value, T tangent) : v(value), d(tangent) {}
};

inline double primal(double x) { return x; }
template <class T>
double primal(const Dual<T>& x) {
  return primal(x.v);
}

inline bool all_finite(double x) { return std::isfinite(x); }
template <class T>
bool all_finite(const Dual<T>& x) {
  return all_finite(x.v) && all_finite(x.d);
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
  T q = a.v / b.v;
  return {q, (a.d - q * b.d) / b.v};
}

using std::cos;
using std::exp;
using std::log;
using std::sin;
using std::sqrt;
using std::tan;

template <class T>
Dual<T> sin(const Dual<T>& x) {
  return {sin(x.v), cos(x.v) * x.d};
}
template <class T>
Dual<T> cos(const Dual<T>& x) {
  return {cos(x.v), -(sin(x.v) * x.d)};
}
template <class T>
Dual<T> tan(const Dual<T>& x) {
  T t = tan(x.v);
  return {t, (T(1) + t * t) * x.d};
}
template <class T>
Dual<T> exp(const Dual<T>& x) {
  T e = exp(x.v);
  return {e, e * x.d};
}
template <class T>
Dual<T> log(const Dual<T>& x) {
  return {log(x.v), x.d / x.v};
}
template <class T>
Dual<T> sqrt(const Dual<T>& x) {
  T r = sqrt(x.v);
  return {r, x.d / (T(2) * r)};
}

// Integer power by repeated squaring; works for any scalar with * and /.
template <class T>
T pow_int(T base, int n) {
  if (n < 0) return T(1) / pow_int(base, -n);
  T acc(1);
  T sq = base;
  while (n > 0) {
    if (n & 1) acc = acc * sq;
    sq = sq * sq;
    n >>= 1;
  }
  return acc;
}

}  // namespace rmap
