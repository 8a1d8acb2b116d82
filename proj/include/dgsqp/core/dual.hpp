#pragma once

#include <array>
#include <cmath>
#include <type_traits>

namespace dgsqp::ad {

// Forward-mode dual number carrying K directional derivatives per sweep.
// Nesting Dual<Dual<double, K>, K> propagates exact second derivatives.
template <class T, int K>
struct Dual {
  T v;
  std::array<T, K> d;

  Dual() : v(T(0)) { d.fill(T(0)); }
  Dual(double c) : v(c) { d.fill(T(0)); }  // NOLINT: implicit constants
  Dual(const T& value_part) requires(!std::is_same_v<T, double>)
      : v(value_part) {
    d.fill(T(0));
  }

  Dual& operator+=(const Dual& o) {
    v += o.v;
    for (int i = 0; i < K; ++i) d[i] += o.d[i];
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    v -= o.v;
    for (int i = 0; i < K; ++i) d[i] -= o.d[i];
    return *this;
  }
  Dual& operator*=(const Dual& o) { return *this = *this * o; }

  friend Dual operator+(const Dual& a, const Dual& b) {
    Dual r;
    r.v = a.v + b.v;
    for (int i = 0; i < K; ++i) r.d[i] = a.d[i] + b.d[i];
    return r;
  }
  friend Dual operator-(const Dual& a, const Dual& b) {
    Dual r;
    r.v = a.v - b.v;
    for (int i = 0; i < K; ++i) r.d[i] = a.d[i] - b.d[i];
    return r;
  }
  friend Dual operator-(const Dual& a) {
    Dual r;
    r.v = -a.v;
    for (int i = 0; i < K; ++i) r.d[i] = -a.d[i];
    return r;
  }
  friend Dual operator*(const Dual& a, const Dual& b) {
    Dual r;
    r.v = a.v * b.v;
    for (int i = 0; i < K; ++i) r.d[i] = a.d[i] * b.v + a.v * b.d[i];
    return r;
  }
  friend Dual operator/(const Dual& a, const Dual& b) {
    Dual r;
    r.v = a.v / b.v;
    for (int i = 0; i < K; ++i) r.d[i] = (a.d[i] - r.v * b.d[i]) / b.v;
    return r;
  }
};

inline double value(double x) { return x; }
template <class T, int K>
double value(const Dual<T, K>& x) {
  return value(x.v);
}

template <class U>
concept Arithmetic = std::is_arithmetic_v<U>;

// Mixed scalar/dual arithmetic keeps constants out of the derivative loops.
template <class T, int K, Arithmetic U>
Dual<T, K> operator+(const Dual<T, K>& a, U b) {
  Dual<T, K> r = a;
  r.v += static_cast<double>(b);
  return r;
}
template <class T, int K, Arithmetic U>
Dual<T, K> operator+(U a, const Dual<T, K>& b) {
  return b + a;
}
template <class T, int K, Arithmetic U>
Dual<T, K> operator-(const Dual<T, K>& a, U b) {
  Dual<T, K> r = a;
  r.v -= static_cast<double>(b);
  return r;
}
template <class T, int K, Arithmetic U>
Dual<T, K> operator-(U a, const Dual<T, K>& b) {
  Dual<T, K> r = -b;
  r.v += static_cast<double>(a);
  return r;
}
template <class T, int K, Arithmetic U>
Dual<T, K> operator*(const Dual<T, K>& a, U b) {
  Dual<T, K> r;
  r.v = a.v * static_cast<double>(b);
  for (int i = 0; i < K; ++i) r.d[i] = a.d[i] * static_cast<double>(b);
  return r;
}
template <class T, int K, Arithmetic U>
Dual<T, K> operator*(U a, const Dual<T, K>& b) {
  return b * a;
}
template <class T, int K, Arithmetic U>
Dual<T, K> operator/(const Dual<T, K>& a, U b) {
  return a * (1.0 / static_cast<double>(b));
}
template <class T, int K, Arithmetic U>
Dual<T, K> operator/(U a, const Dual<T, K>& b) {
  Dual<T, K> r;
  r.v = static_cast<double>(a) / b.v;
  for (int i = 0; i < K; ++i) r.d[i] = -(r.v / b.v) * b.d[i];
  return r;
}

template <class T, int K>
bool operator<(const Dual<T, K>& a, const Dual<T, K>& b) {
  return value(a) < value(b);
}
template <class T, int K>
bool operator>(const Dual<T, K>& a, const Dual<T, K>& b) {
  return value(a) > value(b);
}
template <class T, int K>
bool operator<=(const Dual<T, K>& a, const Dual<T, K>& b) {
  return value(a) <= value(b);
}
template <class T, int K>
bool operator>=(const Dual<T, K>& a, const Dual<T, K>& b) {
  return value(a) >= value(b);
}
template <class T, int K, Arithmetic U>
bool operator<(const Dual<T, K>& a, U b) {
  return value(a) < static_cast<double>(b);
}
template <class T, int K, Arithmetic U>
bool operator<(U a, const Dual<T, K>& b) {
  return static_cast<double>(a) < value(b);
}
template <class T, int K, Arithmetic U>
bool operator>(const Dual<T, K>& a, U b) {
  return value(a) > static_cast<double>(b);
}
template <class T, int K, Arithmetic U>
bool operator>(U a, const Dual<T, K>& b) {
  return static_cast<double>(a) > value(b);
}
template <class T, int K, Arithmetic U>
bool operator<=(const Dual<T, K>& a, U b) {
  return value(a) <= static_cast<double>(b);
}
template <class T, int K, Arithmetic U>
bool operator>=(const Dual<T, K>& a, U b) {
  return value(a) >= static_cast<double>(b);
}

template <class T, int K>
Dual<T, K> sin(const Dual<T, K>& x) {
  using std::cos;
  using std::sin;
  Dual<T, K> r;
  r.v = sin(x.v);
  T c = cos(x.v);
  for (int i = 0; i < K; ++i) r.d[i] = c * x.d[i];
  return r;
}
template <class T, int K>
Dual<T, K> cos(const Dual<T, K>& x) {
  using std::cos;
  using std::sin;
  Dual<T, K> r;
  r.v = cos(x.v);
  T ms = -sin(x.v);
  for (int i = 0; i < K; ++i) r.d[i] = ms * x.d[i];
  return r;
}
template <class T, int K>
Dual<T, K> tan(const Dual<T, K>& x) {
  using std::cos;
  using std::tan;
  Dual<T, K> r;
  r.v = tan(x.v);
  T c = cos(x.v);
  T w = 1.0 / (c * c);
  for (int i = 0; i < K; ++i) r.d[i] = w * x.d[i];
  return r;
}
template <class T, int K>
Dual<T, K> atan(const Dual<T, K>& x) {
  using std::atan;
  Dual<T, K> r;
  r.v = atan(x.v);
  T w = 1.0 / (1.0 + x.v * x.v);
  for (int i = 0; i < K; ++i) r.d[i] = w * x.d[i];
  return r;
}
template <class T, int K>
Dual<T, K> atan2(const Dual<T, K>& y, const Dual<T, K>& x) {
  using std::atan2;
  Dual<T, K> r;
  r.v = atan2(y.v, x.v);
  T w = 1.0 / (x.v * x.v + y.v * y.v);
  for (int i = 0; i < K; ++i) r.d[i] = w * (x.v * y.d[i] - y.v * x.d[i]);
  return r;
}
template <class T, int K>
Dual<T, K> sqrt(const Dual<T, K>& x) {
  using std::sqrt;
  Dual<T, K> r;
  r.v = sqrt(x.v);
  T w = 0.5 / r.v;
  for (int i = 0; i < K; ++i) r.d[i] = w * x.d[i];
  return r;
}
template <class T, int K>
Dual<T, K> exp(const Dual<T, K>& x) {
  using std::exp;
  Dual<T, K> r;
  r.v = exp(x.v);
  for (int i = 0; i < K; ++i) r.d[i] = r.v * x.d[i];
  return r;
}
template <class T, int K>
Dual<T, K> log(const Dual<T, K>& x) {
  using std::log;
  Dual<T, K> r;
  r.v = log(x.v);
  for (int i = 0; i < K; ++i) r.d[i] = x.d[i] / x.v;
  return r;
}
template <class T, int K>
Dual<T, K> pow(const Dual<T, K>& x, double p) {
  using std::pow;
  Dual<T, K> r;
  r.v = pow(x.v, p);
  T w = p * pow(x.v, p - 1.0);
  for (int i = 0; i < K; ++i) r.d[i] = w * x.d[i];
  return r;
}
template <class T, int K>
Dual<T, K> abs(const Dual<T, K>& x) {
  return value(x) < 0.0 ? -x : x;
}
template <class T, int K>
const Dual<T, K>& min(const Dual<T, K>& a, const Dual<T, K>& b) {
  return value(b) < value(a) ? b : a;
}
template <class T, int K>
const Dual<T, K>& max(const Dual<T, K>& a, const Dual<T, K>& b) {
  return value(a) < value(b) ? b : a;
}

}  // namespace dgsqp::ad
