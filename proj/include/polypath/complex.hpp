#pragma once
// Complex arithmetic over the extended-precision scalars.

#include "polypath/xprec.hpp"

namespace polypath {

template <class R>
struct Cplx {
  R re{};
  R im{};

  constexpr Cplx() = default;
  constexpr Cplx(R r) : re(r), im(R{}) {}
  constexpr Cplx(R r, R i) : re(r), im(i) {}
};

using CplxD = Cplx<double>;
using CplxDD = Cplx<DD>;
using CplxQD = Cplx<QD>;

template <class R>
inline Cplx<R> operator-(Cplx<R> a) {
  return {-a.re, -a.im};
}

template <class R>
inline Cplx<R> operator+(Cplx<R> a, Cplx<R> b) {
  return {a.re + b.re, a.im + b.im};
}

template <class R>
inline Cplx<R> operator-(Cplx<R> a, Cplx<R> b) {
  return {a.re - b.re, a.im - b.im};
}

template <class R>
inline Cplx<R> operator*(Cplx<R> a, Cplx<R> b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}

// scale by a real at the same level
template <class R>
inline Cplx<R> operator*(Cplx<R> a, R s) {
  return {a.re * s, a.im * s};
}

template <class R>
inline Cplx<R> operator*(R s, Cplx<R> a) {
  return a * s;
}

inline Cplx<DD> operator*(Cplx<DD> a, double s) { return {a.re * s, a.im * s}; }
inline Cplx<QD> operator*(Cplx<QD> a, double s) { return {a.re * s, a.im * s}; }

template <class R>
inline Cplx<R>& operator+=(Cplx<R>& a, Cplx<R> b) {
  return a = a + b;
}

template <class R>
inline Cplx<R>& operator-=(Cplx<R>& a, Cplx<R> b) {
  return a = a - b;
}

template <class R>
inline Cplx<R>& operator*=(Cplx<R>& a, Cplx<R> b) {
  return a = a * b;
}

template <class R>
inline Cplx<R> conj(Cplx<R> a) {
  return {a.re, -a.im};
}

template <class R>
inline R abs2(Cplx<R> a) {
  return a.re * a.re + a.im * a.im;
}

template <class R>
inline R cabs(Cplx<R> a) {
  using polypath::sqrt;
  using std::sqrt;
  return sqrt(abs2(a));
}

template <class R>
inline bool is_zero(Cplx<R> a) {
  return compare(a.re, R{}) == 0 && compare(a.im, R{}) == 0;
}

// Smith's scaling formulation; avoids spurious overflow of re^2 + im^2.
template <class R>
inline Cplx<R> operator/(Cplx<R> a, Cplx<R> b) {
  using polypath::fabs;
  using std::fabs;
  if (is_zero(b)) throw std::domain_error("complex division by zero");
  if (compare(fabs(b.re), fabs(b.im)) >= 0) {
    R r = b.im / b.re;
    R den = b.re + b.im * r;
    return {(a.re + a.im * r) / den, (a.im - a.re * r) / den};
  }
  R r = b.re / b.im;
  R den = b.im + b.re * r;
  return {(a.re * r + a.im) / den, (a.im * r - a.re) / den};
}

template <class R>
inline Cplx<R>& operator/=(Cplx<R>& a, Cplx<R> b) {
  return a = a / b;
}

template <class R>
inline bool operator==(Cplx<R> a, Cplx<R> b) {
  return compare(a.re, b.re) == 0 && compare(a.im, b.im) == 0;
}

template <class To, class From>
inline Cplx<To> convert_cplx(Cplx<From> z) {
  return {convert<To>(z.re), convert<To>(z.im)};
}

template <class R>
inline Cplx<double> to_cplx_double(Cplx<R> z) {
  return {to_double(z.re), to_double(z.im)};
}

template <class R>
inline bool isfinite(Cplx<R> z) {
  using polypath::isfinite;
  using std::isfinite;
  return isfinite(z.re) && isfinite(z.im);
}

}  // namespace polypath
