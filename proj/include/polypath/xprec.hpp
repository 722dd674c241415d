#pragma once
// Error-free transforms and double-double / quad-double arithmetic.
//
// A DD/QD value is an unevaluated sum of 2/4 doubles whose limbs are
// non-overlapping and decreasing in magnitude.  Additions use the accurate
// (IEEE-style) variants; products use a symmetrized accumulation so that
// a*b == b*a bitwise.  No subnormal-range guarantees: callers keep
// magnitudes inside roughly [2^-500, 2^500].

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <type_traits>

namespace polypath {

// ---------------------------------------------------------------------------
// error-free transforms on binary64
// ---------------------------------------------------------------------------

// s + err == a + b, assuming |a| >= |b| or a == 0
inline double quick_two_sum(double a, double b, double& err) {
  double s = a + b;
  err = b - (s - a);
  return s;
}

// s + err == a + b for any finite a, b
inline double two_sum(double a, double b, double& err) {
  double s = a + b;
  double bb = s - a;
  err = (a - (s - bb)) + (b - bb);
  return s;
}

// p + err == a * b, via fused multiply-add
inline double two_prod(double a, double b, double& err) {
  double p = a * b;
  err = std::fma(a, b, -p);
  return p;
}

// Dekker splitting variant of two_prod; same outputs as the fma form in the
// non-overflow range (both are exact).
inline void dekker_split(double a, double& hi, double& lo) {
  constexpr double split = 134217729.0;  // 2^27 + 1
  double t = split * a;
  hi = t - (t - a);
  lo = a - hi;
}

inline double two_prod_dekker(double a, double b, double& err) {
  double p = a * b;
  double ah, al, bh, bl;
  dekker_split(a, ah, al);
  dekker_split(b, bh, bl);
  err = ((ah * bh - p) + ah * bl + al * bh) + al * bl;
  return p;
}

namespace detail {

// (a, b, c) -> (s0, s1, s2) with s0+s1+s2 == a+b+c, s0 = fl(a+b+c)
inline void three_sum(double& a, double& b, double& c) {
  double t1, t2, t3;
  t1 = two_sum(a, b, t2);
  a = two_sum(c, t1, t3);
  b = two_sum(t2, t3, c);
}

// like three_sum but only two outputs survive
inline void three_sum2(double& a, double& b, double c) {
  double t1, t2, t3;
  t1 = two_sum(a, b, t2);
  a = two_sum(c, t1, t3);
  b = t2 + t3;
}

inline void renorm(double& c0, double& c1, double& c2, double& c3) {
  double s0, s1, s2 = 0.0, s3 = 0.0;
  if (std::isinf(c0)) return;

  s0 = quick_two_sum(c2, c3, c3);
  s0 = quick_two_sum(c1, s0, c2);
  c0 = quick_two_sum(c0, s0, c1);

  s0 = c0;
  s1 = c1;
  if (s1 != 0.0) {
    s1 = quick_two_sum(s1, c2, s2);
    if (s2 != 0.0)
      s2 = quick_two_sum(s2, c3, s3);
    else
      s1 = quick_two_sum(s1, c3, s2);
  } else {
    s0 = quick_two_sum(s0, c2, s1);
    if (s1 != 0.0)
      s1 = quick_two_sum(s1, c3, s2);
    else
      s0 = quick_two_sum(s0, c3, s1);
  }
  c0 = s0;
  c1 = s1;
  c2 = s2;
  c3 = s3;
}

inline void renorm(double& c0, double& c1, double& c2, double& c3, double& c4) {
  double s0, s1, s2 = 0.0, s3 = 0.0;
  if (std::isinf(c0)) return;

  s0 = quick_two_sum(c3, c4, c4);
  s0 = quick_two_sum(c2, s0, c3);
  s0 = quick_two_sum(c1, s0, c2);
  c0 = quick_two_sum(c0, s0, c1);

  s0 = c0;
  s1 = c1;
  if (s1 != 0.0) {
    s1 = quick_two_sum(s1, c2, s2);
    if (s2 != 0.0) {
      s2 = quick_two_sum(s2, c3, s3);
      if (s3 != 0.0)
        s3 += c4;
      else
        s2 = quick_two_sum(s2, c4, s3);
    } else {
      s1 = quick_two_sum(s1, c3, s2);
      if (s2 != 0.0)
        s2 = quick_two_sum(s2, c4, s3);
      else
        s1 = quick_two_sum(s1, c4, s2);
    }
  } else {
    s0 = quick_two_sum(s0, c2, s1);
    if (s1 != 0.0) {
      s1 = quick_two_sum(s1, c3, s2);
      if (s2 != 0.0)
        s2 = quick_two_sum(s2, c4, s3);
      else
        s1 = quick_two_sum(s1, c4, s2);
    } else {
      s0 = quick_two_sum(s0, c3, s1);
      if (s1 != 0.0)
        s1 = quick_two_sum(s1, c4, s2);
      else
        s0 = quick_two_sum(s0, c4, s1);
    }
  }
  c0 = s0;
  c1 = s1;
  c2 = s2;
  c3 = s3;
}

// merge step of the accurate quad-double addition
inline double quick_three_accum(double& a, double& b, double c) {
  double s;
  bool za, zb;
  s = two_sum(b, c, b);
  s = two_sum(a, s, a);
  za = (a != 0.0);
  zb = (b != 0.0);
  if (za && zb) return s;
  if (!zb) {
    b = a;
    a = s;
  } else {
    a = s;
  }
  return 0.0;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// double-double
// ---------------------------------------------------------------------------

struct DD {
  double hi = 0.0;
  double lo = 0.0;

  constexpr DD() = default;
  constexpr DD(double h) : hi(h), lo(0.0) {}
  constexpr DD(double h, double l) : hi(h), lo(l) {}
};

inline DD dd_norm(double hi, double lo) {
  double e;
  double s = quick_two_sum(hi, lo, e);
  return DD{s, e};
}

inline DD operator-(DD a) { return DD{-a.hi, -a.lo}; }

inline DD operator+(DD a, DD b) {
  double e1, e2;
  double s = two_sum(a.hi, b.hi, e1);
  double t = two_sum(a.lo, b.lo, e2);
  e1 += t;
  s = quick_two_sum(s, e1, e1);
  e1 += e2;
  return dd_norm(s, e1);
}

inline DD operator+(DD a, double b) {
  double e;
  double s = two_sum(a.hi, b, e);
  e += a.lo;
  return dd_norm(s, e);
}

inline DD operator+(double a, DD b) { return b + a; }

inline DD operator-(DD a, DD b) { return a + (-b); }
inline DD operator-(DD a, double b) { return a + (-b); }
inline DD operator-(double a, DD b) { return (-b) + a; }

// cross terms are merged pairwise so that a*b == b*a bitwise
inline DD operator*(DD a, DD b) {
  double e;
  double p = two_prod(a.hi, b.hi, e);
  double cross = a.hi * b.lo + a.lo * b.hi;
  double low = e + (cross + a.lo * b.lo);
  return dd_norm(p, low);
}

inline DD operator*(DD a, double b) {
  double e;
  double p = two_prod(a.hi, b, e);
  double low = std::fma(a.lo, b, e);
  return dd_norm(p, low);
}

inline DD operator*(double a, DD b) { return b * a; }

inline DD operator/(DD a, DD b) {
  if (b.hi == 0.0 && b.lo == 0.0)
    throw std::domain_error("xprec: double-double division by zero");
  double q1 = a.hi / b.hi;
  DD r = a - b * q1;
  double q2 = r.hi / b.hi;
  r = r - b * q2;
  double q3 = r.hi / b.hi;
  double e;
  double s = quick_two_sum(q1, q2, e);
  return DD{s, e} + q3;
}

inline DD operator/(DD a, double b) { return a / DD{b}; }
inline DD operator/(double a, DD b) { return DD{a} / b; }

inline DD& operator+=(DD& a, DD b) { return a = a + b; }
inline DD& operator-=(DD& a, DD b) { return a = a - b; }
inline DD& operator*=(DD& a, DD b) { return a = a * b; }
inline DD& operator/=(DD& a, DD b) { return a = a / b; }

// value comparison; assumes renormalized operands
inline int compare(DD a, DD b) {
  if (a.hi < b.hi) return -1;
  if (a.hi > b.hi) return 1;
  if (a.lo < b.lo) return -1;
  if (a.lo > b.lo) return 1;
  return 0;
}

inline bool operator==(DD a, DD b) { return compare(a, b) == 0; }
inline bool operator!=(DD a, DD b) { return compare(a, b) != 0; }
inline bool operator<(DD a, DD b) { return compare(a, b) < 0; }
inline bool operator>(DD a, DD b) { return compare(a, b) > 0; }
inline bool operator<=(DD a, DD b) { return compare(a, b) <= 0; }
inline bool operator>=(DD a, DD b) { return compare(a, b) >= 0; }

inline DD fabs(DD a) { return a.hi < 0.0 ? -a : a; }

inline double to_double(DD a) { return a.hi + a.lo; }

inline bool isfinite(DD a) { return std::isfinite(a.hi); }

inline DD sqrt(DD a) {
  if (a.hi == 0.0 && a.lo == 0.0) return DD{};
  if (a.hi < 0.0) throw std::domain_error("xprec: sqrt of negative value");
  double x = 1.0 / std::sqrt(a.hi);
  double ax = a.hi * x;
  DD ax2 = DD{ax} * DD{ax};
  double e;
  double s = two_sum(ax, (a - ax2).hi * (x * 0.5), e);
  return DD{s, e};
}

// ---------------------------------------------------------------------------
// quad-double
// ---------------------------------------------------------------------------

struct QD {
  std::array<double, 4> limb{0.0, 0.0, 0.0, 0.0};

  constexpr QD() = default;
  constexpr QD(double x) : limb{x, 0.0, 0.0, 0.0} {}
  constexpr QD(double a, double b, double c, double d) : limb{a, b, c, d} {}
  explicit constexpr QD(DD x) : limb{x.hi, x.lo, 0.0, 0.0} {}

  double operator[](int i) const { return limb[static_cast<size_t>(i)]; }
};

inline QD qd_renorm(double c0, double c1, double c2, double c3) {
  detail::renorm(c0, c1, c2, c3);
  return QD{c0, c1, c2, c3};
}

inline QD qd_renorm(double c0, double c1, double c2, double c3, double c4) {
  detail::renorm(c0, c1, c2, c3, c4);
  return QD{c0, c1, c2, c3};
}

inline QD operator-(QD a) { return QD{-a[0], -a[1], -a[2], -a[3]}; }

// Accurate (merge-based) addition.  Limbs of both operands are merged in
// decreasing magnitude through an exact two-term accumulator; the
// accumulator tail and any unconsumed limbs are folded through a fifth
// renormalization channel so no content above the representation limit is
// dropped.
inline QD operator+(QD a, QD b) {
  int i = 0, j = 0, k = 0;
  double s, t;
  double u, v;
  double x[4] = {0.0, 0.0, 0.0, 0.0};
  double x4 = 0.0;

  if (std::fabs(a[i]) > std::fabs(b[j]))
    u = a.limb[static_cast<size_t>(i++)];
  else
    u = b.limb[static_cast<size_t>(j++)];
  if (std::fabs(a[i]) > std::fabs(b[j]))
    v = a.limb[static_cast<size_t>(i++)];
  else
    v = b.limb[static_cast<size_t>(j++)];

  u = quick_two_sum(u, v, v);

  while (k < 4) {
    if (i >= 4 && j >= 4) {
      x[k] = u;
      if (k < 3)
        x[++k] = v;
      else
        x4 = v;
      u = v = 0.0;
      break;
    }

    if (i >= 4)
      t = b.limb[static_cast<size_t>(j++)];
    else if (j >= 4)
      t = a.limb[static_cast<size_t>(i++)];
    else if (std::fabs(a[i]) > std::fabs(b[j]))
      t = a.limb[static_cast<size_t>(i++)];
    else
      t = b.limb[static_cast<size_t>(j++)];

    s = detail::quick_three_accum(u, v, t);
    if (s != 0.0) x[k++] = s;
  }
  if (k >= 4) x4 = u + v;

  // unconsumed limbs, in decreasing magnitude so the fold is symmetric
  while (i < 4 || j < 4) {
    if (i >= 4)
      t = b.limb[static_cast<size_t>(j++)];
    else if (j >= 4)
      t = a.limb[static_cast<size_t>(i++)];
    else if (std::fabs(a[i]) > std::fabs(b[j]))
      t = a.limb[static_cast<size_t>(i++)];
    else
      t = b.limb[static_cast<size_t>(j++)];
    x4 += t;
  }

  return qd_renorm(x[0], x[1], x[2], x[3], x4);
}

inline QD operator+(QD a, double b) {
  double e;
  double c0 = two_sum(a[0], b, e);
  double c1 = two_sum(a[1], e, e);
  double c2 = two_sum(a[2], e, e);
  double c3 = two_sum(a[3], e, e);
  return qd_renorm(c0, c1, c2, c3, e);
}

inline QD operator+(double a, QD b) { return b + a; }

inline QD operator-(QD a, QD b) { return a + (-b); }
inline QD operator-(QD a, double b) { return a + (-b); }
inline QD operator-(double a, QD b) { return (-b) + a; }

inline QD operator*(QD a, double b) {
  double q0, q1, q2;
  double p0 = two_prod(a[0], b, q0);
  double p1 = two_prod(a[1], b, q1);
  double p2 = two_prod(a[2], b, q2);
  double p3 = a[3] * b;

  double s0 = p0;
  double s2;
  double s1 = two_sum(q0, p1, s2);

  detail::three_sum(s2, q1, p2);
  detail::three_sum2(q1, q2, p3);
  double s3 = q1;
  double s4 = q2 + p2;

  return qd_renorm(s0, s1, s2, s3, s4);
}

inline QD operator*(double a, QD b) { return b * a; }

// Accurate product.  Cross products a_i*b_j + a_j*b_i of equal order are
// merged with two_sum before entering the accumulation, so a*b == b*a
// bitwise (two_sum results are symmetric in their arguments).
inline QD operator*(QD a, QD b) {
  double q0;
  double p0 = two_prod(a[0], b[0], q0);  // u^0 head, q0 ~ u

  // order u: a0*b1 + a1*b0
  double xe1, ye1;
  double x1 = two_prod(a[0], b[1], xe1);
  double y1 = two_prod(a[1], b[0], ye1);
  double cr1e;
  double cr1 = two_sum(x1, y1, cr1e);
  double h1e;
  double h1 = two_sum(cr1, q0, h1e);  // u head

  // order u^2: a0*b2 + a2*b0, a1*b1, plus carries
  double xe2, ye2;
  double x2 = two_prod(a[0], b[2], xe2);
  double y2 = two_prod(a[2], b[0], ye2);
  double cr2e;
  double cr2 = two_sum(x2, y2, cr2e);
  double q12e;
  double q12 = two_sum(xe1, ye1, q12e);
  double dge;
  double dg = two_prod(a[1], b[1], dge);

  double e1, e2, e3, e4;
  double v1 = two_sum(h1e, cr1e, e1);
  double v2 = two_sum(q12, cr2, e2);
  double v3 = two_sum(v1, v2, e3);
  double s2 = two_sum(v3, dg, e4);  // u^2 head

  // order u^3: a0*b3 + a3*b0, a1*b2 + a2*b1, plus carries
  double xe3, ye3, xe4, ye4;
  double x3 = two_prod(a[0], b[3], xe3);
  double y3 = two_prod(a[3], b[0], ye3);
  double cr3e;
  double cr3 = two_sum(x3, y3, cr3e);
  double x4 = two_prod(a[1], b[2], xe4);
  double y4 = two_prod(a[2], b[1], ye4);
  double cr4e;
  double cr4 = two_sum(x4, y4, cr4e);
  double q22e;
  double q22 = two_sum(xe2, ye2, q22e);

  double f1, f2, f3, f4, f5, f6, f7, f8, f9;
  double t1 = two_sum(e1, e2, f1);
  double t2 = two_sum(e3, e4, f2);
  double t3 = two_sum(q12e, cr2e, f3);
  double t4 = two_sum(q22, dge, f4);
  double t5 = two_sum(cr3, cr4, f5);
  double t6 = two_sum(t1, t2, f6);
  double t7 = two_sum(t3, t4, f7);
  double t8 = two_sum(t6, t7, f8);
  double s3 = two_sum(t8, t5, f9);  // u^3 head

  // order u^4 tail; terms of order u^5 and beyond are dropped
  double tail = ((f1 + f2) + (f3 + f4)) + ((f5 + f6) + (f7 + f8)) + f9 +
                ((q22e + cr3e) + cr4e) + ((xe3 + ye3) + (xe4 + ye4)) +
                ((a[1] * b[3] + a[3] * b[1]) + a[2] * b[2]);

  return qd_renorm(p0, h1, s2, s3, tail);
}

inline QD operator/(QD a, QD b) {
  if (b[0] == 0.0 && b[1] == 0.0 && b[2] == 0.0 && b[3] == 0.0)
    throw std::domain_error("xprec: quad-double division by zero");
  double q0 = a[0] / b[0];
  QD r = a - b * q0;
  double q1 = r[0] / b[0];
  r = r - b * q1;
  double q2 = r[0] / b[0];
  r = r - b * q2;
  double q3 = r[0] / b[0];
  r = r - b * q3;
  double q4 = r[0] / b[0];
  return qd_renorm(q0, q1, q2, q3, q4);
}

inline QD operator/(QD a, double b) { return a / QD{b}; }
inline QD operator/(double a, QD b) { return QD{a} / b; }

inline QD& operator+=(QD& a, QD b) { return a = a + b; }
inline QD& operator-=(QD& a, QD b) { return a = a - b; }
inline QD& operator*=(QD& a, QD b) { return a = a * b; }
inline QD& operator/=(QD& a, QD b) { return a = a / b; }

inline int compare(QD a, QD b) {
  for (int i = 0; i < 4; ++i) {
    if (a[i] < b[i]) return -1;
    if (a[i] > b[i]) return 1;
  }
  return 0;
}

inline bool operator==(QD a, QD b) { return compare(a, b) == 0; }
inline bool operator!=(QD a, QD b) { return compare(a, b) != 0; }
inline bool operator<(QD a, QD b) { return compare(a, b) < 0; }
inline bool operator>(QD a, QD b) { return compare(a, b) > 0; }
inline bool operator<=(QD a, QD b) { return compare(a, b) <= 0; }
inline bool operator>=(QD a, QD b) { return compare(a, b) >= 0; }

inline QD fabs(QD a) { return a[0] < 0.0 ? -a : a; }

inline double to_double(QD a) { return ((a[3] + a[2]) + a[1]) + a[0]; }

inline bool isfinite(QD a) { return std::isfinite(a[0]); }

inline QD mul_pow2(QD a, double p) { return QD{a[0] * p, a[1] * p, a[2] * p, a[3] * p}; }

inline QD sqrt(QD a) {
  if (a[0] == 0.0 && a[1] == 0.0 && a[2] == 0.0 && a[3] == 0.0) return QD{};
  if (a[0] < 0.0) throw std::domain_error("xprec: sqrt of negative value");
  // Newton iteration on 1/sqrt(a), then one multiply by a
  QD r{1.0 / std::sqrt(a[0])};
  QD h = mul_pow2(a, 0.5);
  r += (0.5 - h * (r * r)) * r;
  r += (0.5 - h * (r * r)) * r;
  r += (0.5 - h * (r * r)) * r;
  return r * a;
}

// ---------------------------------------------------------------------------
// precision levels and conversions
// ---------------------------------------------------------------------------

enum class Precision : uint8_t { d, dd, qd };

template <class R>
struct precision_traits;

template <>
struct precision_traits<double> {
  static constexpr Precision level = Precision::d;
  static constexpr int limbs = 1;
  static constexpr double eps = 0x1p-53;
  static constexpr int digits10 = 17;
  static constexpr const char* name = "d";
};

template <>
struct precision_traits<DD> {
  static constexpr Precision level = Precision::dd;
  static constexpr int limbs = 2;
  static constexpr double eps = 0x1p-104;
  static constexpr int digits10 = 32;
  static constexpr const char* name = "dd";
};

template <>
struct precision_traits<QD> {
  static constexpr Precision level = Precision::qd;
  static constexpr int limbs = 4;
  static constexpr double eps = 0x1p-209;
  static constexpr int digits10 = 64;
  static constexpr const char* name = "qd";
};

inline const char* precision_name(Precision p) {
  switch (p) {
    case Precision::d: return "d";
    case Precision::dd: return "dd";
    default: return "qd";
  }
}

// limb accessors shared by the planar batch layout
inline double get_limb(double x, int) { return x; }
inline double get_limb(DD x, int i) { return i == 0 ? x.hi : x.lo; }
inline double get_limb(QD x, int i) { return x.limb[static_cast<size_t>(i)]; }

inline void set_limb(double& x, int, double v) { x = v; }
inline void set_limb(DD& x, int i, double v) { (i == 0 ? x.hi : x.lo) = v; }
inline void set_limb(QD& x, int i, double v) { x.limb[static_cast<size_t>(i)] = v; }

// widening is exact; narrowing rounds to nearest
template <class To>
To convert(double x) {
  return To(x);
}

template <class To>
To convert(DD x) {
  if constexpr (std::is_same_v<To, double>)
    return to_double(x);
  else if constexpr (std::is_same_v<To, DD>)
    return x;
  else
    return QD{x};
}

template <class To>
To convert(QD x) {
  if constexpr (std::is_same_v<To, double>) {
    return to_double(x);
  } else if constexpr (std::is_same_v<To, DD>) {
    double lo = (x[3] + x[2]) + x[1];
    return dd_norm(x[0], lo);
  } else {
    return x;
  }
}

inline double to_double(double x) { return x; }
inline int compare(double a, double b) { return a < b ? -1 : (a > b ? 1 : 0); }

// dispatch a callable templated over the three scalar types
template <class F>
decltype(auto) with_precision(Precision p, F&& f) {
  switch (p) {
    case Precision::d: return f(double{});
    case Precision::dd: return f(DD{});
    default: return f(QD{});
  }
}

}  // namespace polypath
