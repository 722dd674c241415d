#pragma once
// Exact dyadic arithmetic (sign * magnitude * 2^exp with an arbitrary-size
// magnitude) used as the reference oracle for the floating-point kernels.
// Sums and products of binary64 values are dyadic, so add/sub/mul here are
// exact; error bounds are checked by comparing magnitudes of exact
// differences.  Test-only code.

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <vector>

#include "polypath/xprec.hpp"

namespace polypath::testing {

class Dyadic {
 public:
  Dyadic() = default;

  static Dyadic from_double(double x) {
    Dyadic r;
    if (x == 0.0) return r;
    int e;
    double m = std::frexp(x, &e);  // |m| in [0.5, 1)
    double scaled = std::ldexp(std::fabs(m), 53);
    r.mag_.push_back(static_cast<uint64_t>(scaled));
    r.exp_ = e - 53;
    r.sign_ = x < 0 ? -1 : 1;
    r.normalize();
    return r;
  }

  static Dyadic from_value(double x) { return from_double(x); }
  static Dyadic from_value(DD x) { return from_double(x.hi) + from_double(x.lo); }
  static Dyadic from_value(QD x) {
    return ((from_double(x[0]) + from_double(x[1])) + from_double(x[2])) + from_double(x[3]);
  }

  // 2^k, k >= 0 handled via shift of 1
  static Dyadic pow2(long long k) {
    Dyadic r;
    r.sign_ = 1;
    r.mag_.push_back(1);
    r.exp_ = k;
    return r;
  }

  bool is_zero() const { return sign_ == 0; }
  int sign() const { return sign_; }

  Dyadic abs() const {
    Dyadic r = *this;
    if (r.sign_ != 0) r.sign_ = 1;
    return r;
  }

  Dyadic neg() const {
    Dyadic r = *this;
    r.sign_ = -r.sign_;
    return r;
  }

  Dyadic mul_pow2(long long k) const {
    Dyadic r = *this;
    if (!r.is_zero()) r.exp_ += k;
    return r;
  }

  friend Dyadic operator+(const Dyadic& a, const Dyadic& b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    long long e = a.exp_ < b.exp_ ? a.exp_ : b.exp_;
    std::vector<uint64_t> ma = shifted(a.mag_, a.exp_ - e);
    std::vector<uint64_t> mb = shifted(b.mag_, b.exp_ - e);
    Dyadic r;
    r.exp_ = e;
    if (a.sign_ == b.sign_) {
      r.mag_ = add_mag(ma, mb);
      r.sign_ = a.sign_;
    } else {
      int c = cmp_mag(ma, mb);
      if (c == 0) return Dyadic{};
      if (c > 0) {
        r.mag_ = sub_mag(ma, mb);
        r.sign_ = a.sign_;
      } else {
        r.mag_ = sub_mag(mb, ma);
        r.sign_ = b.sign_;
      }
    }
    r.normalize();
    return r;
  }

  friend Dyadic operator-(const Dyadic& a, const Dyadic& b) { return a + b.neg(); }

  friend Dyadic operator*(const Dyadic& a, const Dyadic& b) {
    if (a.is_zero() || b.is_zero()) return Dyadic{};
    Dyadic r;
    r.mag_.assign(a.mag_.size() + b.mag_.size(), 0);
    for (size_t i = 0; i < a.mag_.size(); ++i) {
      unsigned __int128 carry = 0;
      for (size_t j = 0; j < b.mag_.size(); ++j) {
        unsigned __int128 cur = static_cast<unsigned __int128>(a.mag_[i]) * b.mag_[j] +
                                r.mag_[i + j] + carry;
        r.mag_[i + j] = static_cast<uint64_t>(cur);
        carry = cur >> 64;
      }
      size_t k = i + b.mag_.size();
      while (carry != 0) {
        unsigned __int128 cur = static_cast<unsigned __int128>(r.mag_[k]) + carry;
        r.mag_[k] = static_cast<uint64_t>(cur);
        carry = cur >> 64;
        ++k;
      }
    }
    r.exp_ = a.exp_ + b.exp_;
    r.sign_ = a.sign_ * b.sign_;
    r.normalize();
    return r;
  }

  // -1, 0, 1 for a<b, a==b, a>b
  friend int cmp(const Dyadic& a, const Dyadic& b) {
    Dyadic d = a - b;
    return d.sign_;
  }

  friend bool operator==(const Dyadic& a, const Dyadic& b) { return cmp(a, b) == 0; }
  friend bool operator<=(const Dyadic& a, const Dyadic& b) { return cmp(a, b) <= 0; }
  friend bool operator<(const Dyadic& a, const Dyadic& b) { return cmp(a, b) < 0; }

  // approximate value, for diagnostics only
  double approx() const {
    double v = 0.0;
    for (size_t i = 0; i < mag_.size(); ++i) {
      v += std::ldexp(static_cast<double>(mag_[i]),
                      static_cast<int>(exp_ + 64 * static_cast<long long>(i)));
    }
    return sign_ < 0 ? -v : v;
  }

 private:
  int sign_ = 0;
  std::vector<uint64_t> mag_;  // little-endian 64-bit words
  long long exp_ = 0;

  void normalize() {
    while (!mag_.empty() && mag_.back() == 0) mag_.pop_back();
    if (mag_.empty()) {
      sign_ = 0;
      exp_ = 0;
      return;
    }
    while (mag_[0] == 0) {
      mag_.erase(mag_.begin());
      exp_ += 64;
    }
  }

  static std::vector<uint64_t> shifted(const std::vector<uint64_t>& m, long long bits) {
    size_t words = static_cast<size_t>(bits / 64);
    unsigned rem = static_cast<unsigned>(bits % 64);
    std::vector<uint64_t> r(words, 0);
    r.reserve(words + m.size() + 1);
    uint64_t carry = 0;
    for (uint64_t w : m) {
      if (rem == 0) {
        r.push_back(w);
      } else {
        r.push_back((w << rem) | carry);
        carry = w >> (64 - rem);
      }
    }
    if (rem != 0 && carry != 0) r.push_back(carry);
    return r;
  }

  static int cmp_mag(const std::vector<uint64_t>& a, const std::vector<uint64_t>& b) {
    size_t na = a.size(), nb = b.size();
    while (na > 0 && a[na - 1] == 0) --na;
    while (nb > 0 && b[nb - 1] == 0) --nb;
    if (na != nb) return na < nb ? -1 : 1;
    for (size_t i = na; i-- > 0;) {
      if (a[i] != b[i]) return a[i] < b[i] ? -1 : 1;
    }
    return 0;
  }

  static std::vector<uint64_t> add_mag(const std::vector<uint64_t>& a,
                                       const std::vector<uint64_t>& b) {
    const std::vector<uint64_t>&x = a.size() >= b.size() ? a : b;
    const std::vector<uint64_t>&y = a.size() >= b.size() ? b : a;
    std::vector<uint64_t> r = x;
    unsigned __int128 carry = 0;
    for (size_t i = 0; i < r.size(); ++i) {
      unsigned __int128 cur = static_cast<unsigned __int128>(r[i]) + carry +
                              (i < y.size() ? y[i] : 0);
      r[i] = static_cast<uint64_t>(cur);
      carry = cur >> 64;
      if (carry == 0 && i >= y.size()) break;
    }
    if (carry != 0) r.push_back(static_cast<uint64_t>(carry));
    return r;
  }

  // requires |a| >= |b|
  static std::vector<uint64_t> sub_mag(const std::vector<uint64_t>& a,
                                       const std::vector<uint64_t>& b) {
    std::vector<uint64_t> r = a;
    unsigned __int128 borrow = 0;
    for (size_t i = 0; i < r.size(); ++i) {
      unsigned __int128 sub = borrow + (i < b.size() ? b[i] : 0);
      if (static_cast<unsigned __int128>(r[i]) >= sub) {
        r[i] = static_cast<uint64_t>(r[i] - static_cast<uint64_t>(sub));
        borrow = 0;
      } else {
        r[i] = static_cast<uint64_t>((static_cast<unsigned __int128>(1) << 64) + r[i] - sub);
        borrow = 1;
      }
      if (borrow == 0 && i >= b.size()) break;
    }
    return r;
  }
};

// |value(x) - exact| <= bound_scale * 2^bound_exp2 * |exact|
template <class R>
bool within_rel(R computed, const Dyadic& exact, double bound_scale, long long bound_exp2) {
  Dyadic c = Dyadic::from_value(computed);
  Dyadic diff = (c - exact).abs();
  Dyadic bound = Dyadic::from_double(bound_scale).mul_pow2(bound_exp2) * exact.abs();
  return cmp(diff, bound) <= 0;
}

}  // namespace polypath::testing
