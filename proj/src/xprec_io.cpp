#include "polypath/xprec_io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <vector>

namespace polypath {

template <class R>
R pow10_r(long k) {
  bool neg = k < 0;
  unsigned long e = neg ? static_cast<unsigned long>(-k) : static_cast<unsigned long>(k);
  R base{10.0};
  R acc{1.0};
  while (e != 0) {
    if (e & 1u) acc = acc * base;
    base = base * base;
    e >>= 1;
  }
  return neg ? R{1.0} / acc : acc;
}

template double pow10_r<double>(long);
template DD pow10_r<DD>(long);
template QD pow10_r<QD>(long);

namespace {

// digit extraction for DD/QD, following the usual repeated divide-by-ten
// scheme with a correction pass for off-by-one digits
template <class R>
std::string to_decimal_ext(R x) {
  constexpr int digits = precision_traits<R>::digits10;
  double head = get_limb(x, 0);

  if (std::isnan(head)) return "nan";
  if (std::isinf(head)) return head > 0 ? "inf" : "-inf";

  bool neg = head < 0.0;
  R r = fabs(x);
  if (get_limb(r, 0) == 0.0 && to_double(r) == 0.0) {
    std::string z = "0.";
    z.append(static_cast<size_t>(digits - 1), '0');
    z += "e+00";
    return z;
  }

  int e10 = static_cast<int>(std::floor(std::log10(std::fabs(head))));
  r = r * pow10_r<R>(-e10);
  if (compare(r, R{10.0}) >= 0) {
    r = r / R{10.0};
    ++e10;
  } else if (compare(r, R{1.0}) < 0) {
    r = r * R{10.0};
    --e10;
  }

  const int nd = digits + 1;
  std::vector<int> dig(static_cast<size_t>(nd));
  for (int i = 0; i < nd; ++i) {
    int d = static_cast<int>(get_limb(r, 0));
    dig[static_cast<size_t>(i)] = d;
    r = (r - static_cast<double>(d)) * 10.0;
  }

  // borrow/carry fixes for digits that landed outside [0, 9]
  for (int i = nd - 1; i > 0; --i) {
    if (dig[static_cast<size_t>(i)] < 0) {
      dig[static_cast<size_t>(i - 1)] -= 1;
      dig[static_cast<size_t>(i)] += 10;
    } else if (dig[static_cast<size_t>(i)] > 9) {
      dig[static_cast<size_t>(i - 1)] += 1;
      dig[static_cast<size_t>(i)] -= 10;
    }
  }

  // round on the extra digit
  if (dig[static_cast<size_t>(nd - 1)] >= 5) {
    dig[static_cast<size_t>(nd - 2)] += 1;
    int i = nd - 2;
    while (i > 0 && dig[static_cast<size_t>(i)] > 9) {
      dig[static_cast<size_t>(i)] -= 10;
      dig[static_cast<size_t>(i - 1)] += 1;
      --i;
    }
  }
  if (dig[0] > 9) {
    // 9.99... rounded up to 10.0...
    ++e10;
    dig[0] = 1;
    for (int i = 1; i < digits; ++i) dig[static_cast<size_t>(i)] = 0;
  }

  std::string out;
  if (neg) out += '-';
  out += static_cast<char>('0' + dig[0]);
  out += '.';
  for (int i = 1; i < digits; ++i) out += static_cast<char>('0' + dig[static_cast<size_t>(i)]);
  out += 'e';
  out += e10 < 0 ? '-' : '+';
  int ae = e10 < 0 ? -e10 : e10;
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02d", ae);
  out += buf;
  return out;
}

template <class R>
bool parse_decimal_ext(std::string_view s, R& out) {
  size_t i = 0, n = s.size();
  while (i < n && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  size_t end = n;
  while (end > i && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
  if (i >= end) return false;

  bool neg = false;
  if (s[i] == '+' || s[i] == '-') {
    neg = s[i] == '-';
    ++i;
  }

  R val{};
  long frac_digits = 0;
  bool any_digit = false;
  bool seen_point = false;
  int chunk_len = 0;
  double chunk = 0.0;

  auto flush_chunk = [&] {
    if (chunk_len == 0) return;
    val = val * pow10_r<double>(chunk_len) + chunk;
    chunk = 0.0;
    chunk_len = 0;
  };

  for (; i < end; ++i) {
    char c = s[i];
    if (c >= '0' && c <= '9') {
      chunk = chunk * 10.0 + (c - '0');
      if (++chunk_len == 15) flush_chunk();
      if (seen_point) ++frac_digits;
      any_digit = true;
    } else if (c == '.') {
      if (seen_point) return false;
      seen_point = true;
    } else if (c == 'e' || c == 'E') {
      break;
    } else {
      return false;
    }
  }
  flush_chunk();
  if (!any_digit) return false;

  long e10 = 0;
  if (i < end && (s[i] == 'e' || s[i] == 'E')) {
    ++i;
    bool eneg = false;
    if (i < end && (s[i] == '+' || s[i] == '-')) {
      eneg = s[i] == '-';
      ++i;
    }
    if (i >= end) return false;
    long ev = 0;
    for (; i < end; ++i) {
      if (s[i] < '0' || s[i] > '9') return false;
      ev = ev * 10 + (s[i] - '0');
      if (ev > 100000) return false;
    }
    e10 = eneg ? -ev : ev;
  }

  long scale = e10 - frac_digits;
  if (scale > 350 || scale < -350) return false;
  if (scale > 0)
    val = val * pow10_r<R>(scale);
  else if (scale < 0)
    val = val / pow10_r<R>(-scale);
  out = neg ? -val : val;
  return true;
}

}  // namespace

std::string to_decimal(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", x);
  return buf;
}

std::string to_decimal(DD x) { return to_decimal_ext(x); }
std::string to_decimal(QD x) { return to_decimal_ext(x); }

bool parse_decimal(std::string_view s, double& out) {
  std::string tmp(s);
  char* ep = nullptr;
  double v = std::strtod(tmp.c_str(), &ep);
  if (ep == tmp.c_str()) return false;
  while (*ep != '\0') {
    if (!std::isspace(static_cast<unsigned char>(*ep))) return false;
    ++ep;
  }
  if (std::isnan(v) || std::isinf(v)) return false;
  out = v;
  return true;
}

bool parse_decimal(std::string_view s, DD& out) { return parse_decimal_ext(s, out); }
bool parse_decimal(std::string_view s, QD& out) { return parse_decimal_ext(s, out); }

}  // namespace polypath
