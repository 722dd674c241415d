#include "polypath/polysys.hpp"

#include <algorithm>
#include <cmath>

#include "polypath/xprec_io.hpp"

namespace polypath {

void PolySystem::refresh_degrees() {
  degrees.assign(polys.size(), 0);
  for (size_t i = 0; i < polys.size(); ++i) {
    uint32_t d = 0;
    for (const Term& t : polys[i]) d = std::max(d, t.mono.degree());
    degrees[i] = d;
  }
}

uint64_t PolySystem::monomial_count() const {
  uint64_t n = 0;
  for (const auto& p : polys) n += p.size();
  return n;
}

namespace {

struct Cursor {
  std::string_view text;
  size_t pos = 0;
  size_t line = 1;
  size_t col = 1;

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, line, col); }

  bool eof() const { return pos >= text.size(); }

  char peek() const { return text[pos]; }

  void advance() {
    if (text[pos] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
    ++pos;
  }

  void skip_ws() {
    while (!eof()) {
      char c = peek();
      if (c == '#') {
        while (!eof() && peek() != '\n') advance();
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else {
        return;
      }
    }
  }

  bool accept(char c) {
    skip_ws();
    if (!eof() && peek() == c) {
      advance();
      return true;
    }
    return false;
  }

  void expect(char c, const char* what) {
    if (!accept(c)) fail(std::string("expected '") + c + "' (" + what + ")");
  }

  uint64_t parse_uint(const char* what) {
    skip_ws();
    if (eof() || !std::isdigit(static_cast<unsigned char>(peek())))
      fail(std::string("expected ") + what);
    uint64_t v = 0;
    while (!eof() && std::isdigit(static_cast<unsigned char>(peek()))) {
      v = v * 10 + static_cast<uint64_t>(peek() - '0');
      if (v > (1ull << 40)) fail(std::string(what) + " out of range");
      advance();
    }
    return v;
  }

  // decimal number, no sign (signs are handled by the term grammar)
  QD parse_real(const char* what) {
    skip_ws();
    size_t start = pos;
    bool neg = false;
    if (!eof() && (peek() == '+' || peek() == '-')) {
      neg = peek() == '-';
      advance();
    }
    size_t digits_start = pos;
    while (!eof() && (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '.'))
      advance();
    if (pos == digits_start) fail(std::string("expected ") + what);
    if (!eof() && (peek() == 'e' || peek() == 'E')) {
      advance();
      if (!eof() && (peek() == '+' || peek() == '-')) advance();
      if (eof() || !std::isdigit(static_cast<unsigned char>(peek())))
        fail("malformed exponent in number");
      while (!eof() && std::isdigit(static_cast<unsigned char>(peek()))) advance();
    }
    QD v;
    if (!parse_decimal(text.substr(start + (neg ? 1 : 0), pos - start - (neg ? 1 : 0)), v))
      fail(std::string("malformed number in ") + what);
    return neg ? -v : v;
  }
};

}  // namespace

PolySystem parse_system(std::string_view text) {
  Cursor cur{text};
  PolySystem sys;

  cur.skip_ws();
  sys.dim = static_cast<uint32_t>(cur.parse_uint("dimension"));
  if (sys.dim == 0) cur.fail("dimension must be >= 1");
  cur.accept(';');

  cur.skip_ws();
  while (!cur.eof()) {
    // one polynomial up to ';'
    std::vector<Monomial> order;           // first-occurrence order
    std::map<Monomial, Cplx<QD>> merged;

    bool first_term = true;
    for (;;) {
      cur.skip_ws();
      if (cur.eof()) cur.fail("unterminated polynomial (missing ';')");

      // sign prefix
      int sign = 1;
      bool saw_sign = false;
      for (;;) {
        if (cur.accept('+')) {
          saw_sign = true;
          continue;
        }
        if (cur.accept('-')) {
          sign = -sign;
          saw_sign = true;
          continue;
        }
        break;
      }
      if (!first_term && !saw_sign) cur.fail("expected '+', '-' or ';' between terms");
      first_term = false;

      cur.skip_ws();
      if (cur.eof()) cur.fail("unterminated polynomial (missing ';')");

      size_t term_line = cur.line, term_col = cur.col;

      // coefficient
      Cplx<QD> coeff{QD{1.0}, QD{}};
      bool have_coeff = false;
      char c = cur.peek();
      if (c == '(') {
        cur.advance();
        QD re = cur.parse_real("real part");
        cur.expect(',', "complex coefficient");
        QD im = cur.parse_real("imaginary part");
        cur.expect(')', "complex coefficient");
        coeff = {re, im};
        have_coeff = true;
      } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        coeff = {cur.parse_real("coefficient"), QD{}};
        have_coeff = true;
      } else if (c != 'x') {
        cur.fail("expected a coefficient or a variable factor");
      }

      // factors
      Monomial mono;
      bool expect_star = have_coeff;
      for (;;) {
        cur.skip_ws();
        if (expect_star) {
          size_t save_pos = cur.pos, save_line = cur.line, save_col = cur.col;
          if (!cur.accept('*')) break;
          cur.skip_ws();
          if (cur.eof() || cur.peek() != 'x') {
            cur.pos = save_pos;
            cur.line = save_line;
            cur.col = save_col;
            break;
          }
        } else {
          if (cur.eof() || cur.peek() != 'x') break;
        }
        cur.advance();  // 'x'
        size_t vline = cur.line, vcol = cur.col;
        uint64_t v = cur.parse_uint("variable index");
        if (v >= sys.dim)
          throw ParseError("variable index out of range", vline, vcol);
        uint32_t e = 1;
        if (cur.accept('^')) {
          cur.skip_ws();
          if (!cur.eof() && (cur.peek() == '-' || cur.peek() == '+'))
            cur.fail("exponent must be a positive integer");
          uint64_t ev = cur.parse_uint("exponent");
          if (ev == 0) cur.fail("exponent must be >= 1");
          if (ev > 1000) cur.fail("exponent out of range");
          e = static_cast<uint32_t>(ev);
        }
        bool found = false;
        for (auto& [mv, me] : mono.factors) {
          if (mv == v) {
            me += e;
            found = true;
            break;
          }
        }
        if (!found) mono.factors.emplace_back(static_cast<VarIndex>(v), e);
        expect_star = true;
      }
      std::sort(mono.factors.begin(), mono.factors.end());

      if (have_coeff && is_zero(coeff))
        throw ParseError("zero coefficient term", term_line, term_col);
      if (sign < 0) coeff = -coeff;

      auto [it, inserted] = merged.emplace(mono, coeff);
      if (inserted)
        order.push_back(mono);
      else
        it->second += coeff;

      cur.skip_ws();
      if (cur.accept(';')) break;
    }

    std::vector<Term> poly;
    for (const Monomial& m : order) {
      const Cplx<QD>& cf = merged[m];
      if (is_zero(cf)) continue;  // merged to zero
      poly.push_back(Term{cf, m});
    }
    sys.polys.push_back(std::move(poly));
    cur.skip_ws();
  }

  if (sys.polys.empty()) throw ParseError("system has no polynomials", cur.line, cur.col);
  sys.refresh_degrees();
  return sys;
}

namespace {

// prints integers exactly and everything else at full qd precision
std::string coeff_real_str(const QD& v) {
  double d = to_double(v);
  if (std::rint(d) == d && std::fabs(d) < 9.0e15 && compare(QD{d}, v) == 0) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.0f", d);
    return buf;
  }
  return to_decimal(v);
}

std::string coeff_str(const Cplx<QD>& c) {
  if (compare(c.im, QD{}) == 0) return coeff_real_str(c.re);
  return "(" + coeff_real_str(c.re) + "," + coeff_real_str(c.im) + ")";
}

}  // namespace

std::string print_system(const PolySystem& s) {
  std::string out = std::to_string(s.dim) + ";\n";
  for (const auto& poly : s.polys) {
    if (poly.empty()) {
      out += "0";  // zero polynomial placeholder; rejected on re-parse
    }
    bool first = true;
    for (const Term& t : poly) {
      Cplx<QD> c = t.coeff;
      bool neg_real = compare(c.im, QD{}) == 0 && compare(c.re, QD{}) < 0;
      if (first) {
        if (neg_real) {
          out += "-";
          c = -c;
        }
      } else {
        if (neg_real) {
          out += " - ";
          c = -c;
        } else {
          out += " + ";
        }
      }
      first = false;
      bool unit = compare(c.im, QD{}) == 0 && compare(c.re, QD{1.0}) == 0;
      if (unit && !t.mono.factors.empty()) {
        // coefficient 1 is implied
      } else {
        out += coeff_str(c);
      }
      bool first_factor = unit && !t.mono.factors.empty();
      for (auto& [v, e] : t.mono.factors) {
        if (!first_factor)
          out += "*";
        first_factor = false;
        out += "x" + std::to_string(v);
        if (e > 1) out += "^" + std::to_string(e);
      }
    }
    out += ";\n";
  }
  return out;
}

PolySystem cyclic_system(uint32_t n) {
  if (n < 2) throw std::invalid_argument("cyclic_system: n must be >= 2");
  PolySystem sys;
  sys.dim = n;
  for (uint32_t k = 1; k < n; ++k) {
    std::vector<Term> poly;
    for (uint32_t i = 0; i < n; ++i) {
      Monomial m;
      for (uint32_t j = i; j < i + k; ++j)
        m.factors.emplace_back(static_cast<VarIndex>(j % n), 1u);
      std::sort(m.factors.begin(), m.factors.end());
      poly.push_back(Term{Cplx<QD>{QD{1.0}, QD{}}, std::move(m)});
    }
    sys.polys.push_back(std::move(poly));
  }
  // x_0 ... x_{n-1} - 1
  std::vector<Term> last;
  Monomial full;
  for (uint32_t v = 0; v < n; ++v) full.factors.emplace_back(v, 1u);
  last.push_back(Term{Cplx<QD>{QD{1.0}, QD{}}, std::move(full)});
  last.push_back(Term{Cplx<QD>{QD{-1.0}, QD{}}, Monomial{}});
  sys.polys.push_back(std::move(last));
  sys.refresh_degrees();
  return sys;
}

SystemStats system_stats(const PolySystem& s) {
  SystemStats st;
  st.dim = s.dim;
  st.n_polys = static_cast<uint32_t>(s.polys.size());
  st.n_monomials = s.monomial_count();
  st.degrees = s.degrees;
  st.total_degree = 1;
  for (uint32_t d : st.degrees) {
    if (__builtin_mul_overflow(st.total_degree, static_cast<uint64_t>(d), &st.total_degree)) {
      st.total_degree = UINT64_MAX;
      st.total_degree_overflow = true;
      break;
    }
  }
  return st;
}

TermInstruction decompose_term(const Term& t) {
  TermInstruction ti;
  for (auto& [v, e] : t.mono.factors) {
    ti.positions.push_back(v);
    ti.deriv_multipliers.push_back(t.coeff * static_cast<double>(e));
    if (e > 1) ti.base_exponents.emplace_back(v, e - 1);
  }
  return ti;
}

Term recompose(const TermInstruction& ti, const Cplx<QD>& coeff) {
  Term t;
  t.coeff = coeff;
  std::map<VarIndex, uint32_t> exps;
  for (VarIndex v : ti.positions) exps[v] += 1;
  for (auto& [v, e] : ti.base_exponents) exps[v] += e;
  for (auto& [v, e] : exps) t.mono.factors.emplace_back(v, e);
  return t;
}

std::vector<std::vector<Cplx<QD>>> parse_solutions(std::string_view text, uint32_t dim,
                                                   std::vector<size_t>* lines) {
  std::vector<std::vector<Cplx<QD>>> sols;
  size_t lineno = 0;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++lineno;

    // strip comments and whitespace-only lines
    if (size_t h = line.find('#'); h != std::string_view::npos) line = line.substr(0, h);
    bool blank = true;
    for (char c : line)
      if (!std::isspace(static_cast<unsigned char>(c))) blank = false;
    if (blank) continue;

    std::vector<QD> reals;
    size_t fpos = 0;
    while (fpos < line.size()) {
      size_t comma = line.find(',', fpos);
      std::string_view field = line.substr(fpos, comma == std::string_view::npos
                                                     ? std::string_view::npos
                                                     : comma - fpos);
      fpos = comma == std::string_view::npos ? line.size() : comma + 1;
      // tolerate parentheses around pairs
      std::string cleaned;
      for (char c : field)
        if (c != '(' && c != ')') cleaned += c;
      QD v;
      if (!parse_decimal(cleaned, v))
        throw ParseError("malformed number in solution", lineno, fpos);
      reals.push_back(v);
    }
    if (reals.size() != 2ull * dim)
      throw ParseError("solution has wrong number of components", lineno, 1);
    std::vector<Cplx<QD>> sol(dim);
    for (uint32_t i = 0; i < dim; ++i) sol[i] = Cplx<QD>{reals[2 * i], reals[2 * i + 1]};
    sols.push_back(std::move(sol));
    if (lines != nullptr) lines->push_back(lineno);
  }
  return sols;
}

std::string print_solutions(const std::vector<std::vector<Cplx<QD>>>& sols) {
  std::string out;
  for (const auto& sol : sols) {
    bool first = true;
    for (const auto& z : sol) {
      if (!first) out += ", ";
      first = false;
      out += to_decimal(z.re) + "," + to_decimal(z.im);
    }
    out += "\n";
  }
  return out;
}

}  // namespace polypath
