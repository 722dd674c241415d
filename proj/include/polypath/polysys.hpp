#pragma once
// Sparse polynomial systems: data model, text format, term decomposition for
// the evaluation engine, and the cyclic-n benchmark generator.
//
// Coefficients are stored at quad-double precision and narrowed to the run
// precision when an evaluation plan is built.

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "polypath/complex.hpp"

namespace polypath {

using VarIndex = uint32_t;

struct Monomial {
  // (variable, exponent) pairs sorted by variable, exponents >= 1;
  // empty means the constant monomial
  std::vector<std::pair<VarIndex, uint32_t>> factors;

  uint32_t degree() const {
    uint32_t d = 0;
    for (auto& [v, e] : factors) d += e;
    return d;
  }
  bool operator==(const Monomial&) const = default;
  bool operator<(const Monomial& o) const { return factors < o.factors; }
};

struct Term {
  Cplx<QD> coeff;
  Monomial mono;
};

struct PolySystem {
  uint32_t dim = 0;
  std::vector<std::vector<Term>> polys;

  // cached per-polynomial total degrees
  std::vector<uint32_t> degrees;

  void refresh_degrees();
  uint64_t monomial_count() const;
};

struct SystemStats {
  uint32_t dim = 0;
  uint32_t n_polys = 0;
  uint64_t n_monomials = 0;
  std::vector<uint32_t> degrees;
  uint64_t total_degree = 0;  // product of degrees (Bezout number)
  bool total_degree_overflow = false;
};

struct ParseError : std::runtime_error {
  size_t line;
  size_t col;
  ParseError(std::string msg, size_t l, size_t c)
      : std::runtime_error(std::move(msg)), line(l), col(c) {}
};

// Text format: first statement is the dimension n (an optional ';' may follow);
// each further statement is a polynomial terminated by ';'.  A term is a
// coefficient ("(re,im)" or a real decimal, optional when 1) followed by zero
// or more "*xI^E" factors; '^E' is optional and E >= 1.  '#' starts a
// comment.  Terms with equal monomials are merged; exact-zero merges are
// dropped; an explicit zero coefficient is an error.
PolySystem parse_system(std::string_view text);
std::string print_system(const PolySystem& s);

// p_k = sum_i prod_{j=i..i+k-1} x_{j mod n} for k = 1..n-1, p_n = x_0...x_{n-1} - 1
PolySystem cyclic_system(uint32_t n);

SystemStats system_stats(const PolySystem& s);

// decomposition of c * prod x^e into the common factor prod x^(e-1), the
// product of occurring variables, and per-position derivative constants e*c
struct TermInstruction {
  std::vector<std::pair<VarIndex, uint32_t>> base_exponents;  // (v, e-1), only e-1 >= 1
  std::vector<VarIndex> positions;                            // ascending
  std::vector<Cplx<QD>> deriv_multipliers;                    // e_i * coeff, per position
};

TermInstruction decompose_term(const Term& t);

// symbolic recomposition, for the losslessness check
Term recompose(const TermInstruction& ti, const Cplx<QD>& coeff);

// Start-solution files: one solution per line, n comma-separated complex
// pairs "re,im" (parentheses around pairs are accepted).  When lines is
// non-null it receives the 1-based source line of each solution.
std::vector<std::vector<Cplx<QD>>> parse_solutions(std::string_view text, uint32_t dim,
                                                   std::vector<size_t>* lines = nullptr);
std::string print_solutions(const std::vector<std::vector<Cplx<QD>>>& sols);

}  // namespace polypath
