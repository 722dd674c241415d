#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <random>

#include "polypath/polysys.hpp"
#include "polypath/xprec_io.hpp"

using namespace polypath;

namespace {

std::mt19937_64 rng(1234567);

Term random_term(uint32_t dim, uint32_t max_deg) {
  std::uniform_int_distribution<uint32_t> nvars(0, std::min(dim, max_deg));
  std::uniform_real_distribution<double> cd(-2.0, 2.0);
  Term t;
  double re = cd(rng), im = cd(rng);
  if (re == 0.0 && im == 0.0) re = 1.0;
  t.coeff = Cplx<QD>{QD{re}, QD{im}};
  uint32_t k = nvars(rng);
  std::map<VarIndex, uint32_t> exps;
  uint32_t budget = max_deg;
  for (uint32_t i = 0; i < k && budget > 0; ++i) {
    VarIndex v = static_cast<VarIndex>(rng() % dim);
    uint32_t e = 1 + static_cast<uint32_t>(rng() % budget);
    exps[v] += e;
    budget -= e;
  }
  for (auto& [v, e] : exps) t.mono.factors.emplace_back(v, e);
  return t;
}

PolySystem random_system(uint32_t dim, uint32_t n_polys, uint32_t max_terms, uint32_t max_deg) {
  PolySystem s;
  s.dim = dim;
  for (uint32_t p = 0; p < n_polys; ++p) {
    std::vector<Term> poly;
    std::map<Monomial, bool> seen;
    uint32_t nt = 1 + static_cast<uint32_t>(rng() % max_terms);
    for (uint32_t i = 0; i < nt; ++i) {
      Term t = random_term(dim, max_deg);
      if (seen.count(t.mono)) continue;
      seen[t.mono] = true;
      poly.push_back(std::move(t));
    }
    s.polys.push_back(std::move(poly));
  }
  s.refresh_degrees();
  return s;
}

bool same_system(const PolySystem& a, const PolySystem& b, double tol) {
  if (a.dim != b.dim || a.polys.size() != b.polys.size()) return false;
  for (size_t p = 0; p < a.polys.size(); ++p) {
    if (a.polys[p].size() != b.polys[p].size()) return false;
    std::map<Monomial, Cplx<QD>> bm;
    for (const Term& t : b.polys[p]) bm[t.mono] = t.coeff;
    for (const Term& t : a.polys[p]) {
      auto it = bm.find(t.mono);
      if (it == bm.end()) return false;
      Cplx<QD> d = t.coeff - it->second;
      if (to_double(cabs(d)) > tol) return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("parse simple system") {
  PolySystem s = parse_system("1; x0^2 - 4;");
  CHECK(s.dim == 1);
  REQUIRE(s.polys.size() == 1);
  REQUIRE(s.polys[0].size() == 2);
  CHECK(s.polys[0][0].mono.factors == std::vector<std::pair<VarIndex, uint32_t>>{{0, 2}});
  CHECK(to_double(s.polys[0][0].coeff.re) == 1.0);
  CHECK(s.polys[0][1].mono.factors.empty());
  CHECK(to_double(s.polys[0][1].coeff.re) == -4.0);
  CHECK(s.degrees == std::vector<uint32_t>{2});
}

TEST_CASE("parse errors carry line/column") {
  CHECK_THROWS_AS(parse_system("1; x0^-1;"), ParseError);
  CHECK_THROWS_AS(parse_system("1; x0^0;"), ParseError);
  CHECK_THROWS_AS(parse_system("2; x5 + 1;"), ParseError);
  CHECK_THROWS_AS(parse_system("1; 0*x0 + 1;"), ParseError);
  CHECK_THROWS_AS(parse_system("1; x0^2 - 4"), ParseError);  // missing ';'
  CHECK_THROWS_AS(parse_system("1;"), ParseError);           // no polynomials
  try {
    parse_system("2;\nx0 + x9;\n");
    CHECK(false);
  } catch (const ParseError& e) {
    CHECK(e.line == 2);
  }
}

TEST_CASE("comments, complex coefficients, merging") {
  PolySystem s = parse_system(
      "2;  # dimension\n"
      "(0,1)*x0*x1 + x0 + x0 - 1;  # i*x0*x1 + 2*x0 - 1\n"
      "x1^2 + x0*x0 - x0^2;\n");
  REQUIRE(s.polys.size() == 2);
  CHECK(s.polys[0].size() == 3);
  CHECK(to_double(s.polys[0][0].coeff.im) == 1.0);
  CHECK(to_double(s.polys[0][1].coeff.re) == 2.0);
  // x0*x0 merges with -x0^2 and drops
  CHECK(s.polys[1].size() == 1);
}

TEST_CASE("cyclic systems") {
  PolySystem c2 = cyclic_system(2);
  CHECK(c2.dim == 2);
  REQUIRE(c2.polys.size() == 2);
  CHECK(c2.polys[0].size() == 2);  // x0 + x1
  CHECK(c2.polys[1].size() == 2);  // x0*x1 - 1

  // hand-expanded cyclic-3
  PolySystem c3 = cyclic_system(3);
  PolySystem ref = parse_system(
      "3;\n"
      "x0 + x1 + x2;\n"
      "x0*x1 + x1*x2 + x0*x2;\n"
      "x0*x1*x2 - 1;\n");
  CHECK(same_system(c3, ref, 0.0));
  CHECK(c3.monomial_count() == 8);

  CHECK_THROWS_AS(cyclic_system(1), std::invalid_argument);

  // monomial count n(n-1) + 2 for n in 2..12
  for (uint32_t n = 2; n <= 12; ++n) {
    PolySystem c = cyclic_system(n);
    CHECK(c.monomial_count() == static_cast<uint64_t>(n) * (n - 1) + 2);
    for (uint32_t k = 1; k <= n; ++k) CHECK(c.degrees[k - 1] == k);
  }
}

TEST_CASE("system stats") {
  SystemStats st = system_stats(cyclic_system(10));
  CHECK(st.dim == 10);
  CHECK(st.n_polys == 10);
  CHECK(st.n_monomials == 92);
  CHECK(st.degrees == std::vector<uint32_t>{1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
  CHECK(st.total_degree == 3628800);

  SystemStats st2 = system_stats(parse_system("1; x0^2 - 4;"));
  CHECK(st2.dim == 1);
  CHECK(st2.n_polys == 1);
  CHECK(st2.n_monomials == 2);
  CHECK(st2.total_degree == 2);
}

TEST_CASE("decompose_term examples") {
  // 5*x1^3*x2^2
  Term t;
  t.coeff = Cplx<QD>{QD{5.0}, QD{}};
  t.mono.factors = {{1, 3}, {2, 2}};
  TermInstruction ti = decompose_term(t);
  CHECK(ti.base_exponents == std::vector<std::pair<VarIndex, uint32_t>>{{1, 2}, {2, 1}});
  CHECK(ti.positions == std::vector<VarIndex>{1, 2});
  REQUIRE(ti.deriv_multipliers.size() == 2);
  CHECK(to_double(ti.deriv_multipliers[0].re) == 15.0);
  CHECK(to_double(ti.deriv_multipliers[1].re) == 10.0);

  // 2*x0*x1*x2
  Term t2;
  t2.coeff = Cplx<QD>{QD{2.0}, QD{}};
  t2.mono.factors = {{0, 1}, {1, 1}, {2, 1}};
  TermInstruction ti2 = decompose_term(t2);
  CHECK(ti2.base_exponents.empty());
  CHECK(ti2.positions == std::vector<VarIndex>{0, 1, 2});
  for (auto& m : ti2.deriv_multipliers) CHECK(to_double(m.re) == 2.0);

  // constant -1
  Term t3;
  t3.coeff = Cplx<QD>{QD{-1.0}, QD{}};
  TermInstruction ti3 = decompose_term(t3);
  CHECK(ti3.base_exponents.empty());
  CHECK(ti3.positions.empty());
  CHECK(ti3.deriv_multipliers.empty());
}

TEST_CASE("decompose_term is lossless on random terms") {
  for (int it = 0; it < 200; ++it) {
    Term t = random_term(6, 8);
    TermInstruction ti = decompose_term(t);
    Term back = recompose(ti, t.coeff);
    CHECK(back.mono == t.mono);
  }
}

TEST_CASE("print/parse round trip") {
  for (uint32_t n = 2; n <= 8; ++n) {
    PolySystem c = cyclic_system(n);
    PolySystem back = parse_system(print_system(c));
    CHECK(same_system(c, back, 0.0));
  }
  for (int it = 0; it < 50; ++it) {
    PolySystem s = random_system(4, 3, 8, 5);
    PolySystem back = parse_system(print_system(s));
    CHECK(same_system(s, back, 1e-60));
  }
}

TEST_CASE("solution files") {
  std::vector<std::vector<Cplx<QD>>> sols = {
      {Cplx<QD>{QD{1.0}, QD{}}, Cplx<QD>{QD{-0.5}, QD{0.25}}},
      {Cplx<QD>{QD{0.0}, QD{1.0}}, Cplx<QD>{QD{2.0}, QD{}}},
  };
  auto back = parse_solutions(print_solutions(sols), 2);
  REQUIRE(back.size() == 2);
  for (size_t i = 0; i < 2; ++i)
    for (size_t j = 0; j < 2; ++j) {
      CHECK(to_double(cabs(back[i][j] - sols[i][j])) < 1e-60);
    }

  // bare pairs without parentheses, as in "1,0"
  auto one = parse_solutions("1,0\n-1,0\n", 1);
  REQUIRE(one.size() == 2);
  CHECK(to_double(one[1][0].re) == -1.0);

  CHECK_THROWS_AS(parse_solutions("1,0,3\n", 1), ParseError);
  CHECK_THROWS_AS(parse_solutions("1,zzz\n", 1), ParseError);
  try {
    parse_solutions("1,0\n1,broken\n", 1);
    CHECK(false);
  } catch (const ParseError& e) {
    CHECK(e.line == 2);
  }
}
