#pragma once
// Independent single-point oracles for the batched evaluation engine:
// term-by-term evaluation with repeated multiplication, symbolic
// differentiation, and central finite differences.  Test-only code; kept
// deliberately naive and separate from the production evaluation path.

#include <random>
#include <set>
#include <vector>

#include "polypath/polysys.hpp"

namespace polypath::testing {

template <class R>
Cplx<R> pow_naive(Cplx<R> x, uint32_t e) {
  Cplx<R> acc{R{1.0}, R{}};
  for (uint32_t i = 0; i < e; ++i) acc = acc * x;
  return acc;
}

template <class R>
Cplx<R> eval_term_naive(const Term& t, std::span<const Cplx<R>> x) {
  Cplx<R> acc = convert_cplx<R>(t.coeff);
  for (auto& [v, e] : t.mono.factors) acc = acc * pow_naive(x[v], e);
  return acc;
}

template <class R>
std::vector<Cplx<R>> eval_system_naive(const PolySystem& s, std::span<const Cplx<R>> x) {
  std::vector<Cplx<R>> out(s.polys.size());
  for (size_t p = 0; p < s.polys.size(); ++p) {
    Cplx<R> acc{};
    for (const Term& t : s.polys[p]) acc = acc + eval_term_naive(t, x);
    out[p] = acc;
  }
  return out;
}

// symbolic derivative of one polynomial w.r.t. variable v
inline std::vector<Term> differentiate(const std::vector<Term>& poly, VarIndex v) {
  std::vector<Term> out;
  for (const Term& t : poly) {
    for (auto& [tv, e] : t.mono.factors) {
      if (tv != v) continue;
      Term d;
      d.coeff = t.coeff * static_cast<double>(e);
      for (auto& [w, we] : t.mono.factors) {
        uint32_t ne = w == v ? we - 1 : we;
        if (ne > 0) d.mono.factors.emplace_back(w, ne);
      }
      out.push_back(std::move(d));
    }
  }
  return out;
}

// row-major Jacobian via symbolic differentiation + naive evaluation
template <class R>
std::vector<Cplx<R>> jacobian_symbolic(const PolySystem& s, std::span<const Cplx<R>> x) {
  std::vector<Cplx<R>> jac(s.polys.size() * s.dim);
  for (size_t p = 0; p < s.polys.size(); ++p) {
    for (VarIndex v = 0; v < s.dim; ++v) {
      std::vector<Term> d = differentiate(s.polys[p], v);
      Cplx<R> acc{};
      for (const Term& t : d) acc = acc + eval_term_naive<R>(t, x);
      jac[p * s.dim + v] = acc;
    }
  }
  return jac;
}

// gamma*(1-t)*g(x) + t*f(x), evaluated through the naive route
template <class R>
std::vector<Cplx<R>> eval_homotopy_naive(const PolySystem& f, const PolySystem& g, Cplx<R> gamma,
                                         std::span<const Cplx<R>> x, R t) {
  auto fv = eval_system_naive<R>(f, x);
  auto gv = eval_system_naive<R>(g, x);
  std::vector<Cplx<R>> out(fv.size());
  R u = R{1.0} - t;
  for (size_t i = 0; i < fv.size(); ++i) out[i] = gamma * (gv[i] * u) + fv[i] * t;
  return out;
}

// random dense-ish test systems
inline PolySystem random_poly_system(std::mt19937_64& rng, uint32_t dim, uint32_t max_deg,
                                     uint32_t max_terms) {
  std::uniform_real_distribution<double> cd(-2.0, 2.0);
  PolySystem s;
  s.dim = dim;
  for (uint32_t p = 0; p < dim; ++p) {
    std::set<Monomial> seen;
    std::vector<Term> poly;
    uint32_t nt = 2 + static_cast<uint32_t>(rng() % (max_terms - 1));
    for (uint32_t i = 0; i < nt; ++i) {
      Term t;
      double re = cd(rng), im = cd(rng);
      if (re == 0.0 && im == 0.0) re = 1.0;
      t.coeff = Cplx<QD>{QD{re}, QD{im}};
      uint32_t budget = 1 + static_cast<uint32_t>(rng() % max_deg);
      std::map<VarIndex, uint32_t> exps;
      while (budget > 0 && (rng() % 4) != 0) {
        VarIndex v = static_cast<VarIndex>(rng() % dim);
        uint32_t e = 1 + static_cast<uint32_t>(rng() % budget);
        exps[v] += e;
        budget -= e;
      }
      for (auto& [v, e] : exps) t.mono.factors.emplace_back(v, e);
      if (seen.count(t.mono)) continue;
      seen.insert(t.mono);
      poly.push_back(std::move(t));
    }
    s.polys.push_back(std::move(poly));
  }
  s.refresh_degrees();
  return s;
}

template <class R>
std::vector<Cplx<R>> random_point(std::mt19937_64& rng, uint32_t dim) {
  std::uniform_real_distribution<double> cd(-1.0, 1.0);
  std::vector<Cplx<R>> x(dim);
  for (uint32_t i = 0; i < dim; ++i) x[i] = Cplx<R>{R{cd(rng)}, R{cd(rng)}};
  return x;
}

}  // namespace polypath::testing
