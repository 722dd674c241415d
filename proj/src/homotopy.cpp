#include "polypath/homotopy.hpp"

#include <cmath>

namespace polypath {

template <class R>
HomotopyInstance<R> make_homotopy(PolySystem f, PolySystem g, Cplx<R> gamma) {
  if (f.dim != g.dim || f.polys.size() != g.polys.size())
    throw std::invalid_argument("make_homotopy: target and start dimensions differ");
  double mod = std::sqrt(to_double(abs2(gamma)));
  if (std::fabs(mod - 1.0) > 1e-12)
    throw std::invalid_argument("make_homotopy: gamma must have unit modulus");
  HomotopyInstance<R> h;
  h.plan = build_plan<R>(f, g, gamma);
  h.target = std::move(f);
  h.start = std::move(g);
  h.gamma = gamma;
  return h;
}

namespace {

uint64_t splitmix64(uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

Cplx<double> random_gamma(uint64_t seed) {
  uint64_t s = seed;
  (void)splitmix64(s);  // decorrelate small seeds
  double u = static_cast<double>(splitmix64(s) >> 11) * 0x1p-53;
  double theta = 2.0 * M_PI * u;
  return {std::cos(theta), std::sin(theta)};
}

namespace {

// d-th roots of unity at level R: double cos/sin seeds polished by Newton
// steps on x^d = 1
template <class R>
std::vector<Cplx<R>> unity_roots(uint32_t d) {
  std::vector<Cplx<R>> roots(d);
  int polish;
  if constexpr (std::is_same_v<R, double>)
    polish = 0;
  else if constexpr (std::is_same_v<R, DD>)
    polish = 2;
  else
    polish = 3;
  for (uint32_t j = 0; j < d; ++j) {
    double theta = 2.0 * M_PI * static_cast<double>(j) / static_cast<double>(d);
    Cplx<R> x{R{std::cos(theta)}, R{std::sin(theta)}};
    for (int it = 0; it < polish; ++it) {
      Cplx<R> xp{R{1.0}, R{}};  // x^(d-1)
      for (uint32_t e = 1; e < d; ++e) xp = xp * x;
      Cplx<R> fx = xp * x - Cplx<R>{R{1.0}, R{}};
      Cplx<R> fpx = xp * R{static_cast<double>(d)};
      x = x - fx / fpx;
    }
    roots[j] = x;
  }
  return roots;
}

}  // namespace

template <class R>
std::vector<Cplx<R>> StartData<R>::solution(uint64_t index) const {
  if (provenance == StartProvenance::file) return explicit_solutions[index];
  const size_t n = degrees.size();
  std::vector<Cplx<R>> x(n);
  uint64_t rem = index;
  for (size_t i = n; i-- > 0;) {
    uint32_t d = degrees[i];
    x[i] = roots[i][rem % d];
    rem /= d;
  }
  return x;
}

template <class R>
std::pair<PolySystem, StartData<R>> total_degree_start(const PolySystem& f) {
  if (f.dim != f.polys.size())
    throw std::invalid_argument("total_degree_start: system must be square");
  StartData<R> sd;
  sd.provenance = StartProvenance::total_degree;
  sd.count = 1;
  PolySystem g;
  g.dim = f.dim;
  for (uint32_t i = 0; i < f.dim; ++i) {
    uint32_t d = f.degrees[i];
    if (d == 0)
      throw std::invalid_argument("total_degree_start: zero-degree polynomial");
    sd.degrees.push_back(d);
    sd.roots.push_back(unity_roots<R>(d));
    sd.count *= d;

    std::vector<Term> poly;
    Monomial m;
    m.factors.emplace_back(static_cast<VarIndex>(i), d);
    poly.push_back(Term{Cplx<QD>{QD{1.0}, QD{}}, std::move(m)});
    poly.push_back(Term{Cplx<QD>{QD{-1.0}, QD{}}, Monomial{}});
    g.polys.push_back(std::move(poly));
  }
  g.refresh_degrees();
  return {std::move(g), std::move(sd)};
}

template <class R>
StartLoadReport<R> load_start_data(const PolySystem& g,
                                   const std::vector<std::vector<Cplx<QD>>>& candidates,
                                   double start_tol) {
  StartLoadReport<R> report;
  report.data.provenance = StartProvenance::file;
  auto plan = build_plan<R>(g);
  BatchWorkspace<R> ws(plan, 1);
  std::vector<Cplx<R>> vals(g.polys.size());
  for (size_t idx = 0; idx < candidates.size(); ++idx) {
    if (candidates[idx].size() != g.dim)
      throw std::invalid_argument("load_start_data: solution dimension mismatch");
    std::vector<Cplx<R>> x(g.dim);
    for (uint32_t i = 0; i < g.dim; ++i) x[i] = convert_cplx<R>(candidates[idx][i]);
    eval_single<R>(plan, ws, x, R{1.0}, vals, {});
    double resid = 0.0;
    for (const Cplx<R>& v : vals) resid = std::max(resid, to_double(cabs(v)));
    if (resid < start_tol) {
      report.data.explicit_solutions.push_back(std::move(x));
    } else {
      report.rejected.push_back({idx, resid});
    }
  }
  report.data.count = report.data.explicit_solutions.size();
  return report;
}

template HomotopyInstance<double> make_homotopy<double>(PolySystem, PolySystem, Cplx<double>);
template HomotopyInstance<DD> make_homotopy<DD>(PolySystem, PolySystem, Cplx<DD>);
template HomotopyInstance<QD> make_homotopy<QD>(PolySystem, PolySystem, Cplx<QD>);
template struct StartData<double>;
template struct StartData<DD>;
template struct StartData<QD>;
template std::pair<PolySystem, StartData<double>> total_degree_start<double>(const PolySystem&);
template std::pair<PolySystem, StartData<DD>> total_degree_start<DD>(const PolySystem&);
template std::pair<PolySystem, StartData<QD>> total_degree_start<QD>(const PolySystem&);
template StartLoadReport<double> load_start_data<double>(
    const PolySystem&, const std::vector<std::vector<Cplx<QD>>>&, double);
template StartLoadReport<DD> load_start_data<DD>(const PolySystem&,
                                                 const std::vector<std::vector<Cplx<QD>>>&,
                                                 double);
template StartLoadReport<QD> load_start_data<QD>(const PolySystem&,
                                                 const std::vector<std::vector<Cplx<QD>>>&,
                                                 double);

}  // namespace polypath
