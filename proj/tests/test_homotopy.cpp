#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>

#include "polypath/homotopy.hpp"
#include "support/oracles.hpp"

using namespace polypath;
using namespace polypath::testing;

namespace {
std::mt19937_64 rng(424242);
}

TEST_CASE("endpoint identities are exact under the merged plan") {
  PolySystem f = random_poly_system(rng, 3, 3, 6);
  PolySystem g = random_poly_system(rng, 3, 3, 5);
  Cplx<double> gamma = random_gamma(11);
  auto h = make_homotopy<double>(f, g, gamma);

  // The comparison side must follow the merged construction: same summation
  // order (g's support in merged positions) and gamma folded by the same
  // double-precision multiply.
  PolySystem g_ordered = g;
  for (size_t p = 0; p < g.polys.size(); ++p) {
    std::vector<Term> ordered;
    std::set<size_t> taken;
    for (const Term& ft : f.polys[p]) {
      for (size_t j = 0; j < g.polys[p].size(); ++j) {
        if (!taken.count(j) && g.polys[p][j].mono == ft.mono) {
          ordered.push_back(g.polys[p][j]);
          taken.insert(j);
        }
      }
    }
    for (size_t j = 0; j < g.polys[p].size(); ++j)
      if (!taken.count(j)) ordered.push_back(g.polys[p][j]);
    g_ordered.polys[p] = std::move(ordered);
  }
  auto plan_gs = build_plan<double>(g_ordered);
  for (auto& c : plan_gs.c_target) c = gamma * c;
  auto plan_f = build_plan<double>(f);

  BatchWorkspace<double> wh(h.plan, 1), wg(plan_gs, 1), wf(plan_f, 1);
  std::vector<Cplx<double>> vh(3), vg(3), vf(3);
  for (int it = 0; it < 20; ++it) {
    auto x = random_point<double>(rng, 3);
    eval_single<double>(h.plan, wh, x, 0.0, vh, {});
    eval_single<double>(plan_gs, wg, x, 1.0, vg, {});
    for (int i = 0; i < 3; ++i) {
      CHECK(vh[i].re == vg[i].re);
      CHECK(vh[i].im == vg[i].im);
    }
    eval_single<double>(h.plan, wh, x, 1.0, vh, {});
    eval_single<double>(plan_f, wf, x, 1.0, vf, {});
    for (int i = 0; i < 3; ++i) {
      CHECK(vh[i].re == vf[i].re);
      CHECK(vh[i].im == vf[i].im);
    }
  }
}

TEST_CASE("degenerate homotopy f = g with gamma = 1") {
  PolySystem f = random_poly_system(rng, 2, 3, 5);
  auto h = make_homotopy<double>(f, f, Cplx<double>{1.0, 0.0});
  BatchWorkspace<double> ws(h.plan, 1);
  std::vector<Cplx<double>> v0(2), v1(2);
  for (double t : {0.0, 0.25, 0.5, 0.875, 1.0}) {
    auto x = random_point<double>(rng, 2);
    eval_single<double>(h.plan, ws, x, t, v0, {});
    auto ref = eval_system_naive<double>(f, x);
    for (int i = 0; i < 2; ++i) CHECK(to_double(cabs(v0[i] - ref[i])) < 1e-13);
  }
}

TEST_CASE("make_homotopy validates inputs") {
  PolySystem f = parse_system("1; x0^2 - 4;");
  PolySystem g2 = parse_system("2; x0 - 1; x1 - 1;");
  CHECK_THROWS_AS(make_homotopy<double>(f, g2, Cplx<double>{1.0, 0.0}),
                  std::invalid_argument);
  PolySystem g = parse_system("1; x0^2 - 1;");
  CHECK_THROWS_AS(make_homotopy<double>(f, g, Cplx<double>{0.5, 0.0}),
                  std::invalid_argument);
}

TEST_CASE("random_gamma is deterministic, unit modulus, well spread") {
  for (uint64_t seed = 0; seed < 100; ++seed) {
    Cplx<double> a = random_gamma(seed);
    Cplx<double> b = random_gamma(seed);
    CHECK(a.re == b.re);
    CHECK(a.im == b.im);
    CHECK(std::fabs(std::sqrt(abs2(a)) - 1.0) <= 1e-15);
  }
  std::set<double> angles;
  for (uint64_t seed = 0; seed < 100; ++seed) angles.insert(random_gamma(seed).re);
  CHECK(angles.size() == 100);
}

TEST_CASE("total-degree start for x^2 - 4") {
  PolySystem f = parse_system("1; x0^2 - 4;");
  auto [g, sd] = total_degree_start<double>(f);
  CHECK(g.polys.size() == 1);
  CHECK(g.degrees == std::vector<uint32_t>{2});
  CHECK(sd.count == 2);
  auto s0 = sd.solution(0);
  auto s1 = sd.solution(1);
  CHECK(s0[0].re == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(s1[0].re == doctest::Approx(-1.0).epsilon(1e-15));
}

TEST_CASE("total-degree start solutions satisfy g") {
  PolySystem f = cyclic_system(3);
  auto [g, sd] = total_degree_start<DD>(f);
  CHECK(sd.count == 6);  // 1*2*3
  auto plan = build_plan<DD>(g);
  BatchWorkspace<DD> ws(plan, 1);
  std::vector<Cplx<DD>> vals(3);
  for (uint64_t i = 0; i < sd.count; ++i) {
    auto x = sd.solution(i);
    eval_single<DD>(plan, ws, x, DD{1.0}, vals, {});
    for (auto& v : vals) CHECK(to_double(cabs(v)) < 1e-12);
  }

  // lazily enumerable large case: count only, spot-check a few indices
  PolySystem c10 = cyclic_system(10);
  auto [g10, sd10] = total_degree_start<double>(c10);
  CHECK(sd10.count == 3628800);
  auto plan10 = build_plan<double>(g10);
  BatchWorkspace<double> ws10(plan10, 1);
  std::vector<Cplx<double>> v10(10);
  for (uint64_t idx : {uint64_t{0}, uint64_t{123456}, uint64_t{3628799}}) {
    auto x = sd10.solution(idx);
    eval_single<double>(plan10, ws10, x, 1.0, v10, {});
    for (auto& v : v10) CHECK(to_double(cabs(v)) < 1e-12);
  }

  PolySystem zero_deg;
  zero_deg.dim = 1;
  zero_deg.polys.push_back({Term{Cplx<QD>{QD{1.0}, QD{}}, Monomial{}}});
  zero_deg.refresh_degrees();
  CHECK_THROWS_AS(total_degree_start<double>(zero_deg), std::invalid_argument);
}

TEST_CASE("qd start solutions are polished to level accuracy") {
  PolySystem f = cyclic_system(4);
  auto [g, sd] = total_degree_start<QD>(f);
  auto plan = build_plan<QD>(g);
  BatchWorkspace<QD> ws(plan, 1);
  std::vector<Cplx<QD>> vals(4);
  for (uint64_t i = 0; i < sd.count; i += 5) {
    auto x = sd.solution(i);
    eval_single<QD>(plan, ws, x, QD{1.0}, vals, {});
    for (auto& v : vals) CHECK(to_double(cabs(v)) < 1e-55);
  }
}

TEST_CASE("load_start_data accepts good and rejects bad solutions") {
  PolySystem g = parse_system("1; x0^2 - 1;");
  std::vector<std::vector<Cplx<QD>>> cands = {
      {Cplx<QD>{QD{1.0}, QD{}}},
      {Cplx<QD>{QD{-1.0}, QD{}}},
      {Cplx<QD>{QD{1.001}, QD{}}},  // residual ~2e-3
  };
  auto rep = load_start_data<double>(g, cands);
  CHECK(rep.data.count == 2);
  REQUIRE(rep.rejected.size() == 1);
  CHECK(rep.rejected[0].index == 2);
  CHECK(rep.rejected[0].residual > 1e-8);
  CHECK(rep.data.provenance == StartProvenance::file);
  auto s = rep.data.solution(1);
  CHECK(s[0].re == -1.0);
}
