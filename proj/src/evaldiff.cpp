#include "polypath/evaldiff.hpp"

#include <atomic>
#include <map>

#include "polypath/parallel.hpp"
#include "evaldiff_kernels.hpp"

namespace polypath {

// ---------------------------------------------------------------------------
// kernel selection
// ---------------------------------------------------------------------------

namespace {

std::atomic<SimdMode> g_mode{SimdMode::automatic};

bool detect_avx2() {
#if defined(POLYPATH_HAVE_AVX2_KERNELS)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

}  // namespace

void set_simd_mode(SimdMode m) { g_mode.store(m); }
SimdMode simd_mode() { return g_mode.load(); }

bool avx2_supported() {
  static const bool have = detect_avx2();
  return have;
}

bool simd_active(Precision level) {
  if (level == Precision::qd) return false;  // branchy renorm; scalar only
  switch (g_mode.load()) {
    case SimdMode::scalar: return false;
    case SimdMode::avx2: return avx2_supported();
    default: return avx2_supported();
  }
}

// ---------------------------------------------------------------------------
// schedules
// ---------------------------------------------------------------------------

namespace {

MonStep step_set_one(MonStep::Loc dst, uint32_t dst_row) {
  MonStep s{};
  s.op = MonStep::Op::set_one;
  s.dst = dst;
  s.dst_row = dst_row;
  s.a = s.b = MonStep::Loc::none;
  return s;
}

MonStep step_copy(MonStep::Loc dst, uint32_t dst_row, MonStep::Loc a, uint32_t a_row) {
  MonStep s{};
  s.op = MonStep::Op::copy;
  s.dst = dst;
  s.dst_row = dst_row;
  s.a = a;
  s.a_row = a_row;
  s.b = MonStep::Loc::none;
  return s;
}

MonStep step_mul(MonStep::Loc dst, uint32_t dst_row, MonStep::Loc a, uint32_t a_row,
                 MonStep::Loc b, uint32_t b_row, bool counts) {
  MonStep s{};
  s.op = MonStep::Op::mul;
  s.dst = dst;
  s.dst_row = dst_row;
  s.a = a;
  s.a_row = a_row;
  s.b = b;
  s.b_row = b_row;
  s.counts = counts;
  return s;
}

// Position-product steps for one term.  Derivative row for position j is
// slot0+1+j, the value row is slot0.  Prefix products are built into the
// derivative rows, then a running suffix in the scratch accumulator turns
// them into the all-but-one products:  d_j = P_j, then d_j *= S_{j+1}.
void emit_position_product(PlanTerm& t) {
  using Loc = MonStep::Loc;
  const uint32_t k = static_cast<uint32_t>(t.positions.size());
  const uint32_t value = t.slot0;
  auto drow = [&](uint32_t j) { return t.slot0 + 1 + j; };
  auto var = [&](uint32_t j) { return t.positions[j]; };

  if (k == 0) return;
  if (k == 1) {
    t.steps.push_back(step_copy(Loc::mon, value, Loc::point, var(0)));
    t.steps.push_back(step_set_one(Loc::mon, drow(0)));
    return;
  }

  t.steps.push_back(step_copy(Loc::mon, drow(1), Loc::point, var(0)));
  for (uint32_t j = 2; j < k; ++j)
    t.steps.push_back(
        step_mul(Loc::mon, drow(j), Loc::mon, drow(j - 1), Loc::point, var(j - 1), true));
  t.steps.push_back(step_mul(Loc::mon, value, Loc::mon, drow(k - 1), Loc::point, var(k - 1), true));
  t.steps.push_back(step_copy(Loc::acc, 0, Loc::point, var(k - 1)));
  for (uint32_t j = k - 2; j >= 1; --j) {
    t.steps.push_back(step_mul(Loc::mon, drow(j), Loc::mon, drow(j), Loc::acc, 0, true));
    t.steps.push_back(step_mul(Loc::acc, 0, Loc::acc, 0, Loc::point, var(j), true));
  }
  t.steps.push_back(step_copy(Loc::mon, drow(0), Loc::acc, 0));
}

// base factor prod x^(e-1) accumulated into the aux scratch row by binary
// powering, then multiplied into every output slot
void emit_base_product(PlanTerm& t) {
  using Loc = MonStep::Loc;
  if (t.base_exponents.empty()) return;
  const uint32_t k = static_cast<uint32_t>(t.positions.size());

  bool acc_init = false;
  for (auto& [v, e] : t.base_exponents) {
    if (e == 1) {
      if (acc_init) {
        t.steps.push_back(step_mul(Loc::aux, 1, Loc::aux, 1, Loc::point, v, false));
        ++t.base_muls;
      } else {
        t.steps.push_back(step_copy(Loc::aux, 1, Loc::point, v));
        acc_init = true;
      }
      continue;
    }
    // square-and-multiply through the acc scratch row
    t.steps.push_back(step_copy(Loc::acc, 0, Loc::point, v));
    uint32_t bits = e;
    while (bits != 0) {
      if (bits & 1u) {
        if (acc_init) {
          t.steps.push_back(step_mul(Loc::aux, 1, Loc::aux, 1, Loc::acc, 0, false));
          ++t.base_muls;
        } else {
          t.steps.push_back(step_copy(Loc::aux, 1, Loc::acc, 0));
          acc_init = true;
        }
      }
      bits >>= 1;
      if (bits != 0) {
        t.steps.push_back(step_mul(Loc::acc, 0, Loc::acc, 0, Loc::acc, 0, false));
        ++t.base_muls;
      }
    }
  }

  for (uint32_t s = 0; s <= k; ++s) {
    t.steps.push_back(step_mul(Loc::mon, t.slot0 + s, Loc::mon, t.slot0 + s, Loc::aux, 1, false));
    ++t.base_muls;
  }
}

void finish_term(PlanTerm& t) {
  emit_position_product(t);
  for (const MonStep& s : t.steps)
    if (s.counts) ++t.posprod_muls;
  emit_base_product(t);
}

}  // namespace

std::vector<MonStep> position_product_schedule(uint32_t k) {
  PlanTerm t;
  t.slot0 = 0;
  for (uint32_t j = 0; j < k; ++j) {
    t.positions.push_back(j);
    t.pos_exponents.push_back(1);
  }
  emit_position_product(t);
  return t.steps;
}

// ---------------------------------------------------------------------------
// plan construction
// ---------------------------------------------------------------------------

namespace {

template <class R>
EvalPlan<R> build_plan_impl(const PolySystem& f, const PolySystem* g, Cplx<R> gamma) {
  if (g != nullptr) {
    if (f.dim != g->dim || f.polys.size() != g->polys.size())
      throw std::invalid_argument("build_plan: dimension mismatch between target and start");
  }
  EvalPlan<R> plan;
  plan.dim = f.dim;
  plan.n_polys = static_cast<uint32_t>(f.polys.size());

  uint32_t next_row = 0;
  for (uint32_t p = 0; p < plan.n_polys; ++p) {
    // union of supports: f's terms in source order, then g's new monomials
    std::map<Monomial, size_t> index;
    std::vector<std::pair<Monomial, std::pair<Cplx<QD>, Cplx<QD>>>> merged;  // (c_f, c_g)
    for (const Term& t : f.polys[p]) {
      index[t.mono] = merged.size();
      merged.push_back({t.mono, {t.coeff, Cplx<QD>{}}});
    }
    if (g != nullptr) {
      for (const Term& t : g->polys[p]) {
        auto it = index.find(t.mono);
        if (it == index.end()) {
          index[t.mono] = merged.size();
          merged.push_back({t.mono, {Cplx<QD>{}, t.coeff}});
        } else {
          merged[it->second].second.second += t.coeff;
        }
      }
    }

    for (auto& [mono, cfg] : merged) {
      PlanTerm term;
      term.poly = p;
      for (auto& [v, e] : mono.factors) {
        term.positions.push_back(v);
        term.pos_exponents.push_back(e);
        if (e > 1) term.base_exponents.emplace_back(v, e - 1);
      }
      term.slot0 = next_row;
      next_row += 1 + static_cast<uint32_t>(term.positions.size());
      finish_term(term);
      plan.terms.push_back(std::move(term));
      plan.c_target.push_back(convert_cplx<R>(cfg.first));
      Cplx<R> cg = convert_cplx<R>(cfg.second);
      plan.c_start.push_back(gamma * cg);
    }
  }
  plan.mon_rows = next_row;
  return plan;
}

}  // namespace

template <class R>
EvalPlan<R> build_plan(const PolySystem& f, const PolySystem& g, Cplx<R> gamma) {
  return build_plan_impl<R>(f, &g, gamma);
}

template <class R>
EvalPlan<R> build_plan(const PolySystem& f) {
  return build_plan_impl<R>(f, nullptr, Cplx<R>{R{1.0}, R{}});
}

// ---------------------------------------------------------------------------
// scalar reference kernels
// ---------------------------------------------------------------------------

namespace detail {

template <class R>
void coeff_stage_scalar(const EvalPlan<R>& plan, BatchWorkspace<R>& ws, uint32_t lo, uint32_t hi,
                        const uint8_t* mask) {
  const uint32_t n_terms = static_cast<uint32_t>(plan.terms.size());
  for (uint32_t i = 0; i < n_terms; ++i) {
    const Cplx<R>& cs = plan.c_start[i];
    const Cplx<R>& ct = plan.c_target[i];
    for (uint32_t col = lo; col < hi; ++col) {
      if (mask != nullptr && mask[col] == 0) continue;
      R t = ws.tpar.load_real(0, col);
      R u = ws.tpar.load_real(1, col);
      Cplx<R> c{cs.re * u + ct.re * t, cs.im * u + ct.im * t};
      ws.coeff.store(i, col, c);
    }
  }
}

template <class R>
void mon_stage_scalar(const EvalPlan<R>& plan, BatchWorkspace<R>& ws, uint32_t lo, uint32_t hi,
                      const uint8_t* mask) {
  for (const PlanTerm& term : plan.terms) {
    for (const MonStep& st : term.steps) {
      PlanarBlock<R>* dstb = st.dst == MonStep::Loc::mon ? &ws.mon : &ws.scratch;
      uint32_t dst_row = st.dst == MonStep::Loc::mon ? st.dst_row
                         : st.dst == MonStep::Loc::acc ? 0u
                                                       : 1u;
      auto src = [&](MonStep::Loc loc, uint32_t row) -> std::pair<const PlanarBlock<R>*, uint32_t> {
        switch (loc) {
          case MonStep::Loc::point: return {&ws.points, row};
          case MonStep::Loc::mon: return {&ws.mon, row};
          case MonStep::Loc::acc: return {&ws.scratch, 0u};
          default: return {&ws.scratch, 1u};
        }
      };
      switch (st.op) {
        case MonStep::Op::set_one: {
          Cplx<R> one{R{1.0}, R{}};
          for (uint32_t col = lo; col < hi; ++col) {
            if (mask != nullptr && mask[col] == 0) continue;
            dstb->store(dst_row, col, one);
          }
          break;
        }
        case MonStep::Op::copy: {
          auto [ab, arow] = src(st.a, st.a_row);
          for (uint32_t col = lo; col < hi; ++col) {
            if (mask != nullptr && mask[col] == 0) continue;
            dstb->store(dst_row, col, ab->load(arow, col));
          }
          break;
        }
        case MonStep::Op::mul: {
          auto [ab, arow] = src(st.a, st.a_row);
          auto [bb, brow] = src(st.b, st.b_row);
          for (uint32_t col = lo; col < hi; ++col) {
            if (mask != nullptr && mask[col] == 0) continue;
            Cplx<R> a = ab->load(arow, col);
            Cplx<R> b = bb->load(brow, col);
            dstb->store(dst_row, col, a * b);
          }
          break;
        }
      }
    }
  }
}

template <class R>
void sum_stage_scalar(const EvalPlan<R>& plan, BatchWorkspace<R>& ws, uint32_t lo, uint32_t hi,
                      const uint8_t* mask) {
  const Cplx<R> zero{};
  for (uint32_t row = 0; row < ws.sys.rows(); ++row)
    for (uint32_t col = lo; col < hi; ++col) {
      if (mask != nullptr && mask[col] == 0) continue;
      ws.sys.store(row, col, zero);
    }
  for (uint32_t row = 0; row < ws.jac.rows(); ++row)
    for (uint32_t col = lo; col < hi; ++col) {
      if (mask != nullptr && mask[col] == 0) continue;
      ws.jac.store(row, col, zero);
    }

  const uint32_t n_terms = static_cast<uint32_t>(plan.terms.size());
  for (uint32_t i = 0; i < n_terms; ++i) {
    const PlanTerm& term = plan.terms[i];
    const uint32_t k = static_cast<uint32_t>(term.positions.size());
    if (k == 0) {
      // constants skip the monomial stage; the coefficient is the value
      for (uint32_t col = lo; col < hi; ++col) {
        if (mask != nullptr && mask[col] == 0) continue;
        Cplx<R> c = ws.coeff.load(i, col);
        ws.sys.store(term.poly, col, ws.sys.load(term.poly, col) + c);
      }
      continue;
    }
    for (uint32_t col = lo; col < hi; ++col) {
      if (mask != nullptr && mask[col] == 0) continue;
      Cplx<R> c = ws.coeff.load(i, col);
      Cplx<R> v = ws.mon.load(term.slot0, col);
      ws.sys.store(term.poly, col, ws.sys.load(term.poly, col) + c * v);
    }
    for (uint32_t j = 0; j < k; ++j) {
      const uint32_t jrow = term.poly * plan.dim + term.positions[j];
      const double e = static_cast<double>(term.pos_exponents[j]);
      const bool unit = term.pos_exponents[j] == 1;
      for (uint32_t col = lo; col < hi; ++col) {
        if (mask != nullptr && mask[col] == 0) continue;
        Cplx<R> c = ws.coeff.load(i, col);
        Cplx<R> d = ws.mon.load(term.slot0 + 1 + j, col);
        Cplx<R> w = c * d;
        if (!unit) w = w * e;
        ws.jac.store(jrow, col, ws.jac.load(jrow, col) + w);
      }
    }
  }
}

template void coeff_stage_scalar<double>(const EvalPlan<double>&, BatchWorkspace<double>&,
                                         uint32_t, uint32_t, const uint8_t*);
template void coeff_stage_scalar<DD>(const EvalPlan<DD>&, BatchWorkspace<DD>&, uint32_t, uint32_t,
                                     const uint8_t*);
template void coeff_stage_scalar<QD>(const EvalPlan<QD>&, BatchWorkspace<QD>&, uint32_t, uint32_t,
                                     const uint8_t*);
template void mon_stage_scalar<double>(const EvalPlan<double>&, BatchWorkspace<double>&, uint32_t,
                                       uint32_t, const uint8_t*);
template void mon_stage_scalar<DD>(const EvalPlan<DD>&, BatchWorkspace<DD>&, uint32_t, uint32_t,
                                   const uint8_t*);
template void mon_stage_scalar<QD>(const EvalPlan<QD>&, BatchWorkspace<QD>&, uint32_t, uint32_t,
                                   const uint8_t*);
template void sum_stage_scalar<double>(const EvalPlan<double>&, BatchWorkspace<double>&, uint32_t,
                                       uint32_t, const uint8_t*);
template void sum_stage_scalar<DD>(const EvalPlan<DD>&, BatchWorkspace<DD>&, uint32_t, uint32_t,
                                   const uint8_t*);
template void sum_stage_scalar<QD>(const EvalPlan<QD>&, BatchWorkspace<QD>&, uint32_t, uint32_t,
                                   const uint8_t*);

}  // namespace detail

// ---------------------------------------------------------------------------
// dispatch
// ---------------------------------------------------------------------------

namespace {

template <class R>
constexpr bool has_avx2_lane =
    std::is_same_v<R, double> || std::is_same_v<R, DD>;

template <class R>
void run_coeff(const EvalPlan<R>& plan, BatchWorkspace<R>& ws, uint32_t lo, uint32_t hi,
               const uint8_t* mask) {
#if defined(POLYPATH_HAVE_AVX2_KERNELS)
  if constexpr (has_avx2_lane<R>) {
    if (simd_active(precision_traits<R>::level)) {
      detail::coeff_stage_avx2(plan, ws, lo, hi, mask);
      return;
    }
  }
#endif
  detail::coeff_stage_scalar(plan, ws, lo, hi, mask);
}

template <class R>
void run_mon(const EvalPlan<R>& plan, BatchWorkspace<R>& ws, uint32_t lo, uint32_t hi,
             const uint8_t* mask) {
#if defined(POLYPATH_HAVE_AVX2_KERNELS)
  if constexpr (has_avx2_lane<R>) {
    if (simd_active(precision_traits<R>::level)) {
      detail::mon_stage_avx2(plan, ws, lo, hi, mask);
      return;
    }
  }
#endif
  detail::mon_stage_scalar(plan, ws, lo, hi, mask);
}

template <class R>
void run_sum(const EvalPlan<R>& plan, BatchWorkspace<R>& ws, uint32_t lo, uint32_t hi,
             const uint8_t* mask) {
#if defined(POLYPATH_HAVE_AVX2_KERNELS)
  if constexpr (has_avx2_lane<R>) {
    if (simd_active(precision_traits<R>::level)) {
      detail::sum_stage_avx2(plan, ws, lo, hi, mask);
      return;
    }
  }
#endif
  detail::sum_stage_scalar(plan, ws, lo, hi, mask);
}

}  // namespace

template <class R>
void eval_coefficients(const EvalPlan<R>& plan, BatchWorkspace<R>& ws, uint32_t lo, uint32_t hi,
                       const uint8_t* mask) {
  run_coeff(plan, ws, lo, hi, mask);
}

template <class R>
void eval_monomials(const EvalPlan<R>& plan, BatchWorkspace<R>& ws, uint32_t lo, uint32_t hi,
                    const uint8_t* mask) {
  run_mon(plan, ws, lo, hi, mask);
  uint64_t cols = 0;
  for (uint32_t col = lo; col < hi; ++col)
    if (mask == nullptr || mask[col] != 0) ++cols;
  ws.posprod_muls += plan.total_posprod_muls() * cols;
}

template <class R>
void sum_batch(const EvalPlan<R>& plan, BatchWorkspace<R>& ws, uint32_t lo, uint32_t hi,
               const uint8_t* mask) {
  run_sum(plan, ws, lo, hi, mask);
}

template <class R>
void eval_system_batch(const EvalPlan<R>& plan, BatchWorkspace<R>& ws, unsigned workers,
                       const uint8_t* mask) {
  const uint32_t b = ws.batch;
  const uint32_t grain = parallel_grain<R>();
  parallel_for(
      b, workers, [&](uint32_t lo, uint32_t hi) { run_coeff(plan, ws, lo, hi, mask); }, grain);
  parallel_for(
      b, workers, [&](uint32_t lo, uint32_t hi) { run_mon(plan, ws, lo, hi, mask); }, grain);
  parallel_for(
      b, workers, [&](uint32_t lo, uint32_t hi) { run_sum(plan, ws, lo, hi, mask); }, grain);
  uint64_t cols = 0;
  for (uint32_t col = 0; col < b; ++col)
    if (mask == nullptr || mask[col] != 0) ++cols;
  ws.posprod_muls += plan.total_posprod_muls() * cols;
}

template <class R>
void eval_single(const EvalPlan<R>& plan, BatchWorkspace<R>& ws, std::span<const Cplx<R>> x,
                 const R& t, std::span<Cplx<R>> values, std::span<Cplx<R>> jac_rowmajor) {
  ws.set_point(0, x);
  ws.set_t(0, t);
  if (ws.batch == 1) {
    eval_system_batch(plan, ws, 1, nullptr);
  } else {
    std::vector<uint8_t> mask(ws.batch, 0);
    mask[0] = 1;
    eval_system_batch(plan, ws, 1, mask.data());
  }
  for (uint32_t i = 0; i < plan.n_polys; ++i) values[i] = ws.sys.load(i, 0);
  if (!jac_rowmajor.empty()) {
    for (uint32_t i = 0; i < plan.n_polys; ++i)
      for (uint32_t v = 0; v < plan.dim; ++v)
        jac_rowmajor[i * plan.dim + v] = ws.jac.load(i * plan.dim + v, 0);
  }
}

// explicit instantiations
template EvalPlan<double> build_plan<double>(const PolySystem&, const PolySystem&, Cplx<double>);
template EvalPlan<DD> build_plan<DD>(const PolySystem&, const PolySystem&, Cplx<DD>);
template EvalPlan<QD> build_plan<QD>(const PolySystem&, const PolySystem&, Cplx<QD>);
template EvalPlan<double> build_plan<double>(const PolySystem&);
template EvalPlan<DD> build_plan<DD>(const PolySystem&);
template EvalPlan<QD> build_plan<QD>(const PolySystem&);

template void eval_coefficients<double>(const EvalPlan<double>&, BatchWorkspace<double>&, uint32_t,
                                        uint32_t, const uint8_t*);
template void eval_coefficients<DD>(const EvalPlan<DD>&, BatchWorkspace<DD>&, uint32_t, uint32_t,
                                    const uint8_t*);
template void eval_coefficients<QD>(const EvalPlan<QD>&, BatchWorkspace<QD>&, uint32_t, uint32_t,
                                    const uint8_t*);
template void eval_monomials<double>(const EvalPlan<double>&, BatchWorkspace<double>&, uint32_t,
                                     uint32_t, const uint8_t*);
template void eval_monomials<DD>(const EvalPlan<DD>&, BatchWorkspace<DD>&, uint32_t, uint32_t,
                                 const uint8_t*);
template void eval_monomials<QD>(const EvalPlan<QD>&, BatchWorkspace<QD>&, uint32_t, uint32_t,
                                 const uint8_t*);
template void sum_batch<double>(const EvalPlan<double>&, BatchWorkspace<double>&, uint32_t,
                                uint32_t, const uint8_t*);
template void sum_batch<DD>(const EvalPlan<DD>&, BatchWorkspace<DD>&, uint32_t, uint32_t,
                            const uint8_t*);
template void sum_batch<QD>(const EvalPlan<QD>&, BatchWorkspace<QD>&, uint32_t, uint32_t,
                            const uint8_t*);
template void eval_system_batch<double>(const EvalPlan<double>&, BatchWorkspace<double>&, unsigned,
                                        const uint8_t*);
template void eval_system_batch<DD>(const EvalPlan<DD>&, BatchWorkspace<DD>&, unsigned,
                                    const uint8_t*);
template void eval_system_batch<QD>(const EvalPlan<QD>&, BatchWorkspace<QD>&, unsigned,
                                    const uint8_t*);
template void eval_single<double>(const EvalPlan<double>&, BatchWorkspace<double>&,
                                  std::span<const Cplx<double>>, const double&,
                                  std::span<Cplx<double>>, std::span<Cplx<double>>);
template void eval_single<DD>(const EvalPlan<DD>&, BatchWorkspace<DD>&, std::span<const Cplx<DD>>,
                              const DD&, std::span<Cplx<DD>>, std::span<Cplx<DD>>);
template void eval_single<QD>(const EvalPlan<QD>&, BatchWorkspace<QD>&, std::span<const Cplx<QD>>,
                              const QD&, std::span<Cplx<QD>>, std::span<Cplx<QD>>);

}  // namespace polypath
