// AVX2/FMA lanes for the three evaluation stages, double and double-double.
// Every vector operation mirrors the scalar reference kernel per lane, so a
// run through this file is bitwise identical to the scalar path.  Quad-double
// stays scalar (its renormalization branches on data).
//
// Compiled with -mavx2 -mfma; only called after a runtime cpu check.

#include "evaldiff_kernels.hpp"

#if defined(POLYPATH_HAVE_AVX2_KERNELS)

#include <immintrin.h>

namespace polypath::detail {

namespace {

inline __m256d vneg(__m256d x) { return _mm256_xor_pd(x, _mm256_set1_pd(-0.0)); }

inline __m256d vquick_two_sum(__m256d a, __m256d b, __m256d& err) {
  __m256d s = _mm256_add_pd(a, b);
  err = _mm256_sub_pd(b, _mm256_sub_pd(s, a));
  return s;
}

inline __m256d vtwo_sum(__m256d a, __m256d b, __m256d& err) {
  __m256d s = _mm256_add_pd(a, b);
  __m256d bb = _mm256_sub_pd(s, a);
  err = _mm256_add_pd(_mm256_sub_pd(a, _mm256_sub_pd(s, bb)), _mm256_sub_pd(b, bb));
  return s;
}

inline __m256d vtwo_prod(__m256d a, __m256d b, __m256d& err) {
  __m256d p = _mm256_mul_pd(a, b);
  err = _mm256_fmsub_pd(a, b, p);
  return p;
}

struct ddx4 {
  __m256d hi, lo;
};

inline ddx4 vdd_norm(__m256d hi, __m256d lo) {
  __m256d e;
  __m256d s = vquick_two_sum(hi, lo, e);
  return {s, e};
}

inline ddx4 vdd_neg(ddx4 a) { return {vneg(a.hi), vneg(a.lo)}; }

inline ddx4 vdd_add(ddx4 a, ddx4 b) {
  __m256d e1, e2;
  __m256d s = vtwo_sum(a.hi, b.hi, e1);
  __m256d t = vtwo_sum(a.lo, b.lo, e2);
  e1 = _mm256_add_pd(e1, t);
  s = vquick_two_sum(s, e1, e1);
  e1 = _mm256_add_pd(e1, e2);
  return vdd_norm(s, e1);
}

inline ddx4 vdd_sub(ddx4 a, ddx4 b) { return vdd_add(a, vdd_neg(b)); }

inline ddx4 vdd_mul(ddx4 a, ddx4 b) {
  __m256d e;
  __m256d p = vtwo_prod(a.hi, b.hi, e);
  __m256d cross = _mm256_add_pd(_mm256_mul_pd(a.hi, b.lo), _mm256_mul_pd(a.lo, b.hi));
  __m256d low = _mm256_add_pd(e, _mm256_add_pd(cross, _mm256_mul_pd(a.lo, b.lo)));
  return vdd_norm(p, low);
}

inline ddx4 vdd_muld(ddx4 a, __m256d b) {
  __m256d e;
  __m256d p = vtwo_prod(a.hi, b, e);
  __m256d low = _mm256_fmadd_pd(a.lo, b, e);
  return vdd_norm(p, low);
}

inline __m256i lane_mask(const uint8_t* mask, uint32_t col) {
  return _mm256_set_epi64x(mask[col + 3] ? -1LL : 0, mask[col + 2] ? -1LL : 0,
                           mask[col + 1] ? -1LL : 0, mask[col + 0] ? -1LL : 0);
}

// per-precision vector complex values and block access
template <class R>
struct vec_ops;

template <>
struct vec_ops<double> {
  struct c_t {
    __m256d re, im;
  };
  struct r_t {
    __m256d v;
  };

  static c_t load(const PlanarBlock<double>& b, uint32_t row, uint32_t col) {
    return {_mm256_loadu_pd(b.plane(row, 0) + col), _mm256_loadu_pd(b.plane(row, 1) + col)};
  }
  static void store(PlanarBlock<double>& b, uint32_t row, uint32_t col, const c_t& z) {
    _mm256_storeu_pd(b.plane(row, 0) + col, z.re);
    _mm256_storeu_pd(b.plane(row, 1) + col, z.im);
  }
  static void maskstore(PlanarBlock<double>& b, uint32_t row, uint32_t col, __m256i m,
                        const c_t& z) {
    _mm256_maskstore_pd(b.plane(row, 0) + col, m, z.re);
    _mm256_maskstore_pd(b.plane(row, 1) + col, m, z.im);
  }
  static r_t load_real(const PlanarBlock<double>& b, uint32_t row, uint32_t col) {
    return {_mm256_loadu_pd(b.plane(row, 0) + col)};
  }
  static c_t broadcast(const Cplx<double>& z) {
    return {_mm256_set1_pd(z.re), _mm256_set1_pd(z.im)};
  }
  static c_t one() { return {_mm256_set1_pd(1.0), _mm256_setzero_pd()}; }
  static c_t zero() { return {_mm256_setzero_pd(), _mm256_setzero_pd()}; }
  static c_t add(const c_t& a, const c_t& b) {
    return {_mm256_add_pd(a.re, b.re), _mm256_add_pd(a.im, b.im)};
  }
  static c_t mul(const c_t& a, const c_t& b) {
    return {_mm256_sub_pd(_mm256_mul_pd(a.re, b.re), _mm256_mul_pd(a.im, b.im)),
            _mm256_add_pd(_mm256_mul_pd(a.re, b.im), _mm256_mul_pd(a.im, b.re))};
  }
  static c_t scale_real(const c_t& a, const r_t& s) {
    return {_mm256_mul_pd(a.re, s.v), _mm256_mul_pd(a.im, s.v)};
  }
  static c_t scale_double(const c_t& a, double s) {
    __m256d sv = _mm256_set1_pd(s);
    return {_mm256_mul_pd(a.re, sv), _mm256_mul_pd(a.im, sv)};
  }
};

template <>
struct vec_ops<DD> {
  struct c_t {
    ddx4 re, im;
  };
  struct r_t {
    ddx4 v;
  };

  static c_t load(const PlanarBlock<DD>& b, uint32_t row, uint32_t col) {
    return {{_mm256_loadu_pd(b.plane(row, 0) + col), _mm256_loadu_pd(b.plane(row, 1) + col)},
            {_mm256_loadu_pd(b.plane(row, 2) + col), _mm256_loadu_pd(b.plane(row, 3) + col)}};
  }
  static void store(PlanarBlock<DD>& b, uint32_t row, uint32_t col, const c_t& z) {
    _mm256_storeu_pd(b.plane(row, 0) + col, z.re.hi);
    _mm256_storeu_pd(b.plane(row, 1) + col, z.re.lo);
    _mm256_storeu_pd(b.plane(row, 2) + col, z.im.hi);
    _mm256_storeu_pd(b.plane(row, 3) + col, z.im.lo);
  }
  static void maskstore(PlanarBlock<DD>& b, uint32_t row, uint32_t col, __m256i m, const c_t& z) {
    _mm256_maskstore_pd(b.plane(row, 0) + col, m, z.re.hi);
    _mm256_maskstore_pd(b.plane(row, 1) + col, m, z.re.lo);
    _mm256_maskstore_pd(b.plane(row, 2) + col, m, z.im.hi);
    _mm256_maskstore_pd(b.plane(row, 3) + col, m, z.im.lo);
  }
  static r_t load_real(const PlanarBlock<DD>& b, uint32_t row, uint32_t col) {
    return {{_mm256_loadu_pd(b.plane(row, 0) + col), _mm256_loadu_pd(b.plane(row, 1) + col)}};
  }
  static c_t broadcast(const Cplx<DD>& z) {
    return {{_mm256_set1_pd(z.re.hi), _mm256_set1_pd(z.re.lo)},
            {_mm256_set1_pd(z.im.hi), _mm256_set1_pd(z.im.lo)}};
  }
  static c_t one() {
    return {{_mm256_set1_pd(1.0), _mm256_setzero_pd()},
            {_mm256_setzero_pd(), _mm256_setzero_pd()}};
  }
  static c_t zero() {
    ddx4 z{_mm256_setzero_pd(), _mm256_setzero_pd()};
    return {z, z};
  }
  static c_t add(const c_t& a, const c_t& b) {
    return {vdd_add(a.re, b.re), vdd_add(a.im, b.im)};
  }
  static c_t mul(const c_t& a, const c_t& b) {
    return {vdd_sub(vdd_mul(a.re, b.re), vdd_mul(a.im, b.im)),
            vdd_add(vdd_mul(a.re, b.im), vdd_mul(a.im, b.re))};
  }
  static c_t scale_real(const c_t& a, const r_t& s) {
    return {vdd_mul(a.re, s.v), vdd_mul(a.im, s.v)};
  }
  static c_t scale_double(const c_t& a, double s) {
    __m256d sv = _mm256_set1_pd(s);
    return {vdd_muld(a.re, sv), vdd_muld(a.im, sv)};
  }
};

// group bookkeeping: [lo, hi) is split into 4-wide groups plus a scalar tail
struct Group {
  __m256i m;
  bool any;
  bool full;
};

inline Group group_mask(const uint8_t* mask, uint32_t col) {
  if (mask == nullptr) return {_mm256_set1_epi64x(-1LL), true, true};
  bool a0 = mask[col] != 0, a1 = mask[col + 1] != 0, a2 = mask[col + 2] != 0,
       a3 = mask[col + 3] != 0;
  return {lane_mask(mask, col), a0 || a1 || a2 || a3, a0 && a1 && a2 && a3};
}

// per-group activity masks for [lo, vec_end)
std::vector<Group> make_groups(const uint8_t* mask, uint32_t lo, uint32_t vec_end) {
  std::vector<Group> gs;
  gs.reserve((vec_end - lo) / 4);
  for (uint32_t col = lo; col + 4 <= vec_end; col += 4) gs.push_back(group_mask(mask, col));
  return gs;
}

// Stages iterate terms in the outer loop and stream path columns in the
// inner loop, so each workspace plane is walked sequentially.
template <class R>
void coeff_stage_vec(const EvalPlan<R>& plan, BatchWorkspace<R>& ws, uint32_t lo, uint32_t hi,
                     const uint8_t* mask) {
  using V = vec_ops<R>;
  const uint32_t n_terms = static_cast<uint32_t>(plan.terms.size());
  const uint32_t vec_end = lo + ((hi - lo) / 4) * 4;
  std::vector<Group> groups = make_groups(mask, lo, vec_end);
  for (uint32_t i = 0; i < n_terms; ++i) {
    typename V::c_t cs = V::broadcast(plan.c_start[i]);
    typename V::c_t ct = V::broadcast(plan.c_target[i]);
    for (uint32_t col = lo, gi = 0; col + 4 <= vec_end; col += 4, ++gi) {
      const Group& g = groups[gi];
      if (!g.any) continue;
      typename V::r_t t = V::load_real(ws.tpar, 0, col);
      typename V::r_t u = V::load_real(ws.tpar, 1, col);
      typename V::c_t c = V::add(V::scale_real(cs, u), V::scale_real(ct, t));
      if (g.full)
        V::store(ws.coeff, i, col, c);
      else
        V::maskstore(ws.coeff, i, col, g.m, c);
    }
  }
  if (vec_end < hi) coeff_stage_scalar(plan, ws, vec_end, hi, mask);
}

template <class R>
void mon_stage_vec(const EvalPlan<R>& plan, BatchWorkspace<R>& ws, uint32_t lo, uint32_t hi,
                   const uint8_t* mask) {
  using V = vec_ops<R>;
  const uint32_t vec_end = lo + ((hi - lo) / 4) * 4;
  std::vector<Group> groups = make_groups(mask, lo, vec_end);

  auto src_block = [&](MonStep::Loc loc) -> PlanarBlock<R>& {
    switch (loc) {
      case MonStep::Loc::point: return ws.points;
      case MonStep::Loc::mon: return ws.mon;
      default: return ws.scratch;
    }
  };
  auto src_row = [](MonStep::Loc loc, uint32_t row) -> uint32_t {
    switch (loc) {
      case MonStep::Loc::acc: return 0;
      case MonStep::Loc::aux: return 1;
      default: return row;
    }
  };

  for (const PlanTerm& term : plan.terms) {
    for (const MonStep& st : term.steps) {
      PlanarBlock<R>& dstb = src_block(st.dst);
      const uint32_t drow = src_row(st.dst, st.dst_row);
      for (uint32_t col = lo, gi = 0; col + 4 <= vec_end; col += 4, ++gi) {
        const Group& g = groups[gi];
        if (!g.any) continue;
        typename V::c_t out;
        switch (st.op) {
          case MonStep::Op::set_one:
            out = V::one();
            break;
          case MonStep::Op::copy:
            out = V::load(src_block(st.a), src_row(st.a, st.a_row), col);
            break;
          default: {
            typename V::c_t a = V::load(src_block(st.a), src_row(st.a, st.a_row), col);
            typename V::c_t b = V::load(src_block(st.b), src_row(st.b, st.b_row), col);
            out = V::mul(a, b);
            break;
          }
        }
        if (g.full)
          V::store(dstb, drow, col, out);
        else
          V::maskstore(dstb, drow, col, g.m, out);
      }
    }
  }
  if (vec_end < hi) mon_stage_scalar(plan, ws, vec_end, hi, mask);
}

template <class R>
void sum_stage_vec(const EvalPlan<R>& plan, BatchWorkspace<R>& ws, uint32_t lo, uint32_t hi,
                   const uint8_t* mask) {
  using V = vec_ops<R>;
  const uint32_t n_terms = static_cast<uint32_t>(plan.terms.size());
  const uint32_t vec_end = lo + ((hi - lo) / 4) * 4;
  std::vector<Group> groups = make_groups(mask, lo, vec_end);

  typename V::c_t zero = V::zero();
  auto put = [&](PlanarBlock<R>& b, uint32_t row, uint32_t col, const Group& g,
                 const typename V::c_t& z) {
    if (g.full)
      V::store(b, row, col, z);
    else
      V::maskstore(b, row, col, g.m, z);
  };
  auto zero_row = [&](PlanarBlock<R>& b, uint32_t row) {
    for (uint32_t col = lo, gi = 0; col + 4 <= vec_end; col += 4, ++gi) {
      if (!groups[gi].any) continue;
      put(b, row, col, groups[gi], zero);
    }
  };
  for (uint32_t row = 0; row < ws.sys.rows(); ++row) zero_row(ws.sys, row);
  for (uint32_t row = 0; row < ws.jac.rows(); ++row) zero_row(ws.jac, row);

  for (uint32_t i = 0; i < n_terms; ++i) {
    const PlanTerm& term = plan.terms[i];
    const uint32_t k = static_cast<uint32_t>(term.positions.size());
    if (k == 0) {
      for (uint32_t col = lo, gi = 0; col + 4 <= vec_end; col += 4, ++gi) {
        const Group& g = groups[gi];
        if (!g.any) continue;
        typename V::c_t c = V::load(ws.coeff, i, col);
        put(ws.sys, term.poly, col, g, V::add(V::load(ws.sys, term.poly, col), c));
      }
      continue;
    }
    for (uint32_t col = lo, gi = 0; col + 4 <= vec_end; col += 4, ++gi) {
      const Group& g = groups[gi];
      if (!g.any) continue;
      typename V::c_t c = V::load(ws.coeff, i, col);
      typename V::c_t v = V::load(ws.mon, term.slot0, col);
      put(ws.sys, term.poly, col, g, V::add(V::load(ws.sys, term.poly, col), V::mul(c, v)));
    }
    for (uint32_t j = 0; j < k; ++j) {
      const uint32_t jrow = term.poly * plan.dim + term.positions[j];
      const bool unit = term.pos_exponents[j] == 1;
      const double e = static_cast<double>(term.pos_exponents[j]);
      for (uint32_t col = lo, gi = 0; col + 4 <= vec_end; col += 4, ++gi) {
        const Group& g = groups[gi];
        if (!g.any) continue;
        typename V::c_t c = V::load(ws.coeff, i, col);
        typename V::c_t d = V::load(ws.mon, term.slot0 + 1 + j, col);
        typename V::c_t w = V::mul(c, d);
        if (!unit) w = V::scale_double(w, e);
        put(ws.jac, jrow, col, g, V::add(V::load(ws.jac, jrow, col), w));
      }
    }
  }
  if (vec_end < hi) sum_stage_scalar(plan, ws, vec_end, hi, mask);
}

}  // namespace

void coeff_stage_avx2(const EvalPlan<double>& plan, BatchWorkspace<double>& ws, uint32_t lo,
                      uint32_t hi, const uint8_t* mask) {
  coeff_stage_vec(plan, ws, lo, hi, mask);
}
void mon_stage_avx2(const EvalPlan<double>& plan, BatchWorkspace<double>& ws, uint32_t lo,
                    uint32_t hi, const uint8_t* mask) {
  mon_stage_vec(plan, ws, lo, hi, mask);
}
void sum_stage_avx2(const EvalPlan<double>& plan, BatchWorkspace<double>& ws, uint32_t lo,
                    uint32_t hi, const uint8_t* mask) {
  sum_stage_vec(plan, ws, lo, hi, mask);
}
void coeff_stage_avx2(const EvalPlan<DD>& plan, BatchWorkspace<DD>& ws, uint32_t lo, uint32_t hi,
                      const uint8_t* mask) {
  coeff_stage_vec(plan, ws, lo, hi, mask);
}
void mon_stage_avx2(const EvalPlan<DD>& plan, BatchWorkspace<DD>& ws, uint32_t lo, uint32_t hi,
                    const uint8_t* mask) {
  mon_stage_vec(plan, ws, lo, hi, mask);
}
void sum_stage_avx2(const EvalPlan<DD>& plan, BatchWorkspace<DD>& ws, uint32_t lo, uint32_t hi,
                    const uint8_t* mask) {
  sum_stage_vec(plan, ws, lo, hi, mask);
}

}  // namespace polypath::detail

#endif  // POLYPATH_HAVE_AVX2_KERNELS
