#pragma once
// Batched evaluation and differentiation of a polynomial homotopy in three
// stages over a block of paths:
//
//   1. coefficient stage: c(t) = (1-t) * c_start + t * c_target per term
//      (the start coefficients already carry the gamma factor),
//   2. monomial stage: value and all partial derivatives of every monomial
//      via prefix/suffix products (3k-5 multiplications for a k-variable
//      product), executed from a precompiled step list,
//   3. sum stage: accumulation into system values and Jacobians in a fixed,
//      deterministic term order.
//
// All per-path data lives in a transposed, limb-planar layout: for each
// workspace row, each limb of each component is a contiguous lane of B
// doubles, one per path.  Stages are data-parallel over path columns; scalar
// reference kernels and AVX2 kernels (double and double-double lanes) are
// selected at runtime and produce bitwise-identical results.

#include <cstdint>
#include <span>
#include <vector>

#include "polypath/complex.hpp"
#include "polypath/polysys.hpp"

namespace polypath {

// ---------------------------------------------------------------------------
// kernel selection
// ---------------------------------------------------------------------------

enum class SimdMode : uint8_t { automatic, scalar, avx2 };

void set_simd_mode(SimdMode m);
SimdMode simd_mode();
bool avx2_supported();

// true when the AVX2 lane will run for this precision under the current mode
bool simd_active(Precision level);

// smallest column block worth handing to an extra worker; wake latency only
// amortizes over a few hundred microseconds of arithmetic
template <class R>
constexpr uint32_t parallel_grain() {
  if constexpr (std::is_same_v<R, double>)
    return 256;
  else if constexpr (std::is_same_v<R, DD>)
    return 128;
  else
    return 32;
}

// ---------------------------------------------------------------------------
// plan
// ---------------------------------------------------------------------------

// One interpreted step of the monomial stage.  Rows are absolute indices
// into the referenced block; acc and aux are the two workspace scratch rows.
struct MonStep {
  enum class Op : uint8_t { set_one, copy, mul };
  enum class Loc : uint8_t { none, point, mon, acc, aux };

  Op op;
  Loc dst, a, b;
  uint32_t dst_row = 0, a_row = 0, b_row = 0;
  bool counts = false;  // position-product multiplication (the 3k-5 budget)
};

struct PlanTerm {
  uint32_t poly = 0;
  std::vector<VarIndex> positions;                            // ascending, size k
  std::vector<uint32_t> pos_exponents;                        // e_i per position
  std::vector<std::pair<VarIndex, uint32_t>> base_exponents;  // (v, e-1) with e-1 >= 1
  uint32_t slot0 = 0;   // value row; derivative rows slot0+1 .. slot0+k
  std::vector<MonStep> steps;
  uint32_t posprod_muls = 0;
  uint32_t base_muls = 0;
};

template <class R>
struct EvalPlan {
  uint32_t dim = 0;
  uint32_t n_polys = 0;
  uint32_t mon_rows = 0;  // sum over terms of (1 + k)
  std::vector<PlanTerm> terms;
  std::vector<Cplx<R>> c_start;   // gamma * start coefficient, per term
  std::vector<Cplx<R>> c_target;  // target coefficient, per term

  uint64_t total_posprod_muls() const {
    uint64_t n = 0;
    for (const PlanTerm& t : terms) n += t.posprod_muls;
    return n;
  }
};

// Merged plan over the union of the supports of f and g, polynomial-major,
// f's terms in source order first, then g's terms absent from f.  Missing
// coefficients are exact zeros.  gamma is folded into the start coefficients.
template <class R>
EvalPlan<R> build_plan(const PolySystem& f, const PolySystem& g, Cplx<R> gamma);

// plan for evaluating a single system (start side empty; evaluate at t = 1)
template <class R>
EvalPlan<R> build_plan(const PolySystem& f);

// step list for a k-variable position product with unit base, for schedule
// inspection; slot rows are term-relative (value 0, derivatives 1..k)
std::vector<MonStep> position_product_schedule(uint32_t k);

// ---------------------------------------------------------------------------
// workspace
// ---------------------------------------------------------------------------

// rows x batch block of complex (comps = 2) or real (comps = 1) values at
// level R, stored as planes: plane p of row r is a contiguous lane of B
// doubles; complex rows order planes [re limbs..., im limbs...]
template <class R>
class PlanarBlock {
 public:
  static constexpr uint32_t limbs = static_cast<uint32_t>(precision_traits<R>::limbs);

  PlanarBlock() = default;
  PlanarBlock(uint32_t rows, uint32_t batch, uint32_t comps)
      : rows_(rows),
        batch_(batch),
        planes_(comps * limbs),
        d_(static_cast<size_t>(rows) * planes_ * batch, 0.0) {}

  uint32_t rows() const { return rows_; }
  uint32_t batch() const { return batch_; }

  double* plane(uint32_t row, uint32_t p) {
    return d_.data() + (static_cast<size_t>(row) * planes_ + p) * batch_;
  }
  const double* plane(uint32_t row, uint32_t p) const {
    return d_.data() + (static_cast<size_t>(row) * planes_ + p) * batch_;
  }

  Cplx<R> load(uint32_t row, uint32_t path) const {
    Cplx<R> z;
    for (uint32_t l = 0; l < limbs; ++l) {
      set_limb(z.re, static_cast<int>(l), plane(row, l)[path]);
      set_limb(z.im, static_cast<int>(l), plane(row, limbs + l)[path]);
    }
    return z;
  }

  void store(uint32_t row, uint32_t path, const Cplx<R>& z) {
    for (uint32_t l = 0; l < limbs; ++l) {
      plane(row, l)[path] = get_limb(z.re, static_cast<int>(l));
      plane(row, limbs + l)[path] = get_limb(z.im, static_cast<int>(l));
    }
  }

  R load_real(uint32_t row, uint32_t path) const {
    R v{};
    for (uint32_t l = 0; l < limbs; ++l) set_limb(v, static_cast<int>(l), plane(row, l)[path]);
    return v;
  }

  void store_real(uint32_t row, uint32_t path, const R& v) {
    for (uint32_t l = 0; l < limbs; ++l) plane(row, l)[path] = get_limb(v, static_cast<int>(l));
  }

  void zero() { std::fill(d_.begin(), d_.end(), 0.0); }

  std::span<const double> raw() const { return d_; }

 private:
  uint32_t rows_ = 0, batch_ = 0, planes_ = 0;
  std::vector<double> d_;
};

// persistent per-(plan, B) work space, reused across tracker steps
template <class R>
struct BatchWorkspace {
  uint32_t batch = 0;
  PlanarBlock<R> points;   // dim rows, complex: x per path
  PlanarBlock<R> tpar;     // 2 real rows: t and 1-t per path
  PlanarBlock<R> coeff;    // one complex row per term
  PlanarBlock<R> mon;      // value/derivative slots, transposed layout
  PlanarBlock<R> sys;      // n_polys rows
  PlanarBlock<R> jac;      // n_polys*dim rows, row = poly*dim + var
  PlanarBlock<R> scratch;  // 2 complex rows (suffix accumulator, base value)
  uint64_t posprod_muls = 0;  // per-path position-product multiplications executed

  BatchWorkspace() = default;
  BatchWorkspace(const EvalPlan<R>& plan, uint32_t b)
      : batch(b),
        points(plan.dim, b, 2),
        tpar(2, b, 1),
        coeff(static_cast<uint32_t>(plan.terms.size()), b, 2),
        mon(plan.mon_rows, b, 2),
        sys(plan.n_polys, b, 2),
        jac(plan.n_polys * plan.dim, b, 2),
        scratch(2, b, 2) {}

  void set_t(uint32_t path, const R& t) {
    tpar.store_real(0, path, t);
    tpar.store_real(1, path, R{1.0} - t);
  }

  void set_point(uint32_t path, std::span<const Cplx<R>> x) {
    for (uint32_t i = 0; i < points.rows(); ++i) points.store(i, path, x[i]);
  }
};

// ---------------------------------------------------------------------------
// stages
// ---------------------------------------------------------------------------

// Each stage processes path columns [lo, hi); when mask is non-null, columns
// with mask[col] == 0 are idle lanes and are left untouched.
template <class R>
void eval_coefficients(const EvalPlan<R>& plan, BatchWorkspace<R>& ws, uint32_t lo, uint32_t hi,
                       const uint8_t* mask = nullptr);

template <class R>
void eval_monomials(const EvalPlan<R>& plan, BatchWorkspace<R>& ws, uint32_t lo, uint32_t hi,
                    const uint8_t* mask = nullptr);

template <class R>
void sum_batch(const EvalPlan<R>& plan, BatchWorkspace<R>& ws, uint32_t lo, uint32_t hi,
               const uint8_t* mask = nullptr);

// the three stages over all batch columns, barrier-separated, data-parallel
// over a disjoint column partition
template <class R>
void eval_system_batch(const EvalPlan<R>& plan, BatchWorkspace<R>& ws, unsigned workers = 1,
                       const uint8_t* mask = nullptr);

// single-point convenience: evaluate H(x, t) and its Jacobian
template <class R>
void eval_single(const EvalPlan<R>& plan, BatchWorkspace<R>& ws, std::span<const Cplx<R>> x,
                 const R& t, std::span<Cplx<R>> values, std::span<Cplx<R>> jac_rowmajor);

}  // namespace polypath
