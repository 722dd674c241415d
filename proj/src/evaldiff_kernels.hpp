#pragma once
// Internal stage-kernel entry points.  Scalar templates are instantiated in
// evaldiff.cpp; the AVX2 variants live in evaldiff_avx2.cpp (compiled with
// -mavx2 -mfma) and fall back to the scalar kernels for tail columns.

#include "polypath/evaldiff.hpp"

namespace polypath::detail {

template <class R>
void coeff_stage_scalar(const EvalPlan<R>& plan, BatchWorkspace<R>& ws, uint32_t lo, uint32_t hi,
                        const uint8_t* mask);
template <class R>
void mon_stage_scalar(const EvalPlan<R>& plan, BatchWorkspace<R>& ws, uint32_t lo, uint32_t hi,
                      const uint8_t* mask);
template <class R>
void sum_stage_scalar(const EvalPlan<R>& plan, BatchWorkspace<R>& ws, uint32_t lo, uint32_t hi,
                      const uint8_t* mask);

#if defined(__x86_64__) || defined(_M_X64)
#define POLYPATH_HAVE_AVX2_KERNELS 1
void coeff_stage_avx2(const EvalPlan<double>& plan, BatchWorkspace<double>& ws, uint32_t lo,
                      uint32_t hi, const uint8_t* mask);
void mon_stage_avx2(const EvalPlan<double>& plan, BatchWorkspace<double>& ws, uint32_t lo,
                    uint32_t hi, const uint8_t* mask);
void sum_stage_avx2(const EvalPlan<double>& plan, BatchWorkspace<double>& ws, uint32_t lo,
                    uint32_t hi, const uint8_t* mask);
void coeff_stage_avx2(const EvalPlan<DD>& plan, BatchWorkspace<DD>& ws, uint32_t lo, uint32_t hi,
                      const uint8_t* mask);
void mon_stage_avx2(const EvalPlan<DD>& plan, BatchWorkspace<DD>& ws, uint32_t lo, uint32_t hi,
                    const uint8_t* mask);
void sum_stage_avx2(const EvalPlan<DD>& plan, BatchWorkspace<DD>& ws, uint32_t lo, uint32_t hi,
                    const uint8_t* mask);
#endif

}  // namespace polypath::detail
