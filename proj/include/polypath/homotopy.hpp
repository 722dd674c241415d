#pragma once
// Linear homotopy construction with the gamma trick, total-degree start
// systems with root-of-unity start solutions, and ingestion of user-supplied
// start data.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "polypath/evaldiff.hpp"
#include "polypath/polysys.hpp"

namespace polypath {

template <class R>
struct HomotopyInstance {
  PolySystem target;
  PolySystem start;
  Cplx<R> gamma;
  EvalPlan<R> plan;  // merged coefficient table; H(x,0) = gamma*g, H(x,1) = f
};

// requires matching dimensions and |gamma| within 1e-12 of 1
template <class R>
HomotopyInstance<R> make_homotopy(PolySystem f, PolySystem g, Cplx<R> gamma);

// e^{i*theta} with theta drawn from splitmix64(seed); reproducible everywhere
Cplx<double> random_gamma(uint64_t seed);

enum class StartProvenance : uint8_t { total_degree, file };

// Start solutions, either an explicit list (file provenance) or the lazily
// indexed tuples of roots of unity of a total-degree start system.  The
// total-degree enumeration is lexicographic: index 0 is (1,...,1) and the
// last variable's root index moves fastest.
template <class R>
struct StartData {
  StartProvenance provenance = StartProvenance::total_degree;
  uint64_t count = 0;

  std::vector<uint32_t> degrees;                  // total-degree mode
  std::vector<std::vector<Cplx<R>>> roots;        // per-variable root tables
  std::vector<std::vector<Cplx<R>>> explicit_solutions;  // file mode

  std::vector<Cplx<R>> solution(uint64_t index) const;
};

// g_i = x_i^{d_i} - 1 with d_i = deg f_i; rejects any d_i = 0
template <class R>
std::pair<PolySystem, StartData<R>> total_degree_start(const PolySystem& f);

template <class R>
struct StartLoadReport {
  StartData<R> data;
  struct Rejected {
    size_t index;    // 0-based position in the input list
    double residual;
  };
  std::vector<Rejected> rejected;
};

// verifies each candidate against g with the infinity norm; candidates with
// residual >= start_tol are reported and excluded
template <class R>
StartLoadReport<R> load_start_data(const PolySystem& g,
                                   const std::vector<std::vector<Cplx<QD>>>& candidates,
                                   double start_tol = 1e-8);

}  // namespace polypath
