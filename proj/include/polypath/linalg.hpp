#pragma once
// Modified Gram-Schmidt QR and least-squares solve over complex values at
// any precision level.  Each column gets a second orthogonalization pass, so
// Q stays numerically orthogonal even for ill-conditioned inputs (plain MGS
// loses orthogonality proportionally to the condition number).

#include <cstdint>
#include <span>
#include <vector>

#include "polypath/complex.hpp"

namespace polypath {

template <class R>
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(uint32_t m, uint32_t n) : m_(m), n_(n), a_(static_cast<size_t>(m) * n) {}

  uint32_t rows() const { return m_; }
  uint32_t cols() const { return n_; }

  Cplx<R>& at(uint32_t i, uint32_t j) { return a_[static_cast<size_t>(j) * m_ + i]; }
  const Cplx<R>& at(uint32_t i, uint32_t j) const { return a_[static_cast<size_t>(j) * m_ + i]; }

  Cplx<R>* col(uint32_t j) { return a_.data() + static_cast<size_t>(j) * m_; }
  const Cplx<R>* col(uint32_t j) const { return a_.data() + static_cast<size_t>(j) * m_; }

  static DenseMatrix identity(uint32_t n) {
    DenseMatrix m(n, n);
    for (uint32_t i = 0; i < n; ++i) m.at(i, i) = Cplx<R>{R{1.0}, R{}};
    return m;
  }

 private:
  uint32_t m_ = 0, n_ = 0;
  std::vector<Cplx<R>> a_;  // column-major
};

template <class R>
struct QRFactors {
  DenseMatrix<R> q;  // m x n, orthonormal columns
  DenseMatrix<R> r;  // n x n, upper triangular, real positive diagonal
};

template <class R>
constexpr double default_rank_tol() {
  if constexpr (std::is_same_v<R, double>)
    return 1e-8;
  else if constexpr (std::is_same_v<R, DD>)
    return 1e-16;
  else
    return 1e-32;
}

namespace lin_detail {

template <class R>
R col_norm(const Cplx<R>* c, uint32_t m) {
  R acc{};
  for (uint32_t i = 0; i < m; ++i) acc = acc + abs2(c[i]);
  using polypath::sqrt;
  using std::sqrt;
  return sqrt(acc);
}

template <class R>
Cplx<R> dot_conj(const Cplx<R>* a, const Cplx<R>* b, uint32_t m) {
  Cplx<R> acc{};
  for (uint32_t i = 0; i < m; ++i) acc = acc + conj(a[i]) * b[i];
  return acc;
}

}  // namespace lin_detail

// Returns false on rank deficiency (a diagonal of R below rank_tol times the
// largest column norm).  Requires m >= n.
template <class R>
bool mgs_qr(DenseMatrix<R> a, QRFactors<R>& out, double rank_tol = default_rank_tol<R>()) {
  const uint32_t m = a.rows(), n = a.cols();
  out.r = DenseMatrix<R>(n, n);
  R max_norm{};
  for (uint32_t j = 0; j < n; ++j) {
    R nj = lin_detail::col_norm(a.col(j), m);
    if (compare(nj, max_norm) > 0) max_norm = nj;
  }
  R tol = max_norm * R{rank_tol};

  for (uint32_t k = 0; k < n; ++k) {
    Cplx<R>* ck = a.col(k);
    // two orthogonalization passes against the finished columns
    for (int pass = 0; pass < 2; ++pass) {
      for (uint32_t i = 0; i < k; ++i) {
        Cplx<R> rik = lin_detail::dot_conj(a.col(i), ck, m);
        out.r.at(i, k) += rik;
        for (uint32_t row = 0; row < m; ++row) ck[row] -= rik * a.col(i)[row];
      }
    }
    R rkk = lin_detail::col_norm(ck, m);
    if (compare(rkk, tol) <= 0) return false;
    out.r.at(k, k) = Cplx<R>{rkk, R{}};
    R rinv = R{1.0} / rkk;
    for (uint32_t row = 0; row < m; ++row) ck[row] = ck[row] * rinv;
  }
  out.q = std::move(a);
  return true;
}

// x minimizing ||Ax - b||_2 via R x = Q^H b; false on rank deficiency
template <class R>
bool least_squares_solve(const DenseMatrix<R>& a, std::span<const Cplx<R>> b,
                         std::span<Cplx<R>> x, double rank_tol = default_rank_tol<R>()) {
  const uint32_t m = a.rows(), n = a.cols();
  QRFactors<R> qr;
  if (!mgs_qr(a, qr, rank_tol)) return false;
  std::vector<Cplx<R>> y(n);
  for (uint32_t j = 0; j < n; ++j) y[j] = lin_detail::dot_conj(qr.q.col(j), b.data(), m);
  for (uint32_t j = n; j-- > 0;) {
    Cplx<R> acc = y[j];
    for (uint32_t i = j + 1; i < n; ++i) acc -= qr.r.at(j, i) * x[i];
    x[j] = acc / qr.r.at(j, j);
  }
  return true;
}

}  // namespace polypath
