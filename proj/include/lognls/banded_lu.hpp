#pragma once

// Banded LU factorization of shifted graph operators.
//
// The coefficient layout [vertex; chains] is not banded (the vertex row
// touches every chain), but the reordering
//   chain 0 reversed, vertex, chains 1..C-1 interleaved point by point
// has bandwidth C-1: the vertex sits between chain 0's first point and the
// first points of the other chains, and each remaining chain advances by C-1
// slots per grid point. LAPACK's general-band LU with partial pivoting then
// factors mult*B + shift*I in O(dim * C^2).

#include <algorithm>
#include <vector>

#include "lognls/errors.hpp"
#include "lognls/lapack_defs.hpp"
#include "lognls/operators.hpp"

namespace lognls {

struct BandedLayout {
  int n = 0;
  int kd = 1;
  std::vector<int> pos;  // coefficient index -> banded index

  static BandedLayout of(const GraphOperator& op) {
    const int M = op.graph.m_points;
    const int C = op.chains();
    BandedLayout lay;
    lay.n = op.dim();
    lay.kd = std::max(1, C - 1);
    lay.pos.resize(lay.n);
    lay.pos[0] = M;
    for (int i = 1; i <= M; ++i) lay.pos[op.index(0, i)] = M - i;
    for (int c = 1; c < C; ++c)
      for (int i = 1; i <= M; ++i) lay.pos[op.index(c, i)] = M + 1 + (i - 1) * (C - 1) + (c - 1);
    return lay;
  }
};

namespace detail {

inline lapack_int gbtrf(lapack_int n, lapack_int kl, lapack_int ku, double* ab, lapack_int ldab,
                        lapack_int* ipiv) {
  return LAPACKE_dgbtrf(LAPACK_COL_MAJOR, n, n, kl, ku, ab, ldab, ipiv);
}
inline lapack_int gbtrf(lapack_int n, lapack_int kl, lapack_int ku, Complex* ab, lapack_int ldab,
                        lapack_int* ipiv) {
  return LAPACKE_zgbtrf(LAPACK_COL_MAJOR, n, n, kl, ku, ab, ldab, ipiv);
}
inline lapack_int gbtrs(lapack_int n, lapack_int kl, lapack_int ku, const double* ab,
                        lapack_int ldab, const lapack_int* ipiv, double* b) {
  return LAPACKE_dgbtrs(LAPACK_COL_MAJOR, 'N', n, kl, ku, 1, ab, ldab, ipiv, b, n);
}
inline lapack_int gbtrs(lapack_int n, lapack_int kl, lapack_int ku, const Complex* ab,
                        lapack_int ldab, const lapack_int* ipiv, Complex* b) {
  return LAPACKE_zgbtrs(LAPACK_COL_MAJOR, 'N', n, kl, ku, 1, ab, ldab, ipiv, b, n);
}

}  // namespace detail

template <class Scalar>
class BandedLU {
 public:
  // Factors mult*B + shift*I, with B the symmetrized operator matrix.
  BandedLU(const GraphOperator& op, const BandedLayout& lay, Scalar mult, Scalar shift)
      : n_(lay.n), kd_(lay.kd), ldab_(3 * lay.kd + 1), lay_(&lay) {
    ab_.assign(static_cast<std::size_t>(ldab_) * n_, Scalar{});
    auto put = [&](int i, int j, double v) {
      const int bi = lay.pos[i], bj = lay.pos[j];
      ab_[static_cast<std::size_t>(bj) * ldab_ + (2 * kd_ + bi - bj)] += mult * v;
    };
    for_each_sym_entry(op, [&](int i, int j, double v) {
      put(i, j, v);
      if (i != j) put(j, i, v);
    });
    for (int j = 0; j < n_; ++j) ab_[static_cast<std::size_t>(j) * ldab_ + 2 * kd_] += shift;
    ipiv_.resize(n_);
    info_ = detail::gbtrf(n_, kd_, kd_, ab_.data(), ldab_, ipiv_.data());
  }

  bool ok() const { return info_ == 0; }
  lapack_int info() const { return info_; }

  // Solve in place; x uses the [vertex; chains] coefficient layout.
  void solve(std::vector<Scalar>& x) const {
    require(ok(), Errc::no_convergence, "banded factorization is singular");
    require(static_cast<int>(x.size()) == n_, Errc::graph_mismatch, "vector length mismatch");
    scratch_.resize(n_);
    for (int i = 0; i < n_; ++i) scratch_[lay_->pos[i]] = x[i];
    const lapack_int info =
        detail::gbtrs(n_, kd_, kd_, ab_.data(), ldab_, ipiv_.data(), scratch_.data());
    require(info == 0, Errc::no_convergence, "banded back-substitution failed");
    for (int i = 0; i < n_; ++i) x[i] = scratch_[lay_->pos[i]];
  }

 private:
  int n_, kd_, ldab_;
  const BandedLayout* lay_;
  std::vector<Scalar> ab_;
  std::vector<lapack_int> ipiv_;
  lapack_int info_ = -1;
  mutable std::vector<Scalar> scratch_;
};

}  // namespace lognls
