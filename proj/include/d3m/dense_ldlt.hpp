#pragma once

// Dense complex-symmetric LDL^T with Bunch-Kaufman partial pivoting.
//
// The factorization satisfies P M P^T = L D L^T with L unit lower
// triangular, D block diagonal with 1x1 and 2x2 pivots, and P a symmetric
// permutation. Interchanges are applied to whole rows, so L is in standard
// (not product) form. Magnitudes are complex moduli; the matrix is symmetric,
// not Hermitian, so nothing is conjugated.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <utility>
#include <vector>

#include "d3m/types.hpp"

namespace d3m {

inline constexpr double kDefaultPivotTol = 1e-12;
// (1 + sqrt(17)) / 8 balances the element growth of 1x1 and 2x2 steps.
inline constexpr double kBunchKaufmanAlpha = 0.64038820320220756872767623199676;
// Per-column element growth bound 1 + 1/alpha.
inline constexpr double kBunchKaufmanGrowthBound = 1.0 + 1.0 / kBunchKaufmanAlpha;
inline constexpr Index kDefaultPanelWidth = 48;

enum class PivotKind : std::uint8_t {
  kSecondOf2x2 = 0,
  k1x1 = 1,
  kFirstOf2x2 = 2,
};

// Solves [[a, b], [b, c]] [x; y] = [r; s], pivoting on whichever of a, b has
// the larger modulus.
inline std::pair<cplx, cplx> solve_sym_2x2(cplx a, cplx b, cplx c, cplx r, cplx s) {
  if (std::abs(a) >= std::abs(b)) {
    const cplx m = b / a;
    const cplx y = (s - m * r) / (c - m * b);
    return {(r - b * y) / a, y};
  }
  const cplx m = a / b;
  const cplx y = (r - m * s) / (b - m * c);
  return {(s - c * y) / b, y};
}

class DenseFactor {
 public:
  DenseFactor() = default;

  Index size() const { return n_; }
  // Allocated factor entries: n(n+1)/2 (strict L plus D, packed).
  Index entries() const { return static_cast<Index>(packed_.size()); }

  // perm[a] is the original index at position a: (P M P^T)(a,b) = M(perm[a], perm[b]).
  const std::vector<Index>& permutation() const { return perm_; }
  const std::vector<PivotKind>& pivot_kinds() const { return kinds_; }
  Index num_2x2_pivots() const { return n2x2_; }
  double growth_factor() const { return growth_; }
  double flops() const { return flops_; }

  // Lower-triangle packed entry (r >= c).
  cplx at(Index r, Index c) const { return packed_[col_offset(c) + (r - c)]; }

  DenseMatrix unit_lower() const {
    DenseMatrix L = DenseMatrix::Identity(n_, n_);
    for (Index c = 0; c < n_; ++c) {
      for (Index r = first_l_row(c); r < n_; ++r) L(r, c) = at(r, c);
    }
    return L;
  }

  DenseMatrix block_diagonal() const {
    DenseMatrix D = DenseMatrix::Zero(n_, n_);
    for (Index c = 0; c < n_; ++c) {
      D(c, c) = at(c, c);
      if (kinds_[c] == PivotKind::kFirstOf2x2) {
        D(c + 1, c) = at(c + 1, c);
        D(c, c + 1) = at(c + 1, c);
      }
    }
    return D;
  }

  DenseMatrix reconstruct() const {
    const DenseMatrix L = unit_lower();
    return L * block_diagonal() * L.transpose();
  }

  // y(a) = b(perm[a]).
  void permute_in_place(Eigen::Ref<DenseVector> b) const {
    DenseVector tmp = b;
    for (Index a = 0; a < n_; ++a) b(a) = tmp(perm_[a]);
  }

  // b(perm[a]) = y(a).
  void unpermute_in_place(Eigen::Ref<DenseVector> y) const {
    DenseVector tmp = y;
    for (Index a = 0; a < n_; ++a) y(perm_[a]) = tmp(a);
  }

  void lower_solve_in_place(Eigen::Ref<DenseVector> y) const {
    for (Index c = 0; c < n_; ++c) {
      const Index start = first_l_row(c);
      if (start < n_) y.segment(start, n_ - start) -= l_column(c, start) * y(c);
    }
  }

  void diagonal_solve_in_place(Eigen::Ref<DenseVector> y) const {
    for (Index c = 0; c < n_; ++c) {
      if (kinds_[c] == PivotKind::k1x1) {
        y(c) /= at(c, c);
      } else if (kinds_[c] == PivotKind::kFirstOf2x2) {
        const auto [x0, x1] = solve_sym_2x2(at(c, c), at(c + 1, c), at(c + 1, c + 1), y(c), y(c + 1));
        y(c) = x0;
        y(c + 1) = x1;
      }
    }
  }

  void lower_transpose_solve_in_place(Eigen::Ref<DenseVector> y) const {
    for (Index c = n_ - 1; c >= 0; --c) {
      const Index start = first_l_row(c);
      if (start < n_) y(c) -= (l_column(c, start).transpose() * y.segment(start, n_ - start))(0);
    }
  }

  // M x = b.
  void solve_in_place(Eigen::Ref<DenseVector> b) const {
    if (b.size() != n_) throw DimensionError("dense solve: right-hand side size mismatch");
    permute_in_place(b);
    lower_solve_in_place(b);
    diagonal_solve_in_place(b);
    lower_transpose_solve_in_place(b);
    unpermute_in_place(b);
  }

  DenseVector solve(const DenseVector& b) const {
    DenseVector x = b;
    solve_in_place(x);
    return x;
  }

  // Column-by-column; identical to repeated single solves.
  DenseMatrix solve(const DenseMatrix& B) const {
    if (B.rows() != n_) throw DimensionError("dense solve: right-hand side size mismatch");
    DenseMatrix X = B;
    for (Index c = 0; c < X.cols(); ++c) {
      DenseVector col = X.col(c);
      solve_in_place(col);
      X.col(c) = col;
    }
    return X;
  }

  // X <- X D^{-1} (equivalently D^{-1} applied to each row, D symmetric).
  void diagonal_solve_rows(DenseMatrix& X) const {
    if (X.cols() != n_) throw DimensionError("diagonal solve: column count mismatch");
    for (Index c = 0; c < n_; ++c) {
      if (kinds_[c] == PivotKind::k1x1) {
        X.col(c) /= at(c, c);
      } else if (kinds_[c] == PivotKind::kFirstOf2x2) {
        const cplx a = at(c, c), b = at(c + 1, c), d = at(c + 1, c + 1);
        for (Index r = 0; r < X.rows(); ++r) {
          const auto [x0, x1] = solve_sym_2x2(a, b, d, X(r, c), X(r, c + 1));
          X(r, c) = x0;
          X(r, c + 1) = x1;
        }
      }
    }
  }

 private:
  friend DenseFactor dense_ldlt_bk(const DenseMatrix& M, double pivot_tol, Index panel_width);

  Index col_offset(Index c) const { return c * n_ - c * (c - 1) / 2; }

  // The (c+1, c) slot of a leading 2x2 index holds D, not L.
  Index first_l_row(Index c) const { return kinds_[c] == PivotKind::kFirstOf2x2 ? c + 2 : c + 1; }

  Eigen::Map<const DenseVector> l_column(Index c, Index start) const {
    return {packed_.data() + col_offset(c) + (start - c), n_ - start};
  }

  Index n_ = 0;
  std::vector<cplx> packed_;
  std::vector<Index> perm_;
  std::vector<PivotKind> kinds_;
  Index n2x2_ = 0;
  double growth_ = 1.0;
  double flops_ = 0.0;
};

namespace detail {

struct BkState {
  Index n = 0;
  double threshold = 0.0;
  double mu = 0.0;  // max modulus of the active submatrix
  double growth = 1.0;
  double flops = 0.0;
  Index n2x2 = 0;
  std::vector<Index> perm;
  std::vector<PivotKind> kinds;
};

struct PivotChoice {
  Index kp = 0;
  Index step = 1;
  bool use_second_column = false;  // 1x1 on the imax column
};

// Bunch-Kaufman pivot test. `col` holds the active part of column k (rows
// k..n-1), `rowcol` lazily yields the active part of column imax.
template <class ColumnK, class ColumnR>
PivotChoice choose_pivot(Index k, const ColumnK& col, ColumnR&& rowcol, const BkState& st) {
  const Index m = st.n - k;
  const double absakk = std::abs(col(0));
  double colmax = 0.0;
  Index imax = k;
  if (m > 1) {
    Index idx = 0;
    colmax = std::sqrt(col.tail(m - 1).cwiseAbs2().maxCoeff(&idx));
    imax = k + 1 + idx;
  }
  if (std::max(absakk, colmax) <= st.threshold) {
    std::ostringstream msg;
    msg << "singular block at elimination step " << k << ": max pivot candidate "
        << std::max(absakk, colmax) << " <= tolerance " << st.threshold;
    throw SingularBlock(-1, k, msg.str());
  }
  if (absakk >= kBunchKaufmanAlpha * colmax) return {k, 1, false};
  const auto& r = rowcol(imax);  // active column imax, rows k..n-1
  double rowmax = 0.0;
  for (Index t = 0; t < m; ++t) {
    if (k + t != imax) rowmax = std::max(rowmax, std::norm(r(t)));
  }
  rowmax = std::sqrt(rowmax);
  if (absakk >= kBunchKaufmanAlpha * colmax * (colmax / rowmax)) return {k, 1, false};
  if (std::abs(r(imax - k)) >= kBunchKaufmanAlpha * rowmax) return {imax, 1, true};
  return {imax, 2, false};
}

inline double lower_max_abs(const DenseMatrix& A, Index from) {
  double mx = 0.0;
  for (Index c = from; c < A.cols(); ++c) {
    mx = std::max(mx, A.col(c).segment(c, A.rows() - c).cwiseAbs2().maxCoeff());
  }
  return std::sqrt(mx);
}

inline void record_growth(BkState& st, double mu_new, Index steps) {
  if (st.mu > 0.0 && steps > 0) {
    st.growth = std::max(st.growth, std::pow(mu_new / st.mu, 1.0 / static_cast<double>(steps)));
  }
  st.mu = mu_new;
}

// Symmetric interchange of kk and kp (kk < kp) on a lower-stored matrix,
// including the rows of the already computed L columns.
inline void symmetric_swap(DenseMatrix& A, Index kk, Index kp) {
  const Index n = A.rows();
  A.row(kk).head(kk).swap(A.row(kp).head(kk));
  std::swap(A(kk, kk), A(kp, kp));
  for (Index j = kk + 1; j < kp; ++j) std::swap(A(j, kk), A(kp, j));
  for (Index i = kp + 1; i < n; ++i) std::swap(A(i, kk), A(i, kp));
}

// Right-looking unblocked elimination of columns k..n-1. Tracks the exact
// per-step growth of the active submatrix.
inline void factor_unblocked(DenseMatrix& A, Index k, BkState& st) {
  const Index n = st.n;
  DenseVector colr(n);
  while (k < n) {
    auto col = A.col(k).segment(k, n - k);
    auto rowcol = [&](Index imax) -> const DenseVector& {
      for (Index j = k; j < imax; ++j) colr(j - k) = A(imax, j);
      for (Index j = imax; j < n; ++j) colr(j - k) = A(j, imax);
      return colr;
    };
    const PivotChoice pc = choose_pivot(k, col, rowcol, st);
    const Index kk = k + pc.step - 1;
    if (pc.kp != kk) {
      symmetric_swap(A, kk, pc.kp);
      std::swap(st.perm[kk], st.perm[pc.kp]);
    }
    const Index next = k + pc.step;
    const Index m = n - next;
    double mu_new = 0.0;
    if (pc.step == 1) {
      const cplx d = A(k, k);
      const DenseVector w = A.col(k).segment(next, m);
      const DenseVector l = w / d;
      for (Index jj = 0; jj < m; ++jj) {
        const Index j = next + jj;
        auto target = A.col(j).segment(j, n - j);
        target.noalias() -= l.segment(jj, m - jj) * w(jj);
        mu_new = std::max(mu_new, target.cwiseAbs2().maxCoeff());
      }
      A.col(k).segment(next, m) = l;
      st.kinds[k] = PivotKind::k1x1;
    } else {
      const cplx a = A(k, k), b = A(k + 1, k), c = A(k + 1, k + 1);
      const DenseVector w0 = A.col(k).segment(next, m);
      const DenseVector w1 = A.col(k + 1).segment(next, m);
      DenseVector l0(m), l1(m);
      for (Index t = 0; t < m; ++t) {
        const auto [x0, x1] = solve_sym_2x2(a, b, c, w0(t), w1(t));
        l0(t) = x0;
        l1(t) = x1;
      }
      for (Index jj = 0; jj < m; ++jj) {
        const Index j = next + jj;
        auto target = A.col(j).segment(j, n - j);
        target.noalias() -= l0.segment(jj, m - jj) * w0(jj) + l1.segment(jj, m - jj) * w1(jj);
        mu_new = std::max(mu_new, target.cwiseAbs2().maxCoeff());
      }
      A.col(k).segment(next, m) = l0;
      A.col(k + 1).segment(next, m) = l1;
      st.kinds[k] = PivotKind::kFirstOf2x2;
      st.kinds[k + 1] = PivotKind::kSecondOf2x2;
      ++st.n2x2;
    }
    st.flops += 8.0 * static_cast<double>(pc.step) * static_cast<double>(m) * (m + 1) / 2.0;
    if (m > 0) record_growth(st, std::sqrt(mu_new), pc.step);
    k = next;
  }
}

// Blocked elimination: each panel of up to `nb` columns is factored using
// on-the-fly updated columns (kept in W = L D), then the trailing lower
// triangle is updated with one rank-nb product per column tile.
inline void factor_blocked(DenseMatrix& A, Index nb, BkState& st) {
  const Index n = st.n;
  DenseMatrix W(n, nb);
  Index k = 0;
  while (n - k > nb) {
    const Index k0 = k;
    Index kw = 0;
    while (kw < nb - 1 && k < n) {
      const Index m = n - k;
      W.col(kw).segment(k, m) = A.col(k).segment(k, m);
      if (kw > 0) {
        W.col(kw).segment(k, m).noalias() -=
            A.block(k, k0, m, kw) * W.row(k).head(kw).transpose();
      }
      auto rowcol = [&](Index imax) -> decltype(W.col(kw + 1).segment(k, m)) {
        auto v = W.col(kw + 1).segment(k, m);
        for (Index j = k; j < imax; ++j) v(j - k) = A(imax, j);
        for (Index j = imax; j < n; ++j) v(j - k) = A(j, imax);
        if (kw > 0) v.noalias() -= A.block(k, k0, m, kw) * W.row(imax).head(kw).transpose();
        return v;
      };
      const PivotChoice pc = choose_pivot(k, W.col(kw).segment(k, m), rowcol, st);
      if (pc.use_second_column) W.col(kw).segment(k, m) = W.col(kw + 1).segment(k, m);
      const Index kk = k + pc.step - 1;
      if (pc.kp != kk) {
        const Index kp = pc.kp;
        // Column kk is replaced by W below; only kp needs the old values.
        A(kp, kp) = A(kk, kk);
        for (Index j = kk + 1; j < kp; ++j) A(kp, j) = A(j, kk);
        for (Index i = kp + 1; i < n; ++i) A(i, kp) = A(i, kk);
        A.row(kk).head(kk).swap(A.row(kp).head(kk));
        W.row(kk).head(kw + pc.step).swap(W.row(kp).head(kw + pc.step));
        std::swap(st.perm[kk], st.perm[kp]);
      }
      const Index next = k + pc.step;
      const Index rest = n - next;
      if (pc.step == 1) {
        const cplx d = W(k, kw);
        A(k, k) = d;
        A.col(k).segment(next, rest) = W.col(kw).segment(next, rest) / d;
        st.kinds[k] = PivotKind::k1x1;
      } else {
        const cplx a = W(k, kw), b = W(k + 1, kw), c = W(k + 1, kw + 1);
        A(k, k) = a;
        A(k + 1, k) = b;
        A(k + 1, k + 1) = c;
        for (Index i = next; i < n; ++i) {
          const auto [x0, x1] = solve_sym_2x2(a, b, c, W(i, kw), W(i, kw + 1));
          A(i, k) = x0;
          A(i, k + 1) = x1;
        }
        st.kinds[k] = PivotKind::kFirstOf2x2;
        st.kinds[k + 1] = PivotKind::kSecondOf2x2;
        ++st.n2x2;
      }
      st.flops += 8.0 * static_cast<double>(pc.step) * static_cast<double>(rest) * (rest + 1) / 2.0;
      k = next;
      kw += pc.step;
    }
    // A(k:n, k:n) -= L(k:n, panel) W(k:n, panel)^T, lower triangle by tiles.
    for (Index jb = k; jb < n; jb += nb) {
      const Index w = std::min(nb, n - jb);
      A.block(jb, jb, n - jb, w).noalias() -=
          A.block(jb, k0, n - jb, kw) * W.block(jb, 0, w, kw).transpose();
    }
    record_growth(st, lower_max_abs(A, k), kw);
  }
  factor_unblocked(A, k, st);
}

}  // namespace detail

// Factors the lower triangle of M. Pivoting never leaves M. Throws
// SingularBlock when both the 1x1 and 2x2 pivot candidates of a step are at
// or below pivot_tol * max|M|.
inline DenseFactor dense_ldlt_bk(const DenseMatrix& M, double pivot_tol = kDefaultPivotTol,
                                 Index panel_width = kDefaultPanelWidth) {
  if (M.rows() != M.cols()) throw DimensionError("dense_ldlt_bk: matrix must be square");
  const Index n = M.rows();
  detail::BkState st;
  st.n = n;
  st.perm.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) st.perm[i] = i;
  st.kinds.assign(static_cast<std::size_t>(n), PivotKind::k1x1);

  DenseMatrix A = M;
  st.mu = detail::lower_max_abs(A, 0);
  st.threshold = pivot_tol * st.mu;
  if (panel_width >= 2 && n > 2 * panel_width) {
    detail::factor_blocked(A, panel_width, st);
  } else {
    detail::factor_unblocked(A, 0, st);
  }

  DenseFactor F;
  F.n_ = n;
  F.packed_.resize(static_cast<std::size_t>(n * (n + 1) / 2));
  for (Index c = 0; c < n; ++c) {
    std::copy(A.col(c).data() + c, A.col(c).data() + n, F.packed_.begin() + F.col_offset(c));
  }
  F.perm_ = std::move(st.perm);
  F.kinds_ = std::move(st.kinds);
  F.n2x2_ = st.n2x2;
  F.growth_ = st.growth;
  F.flops_ = st.flops;
  return F;
}

}  // namespace d3m
