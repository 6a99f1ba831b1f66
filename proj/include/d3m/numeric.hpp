#pragma once

// Right-looking block LDL^T over an elimination plan, with pivoting
// restricted to each diagonal block, and the matching block substitution.

#include <algorithm>
#include <cstdint>
#include <map>
#include <sstream>
#include <utility>
#include <vector>

#include "d3m/block_core.hpp"
#include "d3m/dense_ldlt.hpp"
#include "d3m/symbolic.hpp"

namespace d3m {

struct FactorStats {
  std::int64_t factor_entries = 0;  // allocated complex scalars in L and D
  double flops = 0.0;               // real flops, 8 per complex multiply-add
  std::int64_t peak_bytes = 0;      // factor storage plus largest transient buffers
  double growth_factor = 1.0;       // max per-column growth over all diagonal blocks
  Index n_2x2_pivots = 0;
};

class BlockFactor {
 public:
  EliminationPlan plan;
  std::vector<DenseFactor> diag;             // per elimination position
  std::map<BlockKey, DenseMatrix> offdiag;   // L_ij, (i, j) in elimination positions
  FactorStats stats;
  std::vector<Index> original_offsets;       // scalar offset of each original block
  std::vector<Index> offsets;                // scalar offset of each position

  Index dim() const { return offsets.empty() ? 0 : offsets.back(); }

  std::int64_t allocated_entries() const {
    std::int64_t out = 0;
    for (const auto& F : diag) out += F.entries();
    for (const auto& [key, value] : offdiag) out += value.size();
    return out;
  }

  // perm[r] = original scalar index at factored position r, so that
  // (P K P^T)(r, c) = K(perm[r], perm[c]).
  std::vector<Index> global_permutation() const {
    std::vector<Index> out(static_cast<std::size_t>(dim()));
    for (Index p = 0; p < plan.num_blocks(); ++p) {
      const auto& local = diag[p].permutation();
      for (Index a = 0; a < plan.sizes[p]; ++a) {
        out[offsets[p] + a] = original_offsets[plan.order.perm[p]] + local[a];
      }
    }
    return out;
  }

  DenseMatrix unit_lower() const {
    DenseMatrix L = DenseMatrix::Zero(dim(), dim());
    for (Index p = 0; p < plan.num_blocks(); ++p) {
      L.block(offsets[p], offsets[p], plan.sizes[p], plan.sizes[p]) = diag[p].unit_lower();
    }
    for (const auto& [key, value] : offdiag) {
      L.block(offsets[key.row], offsets[key.col], value.rows(), value.cols()) = value;
    }
    return L;
  }

  DenseMatrix block_diagonal() const {
    DenseMatrix D = DenseMatrix::Zero(dim(), dim());
    for (Index p = 0; p < plan.num_blocks(); ++p) {
      D.block(offsets[p], offsets[p], plan.sizes[p], plan.sizes[p]) = diag[p].block_diagonal();
    }
    return D;
  }

  DenseMatrix reconstruct() const {
    const DenseMatrix L = unit_lower();
    return L * block_diagonal() * L.transpose();
  }
};

namespace detail {

inline std::vector<cplx> pack_lower(const DenseMatrix& M) {
  const Index n = M.rows();
  std::vector<cplx> out;
  out.reserve(static_cast<std::size_t>(n * (n + 1) / 2));
  for (Index c = 0; c < n; ++c) {
    for (Index r = c; r < n; ++r) out.push_back(M(r, c));
  }
  return out;
}

inline DenseMatrix unpack_lower(const std::vector<cplx>& packed, Index n) {
  DenseMatrix M = DenseMatrix::Zero(n, n);
  std::size_t t = 0;
  for (Index c = 0; c < n; ++c) {
    for (Index r = c; r < n; ++r) M(r, c) = packed[t++];
  }
  return M;
}

inline void subtract_lower(std::vector<cplx>& packed, const DenseMatrix& update) {
  const Index n = update.rows();
  std::size_t t = 0;
  for (Index c = 0; c < n; ++c) {
    for (Index r = c; r < n; ++r) packed[t++] -= update(r, c);
  }
}

inline std::vector<Index> block_offsets(const std::vector<Index>& sizes) {
  std::vector<Index> out(sizes.size() + 1, 0);
  for (std::size_t i = 0; i < sizes.size(); ++i) out[i + 1] = out[i] + sizes[i];
  return out;
}

}  // namespace detail

// For each block column j in elimination order:
//   P_j K_jj P_j^T = L_jj D_jj L_jj^T
//   X_ij = K_ij P_j^T L_jj^{-T}  (= L_ij D_jj),  W_ij = X_ij D_jj^{-1} (= L_ij)
//   K_ik -= X_ij W_kj^T          for i >= k in pattern(j)
// Row interchanges of block i are applied to the stored L_ij once K_ii is
// factored. The symmetric permutation of the plan is applied internally.
inline BlockFactor block_ldlt(const BlockSparseSym& K, const EliminationPlan& plan,
                              double pivot_tol = kDefaultPivotTol) {
  const Index nb = plan.num_blocks();
  if (K.num_blocks() != nb) throw DimensionError("block_ldlt: plan and matrix block counts differ");
  for (Index p = 0; p < nb; ++p) {
    if (K.size(plan.order.perm[p]) != plan.sizes[p]) {
      throw DimensionError("block_ldlt: plan block sizes do not match the matrix");
    }
  }

  BlockFactor F;
  F.plan = plan;
  F.original_offsets = detail::block_offsets(K.sizes());
  F.offsets = detail::block_offsets(plan.sizes);
  F.diag.resize(static_cast<std::size_t>(nb));

  for (const auto& [key, value] : K.blocks()) {
    if (key.row == key.col) continue;
    const Index a = plan.inverse[key.row], b = plan.inverse[key.col];
    if (!plan.in_pattern(std::max(a, b), std::min(a, b))) {
      std::ostringstream msg;
      msg << "original block (" << key.row << ", " << key.col << ") missing from the symbolic pattern";
      throw StructureError(msg.str());
    }
  }

  // Working storage, allocated once with exactly the planned structure.
  std::vector<std::vector<cplx>> diag_work(static_cast<std::size_t>(nb));
  std::vector<std::vector<Index>> row_blocks(static_cast<std::size_t>(nb));
  for (Index j = 0; j < nb; ++j) {
    const Index oj = plan.order.perm[j];
    diag_work[j] = detail::pack_lower(K.block(oj, oj));
    for (Index i : plan.pattern[j]) {
      F.offdiag.emplace(BlockKey{i, j}, K.block(plan.order.perm[i], oj));
      row_blocks[i].push_back(j);
    }
  }
  const std::int64_t allocated = static_cast<std::int64_t>(plan.total_factor_entries);
  std::int64_t max_transient = 0;

  for (Index j = 0; j < nb; ++j) {
    const Index nj = plan.sizes[j];
    try {
      F.diag[j] = dense_ldlt_bk(detail::unpack_lower(diag_work[j], nj), pivot_tol);
    } catch (const SingularBlock& e) {
      std::ostringstream msg;
      msg << "block column " << j << " (block " << plan.order.perm[j] << "): " << e.what();
      throw SingularBlock(j, e.step(), msg.str());
    }
    std::vector<cplx>().swap(diag_work[j]);
    const DenseFactor& Fj = F.diag[j];
    F.stats.flops += Fj.flops();
    F.stats.growth_factor = std::max(F.stats.growth_factor, Fj.growth_factor());
    F.stats.n_2x2_pivots += Fj.num_2x2_pivots();

    const auto& local_perm = Fj.permutation();
    for (Index k : row_blocks[j]) {
      DenseMatrix& Ljk = F.offdiag.at(BlockKey{j, k});
      const DenseMatrix old = Ljk;
      for (Index a = 0; a < nj; ++a) Ljk.row(a) = old.row(local_perm[a]);
    }

    const auto& pattern = plan.pattern[j];
    const DenseMatrix Ljj = Fj.unit_lower();
    std::vector<DenseMatrix> X(pattern.size());
    std::int64_t transient = 3 * static_cast<std::int64_t>(nj) * nj;
    Index largest_row_block = 0;
    for (std::size_t t = 0; t < pattern.size(); ++t) {
      const Index i = pattern[t];
      const Index ni = plan.sizes[i];
      DenseMatrix& Lij = F.offdiag.at(BlockKey{i, j});
      DenseMatrix Xi(ni, nj);
      for (Index a = 0; a < nj; ++a) Xi.col(a) = Lij.col(local_perm[a]);
      Ljj.transpose().triangularView<Eigen::UnitUpper>().solveInPlace<Eigen::OnTheRight>(Xi);
      Lij = Xi;
      Fj.diagonal_solve_rows(Lij);
      X[t] = std::move(Xi);
      transient += static_cast<std::int64_t>(ni) * nj;
      largest_row_block = std::max(largest_row_block, ni);
      F.stats.flops += 8.0 * ni * (nj * (nj - 1) / 2.0 + nj);
    }
    transient += static_cast<std::int64_t>(largest_row_block) * largest_row_block;
    max_transient = std::max(max_transient, transient);

    for (std::size_t a = 0; a < pattern.size(); ++a) {
      const Index i = pattern[a];
      const DenseMatrix& Wi = F.offdiag.at(BlockKey{i, j});
      for (std::size_t b = 0; b <= a; ++b) {
        const Index k = pattern[b];
        const DenseMatrix& Wk = F.offdiag.at(BlockKey{k, j});
        if (i == k) {
          const DenseMatrix update = X[a] * Wi.transpose();
          detail::subtract_lower(diag_work[i], update);
          F.stats.flops += 8.0 * plan.sizes[i] * (plan.sizes[i] + 1) / 2.0 * nj;
        } else {
          auto it = F.offdiag.find(BlockKey{i, k});
          if (it == F.offdiag.end()) {
            std::ostringstream msg;
            msg << "update from column " << j << " targets block (" << i << ", " << k
                << ") outside the symbolic pattern";
            throw StructureError(msg.str());
          }
          it->second.noalias() -= X[a] * Wk.transpose();
          F.stats.flops += 8.0 * plan.sizes[i] * plan.sizes[k] * nj;
        }
      }
    }
  }

  F.stats.factor_entries = F.allocated_entries();
  F.stats.peak_bytes = 16 * (allocated + max_transient);
  return F;
}

namespace detail {

inline void block_solve_in_place(const BlockFactor& F, Eigen::Ref<DenseVector> x) {
  const EliminationPlan& plan = F.plan;
  const Index nb = plan.num_blocks();
  DenseVector y(F.dim());
  for (Index p = 0; p < nb; ++p) {
    auto yp = y.segment(F.offsets[p], plan.sizes[p]);
    yp = x.segment(F.original_offsets[plan.order.perm[p]], plan.sizes[p]);
    F.diag[p].permute_in_place(yp);
  }
  for (Index j = 0; j < nb; ++j) {
    auto yj = y.segment(F.offsets[j], plan.sizes[j]);
    F.diag[j].lower_solve_in_place(yj);
    for (Index i : plan.pattern[j]) {
      y.segment(F.offsets[i], plan.sizes[i]).noalias() -= F.offdiag.at(BlockKey{i, j}) * yj;
    }
  }
  for (Index j = 0; j < nb; ++j) {
    F.diag[j].diagonal_solve_in_place(y.segment(F.offsets[j], plan.sizes[j]));
  }
  for (Index j = nb - 1; j >= 0; --j) {
    auto yj = y.segment(F.offsets[j], plan.sizes[j]);
    for (Index i : plan.pattern[j]) {
      yj.noalias() -= F.offdiag.at(BlockKey{i, j}).transpose() * y.segment(F.offsets[i], plan.sizes[i]);
    }
    F.diag[j].lower_transpose_solve_in_place(yj);
  }
  for (Index p = 0; p < nb; ++p) {
    auto yp = y.segment(F.offsets[p], plan.sizes[p]);
    F.diag[p].unpermute_in_place(yp);
    x.segment(F.original_offsets[plan.order.perm[p]], plan.sizes[p]) = yp;
  }
}

}  // namespace detail

// Solves K x = g with g laid out in the original block order.
inline DenseVector block_solve(const BlockFactor& F, const DenseVector& g) {
  if (g.size() != F.dim()) throw DimensionError("block_solve: right-hand side size mismatch");
  DenseVector x = g;
  detail::block_solve_in_place(F, x);
  return x;
}

// Multiple right-hand sides, one column at a time through the same path.
inline DenseMatrix block_solve(const BlockFactor& F, const DenseMatrix& G) {
  if (G.rows() != F.dim()) throw DimensionError("block_solve: right-hand side size mismatch");
  DenseMatrix X = G;
  for (Index c = 0; c < X.cols(); ++c) {
    DenseVector col = X.col(c);
    detail::block_solve_in_place(F, col);
    X.col(c) = col;
  }
  return X;
}

}  // namespace d3m
