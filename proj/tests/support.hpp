#pragma once

// Shared generators and reference computations for the test binaries. The
// references here never call into the factorization code they check.

#include <algorithm>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "d3m/d3m.hpp"

namespace d3m::testing {

using Rng = std::mt19937_64;

inline cplx random_cplx(Rng& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  const double re = nd(rng);
  const double im = nd(rng);
  return {re, im};
}

inline DenseMatrix random_matrix(Index rows, Index cols, Rng& rng) {
  DenseMatrix M(rows, cols);
  for (Index c = 0; c < cols; ++c) {
    for (Index r = 0; r < rows; ++r) M(r, c) = random_cplx(rng);
  }
  return M;
}

inline DenseMatrix random_symmetric(Index n, Rng& rng) {
  const DenseMatrix R = random_matrix(n, n, rng);
  return (R + R.transpose()) * 0.5;
}

// Zero diagonal with a sprinkling of tiny diagonal entries: the leading
// 1x1 minor is singular, so Bunch-Kaufman has to reach for 2x2 pivots.
inline DenseMatrix singular_minor_symmetric(Index n, Rng& rng) {
  DenseMatrix M = random_symmetric(n, rng);
  if (n < 2) return M;  // a zero 1x1 would be singular outright
  std::bernoulli_distribution coin(0.3);
  for (Index i = 0; i < n; ++i) M(i, i) = coin(rng) ? 1e-3 * random_cplx(rng) : cplx(0.0);
  return M;
}

// Block-diagonal of 2x2 anti-diagonal blocks, scrambled by a random
// symmetric permutation. Every principal 1x1 minor is zero.
inline DenseMatrix hidden_2x2_symmetric(Index n, Rng& rng) {
  DenseMatrix M = DenseMatrix::Zero(n, n);
  for (Index i = 0; i + 1 < n; i += 2) {
    const cplx v = random_cplx(rng);
    M(i, i + 1) = v;
    M(i + 1, i) = v;
  }
  if (n % 2 == 1) M(n - 1, n - 1) = random_cplx(rng);
  // Small symmetric perturbation keeps the matrix well conditioned but
  // leaves the dominant structure.
  M += 1e-2 * random_symmetric(n, rng);
  for (Index i = 0; i + 1 < n; i += 2) {
    M(i, i) = 0.0;
    M(i + 1, i + 1) = 0.0;
  }
  std::vector<Index> p(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) p[i] = i;
  std::shuffle(p.begin(), p.end(), rng);
  DenseMatrix out(n, n);
  for (Index c = 0; c < n; ++c) {
    for (Index r = 0; r < n; ++r) out(r, c) = M(p[r], p[c]);
  }
  return out;
}

inline DenseMatrix permute_symmetric(const DenseMatrix& M, const std::vector<Index>& perm) {
  const Index n = M.rows();
  DenseMatrix out(n, n);
  for (Index c = 0; c < n; ++c) {
    for (Index r = 0; r < n; ++r) out(r, c) = M(perm[r], perm[c]);
  }
  return out;
}

inline CliqueGraph random_graph(Index n, double p, Rng& rng) {
  std::bernoulli_distribution edge(p);
  CliqueGraph g(n);
  for (Index a = 0; a < n; ++a) {
    for (Index b = a + 1; b < n; ++b) {
      if (edge(rng)) g.add_edge(a, b);
    }
  }
  return g;
}

inline CliqueGraph path_graph(Index n) {
  CliqueGraph g(n);
  for (Index v = 0; v + 1 < n; ++v) g.add_edge(v, v + 1);
  return g;
}

inline CliqueGraph star_graph(Index leaves) {
  CliqueGraph g(leaves + 1);
  for (Index v = 1; v <= leaves; ++v) g.add_edge(0, v);
  return g;
}

// Random labelled tree by attaching each vertex to an earlier one, then
// relabelling at random.
inline CliqueGraph random_tree(Index n, Rng& rng) {
  std::vector<Index> label(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) label[i] = i;
  std::shuffle(label.begin(), label.end(), rng);
  CliqueGraph g(n);
  for (Index v = 1; v < n; ++v) {
    std::uniform_int_distribution<Index> pick(0, v - 1);
    g.add_edge(label[v], label[pick(rng)]);
  }
  return g;
}

// Elimination game on an explicit adjacency matrix: eliminating a vertex
// connects all of its remaining neighbours. Returns, per elimination
// position j, the set of positions i > j adjacent to j when it is removed.
inline std::vector<std::set<Index>> elimination_game(const CliqueGraph& g, const std::vector<Index>& perm) {
  const Index n = g.num_vertices();
  std::vector<Index> pos(static_cast<std::size_t>(n));
  for (Index p = 0; p < n; ++p) pos[perm[p]] = p;
  std::vector<std::vector<char>> adj(n, std::vector<char>(n, 0));
  for (Index v = 0; v < n; ++v) {
    for (Index u : g.neighbors(v)) adj[pos[v]][pos[u]] = 1;
  }
  std::vector<std::set<Index>> out(static_cast<std::size_t>(n));
  for (Index j = 0; j < n; ++j) {
    for (Index i = j + 1; i < n; ++i) {
      if (adj[j][i]) out[j].insert(i);
    }
    for (Index a : out[j]) {
      for (Index b : out[j]) {
        if (a != b) adj[a][b] = 1;
      }
    }
  }
  return out;
}

inline Index game_fill(const CliqueGraph& g, const std::vector<Index>& perm) {
  Index total = 0;
  for (const auto& col : elimination_game(g, perm)) total += static_cast<Index>(col.size());
  return total - g.num_edges();
}

inline std::vector<Index> identity_perm(Index n) {
  std::vector<Index> p(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) p[i] = i;
  return p;
}

// Random block-sparse symmetric matrix on a random graph. Diagonal blocks
// get a mild shift so that every Schur complement stays comfortably
// nonsingular without making the system definite.
struct RandomBlockSystem {
  CliqueGraph graph{0};
  BlockSparseSym K;
};

inline RandomBlockSystem random_block_system(Index max_blocks, Index max_size, Rng& rng) {
  std::uniform_int_distribution<Index> nb_dist(1, max_blocks);
  std::uniform_int_distribution<Index> size_dist(1, max_size);
  std::uniform_real_distribution<double> density(0.15, 0.6);
  const Index nb = nb_dist(rng);
  std::vector<Index> sizes(static_cast<std::size_t>(nb));
  for (auto& s : sizes) s = size_dist(rng);
  RandomBlockSystem out;
  out.graph = random_graph(nb, density(rng), rng);
  std::vector<BlockEntry> entries;
  for (Index j = 0; j < nb; ++j) {
    DenseMatrix Kjj = random_symmetric(sizes[j], rng);
    Kjj.diagonal().array() += cplx(2.0 * std::sqrt(static_cast<double>(sizes[j])), 1.0);
    entries.push_back({j, j, Kjj});
    for (Index i : out.graph.neighbors(j)) {
      if (i > j) entries.push_back({i, j, 0.5 * random_matrix(sizes[i], sizes[j], rng)});
    }
  }
  out.K = from_blocks(sizes, entries);
  return out;
}

inline double rel_diff(const DenseVector& x, const DenseVector& ref) {
  return (x - ref).norm() / ref.norm();
}

}  // namespace d3m::testing
