#pragma once

// Symbolic block factorization: block fill pattern and elimination tree of
// a reordered clique graph.

#include <algorithm>
#include <cstdint>
#include <iterator>
#include <ostream>
#include <vector>

#include "d3m/block_core.hpp"
#include "d3m/ordering.hpp"

namespace d3m {

struct EliminationPlan {
  Ordering order;
  std::vector<Index> inverse;  // old index -> new position
  std::vector<Index> sizes;    // block sizes in elimination order
  std::vector<Index> etree_parent;  // -1 for roots
  // pattern[j]: sorted positions i > j holding original or fill blocks.
  std::vector<std::vector<Index>> pattern;
  std::int64_t total_factor_entries = 0;

  Index num_blocks() const { return static_cast<Index>(sizes.size()); }
  std::int64_t factor_bytes() const { return 16 * total_factor_entries; }

  std::int64_t diagonal_entries(Index j) const {
    return static_cast<std::int64_t>(sizes[j]) * (sizes[j] + 1) / 2;
  }

  Index num_pattern_blocks() const {
    Index out = 0;
    for (const auto& col : pattern) out += static_cast<Index>(col.size());
    return out;
  }

  bool in_pattern(Index i, Index j) const {
    return std::binary_search(pattern[j].begin(), pattern[j].end(), i);
  }
};

// Column j's structure is its original lower neighbors plus the structure of
// each elimination-tree child (minus j itself).
inline EliminationPlan symbolic_factor(const CliqueGraph& g, const Ordering& ord,
                                       const std::vector<Index>& sizes) {
  const Index n = g.num_vertices();
  if (static_cast<Index>(sizes.size()) != n) {
    throw DimensionError("symbolic_factor: one size per vertex required");
  }
  validate_ordering(ord, n);

  EliminationPlan plan;
  plan.order = ord;
  plan.inverse = ord.inverse();
  plan.sizes.resize(static_cast<std::size_t>(n));
  for (Index p = 0; p < n; ++p) plan.sizes[p] = sizes[ord.perm[p]];
  plan.etree_parent.assign(static_cast<std::size_t>(n), -1);
  plan.pattern.assign(static_cast<std::size_t>(n), {});

  std::vector<std::vector<Index>> children(static_cast<std::size_t>(n));
  for (Index j = 0; j < n; ++j) {
    std::vector<Index> col;
    for (Index v : g.neighbors(ord.perm[j])) {
      const Index i = plan.inverse[v];
      if (i > j) col.push_back(i);
    }
    std::sort(col.begin(), col.end());
    for (Index c : children[j]) {
      std::vector<Index> merged;
      std::set_union(col.begin(), col.end(), plan.pattern[c].begin(), plan.pattern[c].end(),
                     std::back_inserter(merged));
      col.swap(merged);
    }
    col.erase(std::remove(col.begin(), col.end(), j), col.end());
    if (!col.empty()) {
      plan.etree_parent[j] = col.front();
      children[col.front()].push_back(j);
    }
    plan.pattern[j] = std::move(col);
  }

  for (Index j = 0; j < n; ++j) {
    std::int64_t below = 0;
    for (Index i : plan.pattern[j]) below += plan.sizes[i];
    plan.total_factor_entries += plan.diagonal_entries(j) + plan.sizes[j] * below;
  }
  return plan;
}

// Number of pattern blocks that are not original edges.
inline Index fill_blocks(const CliqueGraph& g, const EliminationPlan& plan) {
  return plan.num_pattern_blocks() - g.num_edges();
}

inline void print_symbolic(std::ostream& os, const EliminationPlan& plan) {
  os << "symbolic factorization: " << plan.num_blocks() << " block columns\n";
  for (Index j = 0; j < plan.num_blocks(); ++j) {
    os << "  col " << j << " (block " << plan.order.perm[j] << ", n=" << plan.sizes[j]
       << ") parent=" << plan.etree_parent[j] << " pattern={";
    for (std::size_t t = 0; t < plan.pattern[j].size(); ++t) {
      os << (t ? "," : "") << plan.pattern[j][t];
    }
    os << "}\n";
  }
  os << "  predicted factor entries: " << plan.total_factor_entries
     << "  bytes: " << plan.factor_bytes() << "\n";
}

}  // namespace d3m
