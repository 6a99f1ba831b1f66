#pragma once

// Fill-reducing elimination order for clique graphs: a weighted minimum
// degree over an explicit quotient graph, plus a loader for externally
// computed orderings.

#include <algorithm>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "d3m/block_core.hpp"

namespace d3m {

enum class OrderingSource { kBuiltin, kExternalFile };

struct Ordering {
  std::vector<Index> perm;  // new position -> old index
  OrderingSource source = OrderingSource::kBuiltin;

  Index size() const { return static_cast<Index>(perm.size()); }

  std::vector<Index> inverse() const {
    std::vector<Index> inv(perm.size());
    for (std::size_t p = 0; p < perm.size(); ++p) inv[perm[p]] = static_cast<Index>(p);
    return inv;
  }

  static Ordering identity(Index n) {
    Ordering out;
    out.perm.resize(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) out.perm[i] = i;
    return out;
  }
};

inline bool is_permutation_of(const std::vector<Index>& perm, Index n) {
  if (static_cast<Index>(perm.size()) != n) return false;
  std::vector<char> seen(perm.size(), 0);
  for (Index v : perm) {
    if (v < 0 || v >= n || seen[v]) return false;
    seen[v] = 1;
  }
  return true;
}

inline void validate_ordering(const Ordering& ord, Index n) {
  if (!is_permutation_of(ord.perm, n)) {
    std::ostringstream msg;
    msg << "ordering is not a permutation of 0.." << n - 1;
    throw ConfigError(msg.str());
  }
}

namespace detail {

// Quotient graph for minimum degree. Eliminated vertices become elements;
// a variable's reach is its variable neighbors plus the members of its
// adjacent elements.
class QuotientGraph {
 public:
  QuotientGraph(const CliqueGraph& g, const std::vector<Index>& weights)
      : weights_(weights),
        var_adj_(static_cast<std::size_t>(g.num_vertices())),
        elem_adj_(static_cast<std::size_t>(g.num_vertices())),
        elem_members_(static_cast<std::size_t>(g.num_vertices())),
        eliminated_(static_cast<std::size_t>(g.num_vertices()), 0) {
    for (Index v = 0; v < g.num_vertices(); ++v) var_adj_[v] = g.neighbors(v);
  }

  std::vector<Index> reach(Index v) const {
    std::vector<Index> out = var_adj_[v];
    for (Index e : elem_adj_[v]) {
      std::vector<Index> merged;
      std::set_union(out.begin(), out.end(), elem_members_[e].begin(), elem_members_[e].end(),
                     std::back_inserter(merged));
      out.swap(merged);
    }
    out.erase(std::remove(out.begin(), out.end(), v), out.end());
    return out;
  }

  Index degree(Index v) const {
    Index d = 0;
    for (Index u : reach(v)) d += weights_[u];
    return d;
  }

  bool eliminated(Index v) const { return eliminated_[v] != 0; }

  void eliminate(Index v) {
    std::vector<Index> members = reach(v);
    // Elements adjacent to v are absorbed into the new element v.
    for (Index e : elem_adj_[v]) {
      for (Index u : elem_members_[e]) erase_sorted(elem_adj_[u], e);
      elem_members_[e].clear();
    }
    elem_adj_[v].clear();
    var_adj_[v].clear();
    eliminated_[v] = 1;
    for (Index u : members) {
      erase_sorted(var_adj_[u], v);
      insert_sorted(elem_adj_[u], v);
      // Variable edges inside the new clique are implied by the element.
      std::vector<Index> pruned;
      std::set_difference(var_adj_[u].begin(), var_adj_[u].end(), members.begin(), members.end(),
                          std::back_inserter(pruned));
      var_adj_[u].swap(pruned);
    }
    elem_members_[v] = std::move(members);
  }

 private:
  static void erase_sorted(std::vector<Index>& v, Index x) {
    auto it = std::lower_bound(v.begin(), v.end(), x);
    if (it != v.end() && *it == x) v.erase(it);
  }
  static void insert_sorted(std::vector<Index>& v, Index x) {
    auto it = std::lower_bound(v.begin(), v.end(), x);
    if (it == v.end() || *it != x) v.insert(it, x);
  }

  const std::vector<Index>& weights_;
  std::vector<std::vector<Index>> var_adj_;
  std::vector<std::vector<Index>> elem_adj_;
  std::vector<std::vector<Index>> elem_members_;
  std::vector<char> eliminated_;
};

}  // namespace detail

// Weighted minimum degree: repeatedly eliminates the variable whose reach
// has the smallest total block size, ties going to the lowest index.
inline Ordering reorder(const CliqueGraph& g, const std::vector<Index>& weights) {
  const Index n = g.num_vertices();
  if (static_cast<Index>(weights.size()) != n) {
    throw DimensionError("reorder: one weight per vertex required");
  }
  detail::QuotientGraph qg(g, weights);
  std::vector<Index> degree(static_cast<std::size_t>(n));
  for (Index v = 0; v < n; ++v) degree[v] = qg.degree(v);

  Ordering out;
  out.source = OrderingSource::kBuiltin;
  out.perm.reserve(static_cast<std::size_t>(n));
  for (Index step = 0; step < n; ++step) {
    Index best = -1;
    for (Index v = 0; v < n; ++v) {
      if (!qg.eliminated(v) && (best < 0 || degree[v] < degree[best])) best = v;
    }
    const std::vector<Index> touched = qg.reach(best);
    qg.eliminate(best);
    out.perm.push_back(best);
    for (Index u : touched) degree[u] = qg.degree(u);
  }
  return out;
}

inline Ordering load_ordering(std::istream& is, Index n) {
  Ordering out;
  out.source = OrderingSource::kExternalFile;
  std::string line;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    Index v = 0;
    if (!(ls >> v)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      throw ConfigError("ordering file: cannot parse line '" + line + "'");
    }
    out.perm.push_back(v);
  }
  validate_ordering(out, n);
  return out;
}

inline Ordering load_ordering(const std::string& path, Index n) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open ordering file " + path);
  return load_ordering(is, n);
}

// "builtin" or "file:<path>".
inline Ordering compute_ordering(const std::string& spec, const CliqueGraph& g,
                                 const std::vector<Index>& weights) {
  if (spec.empty() || spec == "builtin") return reorder(g, weights);
  if (spec.rfind("file:", 0) == 0) return load_ordering(spec.substr(5), g.num_vertices());
  throw ConfigError("unknown ordering '" + spec + "' (expected builtin or file:<path>)");
}

}  // namespace d3m
