#pragma once

// Block-wise sparse symmetric matrices over a supernode partition and their
// clique graphs. Only blocks (i, j) with i >= j are stored; K_ji is K_ij^T.

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "d3m/types.hpp"

namespace d3m {

// Orders blocks column-major: by column, then row.
struct BlockKey {
  Index row = 0;
  Index col = 0;

  friend bool operator<(const BlockKey& a, const BlockKey& b) {
    return a.col != b.col ? a.col < b.col : a.row < b.row;
  }
  friend bool operator==(const BlockKey& a, const BlockKey& b) {
    return a.row == b.row && a.col == b.col;
  }
};

struct BlockEntry {
  Index row = 0;
  Index col = 0;
  DenseMatrix value;
};

class BlockSparseSym {
 public:
  BlockSparseSym() = default;

  explicit BlockSparseSym(std::vector<Index> sizes) : sizes_(std::move(sizes)) {
    offsets_.resize(sizes_.size() + 1, 0);
    for (std::size_t i = 0; i < sizes_.size(); ++i) {
      if (sizes_[i] < 0) throw DimensionError("negative block size");
      offsets_[i + 1] = offsets_[i] + sizes_[i];
    }
  }

  Index num_blocks() const { return static_cast<Index>(sizes_.size()); }
  Index size(Index i) const { return sizes_[i]; }
  const std::vector<Index>& sizes() const { return sizes_; }
  Index offset(Index i) const { return offsets_[i]; }
  Index dim() const { return offsets_.empty() ? 0 : offsets_.back(); }

  // Adds `value` into block (row, col); duplicate insertions are summed.
  void add_block(Index row, Index col, const DenseMatrix& value) {
    if (row < 0 || col < 0 || row >= num_blocks() || col >= num_blocks()) {
      std::ostringstream msg;
      msg << "block index (" << row << ", " << col << ") out of range";
      throw DimensionError(msg.str());
    }
    if (row < col) {
      std::ostringstream msg;
      msg << "block (" << row << ", " << col << ") lies in the upper triangle";
      throw DimensionError(msg.str());
    }
    if (value.rows() != sizes_[row] || value.cols() != sizes_[col]) {
      std::ostringstream msg;
      msg << "block (" << row << ", " << col << ") has shape " << value.rows() << "x"
          << value.cols() << ", expected " << sizes_[row] << "x" << sizes_[col];
      throw DimensionError(msg.str());
    }
    auto [it, inserted] = blocks_.try_emplace(BlockKey{row, col}, value);
    if (!inserted) it->second += value;
  }

  bool has_block(Index row, Index col) const {
    if (row < col) std::swap(row, col);
    return blocks_.count(BlockKey{row, col}) != 0;
  }

  const DenseMatrix* find(Index row, Index col) const {
    auto it = blocks_.find(BlockKey{row, col});
    return it == blocks_.end() ? nullptr : &it->second;
  }

  // Block (row, col) of the full symmetric matrix; zero when not stored.
  DenseMatrix block(Index row, Index col) const {
    if (row >= col) {
      if (const DenseMatrix* b = find(row, col)) return *b;
    } else if (const DenseMatrix* b = find(col, row)) {
      return b->transpose();
    }
    return DenseMatrix::Zero(sizes_[row], sizes_[col]);
  }

  const std::map<BlockKey, DenseMatrix>& blocks() const { return blocks_; }

  // Full dense matrix with K_ji := K_ij^T.
  DenseMatrix scatter() const {
    DenseMatrix out = DenseMatrix::Zero(dim(), dim());
    for (const auto& [key, value] : blocks_) {
      out.block(offsets_[key.row], offsets_[key.col], value.rows(), value.cols()) = value;
      if (key.row != key.col) {
        out.block(offsets_[key.col], offsets_[key.row], value.cols(), value.rows()) =
            value.transpose();
      }
    }
    return out;
  }

  DenseVector multiply(const DenseVector& x) const {
    if (x.size() != dim()) throw DimensionError("block multiply: vector size mismatch");
    DenseVector y = DenseVector::Zero(dim());
    for (const auto& [key, value] : blocks_) {
      y.segment(offsets_[key.row], value.rows()).noalias() +=
          value * x.segment(offsets_[key.col], value.cols());
      if (key.row != key.col) {
        y.segment(offsets_[key.col], value.cols()).noalias() +=
            value.transpose() * x.segment(offsets_[key.row], value.rows());
      }
    }
    return y;
  }

  // max over stored blocks of the Frobenius norm.
  double max_block_norm() const {
    double out = 0.0;
    for (const auto& [key, value] : blocks_) out = std::max(out, value.norm());
    return out;
  }

  Index num_stored_entries() const {
    Index out = 0;
    for (const auto& [key, value] : blocks_) out += value.size();
    return out;
  }

 private:
  std::vector<Index> sizes_;
  std::vector<Index> offsets_{0};
  std::map<BlockKey, DenseMatrix> blocks_;
};

inline BlockSparseSym from_blocks(std::vector<Index> sizes, const std::vector<BlockEntry>& entries) {
  BlockSparseSym out(std::move(sizes));
  for (const BlockEntry& e : entries) out.add_block(e.row, e.col, e.value);
  return out;
}

class CliqueGraph {
 public:
  CliqueGraph() = default;
  explicit CliqueGraph(Index n) : adj_(static_cast<std::size_t>(n)) {}

  static CliqueGraph from_edges(Index n, const std::vector<std::pair<Index, Index>>& edges) {
    CliqueGraph g(n);
    for (auto [a, b] : edges) g.add_edge(a, b);
    return g;
  }

  void add_edge(Index a, Index b) {
    if (a == b) return;
    if (a < 0 || b < 0 || a >= num_vertices() || b >= num_vertices()) {
      throw DimensionError("graph edge out of range");
    }
    insert_sorted(adj_[a], b);
    insert_sorted(adj_[b], a);
  }

  Index num_vertices() const { return static_cast<Index>(adj_.size()); }
  const std::vector<Index>& neighbors(Index v) const { return adj_[v]; }
  Index degree(Index v) const { return static_cast<Index>(adj_[v].size()); }

  bool has_edge(Index a, Index b) const {
    return std::binary_search(adj_[a].begin(), adj_[a].end(), b);
  }

  Index num_edges() const {
    Index twice = 0;
    for (const auto& nbrs : adj_) twice += static_cast<Index>(nbrs.size());
    return twice / 2;
  }

 private:
  static void insert_sorted(std::vector<Index>& v, Index x) {
    auto it = std::lower_bound(v.begin(), v.end(), x);
    if (it == v.end() || *it != x) v.insert(it, x);
  }

  std::vector<std::vector<Index>> adj_;
};

inline CliqueGraph clique_graph(const BlockSparseSym& K) {
  CliqueGraph g(K.num_blocks());
  for (const auto& [key, value] : K.blocks()) {
    if (key.row != key.col) g.add_edge(key.row, key.col);
  }
  return g;
}

// "D3M-BLK v1" text format:
//   D3M-BLK v1 <N_I> <n_0> ... <n_{N_I-1}>
//   <i> <j> <re im re im ...>   (one record per stored block, i >= j,
//                                 2*n_i*n_j values, row-major)
inline void write_blk(std::ostream& os, const BlockSparseSym& K) {
  os << "D3M-BLK v1 " << K.num_blocks();
  for (Index s : K.sizes()) os << ' ' << s;
  os << '\n';
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& [key, value] : K.blocks()) {
    os << key.row << ' ' << key.col << '\n';
    for (Index r = 0; r < value.rows(); ++r) {
      for (Index c = 0; c < value.cols(); ++c) {
        os << value(r, c).real() << ' ' << value(r, c).imag() << (c + 1 < value.cols() ? ' ' : '\n');
      }
    }
  }
}

inline BlockSparseSym read_blk(std::istream& is) {
  std::string magic, version;
  Index n = 0;
  if (!(is >> magic >> version >> n) || magic != "D3M-BLK" || version != "v1" || n < 0) {
    throw ConfigError("D3M-BLK: bad header");
  }
  std::vector<Index> sizes(static_cast<std::size_t>(n));
  for (auto& s : sizes) {
    if (!(is >> s)) throw ConfigError("D3M-BLK: truncated size list");
  }
  BlockSparseSym K(sizes);
  Index i = 0, j = 0;
  while (is >> i >> j) {
    if (i < 0 || j < 0 || i >= n || j >= n) throw ConfigError("D3M-BLK: block index out of range");
    DenseMatrix value(sizes[i], sizes[j]);
    for (Index r = 0; r < value.rows(); ++r) {
      for (Index c = 0; c < value.cols(); ++c) {
        double re = 0.0, im = 0.0;
        if (!(is >> re >> im)) throw ConfigError("D3M-BLK: truncated block record");
        value(r, c) = cplx(re, im);
      }
    }
    K.add_block(i, j, value);
  }
  if (!is.eof()) throw ConfigError("D3M-BLK: trailing garbage");
  return K;
}

inline void save_blk(const std::string& path, const BlockSparseSym& K) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open " + path + " for writing");
  write_blk(os, K);
}

inline BlockSparseSym load_blk(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open " + path);
  return read_blk(is);
}

}  // namespace d3m
