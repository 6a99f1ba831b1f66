#pragma once

// Subdomain systems coupled through one set of interface Lagrange
// multipliers, their reduction to the block-sparse interface system
// K lambda = g with K = sum_d D_d^T A_d^{-1} D_d, and primal recovery.
//
// Domain d carries s * alpha * M_G on every incident interface G, and
// D_d = s * M_G, with s = +1 on the lower-indexed domain of G and -1 on the
// other. Summed over both sides the alpha terms cancel once the traces
// agree, so the decomposed solution equals the monolithic one.

#include <algorithm>
#include <numeric>
#include <optional>
#include <sstream>
#include <vector>

#include <Eigen/Sparse>

#include "d3m/block_core.hpp"
#include "d3m/dense_ldlt.hpp"
#include "d3m/mesh_fem.hpp"

namespace d3m {

// Nodal multiplier space per interface. A cross point shared by several
// interfaces keeps a multiplier only on a spanning forest of the
// domain/interface incidence around it; the remaining copies would make the
// continuity constraints linearly dependent and K exactly singular.
struct LambdaSpace {
  std::vector<std::vector<Index>> nodes;  // global node ids per interface
  std::vector<Index> sizes;
  std::vector<Index> offsets;  // size() + 1 entries

  Index total() const { return offsets.empty() ? 0 : offsets.back(); }
};

inline LambdaSpace lambda_space(const Partition& part) {
  const Index ni = static_cast<Index>(part.interfaces.size());
  std::map<Index, std::vector<Index>> node_ifaces;
  for (Index i = 0; i < ni; ++i) {
    for (Index node : part.interfaces[i].nodes) node_ifaces[node].push_back(i);
  }
  std::map<std::pair<Index, Index>, bool> dropped;  // (interface, node)
  std::vector<Index> root(static_cast<std::size_t>(part.num_domains));
  auto find = [&](Index x) {
    while (root[x] != x) x = root[x] = root[root[x]];
    return x;
  };
  for (const auto& [node, ifaces] : node_ifaces) {
    if (ifaces.size() < 2) continue;
    std::iota(root.begin(), root.end(), Index{0});
    for (Index i : ifaces) {
      const Index a = find(part.interfaces[i].dom_lo), b = find(part.interfaces[i].dom_hi);
      if (a == b) {
        dropped[{i, node}] = true;
      } else {
        root[std::max(a, b)] = std::min(a, b);
      }
    }
  }
  LambdaSpace space;
  space.nodes.resize(static_cast<std::size_t>(ni));
  space.offsets.assign(static_cast<std::size_t>(ni) + 1, 0);
  for (Index i = 0; i < ni; ++i) {
    for (Index node : part.interfaces[i].nodes) {
      if (!dropped.count({i, node})) space.nodes[i].push_back(node);
    }
    space.sizes.push_back(static_cast<Index>(space.nodes[i].size()));
    space.offsets[i + 1] = space.offsets[i] + space.sizes[i];
  }
  return space;
}

struct Coupling {
  Index interface = 0;
  int sign = 1;
  Eigen::SparseMatrix<cplx> d_block;  // local dofs x interface multipliers
};

struct SubdomainSystem {
  Index domain = 0;
  DenseMatrix A;
  DenseVector f;
  std::vector<Index> dof_map;  // local -> global node
  std::vector<Coupling> couplings;
  std::optional<DenseFactor> factor;  // set by reduce_domain

  Index num_dofs() const { return static_cast<Index>(dof_map.size()); }

  Index num_lambda() const {
    Index out = 0;
    for (const auto& c : couplings) out += c.d_block.cols();
    return out;
  }

  // [D_G1 D_G2 ...] in coupling order.
  Eigen::SparseMatrix<cplx> coupling_matrix() const {
    std::vector<Eigen::Triplet<cplx>> trips;
    Index col0 = 0;
    for (const auto& c : couplings) {
      for (Index k = 0; k < c.d_block.outerSize(); ++k) {
        for (Eigen::SparseMatrix<cplx>::InnerIterator it(c.d_block, k); it; ++it) {
          trips.emplace_back(it.row(), col0 + it.col(), it.value());
        }
      }
      col0 += c.d_block.cols();
    }
    Eigen::SparseMatrix<cplx> D(num_dofs(), col0);
    D.setFromTriplets(trips.begin(), trips.end());
    return D;
  }
};

inline std::vector<SubdomainSystem> build_subdomain_systems(const Mesh& mesh, const Partition& part,
                                                           const ProblemConfig& cfg) {
  const LambdaSpace space = lambda_space(part);
  std::vector<SubdomainSystem> out;
  out.reserve(static_cast<std::size_t>(part.num_domains));
  std::vector<Index> g2l(static_cast<std::size_t>(mesh.num_nodes()), -1);

  for (Index d = 0; d < part.num_domains; ++d) {
    SubdomainSystem sys;
    sys.domain = d;
    const std::vector<Index> elems = part.elements_of(d);
    for (Index e : elems) {
      for (Index v : mesh.tris[e]) sys.dof_map.push_back(v);
    }
    std::sort(sys.dof_map.begin(), sys.dof_map.end());
    sys.dof_map.erase(std::unique(sys.dof_map.begin(), sys.dof_map.end()), sys.dof_map.end());
    for (Index l = 0; l < sys.num_dofs(); ++l) g2l[sys.dof_map[l]] = l;

    const Index nl = sys.num_dofs();
    sys.A = DenseMatrix::Zero(nl, nl);
    sys.f = DenseVector::Zero(nl);
    for (Index e : elems) {
      const fem::ElementMatrix ke = fem::element_matrix(mesh, e, cfg);
      const auto& t = mesh.tris[e];
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) sys.A(g2l[t[i]], g2l[t[j]]) += ke(i, j);
      }
    }
    for (const Edge& edge : part.boundary[d]) {
      const fem::EdgeMatrix be = fem::robin_matrix(mesh, edge, cfg);
      for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) sys.A(g2l[edge[i]], g2l[edge[j]]) += be(i, j);
      }
      const Eigen::Vector2cd load = fem::boundary_load(mesh, edge, cfg);
      sys.f(g2l[edge[0]]) += load(0);
      sys.f(g2l[edge[1]]) += load(1);
    }

    for (Index i : part.interfaces_of(d)) {
      const Interface& iface = part.interfaces[i];
      Coupling c;
      c.interface = i;
      c.sign = (d == iface.dom_lo) ? 1 : -1;
      std::map<Index, Index> lambda_index;
      for (Index q = 0; q < space.sizes[i]; ++q) lambda_index[space.nodes[i][q]] = q;
      std::vector<Eigen::Triplet<cplx>> trips;
      const cplx interface_coeff = static_cast<double>(c.sign) * cfg.alpha;
      for (const Edge& edge : iface.edges) {
        const Eigen::Matrix2d em = fem::edge_mass(fem::edge_length(mesh, edge));
        for (int p = 0; p < 2; ++p) {
          for (int q = 0; q < 2; ++q) {
            sys.A(g2l[edge[p]], g2l[edge[q]]) += interface_coeff * em(p, q);
            auto it = lambda_index.find(edge[q]);
            if (it != lambda_index.end()) {
              trips.emplace_back(g2l[edge[p]], it->second, static_cast<double>(c.sign) * em(p, q));
            }
          }
        }
      }
      c.d_block.resize(nl, space.sizes[i]);
      c.d_block.setFromTriplets(trips.begin(), trips.end());
      sys.couplings.push_back(std::move(c));
    }
    for (Index v : sys.dof_map) g2l[v] = -1;
    out.push_back(std::move(sys));
  }
  return out;
}

struct DomainReduction {
  Index domain = 0;
  std::vector<Index> interfaces;  // coupling order
  std::vector<Index> sizes;
  DenseMatrix K_D;
  DenseVector g_d;
};

// K_D = D^T A^{-1} D and g_d = D^T A^{-1} f from a single factorization of A,
// which is kept on `sys` for primal recovery.
inline DomainReduction reduce_domain(SubdomainSystem& sys, double pivot_tol = kDefaultPivotTol) {
  try {
    sys.factor = dense_ldlt_bk(sys.A, pivot_tol);
  } catch (const SingularBlock& e) {
    std::ostringstream msg;
    msg << "domain " << sys.domain << " matrix is numerically singular (" << e.what() << ")";
    throw SingularDomain(sys.domain, msg.str());
  }
  DomainReduction red;
  red.domain = sys.domain;
  for (const auto& c : sys.couplings) {
    red.interfaces.push_back(c.interface);
    red.sizes.push_back(c.d_block.cols());
  }
  const Eigen::SparseMatrix<cplx> D = sys.coupling_matrix();
  const DenseMatrix Y = sys.factor->solve(DenseMatrix(D));
  const DenseMatrix K = D.transpose() * Y;
  // Symmetric in exact arithmetic; remove the rounding asymmetry.
  red.K_D = 0.5 * (K + K.transpose());
  red.g_d = D.transpose() * sys.factor->solve(sys.f);
  return red;
}

struct ReducedSystem {
  BlockSparseSym K;
  DenseVector g;
  DenseVector lambda;
  std::vector<Index> interface_sizes;
};

// Sums each domain's K_D sub-blocks into K (ascending domain order).
inline ReducedSystem assemble_reduced(const std::vector<DomainReduction>& domains,
                                      const Partition& part) {
  const Index ni = static_cast<Index>(part.interfaces.size());
  std::vector<Index> sizes(static_cast<std::size_t>(ni), -1);
  for (const auto& red : domains) {
    for (std::size_t a = 0; a < red.interfaces.size(); ++a) {
      const Index i = red.interfaces[a];
      if (i < 0 || i >= ni) throw AssemblyError("reduced assembly: interface id out of range");
      if (sizes[i] >= 0 && sizes[i] != red.sizes[a]) {
        std::ostringstream msg;
        msg << "interface " << i << " size mismatch between domains (" << sizes[i] << " vs "
            << red.sizes[a] << ")";
        throw AssemblyError(msg.str());
      }
      sizes[i] = red.sizes[a];
    }
  }
  for (Index i = 0; i < ni; ++i) {
    if (sizes[i] < 0) throw AssemblyError("reduced assembly: interface without a reduced domain");
  }

  ReducedSystem out;
  out.interface_sizes = sizes;
  out.K = BlockSparseSym(sizes);
  out.g = DenseVector::Zero(out.K.dim());
  std::vector<const DomainReduction*> ordered;
  for (const auto& red : domains) ordered.push_back(&red);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const DomainReduction* a, const DomainReduction* b) { return a->domain < b->domain; });
  for (const DomainReduction* red : ordered) {
    std::vector<Index> local_off(red->interfaces.size() + 1, 0);
    for (std::size_t a = 0; a < red->interfaces.size(); ++a) local_off[a + 1] = local_off[a] + red->sizes[a];
    if (red->K_D.rows() != local_off.back() || red->g_d.size() != local_off.back()) {
      throw AssemblyError("reduced assembly: domain matrix does not match its interface sizes");
    }
    for (std::size_t a = 0; a < red->interfaces.size(); ++a) {
      const Index ia = red->interfaces[a];
      out.g.segment(out.K.offset(ia), red->sizes[a]) += red->g_d.segment(local_off[a], red->sizes[a]);
      for (std::size_t b = 0; b < red->interfaces.size(); ++b) {
        const Index ib = red->interfaces[b];
        if (ia < ib) continue;
        out.K.add_block(ia, ib, red->K_D.block(local_off[a], local_off[b], red->sizes[a], red->sizes[b]));
      }
    }
  }
  return out;
}

// Scalar offset of each interface's multipliers, recovered from the coupling blocks.
inline std::vector<Index> lambda_offsets(const std::vector<SubdomainSystem>& systems) {
  std::map<Index, Index> sizes;
  for (const auto& sys : systems) {
    for (const auto& c : sys.couplings) sizes[c.interface] = c.d_block.cols();
  }
  std::vector<Index> out{0};
  Index expect = 0;
  for (const auto& [i, n] : sizes) {
    if (i != expect++) throw StateError("multiplier layout has a gap at interface " + std::to_string(expect - 1));
    out.push_back(out.back() + n);
  }
  return out;
}

// E_d = A_d^{-1} (f_d - D_d lambda), reusing each domain's factorization.
inline std::vector<DenseVector> domain_solutions(const std::vector<SubdomainSystem>& systems,
                                                 const DenseVector& lambda) {
  const std::vector<Index> offsets = lambda_offsets(systems);
  if (lambda.size() != offsets.back()) throw DimensionError("recover: multiplier vector size mismatch");
  std::vector<DenseVector> out;
  out.reserve(systems.size());
  for (const auto& sys : systems) {
    if (!sys.factor) {
      throw StateError("domain " + std::to_string(sys.domain) + " has no factorization; reduce it first");
    }
    DenseVector rhs = sys.f;
    for (const auto& c : sys.couplings) {
      rhs -= c.d_block * lambda.segment(offsets[c.interface], c.d_block.cols());
    }
    out.push_back(sys.factor->solve(rhs));
  }
  return out;
}

// Global nodal solution; nodes shared by several domains take the average.
inline DenseVector recover_primal(const std::vector<SubdomainSystem>& systems, const DenseVector& lambda) {
  const std::vector<DenseVector> local = domain_solutions(systems, lambda);
  Index n = 0;
  for (const auto& sys : systems) {
    for (Index v : sys.dof_map) n = std::max(n, v + 1);
  }
  DenseVector sum = DenseVector::Zero(n);
  Eigen::VectorXd count = Eigen::VectorXd::Zero(n);
  for (std::size_t d = 0; d < systems.size(); ++d) {
    for (Index l = 0; l < systems[d].num_dofs(); ++l) {
      sum(systems[d].dof_map[l]) += local[d](l);
      count(systems[d].dof_map[l]) += 1.0;
    }
  }
  for (Index v = 0; v < n; ++v) {
    if (count(v) > 0.0) sum(v) /= count(v);
  }
  return sum;
}

// ||A x - f||_inf / ||f||_inf; 0 when both f and x vanish.
inline double relative_residual(const HelmholtzSystem& sys, const DenseVector& x) {
  if (x.size() != sys.A.cols()) throw DimensionError("residual: solution size mismatch");
  const double fnorm = sys.f.cwiseAbs().maxCoeff();
  const double rnorm = (sys.A * x - sys.f).cwiseAbs().maxCoeff();
  if (fnorm == 0.0) return rnorm == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return rnorm / fnorm;
}

inline double global_residual(const Mesh& mesh, const ProblemConfig& cfg, const DenseVector& solution) {
  return relative_residual(assemble_helmholtz(mesh, cfg), solution);
}

}  // namespace d3m
