#pragma once

// Structured triangular meshes, scalar Helmholtz assembly with a first-order
// absorbing (Robin) outer boundary, and axis-aligned tiling of the mesh into
// non-overlapping subdomains.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <sstream>
#include <utility>
#include <vector>

#include <Eigen/Sparse>

#include "d3m/types.hpp"

namespace d3m {

struct ProblemConfig {
  double wavelength = 1.0;
  double k = 2.0 * kPi;
  double side_lambda = 1.0;
  Index ppw = 10;
  Index px = 1;
  Index py = 1;
  // Transmission parameter of the interface terms; j*k unless overridden.
  cplx alpha{0.0, 2.0 * kPi};
  double theta_inc = 0.0;
  double mu_r = 1.0;
  double eps_r = 1.0;

  // Consistent config for the given geometry: k = 2*pi/wavelength, alpha = jk.
  static ProblemConfig make(double side_lambda, Index ppw, Index px, Index py,
                            double wavelength = 1.0) {
    ProblemConfig cfg;
    cfg.wavelength = wavelength;
    cfg.side_lambda = side_lambda;
    cfg.ppw = ppw;
    cfg.px = px;
    cfg.py = py;
    cfg.set_wavenumber(2.0 * kPi / wavelength);
    return cfg;
  }

  // Sets k and resets alpha to jk.
  void set_wavenumber(double wavenumber) {
    k = wavenumber;
    alpha = cplx(0.0, wavenumber);
  }

  double side() const { return side_lambda * wavelength; }

  void validate() const {
    std::ostringstream msg;
    if (!(wavelength > 0.0)) msg << "wavelength must be positive; ";
    if (!(k > 0.0)) msg << "k must be positive; ";
    if (ppw < 10) msg << "ppw must be at least 10 (got " << ppw << "); ";
    if (px < 1 || py < 1) msg << "px and py must be at least 1; ";
    if (!(side_lambda > 0.0)) msg << "side_lambda must be positive; ";
    if (alpha.imag() == 0.0) msg << "alpha must have a nonzero imaginary part; ";
    if (!std::isfinite(mu_r) || mu_r == 0.0 || !std::isfinite(eps_r)) {
      msg << "invalid material constants; ";
    }
    if (!msg.str().empty()) throw ConfigError(msg.str());
  }
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

using Triangle = std::array<Index, 3>;
using Edge = std::array<Index, 2>;

struct Mesh {
  std::vector<Point> nodes;
  std::vector<Triangle> tris;
  // Counterclockwise around the square, so each edge's outward normal is
  // the tangent rotated clockwise.
  std::vector<Edge> boundary_edges;
  Index cells = 0;  // grid cells per side
  double side = 0.0;

  Index num_nodes() const { return static_cast<Index>(nodes.size()); }
  Index num_elements() const { return static_cast<Index>(tris.size()); }

  double signed_area(Index e) const {
    const Point& a = nodes[tris[e][0]];
    const Point& b = nodes[tris[e][1]];
    const Point& c = nodes[tris[e][2]];
    return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
  }

  Point centroid(Index e) const {
    const Point& a = nodes[tris[e][0]];
    const Point& b = nodes[tris[e][1]];
    const Point& c = nodes[tris[e][2]];
    return {(a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0};
  }
};

inline Index cells_for(double side_lambda, double ppw) {
  // Guard against 2*15 evaluating to 30.000000000000004.
  return std::max<Index>(1, static_cast<Index>(std::ceil(side_lambda * ppw - 1e-9)));
}

// Uniform (n+1)^2 grid over [0, side]^2 with n = ceil(side_lambda * ppw),
// nodes row-major, each cell split along its anti-diagonal into two
// counterclockwise right triangles.
inline Mesh build_rect_mesh(double side_lambda, double ppw, double wavelength = 1.0) {
  if (!(side_lambda > 0.0) || !(ppw >= 1.0) || !(wavelength > 0.0)) {
    throw ConfigError("build_rect_mesh: side_lambda, ppw and wavelength must be positive");
  }
  Mesh mesh;
  const Index n = cells_for(side_lambda, ppw);
  mesh.cells = n;
  mesh.side = side_lambda * wavelength;
  const double h = mesh.side / static_cast<double>(n);
  auto id = [n](Index row, Index col) { return row * (n + 1) + col; };

  mesh.nodes.reserve((n + 1) * (n + 1));
  for (Index r = 0; r <= n; ++r) {
    for (Index c = 0; c <= n; ++c) {
      // Pin the last row/column to the exact side length.
      const double x = (c == n) ? mesh.side : h * static_cast<double>(c);
      const double y = (r == n) ? mesh.side : h * static_cast<double>(r);
      mesh.nodes.push_back({x, y});
    }
  }
  mesh.tris.reserve(2 * n * n);
  for (Index r = 0; r < n; ++r) {
    for (Index c = 0; c < n; ++c) {
      const Index a = id(r, c), b = id(r, c + 1), d = id(r + 1, c), e = id(r + 1, c + 1);
      mesh.tris.push_back({a, b, d});
      mesh.tris.push_back({b, e, d});
    }
  }
  mesh.boundary_edges.reserve(4 * n);
  for (Index c = 0; c < n; ++c) mesh.boundary_edges.push_back({id(0, c), id(0, c + 1)});
  for (Index r = 0; r < n; ++r) mesh.boundary_edges.push_back({id(r, n), id(r + 1, n)});
  for (Index c = n; c > 0; --c) mesh.boundary_edges.push_back({id(n, c), id(n, c - 1)});
  for (Index r = n; r > 0; --r) mesh.boundary_edges.push_back({id(r, 0), id(r - 1, 0)});
  return mesh;
}

namespace fem {

using ElementMatrix = Eigen::Matrix<cplx, 3, 3>;
using EdgeMatrix = Eigen::Matrix<cplx, 2, 2>;

// P1 stiffness: area * grad(phi_i) . grad(phi_j).
inline Eigen::Matrix3d p1_stiffness(const Point& p0, const Point& p1, const Point& p2) {
  const double area2 = (p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y);
  // Gradients times 2*area.
  const double gx[3] = {p1.y - p2.y, p2.y - p0.y, p0.y - p1.y};
  const double gy[3] = {p2.x - p1.x, p0.x - p2.x, p1.x - p0.x};
  Eigen::Matrix3d s;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) s(i, j) = (gx[i] * gx[j] + gy[i] * gy[j]) / (2.0 * area2);
  }
  return s;
}

inline Eigen::Matrix3d p1_mass(double area) {
  Eigen::Matrix3d m;
  m << 2, 1, 1, 1, 2, 1, 1, 1, 2;
  return m * (area / 12.0);
}

inline Eigen::Matrix2d edge_mass(double length) {
  Eigen::Matrix2d m;
  m << 2, 1, 1, 2;
  return m * (length / 6.0);
}

inline double edge_length(const Mesh& mesh, const Edge& e) {
  const Point& a = mesh.nodes[e[0]];
  const Point& b = mesh.nodes[e[1]];
  return std::hypot(b.x - a.x, b.y - a.y);
}

// (1/mu_r) K_e - k^2 eps_r M_e for element e.
inline ElementMatrix element_matrix(const Mesh& mesh, Index e, const ProblemConfig& cfg) {
  const double area = mesh.signed_area(e);
  if (!(area > 0.0)) {
    std::ostringstream msg;
    msg << "degenerate triangle " << e << " (signed area " << area << ")";
    throw AssemblyError(msg.str());
  }
  const auto& t = mesh.tris[e];
  const Eigen::Matrix3d s = p1_stiffness(mesh.nodes[t[0]], mesh.nodes[t[1]], mesh.nodes[t[2]]);
  const Eigen::Matrix3d m = p1_mass(area);
  const Eigen::Matrix3d real_part = s / cfg.mu_r - (cfg.k * cfg.k * cfg.eps_r) * m;
  return real_part.cast<cplx>();
}

// Outer Robin term -jk * (edge mass).
inline EdgeMatrix robin_matrix(const Mesh& mesh, const Edge& edge, const ProblemConfig& cfg) {
  return edge_mass(edge_length(mesh, edge)).cast<cplx>() * cplx(0.0, -cfg.k);
}

inline cplx incident_field(const ProblemConfig& cfg, double x, double y) {
  const double phase = cfg.k * (x * std::cos(cfg.theta_inc) + y * std::sin(cfg.theta_inc));
  return std::exp(cplx(0.0, -phase));
}

// Integral over a boundary edge of g * phi_a, g * phi_b with
// g = dn(u_inc) - jk u_inc, by 4-point Gauss-Legendre.
inline Eigen::Vector2cd boundary_load(const Mesh& mesh, const Edge& edge, const ProblemConfig& cfg) {
  static constexpr double kNodes[4] = {-0.8611363115940526, -0.3399810435848563,
                                       0.3399810435848563, 0.8611363115940526};
  static constexpr double kWeights[4] = {0.3478548451374538, 0.6521451548625461,
                                         0.6521451548625461, 0.3478548451374538};
  const Point& a = mesh.nodes[edge[0]];
  const Point& b = mesh.nodes[edge[1]];
  const double len = std::hypot(b.x - a.x, b.y - a.y);
  const double nx = (b.y - a.y) / len;
  const double ny = -(b.x - a.x) / len;
  const double dir_n = nx * std::cos(cfg.theta_inc) + ny * std::sin(cfg.theta_inc);
  Eigen::Vector2cd out = Eigen::Vector2cd::Zero();
  for (int q = 0; q < 4; ++q) {
    const double s = 0.5 * (kNodes[q] + 1.0);
    const double w = 0.5 * kWeights[q] * len;
    const cplx u = incident_field(cfg, a.x + s * (b.x - a.x), a.y + s * (b.y - a.y));
    const cplx g = cplx(0.0, -cfg.k) * dir_n * u - cplx(0.0, cfg.k) * u;
    out(0) += w * (1.0 - s) * g;
    out(1) += w * s * g;
  }
  return out;
}

}  // namespace fem

struct HelmholtzSystem {
  Eigen::SparseMatrix<cplx> A;
  DenseVector f;
};

// Monolithic system: (1/mu_r) K - k^2 eps_r M - jk M_boundary, with the
// plane-wave data entering through the Robin boundary.
inline HelmholtzSystem assemble_helmholtz(const Mesh& mesh, const ProblemConfig& cfg) {
  const Index n = mesh.num_nodes();
  std::vector<Eigen::Triplet<cplx>> triplets;
  triplets.reserve(9 * mesh.tris.size() + 4 * mesh.boundary_edges.size());
  for (Index e = 0; e < mesh.num_elements(); ++e) {
    const fem::ElementMatrix ke = fem::element_matrix(mesh, e, cfg);
    const auto& t = mesh.tris[e];
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) triplets.emplace_back(t[i], t[j], ke(i, j));
    }
  }
  HelmholtzSystem sys;
  sys.f = DenseVector::Zero(n);
  for (const Edge& edge : mesh.boundary_edges) {
    const fem::EdgeMatrix be = fem::robin_matrix(mesh, edge, cfg);
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) triplets.emplace_back(edge[i], edge[j], be(i, j));
    }
    const Eigen::Vector2cd load = fem::boundary_load(mesh, edge, cfg);
    sys.f(edge[0]) += load(0);
    sys.f(edge[1]) += load(1);
  }
  sys.A.resize(n, n);
  sys.A.setFromTriplets(triplets.begin(), triplets.end());
  sys.A.makeCompressed();
  return sys;
}

struct Interface {
  Index dom_lo = 0;
  Index dom_hi = 0;
  std::vector<Index> nodes;  // connected chain, in walk order
  std::vector<Edge> edges;   // consecutive chain edges
};

struct Partition {
  Index num_domains = 0;
  Index px = 1;
  Index py = 1;
  std::vector<Index> domain_of_elem;
  std::vector<Interface> interfaces;
  std::vector<std::vector<Edge>> boundary;  // per-domain outer boundary edges

  std::vector<Index> elements_of(Index d) const {
    std::vector<Index> out;
    for (Index e = 0; e < static_cast<Index>(domain_of_elem.size()); ++e) {
      if (domain_of_elem[e] == d) out.push_back(e);
    }
    return out;
  }

  std::vector<Index> interfaces_of(Index d) const {
    std::vector<Index> out;
    for (Index i = 0; i < static_cast<Index>(interfaces.size()); ++i) {
      if (interfaces[i].dom_lo == d || interfaces[i].dom_hi == d) out.push_back(i);
    }
    return out;
  }
};

namespace detail {

inline Edge sorted_edge(Index a, Index b) { return a < b ? Edge{a, b} : Edge{b, a}; }

// Maps every mesh edge (sorted node pair) to the elements sharing it.
inline std::map<Edge, std::vector<Index>> edge_elements(const Mesh& mesh) {
  std::map<Edge, std::vector<Index>> out;
  for (Index e = 0; e < mesh.num_elements(); ++e) {
    const auto& t = mesh.tris[e];
    for (int i = 0; i < 3; ++i) out[sorted_edge(t[i], t[(i + 1) % 3])].push_back(e);
  }
  return out;
}

// Splits an edge set into connected chains. Each open chain starts at its
// lower-numbered endpoint; a closed loop starts at its lowest node.
inline std::vector<std::vector<Index>> chain_edges(const std::vector<Edge>& edges) {
  std::map<Index, std::vector<Index>> adj;
  for (const Edge& e : edges) {
    adj[e[0]].push_back(e[1]);
    adj[e[1]].push_back(e[0]);
  }
  for (auto& [node, nbrs] : adj) {
    std::sort(nbrs.begin(), nbrs.end());
    if (nbrs.size() > 2) {
      std::ostringstream msg;
      msg << "interface branches at node " << node;
      throw AssemblyError(msg.str());
    }
  }
  std::map<Index, bool> seen;
  std::vector<std::vector<Index>> chains;
  auto walk = [&](Index start) {
    std::vector<Index> chain{start};
    seen[start] = true;
    Index prev = -1, cur = start;
    for (;;) {
      Index next = -1;
      for (Index nb : adj[cur]) {
        if (nb != prev && !seen[nb]) {
          next = nb;
          break;
        }
      }
      if (next < 0) break;
      chain.push_back(next);
      seen[next] = true;
      prev = cur;
      cur = next;
    }
    return chain;
  };
  for (const auto& [node, nbrs] : adj) {
    if (nbrs.size() == 1 && !seen[node]) chains.push_back(walk(node));
  }
  for (const auto& [node, nbrs] : adj) {
    if (!seen[node]) {
      auto loop = walk(node);
      loop.push_back(node);
      chains.push_back(std::move(loop));
    }
  }
  return chains;
}

}  // namespace detail

// Tiles the structured grid into px x py blocks of cells. Domain index is
// ty * px + tx; interfaces are ordered by (dom_lo, dom_hi).
inline Partition partition_mesh(const Mesh& mesh, Index px, Index py) {
  if (px < 1 || py < 1) throw ConfigError("partition_mesh: px and py must be at least 1");
  if (mesh.cells % px != 0 || mesh.cells % py != 0) {
    std::ostringstream msg;
    msg << "partition_mesh: grid of " << mesh.cells << " cells per side is not divisible into "
        << px << " x " << py << " tiles";
    throw ConfigError(msg.str());
  }
  Partition part;
  part.px = px;
  part.py = py;
  part.num_domains = px * py;
  const Index tile_x = mesh.cells / px;
  const Index tile_y = mesh.cells / py;
  const double h = mesh.side / static_cast<double>(mesh.cells);

  part.domain_of_elem.resize(mesh.tris.size());
  for (Index e = 0; e < mesh.num_elements(); ++e) {
    const Point c = mesh.centroid(e);
    const Index cx = std::clamp<Index>(static_cast<Index>(std::floor(c.x / h)), 0, mesh.cells - 1);
    const Index cy = std::clamp<Index>(static_cast<Index>(std::floor(c.y / h)), 0, mesh.cells - 1);
    part.domain_of_elem[e] = (cy / tile_y) * px + (cx / tile_x);
  }

  const auto edge_elems = detail::edge_elements(mesh);
  std::map<std::pair<Index, Index>, std::vector<Edge>> shared;
  for (const auto& [edge, elems] : edge_elems) {
    if (elems.size() != 2) continue;
    const Index d0 = part.domain_of_elem[elems[0]];
    const Index d1 = part.domain_of_elem[elems[1]];
    if (d0 == d1) continue;
    shared[{std::min(d0, d1), std::max(d0, d1)}].push_back(edge);
  }
  for (const auto& [pair, edges] : shared) {
    for (auto& chain : detail::chain_edges(edges)) {
      Interface iface;
      iface.dom_lo = pair.first;
      iface.dom_hi = pair.second;
      for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
        iface.edges.push_back({chain[i], chain[i + 1]});
      }
      // A closed loop repeats its first node at the end.
      if (chain.size() > 2 && chain.front() == chain.back()) chain.pop_back();
      iface.nodes = std::move(chain);
      part.interfaces.push_back(std::move(iface));
    }
  }

  part.boundary.assign(part.num_domains, {});
  for (const Edge& edge : mesh.boundary_edges) {
    const auto& elems = edge_elems.at(detail::sorted_edge(edge[0], edge[1]));
    part.boundary[part.domain_of_elem[elems.front()]].push_back(edge);
  }
  return part;
}

}  // namespace d3m
