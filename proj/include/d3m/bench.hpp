#pragma once

// End-to-end driver: the seven-step decomposed solve, verification against a
// monolithic sparse solve, and size sweeps with CSV output.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/SparseLU>

#include "d3m/block_core.hpp"
#include "d3m/config.hpp"
#include "d3m/ddm_reduce.hpp"
#include "d3m/mesh_fem.hpp"
#include "d3m/numeric.hpp"
#include "d3m/ordering.hpp"
#include "d3m/symbolic.hpp"

namespace d3m {

inline constexpr double kResidualGate = 1e-10;

struct PipelineTimings {
  double reduce_s = 0.0;    // domain factorizations, K_D, assembly of K
  double analyze_s = 0.0;   // ordering and symbolic factorization
  double factor_s = 0.0;    // block LDL^T
  double solve_s = 0.0;     // forward/backward substitution
  double recover_s = 0.0;   // primal recovery
};

struct PipelineResult {
  Mesh mesh;
  Partition part;
  std::vector<SubdomainSystem> systems;
  ReducedSystem reduced;
  CliqueGraph graph;
  EliminationPlan plan;
  BlockFactor factor;
  DenseVector solution;
  PipelineTimings timings;
};

// Optional side outputs of a run.
struct RunHooks {
  std::string dump_k;                   // D3M-BLK v1 path for the reduced K
  std::ostream* symbolic_out = nullptr;  // receives the symbolic report
};

namespace detail {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - start_).count();
    start_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

inline double round_ms(double seconds) { return std::round(seconds * 1000.0) / 1000.0; }

}  // namespace detail

inline PipelineResult run_pipeline(const ProblemConfig& cfg, const SolverOptions& opts,
                                   const RunHooks& hooks = {}) {
  cfg.validate();
  PipelineResult r;
  detail::Stopwatch sw;

  r.mesh = build_rect_mesh(cfg.side_lambda, static_cast<double>(cfg.ppw), cfg.wavelength);
  r.part = partition_mesh(r.mesh, cfg.px, cfg.py);
  r.systems = build_subdomain_systems(r.mesh, r.part, cfg);
  std::vector<DomainReduction> reductions;
  reductions.reserve(r.systems.size());
  for (auto& sys : r.systems) reductions.push_back(reduce_domain(sys, opts.pivot_tol));
  r.reduced = assemble_reduced(reductions, r.part);
  r.timings.reduce_s = sw.lap();
  if (!hooks.dump_k.empty()) save_blk(hooks.dump_k, r.reduced.K);

  r.graph = clique_graph(r.reduced.K);
  const Ordering ord = compute_ordering(opts.ordering, r.graph, r.reduced.interface_sizes);
  r.plan = symbolic_factor(r.graph, ord, r.reduced.interface_sizes);
  r.timings.analyze_s = sw.lap();
  if (hooks.symbolic_out) print_symbolic(*hooks.symbolic_out, r.plan);

  r.factor = block_ldlt(r.reduced.K, r.plan, opts.pivot_tol);
  r.timings.factor_s = sw.lap();
  r.reduced.lambda = block_solve(r.factor, r.reduced.g);
  r.timings.solve_s = sw.lap();
  r.solution = recover_primal(r.systems, r.reduced.lambda);
  r.timings.recover_s = sw.lap();
  return r;
}

struct SolveReport {
  std::string case_id;
  Index n_dofs = 0;
  Index n_lambda = 0;
  Index n_blocks = 0;
  Index n_domains = 0;
  double factor_time_s = 0.0;  // steps 1-5
  double solve_time_s = 0.0;   // steps 6-7
  std::int64_t factor_bytes = 0;        // block factor, 16 bytes per complex entry
  std::int64_t dense_factor_bytes = 0;  // packed dense LDL^T of the scattered K
  std::int64_t peak_bytes = 0;
  double residual_inf = std::numeric_limits<double>::quiet_NaN();
  double rel_diff = std::numeric_limits<double>::quiet_NaN();  // vs monolithic solve
  double growth_factor = 0.0;
  Index n_2x2_pivots = 0;
  Index fill_blocks = 0;
  std::string status = "ok";

  bool ok() const { return status == "ok"; }
  bool passes() const { return ok() && residual_inf <= kResidualGate; }
};

inline SolveReport make_report(const std::string& case_id, const PipelineResult& r) {
  SolveReport rep;
  rep.case_id = case_id;
  rep.n_dofs = r.mesh.num_nodes();
  rep.n_lambda = r.reduced.K.dim();
  rep.n_blocks = r.reduced.K.num_blocks();
  rep.n_domains = r.part.num_domains;
  rep.factor_time_s = detail::round_ms(r.timings.reduce_s + r.timings.analyze_s + r.timings.factor_s);
  rep.solve_time_s = detail::round_ms(r.timings.solve_s + r.timings.recover_s);
  rep.factor_bytes = 16 * r.plan.total_factor_entries;
  const std::int64_t n = rep.n_lambda;
  rep.dense_factor_bytes = 16 * (n * (n + 1) / 2);
  rep.peak_bytes = r.factor.stats.peak_bytes;
  rep.growth_factor = r.factor.stats.growth_factor;
  rep.n_2x2_pivots = r.factor.stats.n_2x2_pivots;
  rep.fill_blocks = fill_blocks(r.graph, r.plan);
  return rep;
}

inline DenseVector monolithic_solve(const HelmholtzSystem& sys) {
  Eigen::SparseLU<Eigen::SparseMatrix<cplx>> lu;
  lu.compute(sys.A);
  if (lu.info() != Eigen::Success) throw Error("reference", "monolithic sparse LU failed");
  return lu.solve(sys.f);
}

// Steps 1-7 plus the monolithic residual.
inline SolveReport run_solve(const RunConfig& rc, const RunHooks& hooks = {}) {
  const PipelineResult r = run_pipeline(rc.problem, rc.solver, hooks);
  SolveReport rep = make_report(rc.case_id, r);
  rep.residual_inf = global_residual(r.mesh, rc.problem, r.solution);
  return rep;
}

// run_solve plus the relative 2-norm difference from a monolithic sparse solve.
inline SolveReport run_verify(const RunConfig& rc, const RunHooks& hooks = {}) {
  const PipelineResult r = run_pipeline(rc.problem, rc.solver, hooks);
  SolveReport rep = make_report(rc.case_id, r);
  const HelmholtzSystem mono = assemble_helmholtz(r.mesh, rc.problem);
  rep.residual_inf = relative_residual(mono, r.solution);
  const DenseVector ref = monolithic_solve(mono);
  rep.rel_diff = (r.solution - ref).norm() / ref.norm();
  return rep;
}

inline void print_report(std::ostream& os, const SolveReport& rep) {
  os << "case            " << rep.case_id << "\n"
     << "status          " << rep.status << "\n";
  if (!rep.ok()) return;
  os << "primal dofs     " << rep.n_dofs << "\n"
     << "domains         " << rep.n_domains << "\n"
     << "interfaces      " << rep.n_blocks << "  (multipliers " << rep.n_lambda << ")\n"
     << "fill blocks     " << rep.fill_blocks << "\n"
     << "factor time     " << rep.factor_time_s << " s\n"
     << "solve time      " << rep.solve_time_s << " s\n"
     << "factor bytes    " << rep.factor_bytes << "  (dense LDL^T of K: " << rep.dense_factor_bytes << ")\n"
     << "peak bytes      " << rep.peak_bytes << "\n"
     << "growth factor   " << rep.growth_factor << "  (2x2 pivots " << rep.n_2x2_pivots << ")\n"
     << std::scientific << std::setprecision(3)
     << "residual (inf)  " << rep.residual_inf << "\n";
  if (!std::isnan(rep.rel_diff)) os << "vs monolithic   " << rep.rel_diff << "\n";
  os << std::defaultfloat;
}

inline const char* csv_header() {
  return "case_id,n_dofs,n_lambda,n_blocks,factor_time_s,solve_time_s,factor_bytes,"
         "dense_factor_bytes,peak_bytes,residual_inf,rel_diff_monolithic,growth_factor,"
         "n_2x2_pivots,fill_blocks,status";
}

inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline void write_csv_row(std::ostream& os, const SolveReport& rep) {
  os << csv_quote(rep.case_id) << ',' << rep.n_dofs << ',' << rep.n_lambda << ',' << rep.n_blocks << ','
     << std::fixed << std::setprecision(3) << rep.factor_time_s << ',' << rep.solve_time_s << ','
     << std::defaultfloat << rep.factor_bytes << ',' << rep.dense_factor_bytes << ',' << rep.peak_bytes
     << ',' << std::scientific << std::setprecision(6) << rep.residual_inf << ',' << rep.rel_diff << ','
     << std::defaultfloat << std::setprecision(6) << rep.growth_factor << ',' << rep.n_2x2_pivots << ','
     << rep.fill_blocks << ',' << csv_quote(rep.status) << '\n';
}

inline void write_csv(const std::string& path, const std::vector<SolveReport>& rows) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open " + path + " for writing");
  os << csv_header() << '\n';
  for (const auto& rep : rows) write_csv_row(os, rep);
}

// Least-squares slope of log(y) against log(x) over the positive pairs;
// NaN with fewer than two distinct points.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
    if (x[i] > 0.0 && y[i] > 0.0) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  const double n = static_cast<double>(lx.size());
  if (lx.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  const double den = n * sxx - sx * sx;
  if (den == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return (n * sxy - sx * sy) / den;
}

struct SweepResult {
  std::vector<SolveReport> rows;
  double slope_factor_time = std::numeric_limits<double>::quiet_NaN();
  double slope_factor_bytes = std::numeric_limits<double>::quiet_NaN();

  bool all_pass() const {
    for (const auto& r : rows) {
      if (!r.passes()) return false;
    }
    return !rows.empty();
  }
};

// Runs every case (failures are recorded in-row) and fits the log-log
// slopes of factor time and factor bytes against primal dofs.
inline SweepResult run_sweep(const std::vector<RunConfig>& cases) {
  if (cases.size() < 2) throw ConfigError("sweep needs at least two configurations");
  SweepResult out;
  std::vector<double> dofs, times, bytes;
  for (const RunConfig& rc : cases) {
    SolveReport rep;
    try {
      rep = run_verify(rc);
    } catch (const std::exception& e) {
      rep = SolveReport{};
      rep.case_id = rc.case_id;
      rep.status = std::string("error: ") + e.what();
    }
    if (rep.ok()) {
      dofs.push_back(static_cast<double>(rep.n_dofs));
      times.push_back(rep.factor_time_s);
      bytes.push_back(static_cast<double>(rep.factor_bytes));
    }
    out.rows.push_back(std::move(rep));
  }
  out.slope_factor_time = loglog_slope(dofs, times);
  out.slope_factor_bytes = loglog_slope(dofs, bytes);
  return out;
}

}  // namespace d3m
