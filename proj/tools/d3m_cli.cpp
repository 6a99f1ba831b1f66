// d3m: decomposed direct solver driver.
//
//   d3m solve  <config>         run the pipeline, report the residual
//   d3m verify <config>         also compare with a monolithic sparse solve
//   d3m sweep  <config-list>... run several cases, write CSV, fit slopes
//
// Exit codes: 0 success, 1 usage, 2 pipeline failure (or residual gate missed).

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "d3m/d3m.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitFailure = 2;

struct Flags {
  std::string ordering;
  double pivot_tol = -1.0;
  std::string dump_k;
  bool print_symbolic = false;
  std::string csv;
};

void apply_flags(d3m::RunConfig& rc, const Flags& flags) {
  if (!flags.ordering.empty()) rc.solver.ordering = flags.ordering;
  if (flags.pivot_tol >= 0.0) rc.solver.pivot_tol = flags.pivot_tol;
  if (!flags.csv.empty()) rc.out_csv = flags.csv;
}

bool looks_like_config(const std::string& path) {
  std::ifstream is(path);
  std::string line;
  while (std::getline(is, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    return line.find('=') != std::string::npos;
  }
  return false;
}

// Each argument is either a config file or a list of config paths (one per
// line, relative to the list's directory).
std::vector<std::string> expand_configs(const std::vector<std::string>& args) {
  std::vector<std::string> out;
  for (const auto& arg : args) {
    std::ifstream is(arg);
    if (!is) throw d3m::ConfigError("cannot open " + arg);
    if (looks_like_config(arg)) {
      out.push_back(arg);
      continue;
    }
    const std::filesystem::path base = std::filesystem::path(arg).parent_path();
    std::string line;
    while (std::getline(is, line)) {
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const auto b = line.find_first_not_of(" \t\r");
      if (b == std::string::npos) continue;
      const auto e = line.find_last_not_of(" \t\r");
      std::filesystem::path p = line.substr(b, e - b + 1);
      out.push_back((p.is_absolute() ? p : base / p).string());
    }
  }
  return out;
}

int run_single(const std::string& path, const Flags& flags, bool verify) {
  d3m::RunConfig rc;
  try {
    rc = d3m::load_config(path);
  } catch (const d3m::Error& e) {
    std::cerr << "d3m: " << e.what() << "\n";
    return kExitUsage;
  }
  apply_flags(rc, flags);
  d3m::RunHooks hooks;
  hooks.dump_k = flags.dump_k;
  if (flags.print_symbolic) hooks.symbolic_out = &std::cout;
  d3m::SolveReport rep;
  try {
    rep = verify ? d3m::run_verify(rc, hooks) : d3m::run_solve(rc, hooks);
  } catch (const d3m::Error& e) {
    std::cerr << "d3m: pipeline failed at stage '" << e.stage() << "': " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "d3m: pipeline failed: " << e.what() << "\n";
    return kExitFailure;
  }
  d3m::print_report(std::cout, rep);
  if (!rc.out_csv.empty()) d3m::write_csv(rc.out_csv, {rep});
  if (verify && !rep.passes()) {
    std::cerr << "d3m: residual " << rep.residual_inf << " exceeds " << d3m::kResidualGate << "\n";
    return kExitFailure;
  }
  return 0;
}

int run_sweep(const std::vector<std::string>& args, const Flags& flags) {
  std::vector<d3m::RunConfig> cases;
  try {
    for (const auto& path : expand_configs(args)) {
      cases.push_back(d3m::load_config(path));
      apply_flags(cases.back(), flags);
    }
    if (cases.size() < 2) throw d3m::ConfigError("sweep needs at least two configurations");
  } catch (const d3m::Error& e) {
    std::cerr << "d3m: " << e.what() << "\n";
    return kExitUsage;
  }
  const d3m::SweepResult sweep = d3m::run_sweep(cases);
  std::cout << d3m::csv_header() << "\n";
  for (const auto& row : sweep.rows) d3m::write_csv_row(std::cout, row);
  std::cout << "# slope log(factor_time_s) vs log(n_dofs): " << sweep.slope_factor_time << "\n"
            << "# slope log(factor_bytes) vs log(n_dofs):  " << sweep.slope_factor_bytes << "\n";
  const std::string csv = !flags.csv.empty() ? flags.csv : cases.front().out_csv;
  if (!csv.empty()) d3m::write_csv(csv, sweep.rows);
  return sweep.all_pass() ? 0 : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decomposed direct solver for 2D Helmholtz problems"};
  app.require_subcommand(1);
  Flags flags;
  auto add_flags = [&flags](CLI::App* sub) {
    sub->add_option("--ordering", flags.ordering, "builtin | file:<path>");
    sub->add_option("--pivot-tol", flags.pivot_tol, "relative pivot tolerance");
    sub->add_option("--dump-k", flags.dump_k, "write the reduced matrix (D3M-BLK v1)");
    sub->add_flag("--print-symbolic", flags.print_symbolic, "print the symbolic factorization");
    sub->add_option("--csv", flags.csv, "CSV output path");
  };
  std::string config;
  std::vector<std::string> configs;
  auto* solve = app.add_subcommand("solve", "solve one configuration");
  solve->add_option("config", config, "config file")->required();
  add_flags(solve);
  auto* verify = app.add_subcommand("verify", "solve and compare with a monolithic solve");
  verify->add_option("config", config, "config file")->required();
  add_flags(verify);
  auto* sweep = app.add_subcommand("sweep", "run a list of configurations");
  sweep->add_option("configs", configs, "config files or config lists")->required();
  add_flags(sweep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }
  if (*solve) return run_single(config, flags, false);
  if (*verify) return run_single(config, flags, true);
  return run_sweep(configs, flags);
}
