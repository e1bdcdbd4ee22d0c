#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "hpbem/harness.hpp"
#include "hpbem/matrix_io.hpp"

using namespace hpbem;
namespace fs = std::filesystem;

namespace {

void dump_matrices(const RunConfig& cfg, const fs::path& dir) {
  const ProblemData problem = cfg.problem();
  DiscretizationOptions opt;
  opt.gamma_bar = cfg.gamma_bar;
  opt.tol = cfg.quadrature_tol;
  opt.z_extra = cfg.z_extra;
  const Discretization d = discretize(build_mesh(cfg.geometry, cfg.elements_per_edge, cfg.degree), problem, opt);
  const BilinearSystem sys = assemble_system(d, problem);
  write_matrix((dir / "V.bin").string(), d.ops.V);
  write_matrix((dir / "K.bin").string(), d.ops.K);
  write_matrix((dir / "W.bin").string(), d.ops.W);
  write_matrix((dir / "A.bin").string(), sys.A);
  write_matrix((dir / "B.bin").string(), sys.B);
}

int cmd_solve(const std::string& path, const std::string& mode, double gamma, int steps, std::string out, bool dump) {
  RunConfig cfg = load_config(path);
  if (!mode.empty()) cfg.mode = mode_from_string(mode);
  if (!std::isnan(gamma)) cfg.gamma_bar = gamma;
  if (steps > 0) cfg.max_steps = steps;
  if (out.empty()) out = cfg.output;
  cfg.validate();
  fs::create_directories(out);
  const std::string csv = (fs::path(out) / (cfg.name + "_" + to_string(cfg.mode) + ".csv")).string();
  if (dump) dump_matrices(cfg, out);

  std::vector<RunRecord> partial;
  std::printf("%5s %6s %8s %12s %6s %10s\n", "step", "elems", "dofs", "eta", "iters", "seconds");
  RunResult res = run(cfg, [&](const RunRecord& r) {
    partial.push_back(r);
    write_csv(csv, partial);  // flushed every step so a failure keeps the prefix
    std::printf("%5d %6d %8d %12.4e %6d %10.2f\n", r.step, r.elements, r.dofs(), r.eta_total, r.newton_iters,
                r.seconds);
    std::fflush(stdout);
  });
  write_csv(csv, res.records);
  std::printf("wrote %s\n", csv.c_str());
  if (res.failed) {
    std::fprintf(stderr, "run failed: %s\n", res.error.c_str());
    return 2;
  }
  return 0;
}

int cmd_rates(const std::string& path, int last) {
  const auto table = read_csv(path);
  std::vector<double> dofs;
  const auto& u = table.at("dof_u");
  for (std::size_t i = 0; i < u.size(); ++i) dofs.push_back(u[i] + table.at("dof_phi")[i] + table.at("dof_lambda")[i]);
  std::vector<std::string> cols = {"eta_total"};
  for (int i = 0; i < kNumTerms; ++i) cols.push_back(std::string("eta_") + term_name((Term)i));
  cols.push_back("approx_error");
  for (const auto& c : cols) {
    const auto& v = table.at(c);
    std::vector<double> x, y;
    for (std::size_t i = 0; i < v.size(); ++i)
      if (v[i] > 0 && std::isfinite(v[i])) {
        x.push_back(dofs[i]);
        y.push_back(v[i]);
      }
    // the reference step has zero approximate error and drops out here
    if (x.size() < 3) {
      std::printf("%-24s n/a\n", c.c_str());
      continue;
    }
    std::printf("%-24s %.15g\n", c.c_str(), rate_fit(x, y, last));
  }
  return 0;
}

int cmd_sweep(const std::string& path, const std::string& values, std::string out) {
  RunConfig cfg = load_config(path);
  std::vector<double> gammas;
  std::stringstream ss(values);
  std::string item;
  while (std::getline(ss, item, ',')) gammas.push_back(std::stod(item));
  if (gammas.empty()) throw std::invalid_argument("--values needs a comma separated list");
  if (out.empty()) out = cfg.output;
  fs::create_directories(out);
  const auto rows = sweep_gamma(cfg, gammas);
  const std::string csv = (fs::path(out) / (cfg.name + "_gamma_sweep.csv")).string();
  write_sweep_csv(csv, rows);
  std::printf("%12s %12s %5s %12s\n", "gamma_bar", "margin", "conv", "eta");
  for (const auto& r : rows)
    std::printf("%12.3e %12.4e %5d %12.4e\n", r.gamma_bar, r.margin, (int)r.converged, r.eta_total);
  std::printf("wrote %s\n", csv.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hp boundary element solver for frictional contact"};
  app.require_subcommand(1);

  std::string config, mode, out, csv, values;
  double gamma = std::nan("");
  int steps = 0, last = 6;
  bool dump = false;

  auto* solve = app.add_subcommand("solve", "run the refinement loop and write a CSV");
  solve->add_option("config", config, "JSON run configuration")->required()->check(CLI::ExistingFile);
  solve->add_option("--mode", mode, "uniform | h-adaptive | hp-adaptive");
  solve->add_option("--gamma-bar", gamma, "stabilization scale");
  solve->add_option("--max-steps", steps, "number of refinement steps");
  solve->add_option("--out", out, "output directory");
  solve->add_flag("--dump-matrices", dump, "write V, K, W, A, B of the initial mesh as binary files");

  auto* rates = app.add_subcommand("rates", "fitted convergence rates of a run CSV");
  rates->add_option("csv", csv, "run CSV")->required()->check(CLI::ExistingFile);
  rates->add_option("--last", last, "number of trailing steps used (0 = all)");

  auto* sweep = app.add_subcommand("sweep-gamma", "estimator against gamma_bar on the initial mesh");
  sweep->add_option("config", config, "JSON run configuration")->required()->check(CLI::ExistingFile);
  sweep->add_option("--values", values, "comma separated gamma_bar values")->required();
  sweep->add_option("--out", out, "output directory");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*solve) return cmd_solve(config, mode, gamma, steps, out, dump);
    if (*rates) return cmd_rates(csv, last);
    if (*sweep) return cmd_sweep(config, values, out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
