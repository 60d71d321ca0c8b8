// eigstab command-line driver.
//
//   eigstab mesh|solve|stabilize|table1|triangle-study [--config run.json] [overrides]
//
// Exit status: 0 success, 1 configuration error, 2 numerical failure.

#include <chrono>
#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "eigstab/config.hpp"
#include "eigstab/error.hpp"
#include "eigstab/experiments.hpp"
#include "eigstab/io.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;

struct Options {
  std::string config_path;
  eigstab::ConfigOverrides overrides;
  bool no_vtk = false;
  bool no_csv = false;
};

void add_common(CLI::App* app, Options& o) {
  app->add_option("-c,--config", o.config_path, "JSON run configuration");
  app->add_option("--domain", o.overrides.domain, "rect|triangle|polygon (polygon needs a config)");
  app->add_option("--eps", o.overrides.eps, "perturbation magnitude");
  app->add_option("--pattern", o.overrides.pattern, "rect mesh pattern: left|right|crossed");
  app->add_option("--weight-mode", o.overrides.weight_mode, "b~ weight: paper|det");
  app->add_option("--out-dir", o.overrides.out_dir, "output directory");
  app->add_option("--n", o.overrides.n, "rect cells per unit length");
  app->add_option("--levels", o.overrides.levels, "polygon refinement levels");
  app->add_option("--case", o.overrides.triangle_case, "triangle case A|B|C|D");
  app->add_option("--first", o.overrides.first, "first cluster index (1-based)");
  app->add_option("--last", o.overrides.last, "last cluster index (1-based)");
  app->add_option("--tol", o.overrides.tol, "eigensolver tolerance");
  app->add_flag("--no-vtk", o.no_vtk, "skip VTK output");
  app->add_flag("--no-csv", o.no_csv, "skip CSV output");
}

eigstab::RunConfig resolve(Options& o) {
  eigstab::RunConfig cfg = o.config_path.empty() ? eigstab::RunConfig{} : eigstab::load_config(o.config_path);
  if (o.no_vtk) o.overrides.emit_vtk = false;
  if (o.no_csv) o.overrides.emit_csv = false;
  eigstab::apply_overrides(cfg, o.overrides);
  return cfg;
}

double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int run(const std::string& cmd, eigstab::RunConfig cfg) {
  using namespace eigstab;
  const auto t0 = std::chrono::steady_clock::now();
  if (cmd == "mesh") {
    auto s = run_mesh(cfg);
    std::printf("nodes %zu  elements %zu  interior dofs %zu  boundary nodes %zu\n", s.nodes, s.elements,
                s.interior_dofs, s.boundary_nodes);
  } else if (cmd == "solve") {
    for (const auto& r : run_solve(cfg)) std::printf("lambda_%zu = %.10f  residual %.2e\n", r.index, r.lambda, r.residual);
  } else if (cmd == "stabilize") {
    auto r = run_stabilize(cfg);
    std::printf("weight_mode %s  lambda_ref %.10f\n", to_string(r.weight_mode), r.cluster.lambda_ref);
    for (std::size_t i = 0; i < r.quotients.size(); ++i)
      std::printf("mu_%zu = %.10f  (lambda0 %.10f, lambda_t %.10f)\n", r.cluster.first + i, r.quotients[i],
                  r.lambda0[i], r.lambda_t[i]);
    for (const auto& w : r.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  } else if (cmd == "table1") {
    auto res = run_table1(cfg);
    std::printf("weight_mode %s  pattern %s\n", to_string(res.weight_mode), to_string(res.pattern));
    std::printf("%-8s %-9s %10s %10s %12s %12s %10s %10s %8s\n", "eps", "method", "gap_fem", "gap_sep", "mu2", "mu3",
                "A2", "A3", "time[s]");
    for (const auto& r : res.rows)
      std::printf("%-8.0e %-9s %10.4f %10.4f %12.4f %12.4f %10.4g %10.4g %8.2f\n", r.eps, r.method.c_str(), r.gap_fem,
                  r.gap_separable, r.mu2, r.mu3, r.A2, r.A3, r.seconds);
    for (const auto& w : res.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  } else if (cmd == "triangle-study") {
    auto res = run_triangle_study(cfg);
    std::printf("weight_mode %s\n", to_string(res.weight_mode));
    std::printf("%-4s %12s %12s %10s %12s %12s %10s %10s %8s\n", "case", "mu2", "mu3", "mu_gap", "lam_gap",
                "eps*mu_gap", "A2", "A3", "time[s]");
    for (const auto& r : res.rows)
      std::printf("%-4s %12.4f %12.4f %10.4f %12.4e %12.4e %10.3g %10.3g %8.2f\n", to_string(r.triangle_case), r.mu2,
                  r.mu3, r.mu_gap, r.lambda_gap_fem, r.eps_mu_gap, r.A2, r.A3, r.seconds);
  }
  std::printf("elapsed %.2f s\n", elapsed(t0));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stabilized eigenfunctions for clustered Dirichlet-Laplacian eigenvalues"};
  app.require_subcommand(1);
  Options opts;
  const char* names[] = {"mesh", "solve", "stabilize", "table1", "triangle-study"};
  const char* help[] = {"write the reference and perturbed meshes", "FEM eigenpairs on the perturbed domain",
                        "stabilized eigenfunctions of one cluster", "rectangle table over eps in {1e-1,1e-5,1e-10}",
                        "equilateral triangle, apex perturbations A-D"};
  for (int i = 0; i < 5; ++i) add_common(app.add_subcommand(names[i], help[i]), opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    return run(cmd, resolve(opts));
  } catch (const eigstab::Error& e) {
    std::fprintf(stderr, "eigstab %s: %s\n", cmd.c_str(), e.what());
    return e.is_usage_error() ? kExitConfig : kExitNumerical;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "eigstab %s: %s\n", cmd.c_str(), e.what());
    return kExitNumerical;
  }
}
