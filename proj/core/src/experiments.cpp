#include "eigstab/experiments.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <memory>
#include <numbers>
#include <optional>
#include <thread>

#include "eigstab/error.hpp"
#include "eigstab/fem.hpp"
#include "eigstab/io.hpp"

namespace eigstab {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

/// Runs fn(i) for i in [0, count) on at most thread_cap() workers. Results
/// land in index order; the first exception (by index) is rethrown.
template <class R, class F>
std::vector<R> parallel_map(std::size_t count, F fn) {
  std::vector<std::optional<R>> slots(count);
  std::vector<std::exception_ptr> errors(count);
  const std::size_t workers = std::min(count, thread_cap());
  auto run = [&](std::size_t i) {
    try {
      slots[i].emplace(fn(i));
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) run(i);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < count; i += workers) run(i);
      });
    for (auto& th : pool) th.join();
  }
  std::vector<R> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
    out.push_back(std::move(*slots[i]));
  }
  return out;
}

std::string eps_tag(double eps) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.0e", eps);
  return buf;
}

std::string units_comment() {
  return "units: lengths dimensionless (unit reference domain); lambda, gaps in 1/length^2; "
         "mu in 1/length^2 per unit eps; A, residual dimensionless";
}

std::string weight_comment(WeightMode mode) { return std::string("weight_mode: ") + to_string(mode); }

PointField field(std::size_t index, const FEFunction& f) {
  return {"u_" + std::to_string(index), f.values()};
}

std::filesystem::path out_path(const RunConfig& config, const std::string& name) {
  return config.outputs.dir / name;
}

StabilizeOptions stabilize_options(const RunConfig& config, WeightMode fallback) {
  StabilizeOptions opts;
  opts.weight_mode = config.weight_mode.value_or(fallback);
  opts.solver = config.solver;
  return opts;
}

void require_perturbation(const Problem& p) {
  if (!(p.pair.t > 0.0)) throw Error(ErrorKind::Config, "field 'domain.eps': must be > 0 for a perturbation run");
}

}  // namespace

PolygonSpec unit_square() { return PolygonSpec({{0, 0}, {1, 0}, {1, 1}, {0, 1}}); }

std::vector<double> rect_stretch_direction() { return {0, 1, 1, 0, 0, 0, 0, 0}; }

PolygonSpec equilateral_triangle() { return PolygonSpec({{0, 0}, {1, 0}, {0.5, std::sqrt(3.0) / 2}}); }

std::vector<double> triangle_direction(TriangleCase c) {
  std::vector<double> e(6, 0.0);
  switch (c) {
    case TriangleCase::A: e[2] = 1.0; break;
    case TriangleCase::B: e[2] = -1.0; break;
    case TriangleCase::C: e[5] = 1.0; break;
    case TriangleCase::D: e[5] = -1.0; break;
  }
  return e;
}

Problem build_problem(const RunConfig& config) {
  const DomainConfig& d = config.domain;
  std::vector<Point2> vertices;
  std::vector<double> direction;
  std::string label;
  switch (d.kind) {
    case DomainKind::Rect:
      vertices = unit_square().vertices();
      direction = rect_stretch_direction();
      label = "rect";
      break;
    case DomainKind::Triangle:
      vertices = equilateral_triangle().vertices();
      direction = triangle_direction(d.triangle_case);
      label = std::string("triangle_") + to_string(d.triangle_case);
      break;
    case DomainKind::Polygon:
      vertices = d.vertices;
      direction = d.direction;
      label = "polygon";
      break;
  }
  if (d.eps < 0.0 || !std::isfinite(d.eps)) throw Error(ErrorKind::Config, "field 'domain.eps': must be >= 0");

  PolygonSpec p0(vertices);
  PerturbationSpec spec{direction, d.eps};
  spec.validate(p0.size());
  PolygonSpec pt = perturb_polygon(p0, spec);
  MacroTriangulation macro = fan_macro_triangulation(p0);

  MeshPtr mesh0;
  if (d.kind == DomainKind::Rect)
    mesh0 = std::make_shared<const TriMesh>(rect_mesh(config.mesh.n, 1.0, 1.0, config.mesh.pattern));
  else
    mesh0 = std::make_shared<const TriMesh>(refined_polygon_mesh(p0, macro, config.mesh.levels));

  std::vector<AffineMap2> maps = d.eps == 0.0 ? std::vector<AffineMap2>(macro.triangles.size(), AffineMap2::identity())
                                              : macro_maps(macro, p0, pt);
  MatchedMeshPair pair = transport(mesh0, maps, d.eps);
  return Problem{std::move(p0), std::move(pt), std::move(spec), std::move(pair), std::move(label)};
}

double reflection_tolerance(const Problem& problem) {
  double emax = 0.0;
  for (double e : problem.perturbation.direction) emax = std::max(emax, std::abs(e));
  return 1e-9 * problem.pair.mesh0->diameter() + 2.0 * problem.pair.t * emax;
}

std::size_t thread_cap() {
  std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("EIGSTAB_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return std::min<std::size_t>(hw, static_cast<std::size_t>(v));
  }
  return hw;
}

namespace analytic {

double rect_gap_separable(double eps) {
  const double pi2 = std::numbers::pi * std::numbers::pi;
  return 3.0 * pi2 * (1.0 - 1.0 / ((1.0 + eps) * (1.0 + eps)));
}

double rect_gap_example1(double eps) {
  const double pi2 = std::numbers::pi * std::numbers::pi;
  return 4.0 * pi2 * (1.0 - 1.0 / ((1.0 + eps) * (1.0 + eps)));
}

double equilateral_eigenvalue(int m, int n) {
  const double pi2 = std::numbers::pi * std::numbers::pi;
  return 16.0 * pi2 / 9.0 * (m * m + m * n + n * n);
}

}  // namespace analytic

MeshSummary run_mesh(const RunConfig& config) {
  validate(config);
  Problem p = build_problem(config);
  const TriMesh& m0 = *p.pair.mesh0;
  MeshSummary s{m0.node_count(), m0.element_count(), m0.interior_count(), m0.boundary_nodes.size()};

  if (config.outputs.emit_csv) {
    CsvTable table("eigstab mesh " + p.label, {"mesh", "nodes", "elements", "interior_dofs", "boundary_nodes",
                                               "area[length^2]"});
    table.add_comment(units_comment());
    table.add_comment("weight_mode: n/a");
    table.add_comment("pattern: " + std::string(to_string(config.mesh.pattern)) +
                      ", eps: " + format_real(p.pair.t));
    for (const auto& [name, mesh] : {std::pair{"reference", p.pair.mesh0}, std::pair{"perturbed", p.pair.mesh_t}})
      table.add_row({std::string(name), static_cast<long long>(mesh->node_count()),
                     static_cast<long long>(mesh->element_count()), static_cast<long long>(mesh->interior_count()),
                     static_cast<long long>(mesh->boundary_nodes.size()), mesh->total_area()});
    table.write(out_path(config, "mesh.csv"));
  }
  if (config.outputs.emit_vtk) {
    write_vtk(out_path(config, "mesh0.vtk"), *p.pair.mesh0, {}, "eigstab reference mesh");
    write_vtk(out_path(config, "mesh_t.vtk"), *p.pair.mesh_t, {}, "eigstab perturbed mesh");
  }
  return s;
}

std::vector<SolveRow> run_solve(const RunConfig& config) {
  validate(config);
  config.cluster.validate();
  Problem p = build_problem(config);
  const MeshPtr& mesh = p.pair.mesh_t;
  Assembly sys = assemble(*mesh);
  const std::size_t m = config.cluster.last;
  auto pairs = smallest_pairs(sys.stiffness, sys.mass, m, config.solver);

  std::vector<SolveRow> rows;
  for (std::size_t i = 0; i < pairs.size(); ++i)
    rows.push_back({i + 1, pairs[i].value, residual(sys.stiffness, sys.mass, pairs[i])});

  if (config.outputs.emit_csv) {
    CsvTable table("eigstab solve " + p.label, {"index", "lambda[1/length^2]", "residual"});
    table.add_comment(units_comment());
    table.add_comment("weight_mode: n/a");
    table.add_comment("eps: " + format_real(p.pair.t) + ", pattern: " + to_string(config.mesh.pattern) +
                      ", interior_dofs: " + std::to_string(sys.dofs.size()));
    for (const auto& r : rows) table.add_row({static_cast<long long>(r.index), r.lambda, r.residual});
    table.write(out_path(config, "eigen.csv"));
  }
  if (config.outputs.emit_vtk) {
    std::vector<PointField> fields;
    for (std::size_t i = config.cluster.first; i <= config.cluster.last; ++i)
      fields.push_back(field(i, normalized_with_sign(FEFunction::from_interior(mesh, sys.dofs, pairs[i - 1].vector))));
    write_vtk(out_path(config, "eigen.vtk"), *mesh, fields, "eigstab eigenfunctions " + p.label);
  }
  return rows;
}

StabilizedCluster run_stabilize(const RunConfig& config) {
  validate(config);
  config.cluster.validate();
  Problem p = build_problem(config);
  require_perturbation(p);
  StabilizeOptions opts = stabilize_options(config, WeightMode::PaperD);
  StabilizedCluster r = stabilize_cluster(p.pair, config.cluster, opts);
  const std::size_t M = r.cluster.size();

  if (config.outputs.emit_csv) {
    std::vector<std::string> cols{"index", "mu[1/length^2]", "lambda0[1/length^2]", "lambda_t[1/length^2]",
                                  "direct_quotient[1/length^2]"};
    for (std::size_t k = 0; k < M; ++k) cols.push_back("sigma_" + std::to_string(r.cluster.first + k));
    CsvTable table("eigstab stabilize " + p.label, cols);
    table.add_comment(units_comment());
    table.add_comment(weight_comment(r.weight_mode));
    table.add_comment("eps: " + format_real(p.pair.t) + ", pattern: " + to_string(config.mesh.pattern) +
                      ", lambda_ref: " + format_real(r.cluster.lambda_ref));
    for (std::size_t i = 0; i < M; ++i) {
      std::vector<CsvTable::Cell> row{static_cast<long long>(r.cluster.first + i), r.quotients[i], r.lambda0[i],
                                      r.lambda_t[i], difference_quotient(r.lambda_t[i], r.lambda0[i], p.pair.t)};
      for (std::size_t k = 0; k < M; ++k) row.push_back(r.coefficients(static_cast<Eigen::Index>(k),
                                                                       static_cast<Eigen::Index>(i)));
      table.add_row(std::move(row));
    }
    if (r.unresolved_subcluster) table.add_footer("warning: repeated quotients; sub-cluster not resolved");
    for (const auto& w : r.warnings) table.add_footer("warning: " + w);
    table.write(out_path(config, "stabilize.csv"));
  }
  if (config.outputs.emit_vtk) {
    std::vector<PointField> stab, standard;
    for (std::size_t i = 0; i < M; ++i) {
      stab.push_back(field(r.cluster.first + i, r.functions_on_Kt[i]));
      standard.push_back(field(r.cluster.first + i, r.standard_on_Kt[i]));
    }
    write_vtk(out_path(config, "stabilized.vtk"), *p.pair.mesh_t, stab, "eigstab stabilized " + p.label);
    write_vtk(out_path(config, "standard.vtk"), *p.pair.mesh_t, standard, "eigstab standard FEM " + p.label);
  }
  return r;
}

std::vector<double> table1_eps_values() { return {1e-1, 1e-5, 1e-10}; }

Table1Result run_table1(const RunConfig& config, const std::vector<double>& eps_values) {
  RunConfig base = config;
  base.domain.kind = DomainKind::Rect;
  base.cluster = ClusterSpec{2, 3, 0.0};
  validate(base);
  const StabilizeOptions opts = stabilize_options(base, WeightMode::PaperD);

  struct Case {
    std::vector<Table1Row> rows;
    StabilizedCluster cluster;
    Problem problem;
  };
  auto cases = parallel_map<Case>(eps_values.size(), [&](std::size_t k) {
    const auto t0 = Clock::now();
    RunConfig c = base;
    c.domain.eps = eps_values[k];
    Problem p = build_problem(c);
    require_perturbation(p);
    StabilizedCluster r = stabilize_cluster(p.pair, c.cluster, opts);
    const double eps = p.pair.t;
    const double tol = reflection_tolerance(p);
    const auto ax2 = ReflectionAxis::vertical(0.5 * (1.0 + eps));
    const auto ax3 = ReflectionAxis::horizontal(0.5);

    Table1Row common;
    common.eps = eps;
    common.gap_fem = r.lambda_t[1] - r.lambda_t[0];
    common.gap_separable = analytic::rect_gap_separable(eps);
    common.gap_example1 = analytic::rect_gap_example1(eps);
    common.residual2 = r.residual_t[0];
    common.residual3 = r.residual_t[1];

    Table1Row standard = common;
    standard.method = "standard";
    standard.mu2 = difference_quotient(r.lambda_t[0], r.lambda0[0], eps);
    standard.mu3 = difference_quotient(r.lambda_t[1], r.lambda0[1], eps);
    standard.A2 = antisymmetry(r.standard_on_Kt[0], ax2, tol);
    standard.A3 = antisymmetry(r.standard_on_Kt[1], ax3, tol);

    Table1Row proposed = common;
    proposed.method = "proposed";
    proposed.mu2 = r.quotients[0];
    proposed.mu3 = r.quotients[1];
    proposed.A2 = antisymmetry(r.functions_on_Kt[0], ax2, tol);
    proposed.A3 = antisymmetry(r.functions_on_Kt[1], ax3, tol);

    standard.seconds = proposed.seconds = seconds_since(t0);
    return Case{{standard, proposed}, std::move(r), std::move(p)};
  });

  Table1Result result;
  result.weight_mode = opts.weight_mode;
  result.pattern = base.mesh.pattern;
  for (auto& c : cases) {
    for (auto& row : c.rows) result.rows.push_back(row);
    for (auto& w : c.cluster.warnings) result.warnings.push_back("eps " + eps_tag(c.problem.pair.t) + ": " + w);
  }

  if (base.outputs.emit_csv) {
    CsvTable table("eigstab table1 rect n=" + std::to_string(base.mesh.n),
                   {"eps", "method", "gap_fem[1/length^2]", "gap_separable[1/length^2]", "gap_example1[1/length^2]",
                    "mu2[1/length^2]", "mu3[1/length^2]", "A2", "A3", "residual2", "residual3"});
    table.add_comment(units_comment());
    table.add_comment(weight_comment(result.weight_mode));
    table.add_comment(std::string("pattern: ") + to_string(result.pattern) +
                      "; A2 about x = (1+eps)/2, A3 about y = 1/2");
    for (const auto& r : result.rows)
      table.add_row({r.eps, r.method, r.gap_fem, r.gap_separable, r.gap_example1, r.mu2, r.mu3, r.A2, r.A3,
                     r.residual2, r.residual3});
    table.add_footer("gap_separable = 3 pi^2 (1 - (1+eps)^-2) is the gap lambda(1,2) - lambda(2,1) of the stretched "
                     "square; gap_example1 = 4 pi^2 (1 - (1+eps)^-2) scales as 8 pi^2 eps.");
    table.add_footer("at eps = 1e-1 gap_separable is 5.139 and gap_example1 is 6.852; only gap_separable is "
                     "comparable with gap_fem.");
    table.add_footer("standard rows use solver-returned eigenvectors; their A values are observations and depend "
                     "on the solver within the near-degenerate pair.");
    for (const auto& w : result.warnings) table.add_footer("warning: " + w);
    table.write(out_path(base, "table1.csv"));
  }
  if (base.outputs.emit_vtk) {
    for (const auto& c : cases) {
      const std::string tag = eps_tag(c.problem.pair.t);
      const TriMesh& mesh = *c.problem.pair.mesh_t;
      write_vtk(out_path(base, "table1_eps" + tag + "_standard.vtk"), mesh,
                {field(2, c.cluster.standard_on_Kt[0]), field(3, c.cluster.standard_on_Kt[1])},
                "eigstab table1 standard eps=" + tag);
      write_vtk(out_path(base, "table1_eps" + tag + "_proposed.vtk"), mesh,
                {field(2, c.cluster.functions_on_Kt[0]), field(3, c.cluster.functions_on_Kt[1])},
                "eigstab table1 proposed eps=" + tag);
    }
  }
  return result;
}

TriangleStudyResult run_triangle_study(const RunConfig& config) {
  RunConfig base = config;
  base.domain.kind = DomainKind::Triangle;
  base.cluster = ClusterSpec{2, 3, 0.0};
  if (base.domain.eps == 0.0) base.domain.eps = 1e-6;
  validate(base);
  const StabilizeOptions opts = stabilize_options(base, WeightMode::Det);
  const std::array<TriangleCase, 4> all{TriangleCase::A, TriangleCase::B, TriangleCase::C, TriangleCase::D};

  struct Case {
    TriangleRow row;
    StabilizedCluster cluster;
    Problem problem;
  };
  auto cases = parallel_map<Case>(all.size(), [&](std::size_t k) {
    const auto t0 = Clock::now();
    RunConfig c = base;
    c.domain.triangle_case = all[k];
    Problem p = build_problem(c);
    StabilizedCluster r = stabilize_cluster(p.pair, c.cluster, opts);
    const double tol = reflection_tolerance(p);
    const auto axis = ReflectionAxis::vertical(0.5);

    TriangleRow row;
    row.triangle_case = all[k];
    row.eps = p.pair.t;
    row.lambda2 = r.lambda_t[0];
    row.lambda3 = r.lambda_t[1];
    row.mu2 = r.quotients[0];
    row.mu3 = r.quotients[1];
    row.mu_gap = row.mu3 - row.mu2;
    row.lambda_gap_fem = row.lambda3 - row.lambda2;
    row.eps_mu_gap = row.eps * row.mu_gap;
    row.A2 = antisymmetry(r.functions_on_Kt[0], axis, tol);
    row.A3 = antisymmetry(r.functions_on_Kt[1], axis, tol);
    // Vertical moves of the apex keep the mirror symmetry, so one mode of the
    // pair stays antisymmetric; horizontal moves break it.
    if (all[k] == TriangleCase::C || all[k] == TriangleCase::D) row.designated_mode = row.A2 <= row.A3 ? 2 : 3;
    row.seconds = seconds_since(t0);
    return Case{row, std::move(r), std::move(p)};
  });

  TriangleStudyResult result;
  result.weight_mode = opts.weight_mode;
  for (const auto& c : cases) result.rows.push_back(c.row);

  if (base.outputs.emit_csv) {
    CsvTable table("eigstab triangle study levels=" + std::to_string(base.mesh.levels),
                   {"case", "eps", "lambda2[1/length^2]", "lambda3[1/length^2]", "mu2[1/length^2]", "mu3[1/length^2]",
                    "mu_gap[1/length^2]", "lambda_gap_fem[1/length^2]", "eps_mu_gap[1/length^2]", "A2", "A3",
                    "designated_mode"});
    table.add_comment(units_comment());
    table.add_comment(weight_comment(result.weight_mode));
    table.add_comment("A2, A3 about x = 1/2");
    for (const auto& r : result.rows)
      table.add_row({std::string(to_string(r.triangle_case)), r.eps, r.lambda2, r.lambda3, r.mu2, r.mu3, r.mu_gap,
                     r.lambda_gap_fem, r.eps_mu_gap, r.A2, r.A3, static_cast<long long>(r.designated_mode)});
    table.add_footer("apex moves: A +x, B -x, C +y, D -y; designated_mode 0 means no mode is expected to be "
                     "antisymmetric about x = 1/2.");
    table.write(out_path(base, "triangle.csv"));
  }
  if (base.outputs.emit_vtk) {
    for (const auto& c : cases) {
      const std::string name = std::string("triangle_") + to_string(c.row.triangle_case);
      const TriMesh& mesh = *c.problem.pair.mesh_t;
      for (std::size_t i = 0; i < 2; ++i)
        write_vtk(out_path(base, name + "_u_" + std::to_string(i + 2) + ".vtk"), mesh,
                  {field(i + 2, c.cluster.functions_on_Kt[i])}, "eigstab " + name);
    }
  }
  return result;
}

}  // namespace eigstab
