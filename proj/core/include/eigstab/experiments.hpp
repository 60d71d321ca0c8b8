#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "eigstab/config.hpp"
#include "eigstab/metrics.hpp"
#include "eigstab/stabilize.hpp"

namespace eigstab {

/// Reference domain, perturbed domain and the matched meshes between them.
/// With eps = 0 the maps are identities and pair.t = 0.
struct Problem {
  PolygonSpec polygon0;
  PolygonSpec polygon_t;
  PerturbationSpec perturbation;
  MatchedMeshPair pair;
  std::string label;
};

Problem build_problem(const RunConfig& config);

/// Unit square with both right-edge vertices moved by +x.
PolygonSpec unit_square();
std::vector<double> rect_stretch_direction();

PolygonSpec equilateral_triangle();
std::vector<double> triangle_direction(TriangleCase c);

/// Distance tolerance for reflected nodes: 1e-9 diam plus the O(t) asymmetry
/// of the perturbed polygon.
double reflection_tolerance(const Problem& problem);

/// Maximum worker threads; EIGSTAB_THREADS caps it when set.
std::size_t thread_cap();

namespace analytic {

/// Separable spectrum on (0,1+eps)x(0,1): 3 pi^2 (1 - (1+eps)^-2).
double rect_gap_separable(double eps);
/// 4 pi^2 (1 - (1+eps)^-2), reported next to the separable gap.
double rect_gap_example1(double eps);
/// (16 pi^2 / 9)(m^2 + m n + n^2) on the unit equilateral triangle.
double equilateral_eigenvalue(int m, int n);

}  // namespace analytic

struct MeshSummary {
  std::size_t nodes = 0;
  std::size_t elements = 0;
  std::size_t interior_dofs = 0;
  std::size_t boundary_nodes = 0;
};

MeshSummary run_mesh(const RunConfig& config);

struct SolveRow {
  std::size_t index = 0;
  double lambda = 0.0;
  double residual = 0.0;
};

std::vector<SolveRow> run_solve(const RunConfig& config);

StabilizedCluster run_stabilize(const RunConfig& config);

struct Table1Row {
  double eps = 0.0;
  std::string method;  // "standard" or "proposed"
  double gap_fem = 0.0;
  double gap_separable = 0.0;
  double gap_example1 = 0.0;
  double mu2 = 0.0;
  double mu3 = 0.0;
  double A2 = 0.0;
  double A3 = 0.0;
  double residual2 = 0.0;
  double residual3 = 0.0;
  double seconds = 0.0;  // not written to CSV
};

struct Table1Result {
  WeightMode weight_mode = WeightMode::PaperD;
  MeshPattern pattern = MeshPattern::Left;
  std::vector<Table1Row> rows;
  std::vector<std::string> warnings;
};

std::vector<double> table1_eps_values();

Table1Result run_table1(const RunConfig& config, const std::vector<double>& eps_values = table1_eps_values());

struct TriangleRow {
  TriangleCase triangle_case = TriangleCase::A;
  double eps = 0.0;
  double lambda2 = 0.0;
  double lambda3 = 0.0;
  double mu2 = 0.0;
  double mu3 = 0.0;
  double mu_gap = 0.0;
  double lambda_gap_fem = 0.0;
  double eps_mu_gap = 0.0;
  double A2 = 0.0;
  double A3 = 0.0;
  int designated_mode = 0;  // 2 or 3 when the mode is antisymmetric about x = 1/2, else 0
  double seconds = 0.0;
};

struct TriangleStudyResult {
  WeightMode weight_mode = WeightMode::Det;
  std::vector<TriangleRow> rows;
};

/// Cases A-D; eps defaults to 1e-6 when the config leaves it at 0.
TriangleStudyResult run_triangle_study(const RunConfig& config);

}  // namespace eigstab
