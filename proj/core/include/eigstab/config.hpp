#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "eigstab/eigensolve.hpp"
#include "eigstab/geometry.hpp"
#include "eigstab/mesh.hpp"
#include "eigstab/stabilize.hpp"

namespace eigstab {

enum class DomainKind { Rect, Triangle, Polygon };
enum class TriangleCase { A, B, C, D };

struct DomainConfig {
  DomainKind kind = DomainKind::Rect;
  double eps = 0.0;
  TriangleCase triangle_case = TriangleCase::A;
  std::vector<Point2> vertices;    // polygon only
  std::vector<double> direction;   // polygon only, (x_1..x_k, y_1..y_k)
};

struct MeshConfig {
  MeshPattern pattern = MeshPattern::Left;
  std::size_t n = 64;
  std::size_t levels = 6;
};

struct OutputConfig {
  std::filesystem::path dir = "out";
  bool emit_vtk = true;
  bool emit_csv = true;
};

struct RunConfig {
  DomainConfig domain;
  MeshConfig mesh;
  ClusterSpec cluster{2, 3, 0.0};
  SolverOptions solver;
  std::optional<WeightMode> weight_mode;  // drivers pick their own default when unset
  OutputConfig outputs;
};

/// Command-line overrides applied on top of a parsed config.
struct ConfigOverrides {
  std::optional<std::string> domain;  // rect | triangle | polygon
  std::optional<double> eps;
  std::optional<std::string> pattern;
  std::optional<std::string> weight_mode;
  std::optional<std::string> out_dir;
  std::optional<std::size_t> n;
  std::optional<std::size_t> levels;
  std::optional<std::string> triangle_case;
  std::optional<std::size_t> first;
  std::optional<std::size_t> last;
  std::optional<double> tol;
  std::optional<bool> emit_vtk;
  std::optional<bool> emit_csv;
};

/// Parses a JSON document. Errors are ErrorKind::Config and name the offending
/// field (or the line and column for syntax errors).
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::filesystem::path& path);

void apply_overrides(RunConfig& config, const ConfigOverrides& overrides);

/// Range checks shared by the parser and the override path.
void validate(const RunConfig& config);

MeshPattern parse_pattern(const std::string& s);
WeightMode parse_weight_mode(const std::string& s);
TriangleCase parse_triangle_case(const std::string& s);
DomainKind parse_domain_kind(const std::string& s);
const char* to_string(MeshPattern p) noexcept;
const char* to_string(TriangleCase c) noexcept;

}  // namespace eigstab
