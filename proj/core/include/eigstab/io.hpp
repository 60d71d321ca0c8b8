#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "eigstab/mesh.hpp"

namespace eigstab {

/// Comma-separated table; reals printed with %.10e, LF line endings.
class CsvTable {
 public:
  using Cell = std::variant<double, long long, std::string>;

  CsvTable(std::string title, std::vector<std::string> columns);

  void add_comment(std::string line) { comments_.push_back(std::move(line)); }
  void add_footer(std::string line) { footers_.push_back(std::move(line)); }
  void add_row(std::vector<Cell> row);

  std::string str() const;
  void write(const std::filesystem::path& path) const;

  std::size_t rows() const { return rows_.size(); }

 private:
  std::string title_;
  std::vector<std::string> columns_;
  std::vector<std::string> comments_;
  std::vector<std::string> footers_;
  std::vector<std::vector<Cell>> rows_;
};

std::string format_real(double v);

using PointField = std::pair<std::string, Eigen::VectorXd>;

/// Legacy ASCII VTK 3.0 unstructured grid of triangles with point scalars,
/// 17 significant digits.
std::string vtk_string(const TriMesh& mesh, const std::vector<PointField>& fields, const std::string& title);
void write_vtk(const std::filesystem::path& path, const TriMesh& mesh, const std::vector<PointField>& fields,
               const std::string& title = "eigstab");

}  // namespace eigstab
