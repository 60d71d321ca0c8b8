#include "eigstab/io.hpp"

#include <cstdio>
#include <fstream>

#include "eigstab/error.hpp"

namespace eigstab {

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10e", v);
  return buf;
}

namespace {

std::string format_vtk(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error(ErrorKind::InvalidArgument, "write failed for '" + path.string() + "'");
}

}  // namespace

CsvTable::CsvTable(std::string title, std::vector<std::string> columns)
    : title_(std::move(title)), columns_(std::move(columns)) {}

void CsvTable::add_row(std::vector<Cell> row) {
  if (row.size() != columns_.size())
    throw Error(ErrorKind::DimensionMismatch, "CSV row has " + std::to_string(row.size()) + " cells, expected " +
                                                  std::to_string(columns_.size()));
  rows_.push_back(std::move(row));
}

std::string CsvTable::str() const {
  std::string s = "# " + title_ + "\n";
  for (const auto& c : comments_) s += "# " + c + "\n";
  for (std::size_t i = 0; i < columns_.size(); ++i) s += (i ? "," : "") + columns_[i];
  s += "\n";
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) s += ",";
      std::visit(
          [&s](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>)
              s += format_real(v);
            else if constexpr (std::is_same_v<T, long long>)
              s += std::to_string(v);
            else
              s += v;
          },
          row[i]);
    }
    s += "\n";
  }
  for (const auto& f : footers_) s += "# " + f + "\n";
  return s;
}

void CsvTable::write(const std::filesystem::path& path) const { write_text(path, str()); }

std::string vtk_string(const TriMesh& mesh, const std::vector<PointField>& fields, const std::string& title) {
  std::string s;
  s.reserve(64 * (mesh.node_count() * (1 + fields.size()) + mesh.element_count()));
  s += "# vtk DataFile Version 3.0\n";
  s += title + "\n";
  s += "ASCII\nDATASET UNSTRUCTURED_GRID\n";
  s += "POINTS " + std::to_string(mesh.node_count()) + " double\n";
  for (const auto& p : mesh.nodes) s += format_vtk(p.x) + " " + format_vtk(p.y) + " 0\n";
  s += "CELLS " + std::to_string(mesh.element_count()) + " " + std::to_string(4 * mesh.element_count()) + "\n";
  for (const auto& e : mesh.elements)
    s += "3 " + std::to_string(e[0]) + " " + std::to_string(e[1]) + " " + std::to_string(e[2]) + "\n";
  s += "CELL_TYPES " + std::to_string(mesh.element_count()) + "\n";
  for (std::size_t j = 0; j < mesh.element_count(); ++j) s += "5\n";
  if (!fields.empty()) {
    s += "POINT_DATA " + std::to_string(mesh.node_count()) + "\n";
    for (const auto& [name, values] : fields) {
      if (static_cast<std::size_t>(values.size()) != mesh.node_count())
        throw Error(ErrorKind::DimensionMismatch, "VTK field '" + name + "' has the wrong length");
      s += "SCALARS " + name + " double 1\nLOOKUP_TABLE default\n";
      for (Eigen::Index i = 0; i < values.size(); ++i) s += format_vtk(values[i]) + "\n";
    }
  }
  return s;
}

void write_vtk(const std::filesystem::path& path, const TriMesh& mesh, const std::vector<PointField>& fields,
               const std::string& title) {
  write_text(path, vtk_string(mesh, fields, title));
}

}  // namespace eigstab
