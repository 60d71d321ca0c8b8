#include "eigstab/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "eigstab/error.hpp"

namespace eigstab {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& msg) {
  throw Error(ErrorKind::Config, "field '" + field + "': " + msg);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!keys.count(it.key())) fail(where.empty() ? it.key() : where + "." + it.key(), "unknown field");
}

const json& object_at(const json& parent, const char* key, const std::string& field) {
  const json& v = parent.at(key);
  if (!v.is_object()) fail(field, "expected an object");
  return v;
}

double number(const json& v, const std::string& field) {
  if (!v.is_number()) fail(field, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(field, "expected a finite number");
  return d;
}

std::size_t positive_int(const json& v, const std::string& field) {
  if (!v.is_number_integer() || v.get<long long>() < 1) fail(field, "expected a positive integer");
  return static_cast<std::size_t>(v.get<long long>());
}

std::string string_at(const json& v, const std::string& field) {
  if (!v.is_string()) fail(field, "expected a string");
  return v.get<std::string>();
}

bool boolean(const json& v, const std::string& field) {
  if (!v.is_boolean()) fail(field, "expected true or false");
  return v.get<bool>();
}

std::pair<std::size_t, std::size_t> line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

MeshPattern parse_pattern(const std::string& s) {
  const std::string l = lower(s);
  if (l == "left") return MeshPattern::Left;
  if (l == "right") return MeshPattern::Right;
  if (l == "crossed") return MeshPattern::Crossed;
  throw Error(ErrorKind::Config, "field 'mesh.pattern': expected left, right or crossed, got '" + s + "'");
}

WeightMode parse_weight_mode(const std::string& s) {
  const std::string l = lower(s);
  if (l == "paper") return WeightMode::PaperD;
  if (l == "det") return WeightMode::Det;
  throw Error(ErrorKind::Config, "field 'weight_mode': expected paper or det, got '" + s + "'");
}

TriangleCase parse_triangle_case(const std::string& s) {
  const std::string l = lower(s);
  if (l == "a") return TriangleCase::A;
  if (l == "b") return TriangleCase::B;
  if (l == "c") return TriangleCase::C;
  if (l == "d") return TriangleCase::D;
  throw Error(ErrorKind::Config, "field 'domain.case': expected A, B, C or D, got '" + s + "'");
}

DomainKind parse_domain_kind(const std::string& s) {
  const std::string l = lower(s);
  if (l == "rect") return DomainKind::Rect;
  if (l == "triangle") return DomainKind::Triangle;
  if (l == "polygon") return DomainKind::Polygon;
  throw Error(ErrorKind::Config, "field 'domain.type': expected rect, triangle or polygon, got '" + s + "'");
}

const char* to_string(MeshPattern p) noexcept {
  switch (p) {
    case MeshPattern::Left: return "left";
    case MeshPattern::Right: return "right";
    case MeshPattern::Crossed: return "crossed";
  }
  return "?";
}

const char* to_string(TriangleCase c) noexcept {
  switch (c) {
    case TriangleCase::A: return "A";
    case TriangleCase::B: return "B";
    case TriangleCase::C: return "C";
    case TriangleCase::D: return "D";
  }
  return "?";
}

void validate(const RunConfig& c) {
  if (!(c.domain.eps >= 0.0) || !std::isfinite(c.domain.eps)) fail("domain.eps", "must be finite and >= 0");
  if (c.mesh.n < 1) fail("mesh.n", "must be >= 1");
  if (c.mesh.levels < 1 || c.mesh.levels > 12) fail("mesh.levels", "must be in 1..12");
  if (c.cluster.first < 1) fail("cluster.first", "must be >= 1");
  if (c.cluster.last < c.cluster.first) fail("cluster.last", "must be >= cluster.first");
  if (!(c.solver.tol > 0.0) || !(c.solver.tol < 1.0)) fail("solver.tol", "must be in (0, 1)");
  if (c.solver.max_iter < 1) fail("solver.max_iter", "must be >= 1");
  if (c.domain.kind == DomainKind::Polygon) {
    if (c.domain.vertices.size() < 3) fail("domain.vertices", "need at least 3 vertices");
    if (c.domain.direction.size() != 2 * c.domain.vertices.size())
      fail("domain.direction", "need 2k = " + std::to_string(2 * c.domain.vertices.size()) + " entries");
  }
  if (c.outputs.dir.empty()) fail("outputs.dir", "must not be empty");
}

RunConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    auto [line, col] = line_col(text, e.byte == 0 ? 0 : e.byte - 1);
    throw Error(ErrorKind::Config, "JSON syntax error at line " + std::to_string(line) + ", column " +
                                       std::to_string(col) + ": " + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorKind::Config, "config root must be a JSON object");
  reject_unknown(doc, "", {"domain", "mesh", "cluster", "solver", "weight_mode", "outputs"});

  RunConfig cfg;
  if (!doc.contains("domain")) fail("domain", "missing");
  {
    const json& d = object_at(doc, "domain", "domain");
    if (!d.contains("type")) fail("domain.type", "missing");
    const std::string type = lower(string_at(d.at("type"), "domain.type"));
    if (type == "rect") {
      reject_unknown(d, "domain", {"type", "eps"});
      cfg.domain.kind = DomainKind::Rect;
    } else if (type == "triangle") {
      reject_unknown(d, "domain", {"type", "eps", "case"});
      cfg.domain.kind = DomainKind::Triangle;
      if (d.contains("case")) cfg.domain.triangle_case = parse_triangle_case(string_at(d.at("case"), "domain.case"));
    } else if (type == "polygon") {
      reject_unknown(d, "domain", {"type", "eps", "vertices", "direction"});
      cfg.domain.kind = DomainKind::Polygon;
      if (!d.contains("vertices")) fail("domain.vertices", "missing");
      if (!d.contains("direction")) fail("domain.direction", "missing");
      const json& v = d.at("vertices");
      if (!v.is_array()) fail("domain.vertices", "expected an array of [x, y] pairs");
      for (std::size_t i = 0; i < v.size(); ++i) {
        const std::string f = "domain.vertices[" + std::to_string(i) + "]";
        if (!v[i].is_array() || v[i].size() != 2) fail(f, "expected [x, y]");
        cfg.domain.vertices.push_back({number(v[i][0], f), number(v[i][1], f)});
      }
      const json& e = d.at("direction");
      if (!e.is_array()) fail("domain.direction", "expected an array of numbers");
      for (std::size_t i = 0; i < e.size(); ++i)
        cfg.domain.direction.push_back(number(e[i], "domain.direction[" + std::to_string(i) + "]"));
    } else {
      fail("domain.type", "expected rect, triangle or polygon, got '" + type + "'");
    }
    if (d.contains("eps")) {
      cfg.domain.eps = number(d.at("eps"), "domain.eps");
      if (cfg.domain.eps < 0) fail("domain.eps", "must be >= 0");
    }
  }
  if (doc.contains("mesh")) {
    const json& m = object_at(doc, "mesh", "mesh");
    reject_unknown(m, "mesh", {"pattern", "n", "levels"});
    if (m.contains("pattern")) cfg.mesh.pattern = parse_pattern(string_at(m.at("pattern"), "mesh.pattern"));
    if (m.contains("n")) cfg.mesh.n = positive_int(m.at("n"), "mesh.n");
    if (m.contains("levels")) cfg.mesh.levels = positive_int(m.at("levels"), "mesh.levels");
  }
  if (doc.contains("cluster")) {
    const json& c = object_at(doc, "cluster", "cluster");
    reject_unknown(c, "cluster", {"first", "last"});
    if (c.contains("first")) cfg.cluster.first = positive_int(c.at("first"), "cluster.first");
    if (c.contains("last")) cfg.cluster.last = positive_int(c.at("last"), "cluster.last");
  }
  if (doc.contains("solver")) {
    const json& s = object_at(doc, "solver", "solver");
    reject_unknown(s, "solver", {"tol", "max_iter"});
    if (s.contains("tol")) cfg.solver.tol = number(s.at("tol"), "solver.tol");
    if (s.contains("max_iter")) cfg.solver.max_iter = positive_int(s.at("max_iter"), "solver.max_iter");
  }
  if (doc.contains("weight_mode")) cfg.weight_mode = parse_weight_mode(string_at(doc.at("weight_mode"), "weight_mode"));
  if (doc.contains("outputs")) {
    const json& o = object_at(doc, "outputs", "outputs");
    reject_unknown(o, "outputs", {"dir", "emit_vtk", "emit_csv"});
    if (o.contains("dir")) cfg.outputs.dir = string_at(o.at("dir"), "outputs.dir");
    if (o.contains("emit_vtk")) cfg.outputs.emit_vtk = boolean(o.at("emit_vtk"), "outputs.emit_vtk");
    if (o.contains("emit_csv")) cfg.outputs.emit_csv = boolean(o.at("emit_csv"), "outputs.emit_csv");
  }
  validate(cfg);
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Config, "cannot open config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void apply_overrides(RunConfig& c, const ConfigOverrides& o) {
  if (o.domain) c.domain.kind = parse_domain_kind(*o.domain);
  if (o.eps) c.domain.eps = *o.eps;
  if (o.pattern) c.mesh.pattern = parse_pattern(*o.pattern);
  if (o.weight_mode) c.weight_mode = parse_weight_mode(*o.weight_mode);
  if (o.out_dir) c.outputs.dir = *o.out_dir;
  if (o.n) c.mesh.n = *o.n;
  if (o.levels) c.mesh.levels = *o.levels;
  if (o.triangle_case) c.domain.triangle_case = parse_triangle_case(*o.triangle_case);
  if (o.first) c.cluster.first = *o.first;
  if (o.last) c.cluster.last = *o.last;
  if (o.tol) c.solver.tol = *o.tol;
  if (o.emit_vtk) c.outputs.emit_vtk = *o.emit_vtk;
  if (o.emit_csv) c.outputs.emit_csv = *o.emit_csv;
  validate(c);
}

}  // namespace eigstab
