#include "bodyfit/mesh_io.hpp"

#include <algorithm>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "bodyfit/error.hpp"

namespace bodyfit {
namespace {

[[noreturn]] void parse_error(const std::filesystem::path& path, std::size_t line, const std::string& what,
                              ErrorKind kind = ErrorKind::Parse) {
  throw Error(kind, path.string() + ":" + std::to_string(line) + ": " + what);
}

std::string lower_ext(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

void append_number(std::string& out, double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  out.append(buf, res.ptr);
}

// Resolves an OBJ index (1-based, or negative relative to the current count).
int resolve_obj_index(const std::string& token, std::size_t count, const std::filesystem::path& path,
                      std::size_t line) {
  const std::string head = token.substr(0, token.find('/'));
  long value = 0;
  const auto res = std::from_chars(head.data(), head.data() + head.size(), value);
  if (res.ec != std::errc() || res.ptr != head.data() + head.size() || value == 0) {
    parse_error(path, line, "bad face index '" + token + "'");
  }
  const long resolved = value > 0 ? value - 1 : static_cast<long>(count) + value;
  if (resolved < 0 || resolved >= static_cast<long>(count)) {
    parse_error(path, line,
                "face index " + std::to_string(value) + " out of range (" + std::to_string(count) + " vertices)",
                ErrorKind::IndexOutOfRange);
  }
  return static_cast<int>(resolved);
}

}  // namespace

TriMesh load_obj(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());

  std::vector<Vec3> vertices;
  std::vector<Face> faces;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      Vec3 p;
      if (!(ss >> p.x() >> p.y() >> p.z())) parse_error(path, line_no, "malformed vertex record");
      vertices.push_back(p);
    } else if (tag == "f") {
      std::vector<int> poly;
      std::string tok;
      while (ss >> tok) poly.push_back(resolve_obj_index(tok, vertices.size(), path, line_no));
      if (poly.size() < 3) parse_error(path, line_no, "face with fewer than 3 vertices");
      for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
        const Face tri{poly[0], poly[k], poly[k + 1]};
        if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2]) {
          parse_error(path, line_no, "degenerate face (repeated vertex index)", ErrorKind::InvalidMesh);
        }
        faces.push_back(tri);
      }
    }
    // vn, vt, o, g, s, usemtl, mtllib: normals are recomputed, the rest is ignored.
  }
  if (vertices.empty() || faces.empty()) {
    throw Error(ErrorKind::InvalidMesh, path.string() + ": empty mesh");
  }
  return TriMesh(std::move(vertices), std::move(faces));
}

TriMesh load_ply(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());

  struct Property {
    std::string name;
    std::string type;
    bool is_list = false;
    std::string count_type;
  };
  struct Element {
    std::string name;
    std::size_t count = 0;
    std::vector<Property> props;
  };

  std::string line;
  std::size_t line_no = 0;
  std::getline(in, line);
  ++line_no;
  if (line.rfind("ply", 0) != 0) parse_error(path, line_no, "missing 'ply' magic");

  std::string format;
  std::vector<Element> elements;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "format") {
      ss >> format;
    } else if (tag == "element") {
      Element e;
      ss >> e.name >> e.count;
      elements.push_back(e);
    } else if (tag == "property") {
      if (elements.empty()) parse_error(path, line_no, "property before element");
      Property p;
      std::string type;
      ss >> type;
      if (type == "list") {
        p.is_list = true;
        ss >> p.count_type >> p.type >> p.name;
      } else {
        p.type = type;
        ss >> p.name;
      }
      elements.back().props.push_back(p);
    } else if (tag == "end_header") {
      break;
    }
  }
  const bool binary = format == "binary_little_endian";
  if (format != "ascii" && !binary) parse_error(path, line_no, "unsupported PLY format '" + format + "'");

  auto type_size = [&](const std::string& t) -> std::size_t {
    if (t == "char" || t == "uchar" || t == "int8" || t == "uint8") return 1;
    if (t == "short" || t == "ushort" || t == "int16" || t == "uint16") return 2;
    if (t == "int" || t == "uint" || t == "float" || t == "int32" || t == "uint32" || t == "float32") return 4;
    if (t == "double" || t == "float64") return 8;
    parse_error(path, line_no, "unknown PLY type '" + t + "'");
  };
  auto read_binary = [&](const std::string& t) -> double {
    unsigned char buf[8];
    const std::size_t n = type_size(t);
    if (!in.read(reinterpret_cast<char*>(buf), static_cast<std::streamsize>(n))) {
      parse_error(path, line_no, "truncated binary PLY body");
    }
    if (t == "char" || t == "int8") return static_cast<std::int8_t>(buf[0]);
    if (t == "uchar" || t == "uint8") return buf[0];
    if (t == "short" || t == "int16") { std::int16_t v; std::memcpy(&v, buf, 2); return v; }
    if (t == "ushort" || t == "uint16") { std::uint16_t v; std::memcpy(&v, buf, 2); return v; }
    if (t == "int" || t == "int32") { std::int32_t v; std::memcpy(&v, buf, 4); return v; }
    if (t == "uint" || t == "uint32") { std::uint32_t v; std::memcpy(&v, buf, 4); return v; }
    if (t == "float" || t == "float32") { float v; std::memcpy(&v, buf, 4); return v; }
    double v;
    std::memcpy(&v, buf, 8);
    return v;
  };

  std::vector<Vec3> vertices;
  std::vector<Face> faces;
  std::istringstream row;
  auto next_ascii_row = [&]() {
    if (!std::getline(in, line)) parse_error(path, line_no, "truncated ASCII PLY body");
    ++line_no;
    row.clear();
    row.str(line);
  };
  auto read_value = [&](const std::string& t) -> double {
    if (binary) return read_binary(t);
    double v;
    if (!(row >> v)) parse_error(path, line_no, "malformed ASCII PLY value");
    return v;
  };

  for (const Element& e : elements) {
    for (std::size_t i = 0; i < e.count; ++i) {
      if (!binary) next_ascii_row();
      Vec3 p = Vec3::Zero();
      std::vector<int> poly;
      for (const Property& prop : e.props) {
        if (prop.is_list) {
          const auto n = static_cast<std::size_t>(read_value(prop.count_type));
          for (std::size_t k = 0; k < n; ++k) poly.push_back(static_cast<int>(read_value(prop.type)));
          continue;
        }
        const double v = read_value(prop.type);
        if (e.name == "vertex") {
          if (prop.name == "x") p.x() = v;
          else if (prop.name == "y") p.y() = v;
          else if (prop.name == "z") p.z() = v;
        }
      }
      if (e.name == "vertex") {
        vertices.push_back(p);
      } else if (e.name == "face") {
        if (poly.size() < 3) parse_error(path, line_no, "face with fewer than 3 vertices");
        for (int idx : poly) {
          if (idx < 0 || idx >= static_cast<int>(vertices.size())) {
            parse_error(path, line_no, "face index " + std::to_string(idx) + " out of range",
                        ErrorKind::IndexOutOfRange);
          }
        }
        for (std::size_t k = 1; k + 1 < poly.size(); ++k) faces.push_back({poly[0], poly[k], poly[k + 1]});
      }
    }
  }
  if (vertices.empty() || faces.empty()) {
    throw Error(ErrorKind::InvalidMesh, path.string() + ": empty mesh");
  }
  return TriMesh(std::move(vertices), std::move(faces));
}

TriMesh load_mesh(const std::filesystem::path& path) {
  const std::string ext = lower_ext(path);
  if (ext == ".obj") return load_obj(path);
  if (ext == ".ply") return load_ply(path);
  throw Error(ErrorKind::Parse, "unsupported mesh extension '" + ext + "' for " + path.string());
}

void save_obj(const TriMesh& mesh, const std::filesystem::path& path) {
  std::string out;
  out.reserve(mesh.num_vertices() * 64 + mesh.num_faces() * 24);
  for (const Vec3& p : mesh.vertices()) {
    out += "v ";
    append_number(out, p.x());
    out += ' ';
    append_number(out, p.y());
    out += ' ';
    append_number(out, p.z());
    out += '\n';
  }
  const bool normals = mesh.has_normals();
  if (normals) {
    for (const Vec3& n : mesh.normals()) {
      out += "vn ";
      append_number(out, n.x());
      out += ' ';
      append_number(out, n.y());
      out += ' ';
      append_number(out, n.z());
      out += '\n';
    }
  }
  for (const Face& f : mesh.faces()) {
    out += 'f';
    for (int idx : f) {
      const std::string s = std::to_string(idx + 1);
      out += ' ';
      out += s;
      if (normals) {
        out += "//";
        out += s;
      }
    }
    out += '\n';
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error(ErrorKind::Io, "cannot write " + path.string());
  file << out;
}

void save_ply(const TriMesh& mesh, const std::filesystem::path& path, bool binary) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error(ErrorKind::Io, "cannot write " + path.string());
  file << "ply\nformat " << (binary ? "binary_little_endian" : "ascii") << " 1.0\n"
       << "element vertex " << mesh.num_vertices() << "\n"
       << "property double x\nproperty double y\nproperty double z\n"
       << "element face " << mesh.num_faces() << "\n"
       << "property list uchar int vertex_indices\nend_header\n";
  if (binary) {
    for (const Vec3& p : mesh.vertices()) {
      const double xyz[3] = {p.x(), p.y(), p.z()};
      file.write(reinterpret_cast<const char*>(xyz), sizeof(xyz));
    }
    for (const Face& f : mesh.faces()) {
      const unsigned char n = 3;
      const std::int32_t idx[3] = {f[0], f[1], f[2]};
      file.write(reinterpret_cast<const char*>(&n), 1);
      file.write(reinterpret_cast<const char*>(idx), sizeof(idx));
    }
  } else {
    std::string out;
    for (const Vec3& p : mesh.vertices()) {
      append_number(out, p.x());
      out += ' ';
      append_number(out, p.y());
      out += ' ';
      append_number(out, p.z());
      out += '\n';
    }
    for (const Face& f : mesh.faces()) {
      out += "3 " + std::to_string(f[0]) + ' ' + std::to_string(f[1]) + ' ' + std::to_string(f[2]) + '\n';
    }
    file << out;
  }
}

void save_mesh(const TriMesh& mesh, const std::filesystem::path& path) {
  const std::string ext = lower_ext(path);
  if (ext == ".ply") return save_ply(mesh, path);
  save_obj(mesh, path);
}

}  // namespace bodyfit
