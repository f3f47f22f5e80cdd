#include "bodyfit/mesh.hpp"

#include <algorithm>
#include <string>

#include "bodyfit/error.hpp"

namespace bodyfit {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse: return "parse";
    case ErrorKind::InvalidMesh: return "invalid_mesh";
    case ErrorKind::IndexOutOfRange: return "index_out_of_range";
    case ErrorKind::IsolatedVertex: return "isolated_vertex";
    case ErrorKind::NoConstraints: return "no_constraints";
    case ErrorKind::Singular: return "singular";
    case ErrorKind::InvalidArgument: return "invalid_argument";
    case ErrorKind::SizeMismatch: return "size_mismatch";
    case ErrorKind::MissingJoint: return "missing_joint";
    case ErrorKind::DuplicateVertex: return "duplicate_vertex";
    case ErrorKind::Io: return "io";
    case ErrorKind::Config: return "config";
    case ErrorKind::Stage: return "stage";
  }
  return "unknown";
}

TriMesh::TriMesh(std::vector<Vec3> vertices, std::vector<Face> faces)
    : vertices_(std::move(vertices)), faces_(std::move(faces)) {
  if (vertices_.empty() || faces_.empty()) {
    throw Error(ErrorKind::InvalidMesh, "mesh must have at least one vertex and one face");
  }
  const int n = static_cast<int>(vertices_.size());
  for (std::size_t f = 0; f < faces_.size(); ++f) {
    const Face& tri = faces_[f];
    for (int idx : tri) {
      if (idx < 0 || idx >= n) {
        throw Error(ErrorKind::IndexOutOfRange,
                    "face " + std::to_string(f) + " references vertex " + std::to_string(idx) +
                        " but the mesh has " + std::to_string(n) + " vertices");
      }
    }
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2]) {
      throw Error(ErrorKind::InvalidMesh, "face " + std::to_string(f) + " repeats a vertex index");
    }
  }
}

const std::vector<Vec3>& TriMesh::normals() const {
  if (!normals_) throw Error(ErrorKind::InvalidMesh, "vertex normals have not been computed");
  return *normals_;
}

TriMesh TriMesh::with_vertices(std::vector<Vec3> vertices) const {
  if (vertices.size() != vertices_.size()) {
    throw Error(ErrorKind::SizeMismatch, "with_vertices: vertex count changed");
  }
  TriMesh out = *this;
  out.vertices_ = std::move(vertices);
  out.normals_.reset();
  return out;
}

Vec3 face_normal(const TriMesh& mesh, std::size_t face) {
  const Face& f = mesh.faces()[face];
  const auto& v = mesh.vertices();
  Vec3 n = (v[f[1]] - v[f[0]]).cross(v[f[2]] - v[f[0]]);
  const double len = n.norm();
  return len > 0.0 ? Vec3(n / len) : Vec3::Zero();
}

TriMesh compute_vertex_normals(const TriMesh& mesh) {
  const auto& v = mesh.vertices();
  std::vector<Vec3> acc(v.size(), Vec3::Zero());
  for (const Face& f : mesh.faces()) {
    // The unnormalized cross product is twice the area times the unit normal.
    const Vec3 n = (v[f[1]] - v[f[0]]).cross(v[f[2]] - v[f[0]]);
    for (int idx : f) acc[idx] += n;
  }
  for (Vec3& n : acc) {
    const double len = n.norm();
    n = len > 0.0 ? Vec3(n / len) : Vec3::UnitZ();
  }
  TriMesh out = mesh;
  out.normals_ = std::move(acc);
  return out;
}

std::vector<std::pair<int, int>> unique_edges(const TriMesh& mesh) {
  std::vector<std::pair<int, int>> edges;
  edges.reserve(mesh.num_faces() * 3);
  for (const Face& f : mesh.faces()) {
    for (int k = 0; k < 3; ++k) {
      int a = f[k];
      int b = f[(k + 1) % 3];
      if (a > b) std::swap(a, b);
      edges.emplace_back(a, b);
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

TriMesh subdivide_midpoint(const TriMesh& mesh) {
  const auto edges = unique_edges(mesh);
  const int base = static_cast<int>(mesh.num_vertices());

  std::vector<Vec3> vertices = mesh.vertices();
  vertices.reserve(mesh.num_vertices() + edges.size());
  for (const auto& [a, b] : edges) {
    vertices.push_back(0.5 * (mesh.vertices()[a] + mesh.vertices()[b]));
  }

  auto midpoint = [&](int a, int b) {
    if (a > b) std::swap(a, b);
    const auto it = std::lower_bound(edges.begin(), edges.end(), std::make_pair(a, b));
    return base + static_cast<int>(it - edges.begin());
  };

  std::vector<Face> faces;
  faces.reserve(mesh.num_faces() * 4);
  for (const Face& f : mesh.faces()) {
    const int m01 = midpoint(f[0], f[1]);
    const int m12 = midpoint(f[1], f[2]);
    const int m20 = midpoint(f[2], f[0]);
    faces.push_back({f[0], m01, m20});
    faces.push_back({f[1], m12, m01});
    faces.push_back({f[2], m20, m12});
    faces.push_back({m01, m12, m20});
  }
  return TriMesh(std::move(vertices), std::move(faces));
}

TriMesh transformed(const TriMesh& mesh, const Eigen::Matrix3d& linear, const Vec3& offset) {
  std::vector<Vec3> v;
  v.reserve(mesh.num_vertices());
  for (const Vec3& p : mesh.vertices()) v.push_back(linear * p + offset);
  return mesh.with_vertices(std::move(v));
}

TriMesh translated(const TriMesh& mesh, const Vec3& offset) {
  return transformed(mesh, Eigen::Matrix3d::Identity(), offset);
}

TriMesh merge(const TriMesh& a, const TriMesh& b) {
  std::vector<Vec3> v = a.vertices();
  v.insert(v.end(), b.vertices().begin(), b.vertices().end());
  std::vector<Face> f = a.faces();
  const int shift = static_cast<int>(a.num_vertices());
  for (Face tri : b.faces()) {
    for (int& idx : tri) idx += shift;
    f.push_back(tri);
  }
  return TriMesh(std::move(v), std::move(f));
}

Vec3 centroid(const TriMesh& mesh) {
  Vec3 c = Vec3::Zero();
  for (const Vec3& p : mesh.vertices()) c += p;
  return c / static_cast<double>(mesh.num_vertices());
}

}  // namespace bodyfit
