#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace bodyfit {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Face = std::array<int, 3>;

/// Indexed triangle mesh. Positions are in meters, faces wound counter-clockwise.
///
/// The constructor validates the topology invariants (non-empty, indices in
/// range, no repeated index within a face). Normals are an optional cache that
/// compute_vertex_normals() fills; any edit through with_vertices() drops it.
class TriMesh {
 public:
  TriMesh(std::vector<Vec3> vertices, std::vector<Face> faces);

  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::vector<Face>& faces() const { return faces_; }
  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_faces() const { return faces_.size(); }

  bool has_normals() const { return normals_.has_value(); }
  // Throws if the cache has not been filled.
  const std::vector<Vec3>& normals() const;

  // Same topology, new positions. The normal cache is not carried over.
  TriMesh with_vertices(std::vector<Vec3> vertices) const;

 private:
  friend TriMesh compute_vertex_normals(const TriMesh& mesh);

  std::vector<Vec3> vertices_;
  std::vector<Face> faces_;
  std::optional<std::vector<Vec3>> normals_;
};

/// Area-weighted vertex normals. Degenerate faces contribute nothing; a vertex
/// with no non-degenerate incident face gets (0, 0, 1).
[[nodiscard]] TriMesh compute_vertex_normals(const TriMesh& mesh);

/// Unit normal of one face, or zero for a degenerate face.
Vec3 face_normal(const TriMesh& mesh, std::size_t face);

/// Sorted unique undirected edges (a < b).
std::vector<std::pair<int, int>> unique_edges(const TriMesh& mesh);

/// Linear 1-to-4 split through edge midpoints. Original vertices keep their
/// indices; midpoint vertices follow in unique_edges() order.
TriMesh subdivide_midpoint(const TriMesh& mesh);

/// Rigid/affine helpers used by the tooling and tests.
TriMesh transformed(const TriMesh& mesh, const Eigen::Matrix3d& linear, const Vec3& offset);
TriMesh translated(const TriMesh& mesh, const Vec3& offset);

/// Concatenates two meshes into one (faces of b reindexed).
TriMesh merge(const TriMesh& a, const TriMesh& b);

Vec3 centroid(const TriMesh& mesh);

}  // namespace bodyfit
