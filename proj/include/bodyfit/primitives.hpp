#pragma once

#include "bodyfit/mesh.hpp"

namespace bodyfit {

// Closed meshes are wound counter-clockwise seen from outside.

TriMesh make_octahedron(double radius = 1.0);
// 20 * 4^level faces, vertices on the sphere of the given radius.
TriMesh make_icosphere(int level, double radius = 1.0);
// Latitude/longitude sphere: 2 poles + rings * segments vertices,
// 2 * rings * segments faces. Poles on +/- y.
TriMesh make_uv_sphere(int rings, int segments, double radius = 1.0);
// Axis-aligned cube, 8 vertices / 12 faces.
TriMesh make_cube(double half_extent = 0.5, const Vec3& center = Vec3::Zero());
// Open planar grid in z = 0 spanning [0, width] x [0, height] with nx * ny vertices.
TriMesh make_grid(int nx, int ny, double width, double height);

}  // namespace bodyfit
