#pragma once

#include <array>
#include <vector>

#include "bodyfit/camera.hpp"
#include "bodyfit/image.hpp"
#include "bodyfit/mesh.hpp"

namespace bodyfit {

// Depth slack for the vertex visibility test, in meters.
inline constexpr double kVisibilityEpsilon = 0.01;

struct RasterMaps {
  Mask silhouette;
  DepthMap depth;
  Image<int> face_id;  // -1 where uncovered
  std::vector<bool> vertex_visibility;
};

/// Z-buffered fill of every face (no culling) with pixel-center sampling and
/// the top-left rule, so shared edges are covered exactly once. A vertex is
/// visible when its pixel is uncovered, when it belongs to the face that won
/// the pixel, or when its z is within `visibility_epsilon` of that face's
/// plane evaluated at the vertex's projected position.
RasterMaps rasterize(const TriMesh& mesh, const WeakPerspectiveCamera& camera,
                     double visibility_epsilon = kVisibilityEpsilon);

/// Low-level triangle fill on pixel-space coordinates. `depth` holds the
/// value compared in the z-buffer (larger wins). Calls visit(x, y, z) for
/// every covered pixel center.
template <typename Visit>
void scan_triangle(const std::array<Vec2, 3>& p, const std::array<double, 3>& depth, int width, int height,
                   Visit&& visit);

inline const std::array<Vec3, 6> kAxisDirections = {Vec3::UnitX(),  -Vec3::UnitX(), Vec3::UnitY(),
                                                    -Vec3::UnitY(), Vec3::UnitZ(),  -Vec3::UnitZ()};

/// Per-face "seen" flags from orthographic renders looking along -d for every
/// d in `directions`; a face is seen if it wins the z-buffer at one or more
/// pixel centers in at least one render. All renders share one square frame
/// fitted to the mesh's bounding sphere.
std::vector<bool> orthographic_coverage(const TriMesh& mesh, const std::vector<Vec3>& directions,
                                        int resolution = 512);

}  // namespace bodyfit

#include "bodyfit/raster_impl.hpp"
