#pragma once

#include "bodyfit/mesh.hpp"

namespace bodyfit {

/// Weak-perspective camera: (u, v) = scale * (x, y) + translation.
///
/// The camera looks down -z, so a larger z is closer to the viewer. Pixel
/// (i, j) covers [i, i+1) x [j, j+1) and its center sits at (i + 0.5, j + 0.5).
struct WeakPerspectiveCamera {
  double scale = 1.0;  // pixels per meter
  Vec2 translation = Vec2::Zero();
  int width = 224;
  int height = 224;

  // Throws ErrorKind::InvalidArgument when scale <= 0 or the image is empty.
  void validate() const;

  Vec2 project(const Vec3& point) const { return scale * point.head<2>() + translation; }
  // Inverse of project() at a chosen depth.
  Vec3 unproject(const Vec2& pixel, double z) const {
    const Vec2 xy = (pixel - translation) / scale;
    return {xy.x(), xy.y(), z};
  }
  // Image-plane direction of a 3D direction (not normalized).
  Vec2 project_direction(const Vec3& dir) const { return scale * dir.head<2>(); }

  bool in_image(const Vec2& pixel) const {
    return pixel.x() >= 0.0 && pixel.y() >= 0.0 && pixel.x() < width && pixel.y() < height;
  }

  bool operator==(const WeakPerspectiveCamera&) const = default;
};

// Camera that fits the mesh's xy bounding box into the image with a margin
// (fraction of the image kept free on each side).
WeakPerspectiveCamera fit_camera(const TriMesh& mesh, int width, int height, double margin = 0.1);

}  // namespace bodyfit
