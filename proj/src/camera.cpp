#include "bodyfit/camera.hpp"

#include <algorithm>

#include "bodyfit/error.hpp"

namespace bodyfit {

void WeakPerspectiveCamera::validate() const {
  if (!(scale > 0.0)) throw Error(ErrorKind::InvalidArgument, "camera scale must be positive");
  if (width <= 0 || height <= 0) throw Error(ErrorKind::InvalidArgument, "camera image size must be positive");
}

WeakPerspectiveCamera fit_camera(const TriMesh& mesh, int width, int height, double margin) {
  Vec2 lo = mesh.vertices().front().head<2>();
  Vec2 hi = lo;
  for (const Vec3& p : mesh.vertices()) {
    lo = lo.cwiseMin(p.head<2>());
    hi = hi.cwiseMax(p.head<2>());
  }
  const Vec2 extent = (hi - lo).cwiseMax(Vec2::Constant(1e-9));
  const double usable = 1.0 - 2.0 * margin;
  WeakPerspectiveCamera cam;
  cam.width = width;
  cam.height = height;
  cam.scale = std::min(usable * width / extent.x(), usable * height / extent.y());
  const Vec2 center = 0.5 * (lo + hi);
  cam.translation = Vec2(0.5 * width, 0.5 * height) - cam.scale * center;
  return cam;
}

}  // namespace bodyfit
