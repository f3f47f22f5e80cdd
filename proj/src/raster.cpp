#include "bodyfit/raster.hpp"

#include <cmath>
#include <limits>

namespace bodyfit {

std::size_t count_set(const Mask& mask) {
  std::size_t n = 0;
  for (auto v : mask.data()) n += v != 0;
  return n;
}

RasterMaps rasterize(const TriMesh& mesh, const WeakPerspectiveCamera& camera, double visibility_epsilon) {
  camera.validate();
  const int w = camera.width;
  const int h = camera.height;
  RasterMaps maps;
  maps.silhouette = Mask(w, h, 0);
  maps.depth.depth = Image<double>(w, h, -std::numeric_limits<double>::infinity());
  maps.depth.valid = Mask(w, h, 0);
  maps.face_id = Image<int>(w, h, -1);

  std::vector<Vec2> projected;
  projected.reserve(mesh.num_vertices());
  for (const Vec3& p : mesh.vertices()) projected.push_back(camera.project(p));

  Image<double>& zbuf = maps.depth.depth;
  const auto& v = mesh.vertices();
  for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
    const Face& tri = mesh.faces()[f];
    const std::array<Vec2, 3> p = {projected[tri[0]], projected[tri[1]], projected[tri[2]]};
    const std::array<double, 3> z = {v[tri[0]].z(), v[tri[1]].z(), v[tri[2]].z()};
    scan_triangle(p, z, w, h, [&](int x, int y, double depth) {
      // Strictly greater: on exact ties the earlier face keeps the pixel.
      if (depth > zbuf(x, y)) {
        zbuf(x, y) = depth;
        maps.face_id(x, y) = static_cast<int>(f);
      }
    });
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const bool covered = maps.face_id(x, y) >= 0;
      maps.silhouette(x, y) = covered;
      maps.depth.valid(x, y) = covered;
    }
  }

  maps.vertex_visibility.assign(mesh.num_vertices(), false);
  for (std::size_t i = 0; i < mesh.num_vertices(); ++i) {
    const Vec2& px = projected[i];
    if (!camera.in_image(px)) continue;
    const int x = static_cast<int>(std::floor(px.x()));
    const int y = static_cast<int>(std::floor(px.y()));
    // An uncovered pixel center means nothing lies in front of the vertex there.
    if (!maps.depth.valid(x, y)) {
      maps.vertex_visibility[i] = true;
      continue;
    }
    // Compare against the winning face's plane at the vertex's own image
    // position, not at the pixel center, so steep regions near the rim do
    // not lose their own vertices to sampling offset.
    const Face& f = mesh.faces()[static_cast<std::size_t>(maps.face_id(x, y))];
    const int vi = static_cast<int>(i);
    if (f[0] == vi || f[1] == vi || f[2] == vi) {
      maps.vertex_visibility[i] = true;
      continue;
    }
    const Vec2& a = projected[static_cast<std::size_t>(f[0])];
    const Vec2& b = projected[static_cast<std::size_t>(f[1])];
    const Vec2& c = projected[static_cast<std::size_t>(f[2])];
    const double area = (b - a).x() * (c - a).y() - (b - a).y() * (c - a).x();
    double front = zbuf(x, y);
    if (std::abs(area) > 1e-12) {
      const double wb = ((px - a).x() * (c - a).y() - (px - a).y() * (c - a).x()) / area;
      const double wc = ((b - a).x() * (px - a).y() - (b - a).y() * (px - a).x()) / area;
      front = (1.0 - wb - wc) * v[static_cast<std::size_t>(f[0])].z() + wb * v[static_cast<std::size_t>(f[1])].z() +
              wc * v[static_cast<std::size_t>(f[2])].z();
    }
    maps.vertex_visibility[i] = v[i].z() >= front - visibility_epsilon;
  }
  return maps;
}

std::vector<bool> orthographic_coverage(const TriMesh& mesh, const std::vector<Vec3>& directions, int resolution) {
  Vec3 lo = mesh.vertices().front();
  Vec3 hi = lo;
  for (const Vec3& p : mesh.vertices()) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const Vec3 center = 0.5 * (lo + hi);
  double radius = 0.0;
  for (const Vec3& p : mesh.vertices()) radius = std::max(radius, (p - center).norm());
  radius = std::max(radius * 1.001, 1e-12);

  std::vector<bool> seen(mesh.num_faces(), false);
  std::vector<Vec2> px(mesh.num_vertices());
  std::vector<double> depth(mesh.num_vertices());
  Image<double> zbuf(resolution, resolution);
  Image<int> owner(resolution, resolution);

  for (const Vec3& dir_in : directions) {
    const Vec3 d = dir_in.normalized();
    const Vec3 helper = std::abs(d.y()) < 0.9 ? Vec3::UnitY() : Vec3::UnitX();
    const Vec3 e1 = helper.cross(d).normalized();
    const Vec3 e2 = d.cross(e1);
    const double to_px = 0.5 * resolution / radius;
    for (std::size_t i = 0; i < mesh.num_vertices(); ++i) {
      const Vec3 q = mesh.vertices()[i] - center;
      // Image rows grow downward, so the up vector e2 is negated.
      px[i] = Vec2(0.5 * resolution + to_px * q.dot(e1), 0.5 * resolution - to_px * q.dot(e2));
      depth[i] = q.dot(d);
    }
    std::fill(zbuf.data().begin(), zbuf.data().end(), -std::numeric_limits<double>::infinity());
    std::fill(owner.data().begin(), owner.data().end(), -1);
    for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
      const Face& tri = mesh.faces()[f];
      scan_triangle({px[tri[0]], px[tri[1]], px[tri[2]]}, {depth[tri[0]], depth[tri[1]], depth[tri[2]]},
                    resolution, resolution, [&](int x, int y, double z) {
                      if (z > zbuf(x, y)) {
                        zbuf(x, y) = z;
                        owner(x, y) = static_cast<int>(f);
                      }
                    });
    }
    for (int id : owner.data()) {
      if (id >= 0) seen[id] = true;
    }
  }
  return seen;
}

}  // namespace bodyfit
