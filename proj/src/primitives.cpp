#include "bodyfit/primitives.hpp"

#include <cmath>
#include <map>
#include <numbers>

#include "bodyfit/error.hpp"

namespace bodyfit {

TriMesh make_octahedron(double radius) {
  std::vector<Vec3> v = {{radius, 0, 0}, {-radius, 0, 0}, {0, radius, 0},
                         {0, -radius, 0}, {0, 0, radius}, {0, 0, -radius}};
  std::vector<Face> f = {{0, 2, 4}, {2, 1, 4}, {1, 3, 4}, {3, 0, 4},
                         {2, 0, 5}, {1, 2, 5}, {3, 1, 5}, {0, 3, 5}};
  return TriMesh(std::move(v), std::move(f));
}

TriMesh make_icosphere(int level, double radius) {
  if (level < 0) throw Error(ErrorKind::InvalidArgument, "icosphere level must be >= 0");
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                         {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  std::vector<Face> f = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                         {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                         {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                         {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (Vec3& p : v) p.normalize();
  for (int l = 0; l < level; ++l) {
    std::map<std::pair<int, int>, int> cache;
    auto mid = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = cache.find(key);
      if (it != cache.end()) return it->second;
      v.push_back((v[a] + v[b]).normalized());
      const int idx = static_cast<int>(v.size()) - 1;
      cache.emplace(key, idx);
      return idx;
    };
    std::vector<Face> next;
    next.reserve(f.size() * 4);
    for (const Face& tri : f) {
      const int a = mid(tri[0], tri[1]);
      const int b = mid(tri[1], tri[2]);
      const int c = mid(tri[2], tri[0]);
      next.push_back({tri[0], a, c});
      next.push_back({tri[1], b, a});
      next.push_back({tri[2], c, b});
      next.push_back({a, b, c});
    }
    f = std::move(next);
  }
  for (Vec3& p : v) p *= radius;
  return TriMesh(std::move(v), std::move(f));
}

TriMesh make_uv_sphere(int rings, int segments, double radius) {
  if (rings < 1 || segments < 3) throw Error(ErrorKind::InvalidArgument, "uv sphere needs rings >= 1, segments >= 3");
  std::vector<Vec3> v;
  v.reserve(2 + rings * segments);
  v.emplace_back(0, radius, 0);
  for (int r = 0; r < rings; ++r) {
    const double theta = std::numbers::pi * (r + 1) / (rings + 1);
    for (int s = 0; s < segments; ++s) {
      const double phi = 2.0 * std::numbers::pi * s / segments;
      v.emplace_back(radius * std::sin(theta) * std::sin(phi), radius * std::cos(theta),
                     radius * std::sin(theta) * std::cos(phi));
    }
  }
  v.emplace_back(0, -radius, 0);
  const int south = static_cast<int>(v.size()) - 1;
  auto at = [&](int r, int s) { return 1 + r * segments + (s % segments); };

  std::vector<Face> f;
  f.reserve(2 * rings * segments);
  for (int s = 0; s < segments; ++s) f.push_back({0, at(0, s), at(0, s + 1)});
  for (int r = 0; r + 1 < rings; ++r) {
    for (int s = 0; s < segments; ++s) {
      f.push_back({at(r, s), at(r + 1, s), at(r + 1, s + 1)});
      f.push_back({at(r, s), at(r + 1, s + 1), at(r, s + 1)});
    }
  }
  for (int s = 0; s < segments; ++s) f.push_back({south, at(rings - 1, s + 1), at(rings - 1, s)});
  return TriMesh(std::move(v), std::move(f));
}

TriMesh make_cube(double half_extent, const Vec3& center) {
  const double h = half_extent;
  std::vector<Vec3> v;
  for (int i = 0; i < 8; ++i) {
    v.push_back(center + Vec3((i & 1) ? h : -h, (i & 2) ? h : -h, (i & 4) ? h : -h));
  }
  std::vector<Face> f = {{0, 2, 3}, {0, 3, 1},   // -z
                         {4, 5, 7}, {4, 7, 6},   // +z
                         {0, 1, 5}, {0, 5, 4},   // -y
                         {2, 6, 7}, {2, 7, 3},   // +y
                         {0, 4, 6}, {0, 6, 2},   // -x
                         {1, 3, 7}, {1, 7, 5}};  // +x
  return TriMesh(std::move(v), std::move(f));
}

TriMesh make_grid(int nx, int ny, double width, double height) {
  if (nx < 2 || ny < 2) throw Error(ErrorKind::InvalidArgument, "grid needs at least 2x2 vertices");
  std::vector<Vec3> v;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) v.emplace_back(width * i / (nx - 1), height * j / (ny - 1), 0.0);
  }
  std::vector<Face> f;
  for (int j = 0; j + 1 < ny; ++j) {
    for (int i = 0; i + 1 < nx; ++i) {
      const int a = j * nx + i;
      f.push_back({a, a + 1, a + nx + 1});
      f.push_back({a, a + nx + 1, a + nx});
    }
  }
  return TriMesh(std::move(v), std::move(f));
}

}  // namespace bodyfit
