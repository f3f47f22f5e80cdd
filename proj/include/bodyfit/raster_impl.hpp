#pragma once

#include <algorithm>
#include <cmath>

namespace bodyfit {
namespace detail {

// Top-left rule. Triangles are reordered to positive edge-function area,
// which is clockwise on the y-down pixel grid: there a top edge runs toward
// +x and a left edge runs toward -y.
inline bool is_top_left(const Vec2& a, const Vec2& b) {
  const Vec2 e = b - a;
  return (e.y() == 0.0 && e.x() > 0.0) || e.y() < 0.0;
}

}  // namespace detail

template <typename Visit>
void scan_triangle(const std::array<Vec2, 3>& pts, const std::array<double, 3>& depth, int width, int height,
                   Visit&& visit) {
  std::array<Vec2, 3> p = pts;
  std::array<double, 3> z = depth;
  auto edge = [](const Vec2& a, const Vec2& b, const Vec2& c) {
    return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
  };
  double area = edge(p[0], p[1], p[2]);
  if (!(std::abs(area) > 0.0)) return;
  if (area < 0.0) {
    std::swap(p[1], p[2]);
    std::swap(z[1], z[2]);
    area = -area;
  }
  const double min_x = std::min({p[0].x(), p[1].x(), p[2].x()});
  const double max_x = std::max({p[0].x(), p[1].x(), p[2].x()});
  const double min_y = std::min({p[0].y(), p[1].y(), p[2].y()});
  const double max_y = std::max({p[0].y(), p[1].y(), p[2].y()});
  const int x0 = std::max(0, static_cast<int>(std::floor(min_x - 0.5)));
  const int x1 = std::min(width - 1, static_cast<int>(std::ceil(max_x - 0.5)));
  const int y0 = std::max(0, static_cast<int>(std::floor(min_y - 0.5)));
  const int y1 = std::min(height - 1, static_cast<int>(std::ceil(max_y - 0.5)));
  if (x0 > x1 || y0 > y1) return;

  // Edge k is opposite vertex k.
  const bool owns[3] = {detail::is_top_left(p[1], p[2]), detail::is_top_left(p[2], p[0]),
                        detail::is_top_left(p[0], p[1])};
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const Vec2 c(x + 0.5, y + 0.5);
      const double w0 = edge(p[1], p[2], c);
      const double w1 = edge(p[2], p[0], c);
      const double w2 = edge(p[0], p[1], c);
      if (w0 < 0.0 || w1 < 0.0 || w2 < 0.0) continue;
      if ((w0 == 0.0 && !owns[0]) || (w1 == 0.0 && !owns[1]) || (w2 == 0.0 && !owns[2])) continue;
      visit(x, y, (w0 * z[0] + w1 * z[1] + w2 * z[2]) / area);
    }
  }
}

}  // namespace bodyfit
