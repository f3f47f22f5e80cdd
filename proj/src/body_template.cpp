#include "bodyfit/body_template.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

namespace bodyfit {
namespace {

struct Capsule {
  Vec3 a;
  Vec3 b;
  double radius;
};

const std::vector<Capsule>& mannequin() {
  static const std::vector<Capsule> parts = [] {
    std::vector<Capsule> p = {
        {{0, -0.02, 0}, {0, 0.32, 0}, 0.15},       // torso
        {{0, 0.30, 0}, {0, 0.46, 0}, 0.055},       // neck
        {{0, 0.52, 0.01}, {0, 0.63, 0.0}, 0.095},  // head
        {{-0.2, 0.36, 0}, {0.2, 0.36, 0}, 0.07},   // shoulder girdle
        {{-0.10, -0.06, 0}, {0.10, -0.06, 0}, 0.12},  // hips
    };
    for (double s : {1.0, -1.0}) {
      p.push_back({{s * 0.20, 0.36, 0}, {s * 0.48, 0.36, 0}, 0.052});     // upper arm
      p.push_back({{s * 0.48, 0.36, 0}, {s * 0.72, 0.36, 0}, 0.042});     // forearm
      p.push_back({{s * 0.72, 0.36, 0}, {s * 0.82, 0.36, 0}, 0.036});     // hand
      p.push_back({{s * 0.10, -0.10, 0}, {s * 0.12, -0.50, 0}, 0.078});   // thigh
      p.push_back({{s * 0.12, -0.50, 0}, {s * 0.13, -0.88, 0}, 0.055});   // shin
      p.push_back({{s * 0.13, -0.90, 0.0}, {s * 0.13, -0.91, 0.12}, 0.04});  // foot
    }
    return p;
  }();
  return parts;
}

double capsule_sdf(const Capsule& c, const Vec3& p) {
  const Vec3 ab = c.b - c.a;
  const double t = std::clamp((p - c.a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
  return (p - (c.a + t * ab)).norm() - c.radius;
}

// Polynomial smooth minimum; never exceeds min(a, b), so the blended field
// stays a lower bound on the distance and sphere tracing cannot overshoot.
double smooth_min(double a, double b, double k) {
  const double h = std::max(k - std::abs(a - b), 0.0) / k;
  return std::min(a, b) - h * h * k * 0.25;
}

double body_sdf(const Vec3& p) {
  double d = 1e9;
  for (const Capsule& c : mannequin()) d = smooth_min(d, capsule_sdf(c, p), 0.04);
  return d;
}

const Vec3 kRayCenter(0.0, 0.30, 0.0);

// Outermost surface crossing along the ray, marching inward from far away.
double outer_radius(const Vec3& dir) {
  double t = 2.0;
  for (int i = 0; i < 4000; ++i) {
    const double d = body_sdf(kRayCenter + t * dir);
    if (d < 1e-7) break;
    t -= std::max(d, 1e-5);
    if (t <= 0.0) return 1e-3;
  }
  return t;
}

// Inverse-CDF sampling of `count` interior angles on (0, range) whose density
// follows `density`, so detail lands where the mannequin is thin.
template <typename Density>
std::vector<double> warped_angles(int count, double range, bool open_interval, Density density) {
  const int fine = 20000;
  std::vector<double> cdf(fine + 1, 0.0);
  for (int i = 0; i < fine; ++i) {
    const double a = range * (i + 0.5) / fine;
    cdf[i + 1] = cdf[i] + density(a);
  }
  std::vector<double> out;
  for (int k = 0; k < count; ++k) {
    const double u = open_interval ? (k + 1.0) / (count + 1.0) : static_cast<double>(k) / count;
    const double target = u * cdf[fine];
    const auto it = std::lower_bound(cdf.begin(), cdf.end(), target);
    const int i = std::max(1, static_cast<int>(it - cdf.begin()));
    const double frac = (target - cdf[i - 1]) / std::max(cdf[i] - cdf[i - 1], 1e-300);
    out.push_back(range * (i - 1 + frac) / fine);
  }
  return out;
}

double bump(double x, double center, double width) {
  const double d = (x - center) / width;
  return std::exp(-d * d);
}

}  // namespace

std::array<Vec3, kNumJoints> body_template_joint_centers() {
  return {Vec3(0, 0.58, 0),     Vec3(0, 0.02, 0),      Vec3(0.2, 0.36, 0),   Vec3(-0.2, 0.36, 0),
          Vec3(0.48, 0.36, 0),  Vec3(-0.48, 0.36, 0),  Vec3(0.12, -0.5, 0),  Vec3(-0.12, -0.5, 0),
          Vec3(0.13, -0.88, 0), Vec3(-0.13, -0.88, 0)};
}

BodyTemplate make_body_template() {
  constexpr double pi = std::numbers::pi;
  // Polar angle from the +x axis (the arms), azimuth around x with 0 at -y.
  const double leg_theta = std::acos(0.12 / std::hypot(0.12, 1.0));
  const auto thetas = warped_angles(kTemplateRings, pi, true, [&](double th) {
    return 1.0 + 6.0 * bump(th, 0.0, 0.25) + 6.0 * bump(th, pi, 0.25) + 3.0 * bump(th, leg_theta, 0.12) +
           3.0 * bump(th, pi - leg_theta, 0.12);
  });
  const auto phis = warped_angles(kTemplateSegments, 2.0 * pi, false, [&](double ph) {
    return 1.0 + 3.0 * bump(ph, 0.0, 0.2) + 3.0 * bump(ph, 2.0 * pi, 0.2) + 1.5 * bump(ph, pi, 0.3);
  });

  auto direction = [](double theta, double phi) {
    return Vec3(std::cos(theta), -std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi));
  };

  std::vector<Vec3> v;
  v.reserve(2 + kTemplateRings * kTemplateSegments);
  v.push_back(kRayCenter + outer_radius(Vec3::UnitX()) * Vec3::UnitX());
  for (double th : thetas) {
    for (double ph : phis) {
      const Vec3 d = direction(th, ph);
      v.push_back(kRayCenter + outer_radius(d) * d);
    }
  }
  v.push_back(kRayCenter - outer_radius(-Vec3::UnitX()) * Vec3::UnitX());

  const int segs = kTemplateSegments;
  const int rings = kTemplateRings;
  const int south = static_cast<int>(v.size()) - 1;
  auto at = [&](int r, int s) { return 1 + r * segs + (s % segs); };
  std::vector<Face> f;
  f.reserve(2 * rings * segs);
  // Increasing phi turns from -y toward +z, clockwise seen from +x, so the
  // faces are flipped below to wind counter-clockwise from outside.
  for (int s = 0; s < segs; ++s) f.push_back({0, at(0, s), at(0, s + 1)});
  for (int r = 0; r + 1 < rings; ++r) {
    for (int s = 0; s < segs; ++s) {
      f.push_back({at(r, s), at(r + 1, s), at(r + 1, s + 1)});
      f.push_back({at(r, s), at(r + 1, s + 1), at(r, s + 1)});
    }
  }
  for (int s = 0; s < segs; ++s) f.push_back({south, at(rings - 1, s + 1), at(rings - 1, s)});
  for (Face& tri : f) std::swap(tri[1], tri[2]);

  BodyTemplate out{TriMesh(std::move(v), std::move(f)), {}};
  const auto& verts = out.mesh.vertices();

  // Joint groups: the vertices nearest to each skeleton joint, claimed in
  // joint order so the groups stay disjoint.
  constexpr std::size_t kGroupSize = 18;
  std::set<int> used;
  const auto centers = body_template_joint_centers();
  for (std::size_t j = 0; j < kNumJoints; ++j) {
    std::vector<std::pair<double, int>> order;
    for (std::size_t i = 0; i < verts.size(); ++i) {
      order.emplace_back((verts[i] - centers[j]).squaredNorm(), static_cast<int>(i));
    }
    std::sort(order.begin(), order.end());
    JointHandleGroup g{std::string(kJointNames[j]), {}};
    for (const auto& [_, idx] : order) {
      if (g.vertex_indices.size() == kGroupSize) break;
      if (used.insert(idx).second) g.vertex_indices.push_back(idx);
    }
    std::sort(g.vertex_indices.begin(), g.vertex_indices.end());
    out.metadata.joints.push_back(std::move(g));
  }

  for (std::size_t i = 0; i < verts.size(); ++i) {
    const Vec3& p = verts[i];
    const bool face = p.y() > 0.50 && p.z() > 0.04;
    const bool fingers = std::abs(p.x()) > 0.74;
    const bool toes = p.y() < -0.86 && p.z() > 0.05;
    if (face || fingers || toes) out.metadata.excluded.push_back(static_cast<int>(i));
  }
  return out;
}

}  // namespace bodyfit
