#include "bodyfit/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "bodyfit/error.hpp"
#include "bodyfit/random.hpp"
#include "bodyfit/raster.hpp"

namespace bodyfit {

ViewSchedule ViewSchedule::default_grid(int sample_count, std::uint64_t seed) {
  ViewSchedule s;
  for (int a = 0; a <= 340; a += 20) s.azimuths.push_back(a);
  for (int e = -10; e <= 10; e += 10) s.elevations.push_back(e);
  s.sample_count = sample_count;
  s.seed = seed;
  return s;
}

std::vector<std::pair<double, double>> ViewSchedule::candidates() const {
  std::vector<std::pair<double, double>> out;
  out.reserve(azimuths.size() * elevations.size());
  for (double a : azimuths) {
    for (double e : elevations) out.emplace_back(a, e);
  }
  return out;
}

std::vector<std::pair<double, double>> sample_views(const ViewSchedule& schedule) {
  auto pool = schedule.candidates();
  if (schedule.sample_count < 0 || static_cast<std::size_t>(schedule.sample_count) > pool.size()) {
    throw Error(ErrorKind::InvalidArgument, "sample_views: requested " + std::to_string(schedule.sample_count) +
                                                " views from " + std::to_string(pool.size()) + " candidates");
  }
  Rng rng(schedule.seed);
  const auto n = static_cast<std::size_t>(schedule.sample_count);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + rng.index(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(n);
  return pool;
}

Eigen::Matrix3d view_rotation(double azimuth_deg, double elevation_deg) {
  const double deg = std::numbers::pi / 180.0;
  const Eigen::Matrix3d yaw = Eigen::AngleAxisd(-azimuth_deg * deg, Vec3::UnitY()).toRotationMatrix();
  const Eigen::Matrix3d pitch = Eigen::AngleAxisd(elevation_deg * deg, Vec3::UnitX()).toRotationMatrix();
  return pitch * yaw;
}

TriMesh remove_inner_surface(const TriMesh& mesh, int resolution) {
  const std::vector<Vec3> dirs(kAxisDirections.begin(), kAxisDirections.end());
  const std::vector<bool> seen = orthographic_coverage(mesh, dirs, resolution);

  std::vector<int> remap(mesh.num_vertices(), -1);
  std::vector<Face> kept;
  for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
    if (!seen[f]) continue;
    kept.push_back(mesh.faces()[f]);
    for (int v : mesh.faces()[f]) remap[static_cast<std::size_t>(v)] = 0;
  }
  if (kept.empty()) throw Error(ErrorKind::InvalidMesh, "remove_inner_surface: every face was removed");

  std::vector<Vec3> verts;
  for (std::size_t v = 0; v < remap.size(); ++v) {
    if (remap[v] < 0) continue;
    remap[v] = static_cast<int>(verts.size());
    verts.push_back(mesh.vertices()[v]);
  }
  for (Face& f : kept) {
    for (int& v : f) v = remap[static_cast<std::size_t>(v)];
  }
  return TriMesh(std::move(verts), std::move(kept));
}

Image<double> resize_bilinear(const Image<double>& image, int width, int height) {
  Image<double> out(width, height, 0.0);
  const double sx = static_cast<double>(image.width()) / width;
  const double sy = static_cast<double>(image.height()) / height;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, image.width() - 1.0);
      const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, image.height() - 1.0);
      const int x0 = static_cast<int>(fx);
      const int y0 = static_cast<int>(fy);
      const int x1 = std::min(x0 + 1, image.width() - 1);
      const int y1 = std::min(y0 + 1, image.height() - 1);
      const double ax = fx - x0;
      const double ay = fy - y0;
      out(x, y) = (1 - ay) * ((1 - ax) * image(x0, y0) + ax * image(x1, y0)) +
                  ay * ((1 - ax) * image(x0, y1) + ax * image(x1, y1));
    }
  }
  return out;
}

namespace {

struct Frame {
  Image<double> image;
  WeakPerspectiveCamera camera;
  bool resized = false;
};

Frame normalize_frame(const Image<double>& image, const WeakPerspectiveCamera& camera) {
  if (image.width() != camera.width || image.height() != camera.height) {
    throw Error(ErrorKind::SizeMismatch, "export_patches: image size differs from camera image size");
  }
  if (image.width() == kPatchImageSize && image.height() == kPatchImageSize) return {image, camera, false};
  // Non-uniform resampling keeps pixel centers aligned per axis; the camera
  // scale follows the horizontal factor.
  const double fx = static_cast<double>(kPatchImageSize) / image.width();
  const double fy = static_cast<double>(kPatchImageSize) / image.height();
  WeakPerspectiveCamera cam = camera;
  cam.scale *= fx;
  cam.translation = Vec2(camera.translation.x() * fx, camera.translation.y() * fy);
  cam.width = kPatchImageSize;
  cam.height = kPatchImageSize;
  return {resize_bilinear(image, kPatchImageSize, kPatchImageSize), cam, true};
}

Patch crop(const Image<double>& image, const Vec2& center, int size) {
  Patch p;
  p.pixels = Image<double>(size, size, 0.0);
  p.center = center;
  p.off_image = !(center.x() >= 0.0 && center.y() >= 0.0 && center.x() < image.width() && center.y() < image.height());
  if (p.off_image) return p;
  const int x0 = static_cast<int>(std::floor(center.x())) - size / 2;
  const int y0 = static_cast<int>(std::floor(center.y())) - size / 2;
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      if (image.contains(x0 + x, y0 + y)) p.pixels(x, y) = image(x0 + x, y0 + y);
    }
  }
  return p;
}

}  // namespace

PatchSet export_joint_patches(const Image<double>& image, const TriMesh& mesh, const WeakPerspectiveCamera& camera,
                              const std::vector<JointHandleGroup>& groups, const Joints2D& annotations) {
  const Frame frame = normalize_frame(image, camera);
  const double fx = static_cast<double>(frame.camera.width) / camera.width;
  const double fy = static_cast<double>(frame.camera.height) / camera.height;
  const std::vector<Vec3> centers = joint_positions(mesh, groups);

  PatchSet set{PatchLevel::Joint, {}, frame.resized};
  for (std::size_t g = 0; g < groups.size(); ++g) {
    Patch p = crop(frame.image, frame.camera.project(centers[g]), kJointPatchSize);
    const int j = joint_index(groups[g].joint_name);
    if (j >= 0 && annotations.valid[static_cast<std::size_t>(j)]) {
      const Vec2& a = annotations.points[static_cast<std::size_t>(j)];
      p.joint_motion = Vec2(a.x() * fx, a.y() * fy) - p.center;
      p.label_valid = true;
    }
    set.patches.push_back(std::move(p));
  }
  return set;
}

PatchSet export_anchor_patches(const Image<double>& image, const TriMesh& mesh, const WeakPerspectiveCamera& camera,
                               const std::vector<AnchorHandle>& anchors) {
  const Frame frame = normalize_frame(image, camera);
  PatchSet set{PatchLevel::Anchor, {}, frame.resized};
  for (const AnchorHandle& a : anchors) {
    if (a.vertex_index < 0 || static_cast<std::size_t>(a.vertex_index) >= mesh.num_vertices()) {
      throw Error(ErrorKind::IndexOutOfRange, "export_patches: anchor vertex out of range");
    }
    Patch p = crop(frame.image, frame.camera.project(mesh.vertices()[static_cast<std::size_t>(a.vertex_index)]),
                   kAnchorPatchSize);
    p.anchor_movement = a.movement;
    p.label_valid = true;
    set.patches.push_back(std::move(p));
  }
  return set;
}

}  // namespace bodyfit
