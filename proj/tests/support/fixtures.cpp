#include "support/fixtures.hpp"

#include <atomic>
#include <unistd.h>

#include "bodyfit/annotation.hpp"
#include "bodyfit/deform.hpp"
#include "bodyfit/eval.hpp"
#include "bodyfit/image_io.hpp"
#include "bodyfit/mesh_io.hpp"
#include "bodyfit/primitives.hpp"
#include "bodyfit/random.hpp"
#include "bodyfit/raster.hpp"

namespace fixtures {

Mask disc_mask(int width, int height, const Vec2& center, double radius) {
  Mask m(width, height, 0);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      if ((Vec2(x + 0.5, y + 0.5) - center).squaredNorm() < radius * radius) m(x, y) = 1;
    }
  }
  return m;
}

std::filesystem::path scratch_dir(const std::string& name) {
  static std::atomic<int> counter{0};
  const auto dir = std::filesystem::temp_directory_path() /
                   ("bodyfit_" + name + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

Eigen::MatrixXd dense_laplacian(std::size_t n, const std::vector<std::pair<int, int>>& edges) {
  Eigen::MatrixXd adj = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (const auto& [a, b] : edges) {
    adj(a, b) = 1.0;
    adj(b, a) = 1.0;
  }
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(adj.rows(), adj.cols());
  for (Eigen::Index i = 0; i < adj.rows(); ++i) {
    const double deg = adj.row(i).sum();
    lap.row(i) = adj.row(i) / deg;
    lap(i, i) = -1.0;
  }
  return lap;
}

const BodyTemplate& body_template() {
  static const BodyTemplate t = make_body_template();
  return t;
}

PoseCase make_pose_case(const WeakPerspectiveCamera& camera, std::uint64_t seed) {
  const BodyTemplate& t = body_template();
  Rng rng(seed);
  std::vector<HandleConstraint> cons;
  for (const auto& g : t.metadata.joints) {
    const Vec3 off(rng.uniform(-0.06, 0.06), rng.uniform(-0.06, 0.06), rng.uniform(-0.02, 0.02));
    for (int v : g.vertex_indices) cons.push_back({v, t.mesh.vertices()[static_cast<std::size_t>(v)] + off, 10.0});
  }
  TriMesh gt = solve_deform(t.mesh, cons);
  const Vec3 c = centroid(gt);
  const Eigen::Matrix3d s = Vec3(rng.uniform(1.05, 1.15), 1.0, rng.uniform(1.05, 1.15)).asDiagonal();
  gt = transformed(gt, s, c - s * c);
  PoseCase pc{gt, rasterize(gt, camera).silhouette, project_joints(gt, t.metadata.joints, camera)};
  return pc;
}

SHLighting test_lighting() {
  SHLighting l;
  l.coefficients = {0.9, 0.1, 0.5, 0.2, 0.05, 0.05, 0.1, 0.05, 0.05};
  return l;
}

std::filesystem::path write_pose_annotation(const std::filesystem::path& dir, const std::string& stem,
                                            std::uint64_t seed) {
  const BodyTemplate& t = body_template();
  const WeakPerspectiveCamera cam = fit_camera(t.mesh, 224, 224);
  const PoseCase pc = make_pose_case(cam, seed);
  const DepthMap depth = rasterize(pc.gt, cam).depth;
  const Image<double> albedo(cam.width, cam.height, kDefaultAlbedo);
  save_png_gray(render_shading(depth, cam, test_lighting(), albedo), dir / (stem + ".png"));
  save_png_mask(pc.silhouette, dir / (stem + "_sil.png"));
  save_obj(t.mesh, dir / (stem + "_init.obj"));

  Annotation a;
  a.image_path = stem + ".png";
  a.silhouette_path = stem + "_sil.png";
  a.initial_mesh_path = stem + "_init.obj";
  a.camera = cam;
  a.joints = pc.joints;
  const auto path = dir / (stem + ".json");
  save_annotation(a, path);
  return path;
}

EllipsoidCase make_ellipsoid_case(int level) {
  TriMesh sphere = make_icosphere(level, 0.8);
  const double k = std::sqrt(1.2);
  TriMesh gt = transformed(sphere, Eigen::Vector3d(k, 1.0 / k, 1.0).asDiagonal().toDenseMatrix(), Vec3::Zero());
  const WeakPerspectiveCamera camera{100.0, Vec2(112, 112), 224, 224};
  Mask sil = rasterize(gt, camera).silhouette;
  return EllipsoidCase{std::move(sphere), std::move(gt), camera, std::move(sil)};
}

// Independent reference for the marcher: per-pixel XOR image, then a scan of
// the sampled pixels along the ray.
double xor_line_scan(const Mask& mesh, const Mask& gt, const Vec2& o, const Vec2& d, double max_len, double step) {
  Mask diff(mesh.width(), mesh.height(), 0);
  for (std::size_t i = 0; i < diff.size(); ++i) diff.data()[i] = mesh.data()[i] != gt.data()[i];
  const int n = static_cast<int>(std::floor(max_len / step + 1e-9));
  std::vector<int> mesh_at, diff_at;  // index j + n
  for (int j = -n; j <= n; ++j) {
    const Vec2 p = o + j * step * d;
    const int x = static_cast<int>(std::floor(p.x())), y = static_cast<int>(std::floor(p.y()));
    const bool in = x >= 0 && y >= 0 && x < mesh.width() && y < mesh.height();
    mesh_at.push_back(in ? mesh(x, y) : 0);
    diff_at.push_back(in ? diff(x, y) : 0);
  }
  int j0 = -1;
  for (int j = 0; j <= n && j0 < 0; ++j) {
    if (!mesh_at[static_cast<std::size_t>(j + n)]) j0 = j;
  }
  if (j0 < 0) return 0.0;
  int out = 0;
  while (j0 + out <= n && diff_at[static_cast<std::size_t>(j0 + out + n)]) ++out;
  if (out > 0) return std::min(out * step, max_len);
  int j1 = j0 - 1;
  while (j1 >= -n && !mesh_at[static_cast<std::size_t>(j1 + n)]) --j1;
  int in = 0;
  while (j1 - in >= -n && diff_at[static_cast<std::size_t>(j1 - in + n)]) ++in;
  return -std::min(in * step, max_len);
}

Mask random_blobs(Rng& rng, int w, int h) {
  Mask m(w, h, 0);
  const int count = 1 + static_cast<int>(rng.index(3));
  for (int k = 0; k < count; ++k) {
    const Mask d = fixtures::disc_mask(w, h, Vec2(rng.uniform(20, w - 20), rng.uniform(20, h - 20)), rng.uniform(8, 30));
    for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] |= d.data()[i];
  }
  return m;
}

}  // namespace fixtures
