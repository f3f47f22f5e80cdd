#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <Eigen/Dense>

#include "bodyfit/body_template.hpp"
#include "bodyfit/camera.hpp"
#include "bodyfit/image.hpp"
#include "bodyfit/laplacian.hpp"
#include "bodyfit/mesh.hpp"
#include "bodyfit/random.hpp"
#include "bodyfit/shading.hpp"

namespace fixtures {

using namespace bodyfit;

// Pixels whose centers lie strictly inside the circle.
Mask disc_mask(int width, int height, const Vec2& center, double radius);

// Fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& name);

// Dense copy of the Laplacian built straight from mesh edges.
Eigen::MatrixXd dense_laplacian(std::size_t n, const std::vector<std::pair<int, int>>& edges);

// Built-in template, computed once per process.
const BodyTemplate& body_template();

// Ground truth derived from the template: joint groups displaced by random
// offsets through a Laplacian edit, then a random widening in x and z.
struct PoseCase {
  TriMesh gt;
  Mask silhouette;
  Joints2D joints;
};
PoseCase make_pose_case(const WeakPerspectiveCamera& camera, std::uint64_t seed);

// Icosphere (r = 0.8, given level) against an ellipsoid with x/y axis ratio
// 1.2 and equal volume, 100 px/m on a 224 x 224 image.
struct EllipsoidCase {
  TriMesh sphere;
  TriMesh gt;
  WeakPerspectiveCamera camera;
  Mask silhouette;
};
EllipsoidCase make_ellipsoid_case(int level = 3);

// Reference for march_mismatch: per-pixel XOR image, then a scan of the
// sampled pixels along the ray.
double xor_line_scan(const Mask& mesh, const Mask& gt, const Vec2& origin, const Vec2& dir, double max_len,
                     double step);

// Union of one to three random discs.
Mask random_blobs(Rng& rng, int width, int height);

// Soft frontal light used for synthetic images.
SHLighting test_lighting();

// Writes a complete fit input (initial mesh, shaded image, silhouette,
// annotation JSON) for a pose case and returns the annotation path.
std::filesystem::path write_pose_annotation(const std::filesystem::path& dir, const std::string& stem,
                                            std::uint64_t seed);

}  // namespace fixtures
