#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "bodyfit/camera.hpp"
#include "bodyfit/handles.hpp"
#include "bodyfit/image.hpp"
#include "bodyfit/mesh.hpp"

namespace bodyfit {

/// Candidate render viewpoints in degrees.
struct ViewSchedule {
  std::vector<double> azimuths;
  std::vector<double> elevations;
  int sample_count = 6;
  std::uint64_t seed = 0;

  /// Azimuth 0..340 step 20 by elevation -10..10 step 10: 54 candidates.
  static ViewSchedule default_grid(int sample_count = 6, std::uint64_t seed = 0);

  /// All (azimuth, elevation) pairs, azimuth-major.
  std::vector<std::pair<double, double>> candidates() const;
};

/// `sample_count` distinct candidates drawn uniformly without replacement
/// (partial Fisher-Yates with the schedule's seed). Throws
/// ErrorKind::InvalidArgument when more views are requested than exist.
std::vector<std::pair<double, double>> sample_views(const ViewSchedule& schedule);

/// Rotation that turns the model to be seen from (azimuth, elevation):
/// first about +y by -azimuth, then about +x by elevation.
Eigen::Matrix3d view_rotation(double azimuth_deg, double elevation_deg);

/// Drops faces not seen in any of the 6 axis-aligned orthographic renders,
/// then unreferenced vertices (remaining vertices keep their relative
/// order). Throws ErrorKind::InvalidMesh if nothing is left.
TriMesh remove_inner_surface(const TriMesh& mesh, int resolution = 512);

inline constexpr int kJointPatchSize = 64;
inline constexpr int kAnchorPatchSize = 32;
inline constexpr int kPatchImageSize = 224;

enum class PatchLevel { Joint, Anchor };

struct Patch {
  Image<double> pixels;
  Vec2 center = Vec2::Zero();  // projected handle position in the 224 x 224 frame
  bool off_image = false;      // projection fell outside the image; pixels are all zero
  Vec2 joint_motion = Vec2::Zero();  // joint level: annotation minus projection (pixels)
  bool label_valid = false;          // joint level: annotation present
  double anchor_movement = 0.0;      // anchor level: signed movement along the normal (meters)
};

struct PatchSet {
  PatchLevel level = PatchLevel::Joint;
  std::vector<Patch> patches;
  bool resized = false;  // the input was not 224 x 224 and was resampled
};

/// Bilinear resample of `image` to width x height.
Image<double> resize_bilinear(const Image<double>& image, int width, int height);

/// One 64 x 64 patch per joint group, labelled with the joint's 2D motion.
PatchSet export_joint_patches(const Image<double>& image, const TriMesh& mesh, const WeakPerspectiveCamera& camera,
                              const std::vector<JointHandleGroup>& groups, const Joints2D& annotations);

/// One 32 x 32 patch per anchor, labelled with its movement.
PatchSet export_anchor_patches(const Image<double>& image, const TriMesh& mesh, const WeakPerspectiveCamera& camera,
                               const std::vector<AnchorHandle>& anchors);

}  // namespace bodyfit
