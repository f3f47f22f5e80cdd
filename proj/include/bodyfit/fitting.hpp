#pragma once

#include <string>
#include <vector>

#include "bodyfit/camera.hpp"
#include "bodyfit/deform.hpp"
#include "bodyfit/handles.hpp"
#include "bodyfit/image.hpp"
#include "bodyfit/mesh.hpp"

namespace bodyfit {

enum class Stage { Initial = 0, JointDone = 1, AnchorDone = 2, VertexDone = 3 };

std::string_view to_string(Stage stage);

struct StageSnapshot {
  std::string stage;
  std::optional<double> sil_iou;
  std::optional<double> joint_err_px;
};

struct FitState {
  TriMesh mesh;
  WeakPerspectiveCamera camera;
  Stage stage = Stage::Initial;
  std::vector<StageSnapshot> snapshots;

  // Moves to `next`; throws ErrorKind::Stage unless next comes after the current stage.
  void advance(Stage next);
};

/// Image-plane displacement from a projected mesh joint to its annotation.
struct JointResidual {
  std::string joint_name;
  Vec2 motion_2d = Vec2::Zero();
};

struct JointStageOptions {
  double weight = kJointHandleWeight;
};

/// Residuals for the valid annotations, in kJointNames order.
std::vector<JointResidual> joint_residuals(const TriMesh& mesh, const WeakPerspectiveCamera& camera,
                                           const Joints2D& gt, const std::vector<JointHandleGroup>& groups);

/// Every member vertex of an annotated joint's group is pulled by the
/// residual lifted to model space, (du / scale, dv / scale, 0).
FitState joint_stage(const FitState& state, const Joints2D& gt, const std::vector<JointHandleGroup>& groups,
                     const JointStageOptions& options = {});

struct AnchorOracleOptions {
  double margin_px = 20.0;                  // anchors farther than this from the silhouette rim are inactive
  double step_px = 0.5;                     // marching step along the projected normal
  double search_radius_m = kAnchorSearchRadius;
};

/// Signed length (pixels) of the mismatch run along a ray.
///
/// Samples s_j = origin + j * step * dir are looked up by nearest pixel
/// (floor), for j in [-J, J] with J = floor(max_len / step). Starting from j0,
/// the first j >= 0 whose sample lies off the mesh mask, the run of samples
/// where mesh and gt disagree is counted outward (j0, j0 + 1, ...). If that
/// run is empty, the run inward is counted and reported negative; it starts
/// at the first sample below j0 that lies on the mesh mask.
/// Samples outside the image are treated as empty in both masks. The result
/// is clamped to [-max_len, max_len]; 0 when no j0 exists.
double march_mismatch(const Mask& mesh_mask, const Mask& gt_mask, const Vec2& origin, const Vec2& dir,
                      double max_len_px, double step_px);

/// Pixel centers of the mask's rim (set pixels with an unset 4-neighbor or on the image border).
std::vector<Vec2> mask_boundary(const Mask& mask);

/// Signed movement per anchor along its normal, from the mismatch between
/// the mesh silhouette and `gt_silhouette`. Anchor normals are re-read from
/// the current mesh. Returned movements lie in [-radius, radius]; inactive
/// anchors have movement 0.
std::vector<AnchorHandle> anchor_oracle(const FitState& state, const Mask& gt_silhouette,
                                        std::vector<AnchorHandle> anchors, const AnchorOracleOptions& options = {});

struct AnchorStageOptions {
  AnchorOracleOptions oracle;
  int iterations = 3;
  double weight = kAnchorHandleWeight;
  double min_improvement = 1e-3;
};

struct AnchorStageResult {
  FitState state;
  std::vector<AnchorHandle> anchors;  // oracle output of the last accepted step
  std::vector<double> iou_trace;      // IoU before the stage, then after each accepted step
};

/// Oracle + normal-constrained deform, repeated while IoU improves by more
/// than min_improvement. A step that lowers IoU is discarded and ends the stage.
AnchorStageResult anchor_stage(const FitState& state, const Mask& gt_silhouette,
                               const std::vector<AnchorHandle>& anchors, const AnchorStageOptions& options = {});

/// Subdivides the mesh, then pulls every visible vertex along the view axis
/// by (refined - coarse) depth sampled bilinearly at its pixel, where coarse
/// is the rasterized depth of the subdivided mesh itself. Occluded vertices,
/// and vertices whose sample has no valid footprint, are free.
FitState vertex_stage(const FitState& state, const DepthMap& refined_depth);

}  // namespace bodyfit
