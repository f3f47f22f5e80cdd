#include "bodyfit/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bodyfit/error.hpp"
#include "bodyfit/eval.hpp"
#include "bodyfit/raster.hpp"

namespace bodyfit {

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::Initial: return "initial";
    case Stage::JointDone: return "joint_done";
    case Stage::AnchorDone: return "anchor_done";
    case Stage::VertexDone: return "vertex_done";
  }
  return "unknown";
}

void FitState::advance(Stage next) {
  if (static_cast<int>(next) <= static_cast<int>(stage)) {
    throw Error(ErrorKind::Stage, "cannot move from stage '" + std::string(to_string(stage)) + "' to '" +
                                      std::string(to_string(next)) + "'");
  }
  stage = next;
}

std::vector<JointResidual> joint_residuals(const TriMesh& mesh, const WeakPerspectiveCamera& camera,
                                           const Joints2D& gt, const std::vector<JointHandleGroup>& groups) {
  if (groups.size() != kNumJoints) throw Error(ErrorKind::InvalidArgument, "expected 10 joint groups");
  const auto centers = joint_positions(mesh, groups);
  std::vector<JointResidual> out;
  for (std::size_t j = 0; j < kNumJoints; ++j) {
    if (!gt.valid[j]) continue;
    out.push_back({groups[j].joint_name, gt.points[j] - camera.project(centers[j])});
  }
  return out;
}

FitState joint_stage(const FitState& state, const Joints2D& gt, const std::vector<JointHandleGroup>& groups,
                     const JointStageOptions& options) {
  if (state.stage != Stage::Initial) throw Error(ErrorKind::Stage, "joint stage must run on the initial mesh");
  if (gt.valid_count() == 0) throw Error(ErrorKind::InvalidArgument, "joint stage: no valid joint annotation");

  const auto residuals = joint_residuals(state.mesh, state.camera, gt, groups);
  std::vector<HandleConstraint> constraints;
  for (const auto& r : residuals) {
    const Vec3 lift(r.motion_2d.x() / state.camera.scale, r.motion_2d.y() / state.camera.scale, 0.0);
    const auto& group = groups[joint_index(r.joint_name)];
    for (int v : group.vertex_indices) {
      constraints.push_back({v, state.mesh.vertices()[v] + lift, options.weight});
    }
  }
  FitState next = state;
  next.mesh = solve_deform(state.mesh, std::move(constraints));
  next.advance(Stage::JointDone);
  return next;
}

double march_mismatch(const Mask& mesh_mask, const Mask& gt_mask, const Vec2& origin, const Vec2& dir,
                      double max_len_px, double step_px) {
  if (!mesh_mask.same_shape(gt_mask)) throw Error(ErrorKind::SizeMismatch, "march_mismatch: mask sizes differ");
  const int limit = static_cast<int>(std::floor(max_len_px / step_px + 1e-9));

  struct Sample {
    bool mesh;
    bool gt;
  };
  auto sample = [&](int j) -> Sample {
    const Vec2 p = origin + (j * step_px) * dir;
    const int x = static_cast<int>(std::floor(p.x()));
    const int y = static_cast<int>(std::floor(p.y()));
    if (!mesh_mask.contains(x, y)) return {false, false};
    return {mesh_mask(x, y) != 0, gt_mask(x, y) != 0};
  };

  int start = -1;
  for (int j = 0; j <= limit; ++j) {
    if (!sample(j).mesh) {
      start = j;
      break;
    }
  }
  if (start < 0) return 0.0;

  int outward = 0;
  for (int j = start; j <= limit; ++j) {
    const Sample s = sample(j);
    if (s.mesh == s.gt) break;
    ++outward;
  }
  if (outward > 0) return std::min(outward * step_px, max_len_px);

  // Inward run begins at the last mesh sample before start; samples in
  // between sit in the rim pixel the ray leaves by.
  int inner = start - 1;
  while (inner >= -limit && !sample(inner).mesh) --inner;
  int inward = 0;
  for (int j = inner; j >= -limit; --j) {
    const Sample s = sample(j);
    if (s.mesh == s.gt) break;
    ++inward;
  }
  return -std::min(inward * step_px, max_len_px);
}

std::vector<Vec2> mask_boundary(const Mask& mask) {
  std::vector<Vec2> out;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask(x, y)) continue;
      const bool rim = x == 0 || y == 0 || x == mask.width() - 1 || y == mask.height() - 1 || !mask(x - 1, y) ||
                       !mask(x + 1, y) || !mask(x, y - 1) || !mask(x, y + 1);
      if (rim) out.emplace_back(x + 0.5, y + 0.5);
    }
  }
  return out;
}

std::vector<AnchorHandle> anchor_oracle(const FitState& state, const Mask& gt_silhouette,
                                        std::vector<AnchorHandle> anchors, const AnchorOracleOptions& options) {
  const auto& cam = state.camera;
  if (gt_silhouette.width() != cam.width || gt_silhouette.height() != cam.height) {
    throw Error(ErrorKind::SizeMismatch, "anchor oracle: silhouette does not match the camera image size");
  }
  const TriMesh mesh = compute_vertex_normals(state.mesh);
  refresh_anchor_normals(mesh, anchors);
  const Mask mesh_sil = rasterize(mesh, cam).silhouette;
  const auto rim = mask_boundary(mesh_sil);
  const double max_len = options.search_radius_m * cam.scale;

  for (auto& a : anchors) {
    a.active = false;
    a.movement = 0.0;
    const Vec2 px = cam.project(mesh.vertices()[a.vertex_index]);
    if (!cam.in_image(px) || rim.empty()) continue;
    double nearest = std::numeric_limits<double>::infinity();
    for (const Vec2& r : rim) nearest = std::min(nearest, (r - px).squaredNorm());
    if (std::sqrt(nearest) > options.margin_px) continue;
    const Vec2 dir = cam.project_direction(a.constraint_normal);
    const double len = dir.norm();
    if (len < 1e-9 * cam.scale) continue;  // normal along the view axis
    const double px_len = march_mismatch(mesh_sil, gt_silhouette, px, dir / len, max_len, options.step_px);
    if (px_len == 0.0) continue;
    a.movement = std::clamp(px_len / cam.scale, -options.search_radius_m, options.search_radius_m);
    a.active = true;
  }
  return anchors;
}

AnchorStageResult anchor_stage(const FitState& state, const Mask& gt_silhouette,
                               const std::vector<AnchorHandle>& anchors, const AnchorStageOptions& options) {
  if (state.stage != Stage::JointDone && state.stage != Stage::Initial) {
    throw Error(ErrorKind::Stage, "anchor stage must run before the vertex stage");
  }
  AnchorStageResult result{state, anchors, {}};
  double best_iou = silhouette_iou(rasterize(state.mesh, state.camera).silhouette, gt_silhouette);
  result.iou_trace.push_back(best_iou);

  FitState probe = state;
  for (int it = 0; it < options.iterations; ++it) {
    probe.mesh = result.state.mesh;
    auto moved = anchor_oracle(probe, gt_silhouette, anchors, options.oracle);
    if (std::none_of(moved.begin(), moved.end(), [](const AnchorHandle& a) { return a.active; })) break;
    TriMesh candidate = deform_along_normals(result.state.mesh, moved, options.weight);
    const double iou = silhouette_iou(rasterize(candidate, state.camera).silhouette, gt_silhouette);
    if (iou < best_iou) break;
    result.state.mesh = std::move(candidate);
    result.anchors = std::move(moved);
    result.iou_trace.push_back(iou);
    const double gain = iou - best_iou;
    best_iou = iou;
    if (gain <= options.min_improvement) break;
  }
  result.state.advance(Stage::AnchorDone);
  return result;
}

namespace {

// Bilinear sample at a sub-pixel position (pixel centers at +0.5) using the
// 2x2 footprint; falls back to the nearest pixel when the footprint is not
// fully valid in every map. Returns false when no valid sample exists.
bool sample_depth_difference(const DepthMap& refined, const DepthMap& coarse, const Vec2& px, double& out) {
  const double fx = px.x() - 0.5;
  const double fy = px.y() - 0.5;
  const int x0 = static_cast<int>(std::floor(fx));
  const int y0 = static_cast<int>(std::floor(fy));
  const double tx = fx - x0;
  const double ty = fy - y0;
  auto ok = [&](int x, int y) {
    return refined.valid.contains(x, y) && refined.valid(x, y) && coarse.valid(x, y);
  };
  if (ok(x0, y0) && ok(x0 + 1, y0) && ok(x0, y0 + 1) && ok(x0 + 1, y0 + 1)) {
    auto diff = [&](int x, int y) { return refined.depth(x, y) - coarse.depth(x, y); };
    out = (1 - ty) * ((1 - tx) * diff(x0, y0) + tx * diff(x0 + 1, y0)) +
          ty * ((1 - tx) * diff(x0, y0 + 1) + tx * diff(x0 + 1, y0 + 1));
    return true;
  }
  const int x = static_cast<int>(std::floor(px.x()));
  const int y = static_cast<int>(std::floor(px.y()));
  if (ok(x, y)) {
    out = refined.depth(x, y) - coarse.depth(x, y);
    return true;
  }
  return false;
}

}  // namespace

FitState vertex_stage(const FitState& state, const DepthMap& refined_depth) {
  if (state.stage != Stage::AnchorDone && state.stage != Stage::JointDone && state.stage != Stage::Initial) {
    throw Error(ErrorKind::Stage, "vertex stage already ran");
  }
  const auto& cam = state.camera;
  if (refined_depth.width() != cam.width || refined_depth.height() != cam.height ||
      !refined_depth.valid.same_shape(refined_depth.depth)) {
    throw Error(ErrorKind::SizeMismatch, "vertex stage: depth map does not match the camera image size");
  }
  const TriMesh fine = subdivide_midpoint(state.mesh);
  const RasterMaps maps = rasterize(fine, cam);

  std::vector<HandleConstraint> constraints;
  for (std::size_t i = 0; i < fine.num_vertices(); ++i) {
    if (!maps.vertex_visibility[i]) continue;
    const Vec3& p = fine.vertices()[i];
    double dz = 0.0;
    if (!sample_depth_difference(refined_depth, maps.depth, cam.project(p), dz)) continue;
    constraints.push_back({static_cast<int>(i), p + Vec3(0, 0, dz), 1.0});
  }
  FitState next = state;
  next.mesh = constraints.empty() ? fine : solve_deform(fine, std::move(constraints));
  next.advance(Stage::VertexDone);
  return next;
}

}  // namespace bodyfit
