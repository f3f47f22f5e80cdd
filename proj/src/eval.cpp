#include "bodyfit/eval.hpp"

#include <cmath>
#include <sstream>

#include "bodyfit/error.hpp"
#include "bodyfit/raster.hpp"
#include "bodyfit/spatial_index.hpp"

namespace bodyfit {

double silhouette_iou(const Mask& a, const Mask& b) {
  if (!a.same_shape(b)) throw Error(ErrorKind::SizeMismatch, "silhouette_iou: mask sizes differ");
  std::size_t inter = 0;
  std::size_t uni = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool x = a.data()[i] != 0;
    const bool y = b.data()[i] != 0;
    inter += x && y;
    uni += x || y;
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

JointError joint_error_2d(const Joints2D& pred, const Joints2D& gt) {
  JointError out;
  double sum = 0.0;
  for (std::size_t j = 0; j < kNumJoints; ++j) {
    if (!pred.valid[j] || !gt.valid[j]) continue;
    const double d = (pred.points[j] - gt.points[j]).norm();
    out.per_joint[j] = d;
    sum += d;
    ++out.count;
  }
  if (out.count == 0) throw Error(ErrorKind::InvalidArgument, "joint_error_2d: no valid joints");
  out.mean_px = sum / static_cast<double>(out.count);
  return out;
}

Joints2D project_joints(const TriMesh& mesh, const std::vector<JointHandleGroup>& groups,
                        const WeakPerspectiveCamera& camera) {
  if (groups.size() != kNumJoints) throw Error(ErrorKind::InvalidArgument, "expected 10 joint groups");
  const auto centers = joint_positions(mesh, groups);
  Joints2D out;
  for (std::size_t j = 0; j < kNumJoints; ++j) {
    out.points[j] = camera.project(centers[j]);
    out.valid[j] = true;
  }
  return out;
}

namespace {

std::vector<bool> visible_gt_vertices(const TriMesh& gt, const WeakPerspectiveCamera* camera) {
  if (!camera) throw Error(ErrorKind::InvalidArgument, "error_3d: visible mode needs a camera");
  return rasterize(gt, *camera).vertex_visibility;
}

}  // namespace

Error3D error_3d(const TriMesh& pred, const TriMesh& gt, Error3DMode mode, const WeakPerspectiveCamera* camera) {
  std::vector<bool> use;
  if (mode == Error3DMode::Visible) use = visible_gt_vertices(gt, camera);
  const KdTree tree(pred.vertices());
  Error3D out;
  double sum = 0.0;
  for (std::size_t i = 0; i < gt.num_vertices(); ++i) {
    if (!use.empty() && !use[i]) continue;
    sum += std::sqrt(tree.nearest(gt.vertices()[i]).squared_distance) * 1000.0;
    ++out.count;
  }
  if (out.count == 0) throw Error(ErrorKind::InvalidArgument, "error_3d: no visible ground-truth vertices");
  out.mean_mm = sum / static_cast<double>(out.count);
  return out;
}

Error3D error_3d_brute_force(const TriMesh& pred, const TriMesh& gt, const std::vector<bool>* gt_mask) {
  Error3D out;
  double sum = 0.0;
  for (std::size_t i = 0; i < gt.num_vertices(); ++i) {
    if (gt_mask && !(*gt_mask)[i]) continue;
    double best = INFINITY;
    for (const Vec3& p : pred.vertices()) best = std::min(best, (p - gt.vertices()[i]).squaredNorm());
    sum += std::sqrt(best) * 1000.0;
    ++out.count;
  }
  if (out.count == 0) throw Error(ErrorKind::InvalidArgument, "error_3d: no ground-truth vertices");
  out.mean_mm = sum / static_cast<double>(out.count);
  return out;
}

nlohmann::json to_json(const MetricReport& r) {
  nlohmann::json j = nlohmann::json::object();
  if (r.sil_iou) j["sil_iou"] = *r.sil_iou;
  if (r.joint_err) {
    j["joint_err_px"] = r.joint_err->mean_px;
    nlohmann::json per = nlohmann::json::object();
    for (std::size_t k = 0; k < kNumJoints; ++k) {
      if (r.joint_err->per_joint[k]) per[std::string(kJointNames[k])] = *r.joint_err->per_joint[k];
    }
    j["per_joint_px"] = per;
    j["joint_count"] = r.joint_err->count;
  }
  if (r.err3d_full) {
    j["err3d_full_mm"] = r.err3d_full->mean_mm;
    j["full_vertex_count"] = r.err3d_full->count;
  }
  if (r.err3d_vis) {
    j["err3d_vis_mm"] = r.err3d_vis->mean_mm;
    j["vis_vertex_count"] = r.err3d_vis->count;
  }
  return j;
}

std::string metric_csv_header() { return "name,sil IoU,2D joint err,3D err full,3D err vis"; }

std::string metric_csv_row(const std::string& name, const MetricReport& r) {
  std::ostringstream ss;
  ss.precision(10);
  ss << name << ',';
  if (r.sil_iou) ss << *r.sil_iou;
  ss << ',';
  if (r.joint_err) ss << r.joint_err->mean_px;
  ss << ',';
  if (r.err3d_full) ss << r.err3d_full->mean_mm;
  ss << ',';
  if (r.err3d_vis) ss << r.err3d_vis->mean_mm;
  return ss.str();
}

}  // namespace bodyfit
