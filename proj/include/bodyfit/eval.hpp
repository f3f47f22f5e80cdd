#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bodyfit/camera.hpp"
#include "bodyfit/handles.hpp"
#include "bodyfit/image.hpp"
#include "bodyfit/mesh.hpp"

namespace bodyfit {

/// |a & b| / |a | b|, and 1 when both masks are empty.
double silhouette_iou(const Mask& a, const Mask& b);

struct JointError {
  double mean_px = 0.0;
  std::array<std::optional<double>, kNumJoints> per_joint{};
  std::size_t count = 0;
};

/// Mean Euclidean pixel distance over joints valid in both inputs.
JointError joint_error_2d(const Joints2D& pred, const Joints2D& gt);

/// Projected centers of the joint handle groups (all marked valid).
Joints2D project_joints(const TriMesh& mesh, const std::vector<JointHandleGroup>& groups,
                        const WeakPerspectiveCamera& camera);

enum class Error3DMode { Full, Visible };

struct Error3D {
  double mean_mm = 0.0;
  std::size_t count = 0;  // gt vertices measured
};

/// For every gt vertex (or every gt vertex visible from `camera` in Visible
/// mode) the distance to the nearest pred vertex; mean in millimeters for
/// inputs in meters. Vertex-to-vertex, no alignment.
Error3D error_3d(const TriMesh& pred, const TriMesh& gt, Error3DMode mode,
                 const WeakPerspectiveCamera* camera = nullptr);

/// Same quantity by exhaustive search; reference path for the kd-tree.
Error3D error_3d_brute_force(const TriMesh& pred, const TriMesh& gt, const std::vector<bool>* gt_mask = nullptr);

struct MetricReport {
  std::optional<double> sil_iou;
  std::optional<JointError> joint_err;
  std::optional<Error3D> err3d_full;
  std::optional<Error3D> err3d_vis;
};

nlohmann::json to_json(const MetricReport& report);

// Batch CSV with the column names used in result tables.
std::string metric_csv_header();
std::string metric_csv_row(const std::string& name, const MetricReport& report);

}  // namespace bodyfit
