#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bodyfit/config.hpp"
#include "bodyfit/fitting.hpp"
#include "bodyfit/shading.hpp"

namespace bodyfit {

/// What the fit is driven by. Any part may be missing; stages that need it
/// are then skipped.
struct Observations {
  Joints2D joints;
  std::optional<Mask> silhouette;
  std::optional<Image<double>> image;
};

struct StageRecord {
  std::string stage;
  bool ran = false;
  std::string skip_reason;  // empty when the stage ran
};

struct PipelineResult {
  FitState state;
  std::optional<TriMesh> joint_mesh;
  std::optional<TriMesh> anchor_mesh;
  std::optional<TriMesh> vertex_mesh;
  std::vector<StageRecord> stages;  // joint, anchor, vertex
  std::vector<double> anchor_iou_trace;
  std::size_t active_anchors = 0;
  std::optional<LightingEstimate> lighting;
  std::optional<RefineResult> refinement;  // depth map omitted from the report
};

/// Joint stage, anchor stage, shading refinement with detail magnification,
/// then vertex stage. A snapshot (IoU against the silhouette, 2D joint error
/// against the annotations) is taken initially and after every stage that
/// runs. Stage failures are rethrown with the stage name prefixed.
PipelineResult run_pipeline(const TriMesh& initial_mesh, const WeakPerspectiveCamera& camera,
                            const Observations& observations, const std::optional<TemplateMetadata>& metadata,
                            const Config& config);

nlohmann::json pipeline_report(const PipelineResult& result, const Config& config);

/// Metadata from `config.template_metadata`, else the built-in template's
/// metadata when `mesh` has exactly its faces, else nothing.
std::optional<TemplateMetadata> resolve_template_metadata(const Config& config, const TriMesh& mesh);

}  // namespace bodyfit
