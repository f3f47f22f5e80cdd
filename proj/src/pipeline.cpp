#include "bodyfit/pipeline.hpp"

#include <algorithm>

#include "bodyfit/body_template.hpp"
#include "bodyfit/error.hpp"
#include "bodyfit/eval.hpp"
#include "bodyfit/raster.hpp"

namespace bodyfit {

using nlohmann::json;

namespace {

StageSnapshot snapshot(const FitState& state, const Observations& obs, const std::optional<TemplateMetadata>& meta) {
  StageSnapshot s;
  s.stage = std::string(to_string(state.stage));
  if (obs.silhouette) s.sil_iou = silhouette_iou(rasterize(state.mesh, state.camera).silhouette, *obs.silhouette);
  if (meta && obs.joints.valid_count() > 0) {
    const JointError err = joint_error_2d(project_joints(state.mesh, meta->joints, state.camera), obs.joints);
    if (err.count > 0) s.joint_err_px = err.mean_px;
  }
  return s;
}

template <typename F>
auto with_stage_name(const char* stage, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    throw Error(e.kind(), std::string(stage) + " stage: " + e.what());
  }
}

}  // namespace

PipelineResult run_pipeline(const TriMesh& initial_mesh, const WeakPerspectiveCamera& camera,
                            const Observations& obs, const std::optional<TemplateMetadata>& metadata,
                            const Config& config) {
  camera.validate();
  if (obs.silhouette && (obs.silhouette->width() != camera.width || obs.silhouette->height() != camera.height)) {
    throw Error(ErrorKind::SizeMismatch, "silhouette size differs from camera image size");
  }
  if (obs.image && (obs.image->width() != camera.width || obs.image->height() != camera.height)) {
    throw Error(ErrorKind::SizeMismatch, "image size differs from camera image size");
  }

  PipelineResult out{FitState{initial_mesh, camera, Stage::Initial, {}}, {}, {}, {}, {}, {}, 0, {}, {}};
  out.state.snapshots.push_back(snapshot(out.state, obs, metadata));

  // Joint level.
  StageRecord joint{"joint", false, ""};
  if (!config.joint_enabled) {
    joint.skip_reason = "disabled";
  } else if (!metadata) {
    joint.skip_reason = "no joint handle groups for this mesh";
  } else if (obs.joints.valid_count() == 0) {
    joint.skip_reason = "no valid joint annotations";
  } else {
    out.state = with_stage_name("joint", [&] {
      return joint_stage(out.state, obs.joints, metadata->joints, JointStageOptions{config.joint_weight});
    });
    out.state.snapshots.push_back(snapshot(out.state, obs, metadata));
    out.joint_mesh = out.state.mesh;
    joint.ran = true;
  }
  out.stages.push_back(joint);

  // Anchor level.
  StageRecord anchor{"anchor", false, ""};
  if (!config.anchor_enabled) {
    anchor.skip_reason = "disabled";
  } else if (!obs.silhouette) {
    anchor.skip_reason = "no silhouette";
  } else {
    AnchorStageResult res = with_stage_name("anchor", [&] {
      const TriMesh selection_mesh = compute_vertex_normals(out.state.mesh);
      const std::vector<int> excluded = metadata ? metadata->excluded : std::vector<int>{};
      const auto available = static_cast<int>(selection_mesh.num_vertices() - excluded.size());
      const int count = std::min(config.anchor_count, available);
      const auto anchors = select_anchor_handles(selection_mesh, excluded, count, config.seed);
      AnchorStageOptions opts;
      opts.oracle.margin_px = config.anchor_margin_px;
      opts.iterations = config.anchor_iters;
      opts.weight = config.anchor_weight;
      opts.min_improvement = config.anchor_min_improvement;
      return anchor_stage(out.state, *obs.silhouette, anchors, opts);
    });
    out.state = std::move(res.state);
    out.anchor_iou_trace = std::move(res.iou_trace);
    out.active_anchors = static_cast<std::size_t>(
        std::count_if(res.anchors.begin(), res.anchors.end(), [](const AnchorHandle& a) { return a.active; }));
    out.state.snapshots.push_back(snapshot(out.state, obs, metadata));
    out.anchor_mesh = out.state.mesh;
    anchor.ran = true;
  }
  out.stages.push_back(anchor);

  // Per-vertex level, driven by the shading-refined depth.
  StageRecord vertex{"vertex", false, ""};
  if (!config.vertex_enabled) {
    vertex.skip_reason = "disabled";
  } else if (!obs.image) {
    vertex.skip_reason = "no image";
  } else {
    out.state = with_stage_name("vertex", [&] {
      const DepthMap coarse = rasterize(out.state.mesh, camera).depth;
      ShadingWeights weights{config.shading_lambda_photo, config.shading_lambda_depth, config.shading_lambda_smooth};
      const ShadingProblem problem = make_shading_problem(*obs.image, coarse, camera, config.shading_albedo, weights);
      out.lighting = estimate_lighting(problem);
      RefineOptions ropts;
      ropts.max_iterations = config.shading_gn_iters;
      out.refinement = refine_depth(problem, out.lighting->lighting, ropts);
      const DepthMap detailed = magnify_details(out.refinement->depth, coarse, config.shading_magnify_factor);
      return vertex_stage(out.state, detailed);
    });
    out.state.snapshots.push_back(snapshot(out.state, obs, metadata));
    out.vertex_mesh = out.state.mesh;
    vertex.ran = true;
  }
  out.stages.push_back(vertex);
  return out;
}

json pipeline_report(const PipelineResult& result, const Config& config) {
  json report;
  json snaps = json::array();
  for (const StageSnapshot& s : result.state.snapshots) {
    json j{{"stage", s.stage}};
    j["sil_iou"] = s.sil_iou ? json(*s.sil_iou) : json(nullptr);
    j["joint_err_px"] = s.joint_err_px ? json(*s.joint_err_px) : json(nullptr);
    snaps.push_back(std::move(j));
  }
  report["snapshots"] = std::move(snaps);

  json stages = json::array();
  for (const StageRecord& r : result.stages) {
    json j{{"stage", r.stage}, {"status", r.ran ? "done" : "skipped"}};
    if (!r.ran) j["reason"] = r.skip_reason;
    stages.push_back(std::move(j));
  }
  report["stages"] = std::move(stages);

  if (!result.anchor_iou_trace.empty()) {
    report["anchor"] = {{"iou_trace", result.anchor_iou_trace}, {"active_anchors", result.active_anchors}};
  }
  if (result.lighting) {
    report["lighting"] = {{"coefficients", result.lighting->lighting.coefficients},
                          {"rms_residual", result.lighting->rms_residual},
                          {"rank", result.lighting->rank},
                          {"rank_deficient", result.lighting->rank_deficient},
                          {"pixels", result.lighting->pixel_count}};
  }
  if (result.refinement) {
    report["shading"] = {{"energy_trace", result.refinement->energy_trace},
                         {"iterations", result.refinement->iterations},
                         {"converged", result.refinement->converged}};
  }
  report["final_stage"] = std::string(to_string(result.state.stage));
  report["config"] = config.to_json();
  return report;
}

std::optional<TemplateMetadata> resolve_template_metadata(const Config& config, const TriMesh& mesh) {
  if (!config.template_metadata.empty()) return load_template_metadata(config.template_metadata, mesh.num_vertices());
  if (mesh.num_vertices() != 6890 || mesh.num_faces() != 13776) return std::nullopt;
  static const BodyTemplate builtin = make_body_template();
  if (builtin.mesh.faces() != mesh.faces()) return std::nullopt;
  return builtin.metadata;
}

}  // namespace bodyfit
