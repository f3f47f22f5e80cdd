#pragma once

#include <array>

#include "bodyfit/handles.hpp"
#include "bodyfit/mesh.hpp"

namespace bodyfit {

/// Procedural T-pose mannequin with the SMPL vertex/face counts (6890 / 13776,
/// genus 0), y up, about 1.7 m tall, pelvis near the origin. Used where the
/// real SMPL template cannot be shipped.
struct BodyTemplate {
  TriMesh mesh;
  TemplateMetadata metadata;
};

inline constexpr int kTemplateRings = 82;
inline constexpr int kTemplateSegments = 84;

BodyTemplate make_body_template();

/// Skeleton joint centers in kJointNames order.
std::array<Vec3, kNumJoints> body_template_joint_centers();

}  // namespace bodyfit
