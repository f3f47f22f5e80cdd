#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "bodyfit/mesh.hpp"

namespace bodyfit {

inline constexpr std::size_t kNumJoints = 10;
inline constexpr std::array<std::string_view, kNumJoints> kJointNames = {
    "head",    "waist",   "shoulder_l", "shoulder_r", "elbow_l",
    "elbow_r", "knee_l",  "knee_r",     "ankle_l",    "ankle_r"};

// Index into kJointNames, or -1.
int joint_index(std::string_view name);

/// Vertices around one body joint; the joint position is their mean.
struct JointHandleGroup {
  std::string joint_name;
  std::vector<int> vertex_indices;

  bool operator==(const JointHandleGroup&) const = default;
};

/// A vertex that may only move along its surface normal by `movement` meters.
/// Inactive anchors carry movement 0 and impose no constraint.
struct AnchorHandle {
  int vertex_index = 0;
  Vec3 constraint_normal = Vec3::UnitZ();
  bool active = false;
  double movement = 0.0;

  bool operator==(const AnchorHandle&) const = default;
};

inline constexpr double kAnchorSearchRadius = 0.1;  // meters
inline constexpr int kDefaultAnchorCount = 200;

/// Joint groups in kJointNames order plus the vertex set kept out of anchor
/// selection (face, fingers, toes).
struct TemplateMetadata {
  std::vector<JointHandleGroup> joints;
  std::vector<int> excluded;
};

/// K-means (k-means++ seeding) over the 6D features [position, normal] of the
/// non-excluded vertices; each anchor is the non-excluded vertex nearest to
/// its cluster center. Clusters are visited in order and take the nearest
/// vertex not already claimed (ties: lowest index), so the k anchors are
/// distinct. The template must carry normals.
std::vector<AnchorHandle> select_anchor_handles(const TriMesh& template_mesh, const std::vector<int>& excluded,
                                                int k = kDefaultAnchorCount, std::uint64_t seed = 0);

/// Per-group mean of member positions.
std::vector<Vec3> joint_positions(const TriMesh& mesh, const std::vector<JointHandleGroup>& groups);

/// Re-reads every anchor's constraint normal from the mesh's current normals.
void refresh_anchor_normals(const TriMesh& mesh_with_normals, std::vector<AnchorHandle>& anchors);

/// Validates and parses `{"joints": {name: [indices]}, "excluded": [indices]}`.
/// Checks: all 10 joint names present and no others, non-empty groups,
/// indices < vertex_count, groups pairwise disjoint.
TemplateMetadata parse_template_metadata(const nlohmann::json& doc, std::size_t vertex_count);
TemplateMetadata load_template_metadata(const std::filesystem::path& path, std::size_t vertex_count);
nlohmann::json template_metadata_to_json(const TemplateMetadata& meta);

nlohmann::json anchors_to_json(const std::vector<AnchorHandle>& anchors);

}  // namespace bodyfit

namespace bodyfit {

/// Image-space joints in kJointNames order; invalid entries are ignored.
struct Joints2D {
  std::array<Vec2, kNumJoints> points{};
  std::array<bool, kNumJoints> valid{};

  std::size_t valid_count() const {
    std::size_t n = 0;
    for (bool v : valid) n += v;
    return n;
  }
};

}  // namespace bodyfit
