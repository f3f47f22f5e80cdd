#include "bodyfit/handles.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include <json.hpp>

#include "bodyfit/error.hpp"
#include "bodyfit/kmeans.hpp"

namespace bodyfit {

int joint_index(std::string_view name) {
  for (std::size_t i = 0; i < kNumJoints; ++i) {
    if (kJointNames[i] == name) return static_cast<int>(i);
  }
  return -1;
}

std::vector<AnchorHandle> select_anchor_handles(const TriMesh& template_mesh, const std::vector<int>& excluded,
                                                int k, std::uint64_t seed) {
  const TriMesh& mesh = template_mesh;
  const std::size_t n = mesh.num_vertices();
  std::vector<bool> skip(n, false);
  for (int idx : excluded) {
    if (idx < 0 || static_cast<std::size_t>(idx) >= n) {
      throw Error(ErrorKind::IndexOutOfRange, "excluded vertex " + std::to_string(idx) + " out of range");
    }
    skip[idx] = true;
  }
  std::vector<int> candidates;
  for (std::size_t i = 0; i < n; ++i) {
    if (!skip[i]) candidates.push_back(static_cast<int>(i));
  }
  if (k <= 0 || static_cast<std::size_t>(k) > candidates.size()) {
    throw Error(ErrorKind::InvalidArgument, "cannot select " + std::to_string(k) + " anchors from " +
                                                std::to_string(candidates.size()) + " non-excluded vertices");
  }

  const auto& normals = mesh.normals();
  Eigen::MatrixXd features(static_cast<Eigen::Index>(candidates.size()), 6);
  for (std::size_t r = 0; r < candidates.size(); ++r) {
    const int v = candidates[r];
    features.row(static_cast<Eigen::Index>(r)) << mesh.vertices()[v].transpose(), normals[v].transpose();
  }
  KMeansOptions opts;
  opts.seed = seed;
  const KMeansResult clusters = kmeans(features, k, opts);

  std::vector<bool> taken(candidates.size(), false);
  std::vector<AnchorHandle> anchors;
  anchors.reserve(k);
  for (int c = 0; c < k; ++c) {
    double best = std::numeric_limits<double>::infinity();
    Eigen::Index best_r = -1;
    for (Eigen::Index r = 0; r < features.rows(); ++r) {
      if (taken[r]) continue;
      const double d = (features.row(r) - clusters.centers.row(c)).squaredNorm();
      if (d < best) {  // strict: ties keep the lower vertex index
        best = d;
        best_r = r;
      }
    }
    taken[best_r] = true;
    AnchorHandle a;
    a.vertex_index = candidates[best_r];
    a.constraint_normal = normals[a.vertex_index];
    anchors.push_back(a);
  }
  return anchors;
}

std::vector<Vec3> joint_positions(const TriMesh& mesh, const std::vector<JointHandleGroup>& groups) {
  std::vector<Vec3> out;
  out.reserve(groups.size());
  for (const auto& g : groups) {
    if (g.vertex_indices.empty()) {
      throw Error(ErrorKind::InvalidArgument, "joint group '" + g.joint_name + "' is empty");
    }
    Vec3 sum = Vec3::Zero();
    for (int idx : g.vertex_indices) {
      if (idx < 0 || static_cast<std::size_t>(idx) >= mesh.num_vertices()) {
        throw Error(ErrorKind::IndexOutOfRange, "joint group '" + g.joint_name + "' index out of range");
      }
      sum += mesh.vertices()[idx];
    }
    out.push_back(sum / static_cast<double>(g.vertex_indices.size()));
  }
  return out;
}

void refresh_anchor_normals(const TriMesh& mesh_with_normals, std::vector<AnchorHandle>& anchors) {
  const auto& normals = mesh_with_normals.normals();
  for (auto& a : anchors) a.constraint_normal = normals.at(a.vertex_index);
}

TemplateMetadata parse_template_metadata(const nlohmann::json& doc, std::size_t vertex_count) {
  if (!doc.is_object() || !doc.contains("joints") || !doc["joints"].is_object()) {
    throw Error(ErrorKind::Parse, "template metadata needs a 'joints' object");
  }
  auto read_indices = [&](const nlohmann::json& arr, const std::string& what) {
    if (!arr.is_array()) throw Error(ErrorKind::Parse, what + " must be an array of vertex indices");
    std::vector<int> out;
    for (const auto& v : arr) {
      if (!v.is_number_integer()) throw Error(ErrorKind::Parse, what + " holds a non-integer entry");
      const long long idx = v.get<long long>();
      if (idx < 0 || static_cast<std::size_t>(idx) >= vertex_count) {
        throw Error(ErrorKind::IndexOutOfRange, what + ": vertex index " + std::to_string(idx) +
                                                    " out of range (template has " + std::to_string(vertex_count) +
                                                    " vertices)");
      }
      out.push_back(static_cast<int>(idx));
    }
    return out;
  };

  const auto& joints = doc["joints"];
  for (const auto& [name, _] : joints.items()) {
    if (joint_index(name) < 0) throw Error(ErrorKind::Parse, "unknown joint name '" + name + "'");
  }
  TemplateMetadata meta;
  std::set<int> used;
  for (std::string_view name : kJointNames) {
    const std::string key(name);
    if (!joints.contains(key)) throw Error(ErrorKind::MissingJoint, "template metadata is missing joint '" + key + "'");
    JointHandleGroup g{key, read_indices(joints[key], "joint '" + key + "'")};
    if (g.vertex_indices.empty()) throw Error(ErrorKind::InvalidArgument, "joint '" + key + "' has no vertices");
    for (int idx : g.vertex_indices) {
      if (!used.insert(idx).second) {
        throw Error(ErrorKind::DuplicateVertex,
                    "vertex " + std::to_string(idx) + " appears in more than one joint group (second: '" + key + "')");
      }
    }
    meta.joints.push_back(std::move(g));
  }
  if (doc.contains("excluded")) meta.excluded = read_indices(doc["excluded"], "excluded");
  std::sort(meta.excluded.begin(), meta.excluded.end());
  meta.excluded.erase(std::unique(meta.excluded.begin(), meta.excluded.end()), meta.excluded.end());
  return meta;
}

TemplateMetadata load_template_metadata(const std::filesystem::path& path, std::size_t vertex_count) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, path.string() + ": " + e.what());
  }
  return parse_template_metadata(doc, vertex_count);
}

nlohmann::json template_metadata_to_json(const TemplateMetadata& meta) {
  nlohmann::json doc;
  doc["joints"] = nlohmann::json::object();
  for (const auto& g : meta.joints) doc["joints"][g.joint_name] = g.vertex_indices;
  doc["excluded"] = meta.excluded;
  return doc;
}

nlohmann::json anchors_to_json(const std::vector<AnchorHandle>& anchors) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& a : anchors) {
    arr.push_back({{"vertex", a.vertex_index},
                   {"normal", {a.constraint_normal.x(), a.constraint_normal.y(), a.constraint_normal.z()}},
                   {"active", a.active},
                   {"movement", a.movement}});
  }
  return arr;
}

}  // namespace bodyfit
