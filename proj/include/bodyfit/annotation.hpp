#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "bodyfit/camera.hpp"
#include "bodyfit/handles.hpp"
#include "bodyfit/image.hpp"

namespace bodyfit {

/// Result of the two dataset filter rules.
struct AnnotationFilter {
  bool joints_in_image = false;          // all 10 joints valid and inside the image
  bool joints_in_silhouette = false;     // every valid joint lies on a set silhouette pixel
  bool filtered() const { return !(joints_in_image && joints_in_silhouette); }
};

/// One fitting input. Paths are stored as written; relative ones are resolved
/// against `base_dir` (the annotation file's directory).
struct Annotation {
  std::string image_path;
  std::optional<std::string> silhouette_path;
  std::string initial_mesh_path;
  WeakPerspectiveCamera camera;
  Joints2D joints;
  std::filesystem::path base_dir;

  std::optional<AnnotationFilter> filter;  // set when a silhouette was checked

  std::filesystem::path resolve(const std::string& p) const;
};

/// Schema checks only (no file access). Throws ErrorKind::Parse or
/// ErrorKind::MissingJoint.
Annotation parse_annotation(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
nlohmann::json annotation_to_json(const Annotation& annotation);

/// Filter rules for a silhouette of the camera's image size.
AnnotationFilter check_annotation(const Annotation& annotation, const Mask& silhouette);

/// Parses the file, checks that the image (and silhouette) match the
/// camera's image size, and fills `filter` when a silhouette is present.
Annotation load_annotation(const std::filesystem::path& path);
void save_annotation(const Annotation& annotation, const std::filesystem::path& path);

}  // namespace bodyfit
