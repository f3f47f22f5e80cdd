#include "bodyfit/annotation.hpp"

#include <cmath>
#include <fstream>

#include "bodyfit/error.hpp"
#include "bodyfit/image_io.hpp"

namespace bodyfit {

using nlohmann::json;

namespace {

[[noreturn]] void schema_error(const std::string& what) { throw Error(ErrorKind::Parse, "annotation: " + what); }

const json& require(const json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key)) schema_error(std::string("missing field '") + key + "'");
  return obj.at(key);
}

double number(const json& v, const std::string& what) {
  if (!v.is_number()) schema_error(what + " must be a number");
  return v.get<double>();
}

std::string text(const json& v, const std::string& what) {
  if (!v.is_string()) schema_error(what + " must be a string");
  return v.get<std::string>();
}

}  // namespace

std::filesystem::path Annotation::resolve(const std::string& p) const {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base_dir / path;
}

Annotation parse_annotation(const json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) schema_error("top level must be an object");
  Annotation a;
  a.base_dir = base_dir;
  a.image_path = text(require(doc, "image"), "image");
  a.initial_mesh_path = text(require(doc, "initial_mesh"), "initial_mesh");
  if (doc.contains("silhouette") && !doc.at("silhouette").is_null()) {
    a.silhouette_path = text(doc.at("silhouette"), "silhouette");
  }

  const json& cam = require(doc, "camera");
  a.camera.scale = number(require(cam, "scale"), "camera.scale");
  const json& t = require(cam, "translation");
  if (!t.is_array() || t.size() != 2) schema_error("camera.translation must be [tx, ty]");
  a.camera.translation = Vec2(number(t[0], "camera.translation"), number(t[1], "camera.translation"));
  const json& size = require(cam, "image_size");
  if (!size.is_array() || size.size() != 2 || !size[0].is_number_integer() || !size[1].is_number_integer()) {
    schema_error("camera.image_size must be [width, height]");
  }
  a.camera.width = size[0].get<int>();
  a.camera.height = size[1].get<int>();
  try {
    a.camera.validate();
  } catch (const Error& e) {
    schema_error(e.what());
  }

  const json& joints = require(doc, "joints");
  if (!joints.is_object()) schema_error("joints must be an object");
  for (const auto& [name, _] : joints.items()) {
    if (joint_index(name) < 0) schema_error("unknown joint '" + name + "'");
  }
  for (std::size_t j = 0; j < kNumJoints; ++j) {
    const std::string name(kJointNames[j]);
    if (!joints.contains(name)) throw Error(ErrorKind::MissingJoint, "annotation: missing joint '" + name + "'");
    const json& rec = joints.at(name);
    a.joints.points[j] = Vec2(number(require(rec, "x"), name + ".x"), number(require(rec, "y"), name + ".y"));
    const json& valid = require(rec, "valid");
    if (!valid.is_boolean()) schema_error(name + ".valid must be a boolean");
    a.joints.valid[j] = valid.get<bool>();
  }
  return a;
}

json annotation_to_json(const Annotation& a) {
  json doc;
  doc["image"] = a.image_path;
  if (a.silhouette_path) doc["silhouette"] = *a.silhouette_path;
  doc["initial_mesh"] = a.initial_mesh_path;
  doc["camera"] = {{"scale", a.camera.scale},
                   {"translation", {a.camera.translation.x(), a.camera.translation.y()}},
                   {"image_size", {a.camera.width, a.camera.height}}};
  json joints = json::object();
  for (std::size_t j = 0; j < kNumJoints; ++j) {
    joints[std::string(kJointNames[j])] = {
        {"x", a.joints.points[j].x()}, {"y", a.joints.points[j].y()}, {"valid", a.joints.valid[j]}};
  }
  doc["joints"] = std::move(joints);
  return doc;
}

AnnotationFilter check_annotation(const Annotation& a, const Mask& silhouette) {
  if (silhouette.width() != a.camera.width || silhouette.height() != a.camera.height) {
    throw Error(ErrorKind::SizeMismatch, "annotation: silhouette size differs from camera image size");
  }
  AnnotationFilter f;
  f.joints_in_image = true;
  f.joints_in_silhouette = true;
  for (std::size_t j = 0; j < kNumJoints; ++j) {
    const Vec2& p = a.joints.points[j];
    if (!a.joints.valid[j] || !a.camera.in_image(p)) {
      f.joints_in_image = false;
      if (!a.joints.valid[j]) continue;
    }
    const int x = static_cast<int>(std::floor(p.x()));
    const int y = static_cast<int>(std::floor(p.y()));
    if (!silhouette.contains(x, y) || !silhouette(x, y)) f.joints_in_silhouette = false;
  }
  return f;
}

Annotation load_annotation(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open annotation " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Parse, path.string() + ": " + e.what());
  }
  Annotation a = parse_annotation(doc, path.parent_path());

  const Image<double> image = load_png_gray(a.resolve(a.image_path));
  if (image.width() != a.camera.width || image.height() != a.camera.height) {
    throw Error(ErrorKind::SizeMismatch, path.string() + ": image size differs from camera.image_size");
  }
  if (a.silhouette_path) a.filter = check_annotation(a, load_png_mask(a.resolve(*a.silhouette_path)));
  return a;
}

void save_annotation(const Annotation& annotation, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write annotation " + path.string());
  out << annotation_to_json(annotation).dump(2) << '\n';
}

}  // namespace bodyfit
