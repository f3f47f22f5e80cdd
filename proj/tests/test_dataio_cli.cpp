#include <doctest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "bodyfit/annotation.hpp"
#include "bodyfit/cli.hpp"
#include "bodyfit/config.hpp"
#include "bodyfit/dataset.hpp"
#include "bodyfit/error.hpp"
#include "bodyfit/eval.hpp"
#include "bodyfit/image_io.hpp"
#include "bodyfit/mesh_io.hpp"
#include "bodyfit/primitives.hpp"
#include "support/fixtures.hpp"

using namespace bodyfit;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::Parse;
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "bodyfit");
  return cli_main(args);
}

json sample_annotation_json() {
  json joints = json::object();
  for (std::size_t k = 0; k < kNumJoints; ++k) {
    joints[std::string(kJointNames[k])] = {{"x", 100.0 + k}, {"y", 50.0 + 5 * k}, {"valid", true}};
  }
  return {{"image", "img.png"},
          {"silhouette", "img_sil.png"},
          {"initial_mesh", "init.obj"},
          {"camera", {{"scale", 104.5}, {"translation", {112.0, 20.0}}, {"image_size", {224, 224}}}},
          {"joints", joints}};
}

}  // namespace

TEST_CASE("annotation schema") {
  const Annotation a = parse_annotation(sample_annotation_json(), "/data");
  CHECK(a.joints.valid_count() == 10);
  CHECK(a.camera.scale == 104.5);
  CHECK(a.camera.width == 224);
  CHECK(a.resolve(a.image_path) == fs::path("/data/img.png"));
  CHECK(annotation_to_json(a) == sample_annotation_json());

  json missing = sample_annotation_json();
  missing["joints"].erase("knee_l");
  CHECK(kind_of([&] { (void)parse_annotation(missing); }) == ErrorKind::MissingJoint);
  json extra = sample_annotation_json();
  extra["joints"]["tail"] = {{"x", 1}, {"y", 1}, {"valid", true}};
  CHECK(kind_of([&] { (void)parse_annotation(extra); }) == ErrorKind::Parse);
  json no_camera = sample_annotation_json();
  no_camera.erase("camera");
  CHECK(kind_of([&] { (void)parse_annotation(no_camera); }) == ErrorKind::Parse);
  json bad_scale = sample_annotation_json();
  bad_scale["camera"]["scale"] = "big";
  CHECK(kind_of([&] { (void)parse_annotation(bad_scale); }) == ErrorKind::Parse);
}

TEST_CASE("annotation files and the filter rules") {
  const fs::path dir = fixtures::scratch_dir("annot");
  const fs::path path = fixtures::write_pose_annotation(dir, "case", 1000);
  const Annotation a = load_annotation(path);
  CHECK(a.joints.valid_count() == 10);
  REQUIRE(a.filter.has_value());
  CHECK_FALSE(a.filter->filtered());

  // Load then save gives the same document.
  save_annotation(a, dir / "copy.json");
  CHECK(read_json(dir / "copy.json") == read_json(path));

  const Mask sil = load_png_mask(dir / "case_sil.png");
  Annotation outside = a;
  outside.joints.points[0] = Vec2(0.5, 0.5);
  REQUIRE(sil(0, 0) == 0);
  AnnotationFilter f = check_annotation(outside, sil);
  CHECK(f.joints_in_image);
  CHECK_FALSE(f.joints_in_silhouette);
  CHECK(f.filtered());

  Annotation hidden = a;
  hidden.joints.valid[3] = false;
  f = check_annotation(hidden, sil);
  CHECK_FALSE(f.joints_in_image);
  CHECK(f.joints_in_silhouette);

  Annotation off = a;
  off.joints.points[2] = Vec2(-4, 10);
  CHECK_FALSE(check_annotation(off, sil).joints_in_image);
}

TEST_CASE("view sampling") {
  const ViewSchedule grid = ViewSchedule::default_grid();
  const auto all = grid.candidates();
  REQUIRE(all.size() == 54);
  CHECK(all.front() == std::make_pair(0.0, -10.0));
  CHECK(all.back() == std::make_pair(340.0, 10.0));
  CHECK(std::set<std::pair<double, double>>(all.begin(), all.end()).size() == 54);

  const auto six = sample_views(ViewSchedule::default_grid(6, 42));
  CHECK(six.size() == 6);
  CHECK(std::set<std::pair<double, double>>(six.begin(), six.end()).size() == 6);
  CHECK(sample_views(ViewSchedule::default_grid(6, 42)) == six);
  CHECK(sample_views(ViewSchedule::default_grid(54, 1)).size() == 54);
  CHECK(kind_of([] { (void)sample_views(ViewSchedule::default_grid(55, 0)); }) == ErrorKind::InvalidArgument);

  std::set<std::vector<std::pair<double, double>>> sequences;
  for (std::uint64_t s = 0; s < 100; ++s) sequences.insert(sample_views(ViewSchedule::default_grid(6, s)));
  CHECK(sequences.size() >= 99);

  const Eigen::Matrix3d r = view_rotation(90, 0);
  CHECK((r * Vec3::UnitZ() - Vec3(-1, 0, 0)).norm() < 1e-12);
  CHECK((view_rotation(0, 0) - Eigen::Matrix3d::Identity()).norm() == 0.0);
}

TEST_CASE("inner surface removal") {
  const TriMesh outer = make_cube(1.0);
  const TriMesh nested = merge(outer, make_cube(0.3));
  const TriMesh cleaned = remove_inner_surface(nested);
  CHECK(cleaned.vertices() == outer.vertices());
  CHECK(cleaned.faces() == outer.faces());
  CHECK(remove_inner_surface(cleaned).faces() == cleaned.faces());

  const TriMesh sphere = make_icosphere(3);
  const TriMesh same = remove_inner_surface(sphere, 512);
  CHECK(same.num_faces() == sphere.num_faces());
  CHECK(same.num_vertices() <= sphere.num_vertices());

  const BodyTemplate& t = fixtures::body_template();
  const TriMesh body = remove_inner_surface(t.mesh, 512);
  CHECK(body.num_vertices() <= t.mesh.num_vertices());
  for (const Face& f : body.faces()) {
    for (int v : f) CHECK(static_cast<std::size_t>(v) < body.num_vertices());
  }
  const TriMesh twice = remove_inner_surface(body, 512);
  CHECK(twice.faces() == body.faces());
  CHECK(twice.vertices() == body.vertices());
}

TEST_CASE("patch export") {
  const BodyTemplate& t = fixtures::body_template();
  const WeakPerspectiveCamera cam = fit_camera(t.mesh, 224, 224);
  Image<double> image(224, 224, 0.0);
  for (int y = 0; y < 224; ++y) {
    for (int x = 0; x < 224; ++x) image(x, y) = 0.25 + 0.5 * ((x + y) % 2);
  }

  SUBCASE("one 64 x 64 patch per joint") {
    const Joints2D j = project_joints(t.mesh, t.metadata.joints, cam);
    const PatchSet set = export_joint_patches(image, t.mesh, cam, t.metadata.joints, j);
    REQUIRE(set.patches.size() == 10);
    for (const Patch& p : set.patches) {
      CHECK(p.pixels.width() == kJointPatchSize);
      CHECK(p.pixels.height() == kJointPatchSize);
      CHECK(p.label_valid);
      CHECK(p.joint_motion.norm() < 1e-9);
    }
    CHECK_FALSE(set.resized);
  }
  SUBCASE("one 32 x 32 patch per anchor") {
    const auto anchors = select_anchor_handles(compute_vertex_normals(t.mesh), t.metadata.excluded, 200, 0);
    const PatchSet set = export_anchor_patches(image, t.mesh, cam, anchors);
    REQUIRE(set.patches.size() == 200);
    for (const Patch& p : set.patches) {
      CHECK(p.pixels.width() == kAnchorPatchSize);
      CHECK(p.pixels.height() == kAnchorPatchSize);
    }
  }
  SUBCASE("corner and off-image handles") {
    const WeakPerspectiveCamera unit{100.0, Vec2(112, 112), 224, 224};
    const TriMesh tri({Vec3(-1.115, -1.115, 0), Vec3(-1.5, -1.5, 0), Vec3(0, 0, 0)}, {{0, 1, 2}});
    const Image<double> ones(224, 224, 1.0);
    const PatchSet set = export_anchor_patches(ones, tri, unit, {{0, Vec3::UnitZ(), true, 0.02}, {1, Vec3::UnitZ(), false, 0}});
    REQUIRE(set.patches.size() == 2);
    const Patch& corner = set.patches[0];
    CHECK_FALSE(corner.off_image);
    CHECK(corner.anchor_movement == 0.02);
    const int half = kAnchorPatchSize / 2;
    for (int y = 0; y < kAnchorPatchSize; ++y) {
      for (int x = 0; x < kAnchorPatchSize; ++x) CHECK(corner.pixels(x, y) == ((x >= half && y >= half) ? 1.0 : 0.0));
    }
    const Patch& gone = set.patches[1];
    CHECK(gone.off_image);
    for (double v : gone.pixels.data()) CHECK(v == 0.0);
  }
  SUBCASE("other image sizes are resampled") {
    const WeakPerspectiveCamera half{cam.scale / 2, cam.translation / 2, 112, 112};
    const PatchSet set = export_joint_patches(resize_bilinear(image, 112, 112), t.mesh, half, t.metadata.joints,
                                              project_joints(t.mesh, t.metadata.joints, half));
    CHECK(set.resized);
    REQUIRE(set.patches.size() == 10);
    CHECK(set.patches[0].pixels.width() == kJointPatchSize);
    CHECK((set.patches[0].center - project_joints(t.mesh, t.metadata.joints, cam).points[0]).norm() < 1e-9);
  }
}

TEST_CASE("configuration") {
  Config c;
  c.set("joint.weight", "12.5");
  c.apply_override("stages.anchor.enabled=false");
  c.apply_override("shading.gn_iters = 4");
  CHECK(c.joint_weight == 12.5);
  CHECK_FALSE(c.anchor_enabled);
  CHECK(c.shading_gn_iters == 4);
  CHECK(kind_of([&] { c.set("joint.wieght", "1"); }) == ErrorKind::Config);
  CHECK(kind_of([&] { c.set("anchor.iters", "three"); }) == ErrorKind::Config);
  CHECK(kind_of([&] { c.apply_override("seed"); }) == ErrorKind::Config);

  const auto defaults = config_defaults();
  Config fresh;
  const json j = fresh.to_json();
  for (const auto& [k, v] : defaults) CHECK(j.contains(k));
  CHECK(j.size() == defaults.size());

  const fs::path dir = fixtures::scratch_dir("config");
  std::ofstream(dir / "ok.cfg") << "# ablation\nstages.vertex.enabled = false\n\nseed = 7  # fixed\n";
  Config from_file;
  load_config_file(from_file, dir / "ok.cfg");
  CHECK_FALSE(from_file.vertex_enabled);
  CHECK(from_file.seed == 7);

  std::ofstream(dir / "bad.cfg") << "seed = 1\n# fine\nnot.a.key = 3\n";
  try {
    load_config_file(from_file, dir / "bad.cfg");
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Config);
    CHECK(std::string(e.what()).find("bad.cfg:3") != std::string::npos);
  }
}

TEST_CASE("command line") {
  const fs::path in = fixtures::scratch_dir("cli_in");
  const fs::path ann = fixtures::write_pose_annotation(in, "person", 1004);

  SUBCASE("fit writes one mesh per stage and a report") {
    const fs::path out = fixtures::scratch_dir("cli_fit");
    REQUIRE(run({"fit", "--annotation", ann.string(), "--out", out.string()}) == 0);
    for (const char* s : {"person_joint.obj", "person_anchor.obj", "person_vertex.obj", "report.json"}) {
      CHECK(fs::exists(out / s));
    }
    const json rep = read_json(out / "report.json");
    CHECK(rep["final_stage"] == "vertex_done");
    CHECK(rep["snapshots"].size() == 4);
    const double iou0 = rep["snapshots"][0]["sil_iou"], iou2 = rep["snapshots"][2]["sil_iou"];
    CHECK(iou2 > iou0);
    CHECK(load_mesh(out / "person_vertex.obj").num_vertices() == 27554);

    SUBCASE("eval of a mesh against itself") {
      const std::string mesh = (out / "person_anchor.obj").string();
      REQUIRE(run({"eval", "--pred", mesh, "--gt", mesh, "--camera", ann.string(), "--out",
                   (out / "eval.json").string()}) == 0);
      const json ev = read_json(out / "eval.json");
      CHECK(ev["err3d_full_mm"] == 0.0);
      CHECK(ev["err3d_vis_mm"] == 0.0);
      CHECK(ev.contains("joint_err_px"));
    }
  }
  SUBCASE("anchor stage switched off") {
    const fs::path out = fixtures::scratch_dir("cli_ablate");
    REQUIRE(run({"fit", "--annotation", ann.string(), "--out", out.string(), "--config",
                 "stages.anchor.enabled=false", "--config", "stages.vertex.enabled=false"}) == 0);
    CHECK(fs::exists(out / "person_joint.obj"));
    CHECK_FALSE(fs::exists(out / "person_anchor.obj"));
    CHECK_FALSE(fs::exists(out / "person_vertex.obj"));
    const json rep = read_json(out / "report.json");
    CHECK(rep["stages"][1]["stage"] == "anchor");
    CHECK(rep["stages"][1]["status"] == "skipped");
    CHECK(rep["stages"][1]["reason"] == "disabled");
  }
  SUBCASE("two runs give identical files") {
    const fs::path a = fixtures::scratch_dir("cli_det_a"), b = fixtures::scratch_dir("cli_det_b");
    for (const fs::path& out : {a, b}) {
      REQUIRE(run({"fit", "--annotation", ann.string(), "--out", out.string(), "--config",
                   "stages.vertex.enabled=false"}) == 0);
    }
    for (const char* s : {"person_joint.obj", "person_anchor.obj", "report.json"}) {
      CHECK(read_bytes(a / s) == read_bytes(b / s));
    }
  }
  SUBCASE("directory of annotations") {
    fixtures::write_pose_annotation(in, "other", 1005);
    std::ofstream(in / "broken.json") << "{";
    const fs::path out = fixtures::scratch_dir("cli_dir");
    CHECK(run({"fit", "--annotation", in.string(), "--out", out.string(), "--jobs", "2", "--config",
               "stages.vertex.enabled=false"}) == 1);
    const json rep = read_json(out / "report.json");
    REQUIRE(rep["items"].size() == 3);
    CHECK(rep["items"][0]["annotation"] == "broken.json");
    CHECK(rep["items"][0]["error"]["kind"] == "parse");
    CHECK(rep["items"][1]["annotation"] == "other.json");
    CHECK(rep["items"][2]["annotation"] == "person.json");
    CHECK(fs::exists(out / "other_anchor.obj"));
    CHECK(fs::exists(out / "person_anchor.obj"));
  }
  SUBCASE("usage errors") {
    CHECK(run({"frobnicate"}) == 2);
    CHECK(run({}) == 2);
    CHECK(run({"fit", "--annotation", ann.string()}) == 2);
    CHECK(run({"fit", "--annotation", ann.string(), "--out", "x", "--config", "no.such.key=1"}) == 2);
    CHECK(run({"--help"}) == 0);
    CHECK(run({"eval", "--pred", (in / "missing.obj").string(), "--gt", (in / "missing.obj").string()}) == 1);
  }
  SUBCASE("views, cleaning and patches") {
    const fs::path out = fixtures::scratch_dir("cli_tools");
    REQUIRE(run({"gen-views", "--mesh", (in / "person_init.obj").string(), "--out", (out / "views").string(),
                 "--count", "6", "--seed", "3", "--size", "96"}) == 0);
    const json views = read_json(out / "views" / "views.json");
    CHECK(views["views"].size() == 6);
    const Mask sil = load_png_mask(out / "views" / "view_00_sil.png");
    CHECK(sil.width() == 96);
    CHECK(count_set(sil) > 500);
    CHECK(fs::exists(out / "views" / "view_05_depth.pfm"));

    save_obj(merge(make_cube(1.0), make_cube(0.3)), out / "nested.obj");
    REQUIRE(run({"clean-mesh", "--in", (out / "nested.obj").string(), "--out", (out / "clean.obj").string()}) == 0);
    CHECK(load_mesh(out / "clean.obj").num_faces() == 12);

    REQUIRE(run({"export-patches", "--annotation", ann.string(), "--level", "joint", "--out",
                 (out / "jp").string()}) == 0);
    CHECK(read_json(out / "jp" / "labels.json")["patches"].size() == 10);
    REQUIRE(run({"export-patches", "--annotation", ann.string(), "--level", "anchor", "--out",
                 (out / "ap").string()}) == 0);
    const json labels = read_json(out / "ap" / "labels.json");
    CHECK(labels["patches"].size() == 200);
    CHECK(labels["patch_size"] == 32);
    CHECK(load_png_gray(out / "ap" / "patch_199.png").width() == 32);
  }
}
