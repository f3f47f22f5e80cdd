#include "bodyfit/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "bodyfit/annotation.hpp"
#include "bodyfit/body_template.hpp"
#include "bodyfit/config.hpp"
#include "bodyfit/dataset.hpp"
#include "bodyfit/error.hpp"
#include "bodyfit/eval.hpp"
#include "bodyfit/fitting.hpp"
#include "bodyfit/image_io.hpp"
#include "bodyfit/mesh_io.hpp"
#include "bodyfit/pipeline.hpp"
#include "bodyfit/raster.hpp"

namespace bodyfit {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Thrown for usage problems that should end with exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_json(const json& doc, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

// Each --config entry is either an existing file or a key=value override,
// applied in order.
Config build_config(const std::vector<std::string>& entries) {
  Config cfg;
  for (const std::string& e : entries) {
    try {
      if (e.find('=') == std::string::npos) {
        load_config_file(cfg, e);
      } else {
        cfg.apply_override(e);
      }
    } catch (const Error& err) {
      if (err.kind() == ErrorKind::Config) throw UsageError(err.what());
      throw;
    }
  }
  return cfg;
}

struct LoadedInput {
  Annotation annotation;
  TriMesh mesh;
  Observations observations;
};

LoadedInput load_input(const fs::path& annotation_path, const Config& cfg) {
  Annotation a = load_annotation(annotation_path);
  TriMesh mesh = load_mesh(cfg.template_mesh.empty() ? a.resolve(a.initial_mesh_path) : fs::path(cfg.template_mesh));
  Observations obs;
  obs.joints = a.joints;
  obs.image = load_png_gray(a.resolve(a.image_path));
  if (a.silhouette_path) obs.silhouette = load_png_mask(a.resolve(*a.silhouette_path));
  return {std::move(a), std::move(mesh), std::move(obs)};
}

json filter_json(const Annotation& a) {
  if (!a.filter) return nullptr;
  return {{"joints_in_image", a.filter->joints_in_image},
          {"joints_in_silhouette", a.filter->joints_in_silhouette},
          {"filtered", a.filter->filtered()}};
}

// Fits one annotation and writes <stem>_{joint,anchor,vertex}.obj into out_dir.
json fit_one(const fs::path& annotation_path, const fs::path& out_dir, const Config& cfg) {
  const LoadedInput in = load_input(annotation_path, cfg);
  const auto metadata = resolve_template_metadata(cfg, in.mesh);
  const PipelineResult result = run_pipeline(in.mesh, in.annotation.camera, in.observations, metadata, cfg);
  const std::string stem = annotation_path.stem().string();
  if (result.joint_mesh) save_obj(*result.joint_mesh, out_dir / (stem + "_joint.obj"));
  if (result.anchor_mesh) save_obj(*result.anchor_mesh, out_dir / (stem + "_anchor.obj"));
  if (result.vertex_mesh) save_obj(*result.vertex_mesh, out_dir / (stem + "_vertex.obj"));
  json report = pipeline_report(result, cfg);
  report["annotation"] = annotation_path.filename().string();
  report["filter"] = filter_json(in.annotation);
  return report;
}

int run_fit(const fs::path& input, const fs::path& out_dir, const Config& cfg, int jobs, bool keep_filtered) {
  fs::create_directories(out_dir);
  if (!fs::is_directory(input)) {
    write_json(fit_one(input, out_dir, cfg), out_dir / "report.json");
    return 0;
  }

  std::vector<fs::path> items;
  for (const auto& entry : fs::directory_iterator(input)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") items.push_back(entry.path());
  }
  std::sort(items.begin(), items.end());

  // Workers fill their own slot; the log and the final report go through one writer.
  std::vector<json> reports(items.size());
  std::atomic<std::size_t> next{0};
  std::atomic<int> failures{0};
  std::mutex log_mutex;
  auto log = [&](const std::string& line) {
    const std::lock_guard lock(log_mutex);
    std::cerr << line << '\n';
  };
  auto worker = [&] {
    for (std::size_t i = next++; i < items.size(); i = next++) {
      const std::string name = items[i].filename().string();
      try {
        if (!keep_filtered) {
          const Annotation a = load_annotation(items[i]);
          if (a.filter && a.filter->filtered()) {
            reports[i] = {{"annotation", name}, {"skipped", "filtered"}, {"filter", filter_json(a)}};
            log("skip: " + name + " (filtered)");
            continue;
          }
        }
        reports[i] = fit_one(items[i], out_dir, cfg);
        log("done: " + name);
      } catch (const Error& e) {
        ++failures;
        reports[i] = {{"annotation", name}, {"error", {{"kind", to_string(e.kind())}, {"message", e.what()}}}};
        log("error: " + std::string(to_string(e.kind())) + ": " + name + ": " + e.what());
      }
    }
  };
  const int n = std::clamp(jobs, 1, static_cast<int>(std::max<std::size_t>(items.size(), 1)));
  std::vector<std::thread> pool;
  for (int t = 0; t < n; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  write_json(json{{"items", reports}}, out_dir / "report.json");
  return failures == 0 ? 0 : 1;
}

MetricReport evaluate(const TriMesh& pred, const TriMesh& gt, const std::optional<Annotation>& annotation) {
  MetricReport report;
  report.err3d_full = error_3d(pred, gt, Error3DMode::Full);
  if (!annotation) return report;
  const WeakPerspectiveCamera& cam = annotation->camera;
  report.err3d_vis = error_3d(pred, gt, Error3DMode::Visible, &cam);
  if (annotation->silhouette_path) {
    const Mask sil = load_png_mask(annotation->resolve(*annotation->silhouette_path));
    report.sil_iou = silhouette_iou(rasterize(pred, cam).silhouette, sil);
  }
  if (const auto meta = resolve_template_metadata(Config{}, pred); meta && annotation->joints.valid_count() > 0) {
    report.joint_err = joint_error_2d(project_joints(pred, meta->joints, cam), annotation->joints);
  }
  return report;
}

int run_eval(const std::string& pred, const std::string& gt, const std::string& camera, const std::string& out,
             const std::string& csv) {
  std::optional<Annotation> annotation;
  if (!camera.empty()) annotation = load_annotation(camera);

  if (fs::is_directory(pred)) {
    if (!fs::is_directory(gt)) throw UsageError("--gt must be a directory when --pred is");
    std::vector<fs::path> preds;
    for (const auto& entry : fs::directory_iterator(pred)) {
      const auto ext = entry.path().extension();
      if (entry.is_regular_file() && (ext == ".obj" || ext == ".ply")) preds.push_back(entry.path());
    }
    std::sort(preds.begin(), preds.end());
    std::ostringstream table;
    table << metric_csv_header() << '\n';
    for (const fs::path& p : preds) {
      const fs::path g = fs::path(gt) / p.filename();
      if (!fs::exists(g)) throw Error(ErrorKind::Io, "no ground truth for " + p.filename().string());
      table << metric_csv_row(p.stem().string(), evaluate(load_mesh(p), load_mesh(g), annotation)) << '\n';
    }
    if (csv.empty()) {
      std::cout << table.str();
    } else {
      std::ofstream f(csv);
      if (!f) throw Error(ErrorKind::Io, "cannot write " + csv);
      f << table.str();
    }
    return 0;
  }

  const MetricReport report = evaluate(load_mesh(pred), load_mesh(gt), annotation);
  if (!csv.empty()) {
    std::ofstream f(csv);
    if (!f) throw Error(ErrorKind::Io, "cannot write " + csv);
    f << metric_csv_header() << '\n' << metric_csv_row(fs::path(pred).stem().string(), report) << '\n';
  }
  if (out.empty()) {
    std::cout << to_json(report).dump(2) << '\n';
  } else {
    write_json(to_json(report), out);
  }
  return 0;
}

// Fixed soft frontal light for optional shaded renders.
SHLighting default_lighting() {
  SHLighting l;
  l.coefficients = {1.2, 0.1, 0.9, 0.15, 0.0, 0.05, -0.1, 0.05, 0.02};
  return l;
}

int run_gen_views(const std::string& mesh_path, const fs::path& out_dir, int count, std::uint64_t seed, int size,
                  bool all, bool shade) {
  const TriMesh mesh = load_mesh(mesh_path);
  const ViewSchedule schedule = ViewSchedule::default_grid(count, seed);
  const auto views = all ? schedule.candidates() : sample_views(schedule);
  fs::create_directories(out_dir);
  const Vec3 c = centroid(mesh);
  json index = json::array();
  for (std::size_t i = 0; i < views.size(); ++i) {
    const auto [az, el] = views[i];
    const Eigen::Matrix3d r = view_rotation(az, el);
    const TriMesh posed = transformed(mesh, r, -(r * c));
    const WeakPerspectiveCamera cam = fit_camera(posed, size, size);
    const RasterMaps maps = rasterize(posed, cam);

    char name[32];
    std::snprintf(name, sizeof name, "view_%02zu", i);
    save_png_mask(maps.silhouette, out_dir / (std::string(name) + "_sil.png"));
    save_pfm(maps.depth, out_dir / (std::string(name) + "_depth.pfm"));
    save_obj(posed, out_dir / (std::string(name) + ".obj"));
    if (shade) {
      const Image<double> albedo(size, size, kDefaultAlbedo);
      save_png_gray(render_shading(maps.depth, cam, default_lighting(), albedo), out_dir / (std::string(name) + ".png"));
    }
    json v{{"view", name},
           {"azimuth", az},
           {"elevation", el},
           {"camera",
            {{"scale", cam.scale},
             {"translation", {cam.translation.x(), cam.translation.y()}},
             {"image_size", {cam.width, cam.height}}}}};
    write_json(v, out_dir / (std::string(name) + ".json"));
    index.push_back(std::move(v));
  }
  write_json(json{{"seed", seed}, {"views", index}}, out_dir / "views.json");
  return 0;
}

int run_clean_mesh(const std::string& in, const std::string& out, int resolution) {
  const TriMesh mesh = load_mesh(in);
  const TriMesh cleaned = remove_inner_surface(mesh, resolution);
  save_mesh(cleaned, out);
  std::cout << json{{"faces_in", mesh.num_faces()},
                    {"faces_out", cleaned.num_faces()},
                    {"vertices_in", mesh.num_vertices()},
                    {"vertices_out", cleaned.num_vertices()}}
                   .dump()
            << '\n';
  return 0;
}

int run_export_patches(const fs::path& annotation_path, const std::string& level, const fs::path& out_dir,
                       const Config& cfg) {
  const LoadedInput in = load_input(annotation_path, cfg);
  const auto metadata = resolve_template_metadata(cfg, in.mesh);
  const WeakPerspectiveCamera& cam = in.annotation.camera;
  PatchSet set;
  if (level == "joint") {
    if (!metadata) throw Error(ErrorKind::InvalidArgument, "export-patches: no joint handle groups for this mesh");
    set = export_joint_patches(*in.observations.image, in.mesh, cam, metadata->joints, in.observations.joints);
  } else {
    if (!in.observations.silhouette) throw Error(ErrorKind::InvalidArgument, "export-patches: anchor labels need a silhouette");
    const TriMesh with_normals = compute_vertex_normals(in.mesh);
    auto anchors = select_anchor_handles(with_normals, metadata ? metadata->excluded : std::vector<int>{},
                                         cfg.anchor_count, cfg.seed);
    AnchorOracleOptions opts;
    opts.margin_px = cfg.anchor_margin_px;
    anchors = anchor_oracle(FitState{in.mesh, cam, Stage::Initial, {}}, *in.observations.silhouette, anchors, opts);
    set = export_anchor_patches(*in.observations.image, in.mesh, cam, anchors);
  }
  if (set.resized) std::cerr << "warning: input is not 224x224; resampled before cropping\n";

  fs::create_directories(out_dir);
  json labels = json::array();
  for (std::size_t i = 0; i < set.patches.size(); ++i) {
    const Patch& p = set.patches[i];
    char name[32];
    std::snprintf(name, sizeof name, "patch_%03zu.png", i);
    save_png_gray(p.pixels, out_dir / name);
    json rec{{"file", name}, {"center", {p.center.x(), p.center.y()}}, {"off_image", p.off_image}};
    if (set.level == PatchLevel::Joint) {
      rec["joint"] = metadata->joints[i].joint_name;
      rec["motion"] = p.label_valid ? json{p.joint_motion.x(), p.joint_motion.y()} : json(nullptr);
    } else {
      rec["movement"] = p.anchor_movement;
    }
    labels.push_back(std::move(rec));
  }
  write_json(json{{"level", level}, {"patch_size", set.patches.empty() ? 0 : set.patches[0].pixels.width()},
                  {"resized", set.resized}, {"patches", labels}},
             out_dir / "labels.json");
  return 0;
}

int run_make_template(const std::string& mesh_out, const std::string& meta_out) {
  const BodyTemplate t = make_body_template();
  save_mesh(t.mesh, mesh_out);
  write_json(template_metadata_to_json(t.metadata), meta_out);
  return 0;
}

std::string config_help() {
  std::string s = "Config keys (--config FILE or --config key=value, repeatable):\n";
  for (const auto& [k, v] : config_defaults()) s += "  " + k + " = " + v + "\n";
  return s;
}

}  // namespace

int cli_main(const std::vector<std::string>& args) {
  CLI::App app{"Silhouette and shading driven body mesh fitting", "bodyfit"};
  app.require_subcommand(1);
  app.footer(config_help());

  std::vector<std::string> config_entries;

  auto* fit = app.add_subcommand("fit", "fit the template to an annotation (or every *.json in a directory)");
  std::string fit_in, fit_out;
  int jobs = static_cast<int>(std::max(1u, std::min(4u, std::thread::hardware_concurrency())));
  bool keep_filtered = false;
  fit->add_option("--annotation", fit_in, "annotation JSON or directory")->required();
  fit->add_option("--out", fit_out, "output directory")->required();
  fit->add_option("--config", config_entries, "config file or key=value");
  fit->add_option("--jobs", jobs, "worker threads for directory input")->check(CLI::PositiveNumber);
  fit->add_flag("--keep-filtered", keep_filtered, "also fit annotations that fail the filter rules");

  auto* eval = app.add_subcommand("eval", "metrics of a predicted mesh against ground truth");
  std::string pred, gt, camera, eval_out, csv;
  eval->add_option("--pred", pred, "predicted mesh or directory")->required();
  eval->add_option("--gt", gt, "ground-truth mesh or directory")->required();
  eval->add_option("--camera", camera, "annotation JSON supplying camera, silhouette and joints");
  eval->add_option("--out", eval_out, "write the JSON report here instead of stdout");
  eval->add_option("--csv", csv, "write a CSV table");

  auto* gen = app.add_subcommand("gen-views", "render silhouettes and depth maps from sampled viewpoints");
  std::string gen_mesh, gen_out;
  int count = 6, size = 224;
  std::uint64_t seed = 0;
  bool all = false, shade = false;
  gen->add_option("--mesh", gen_mesh, "input mesh")->required();
  gen->add_option("--out", gen_out, "output directory")->required();
  gen->add_option("--count", count, "views per model");
  gen->add_option("--seed", seed, "sampling seed");
  gen->add_option("--size", size, "image size in pixels")->check(CLI::PositiveNumber);
  gen->add_flag("--all", all, "render all candidate views");
  gen->add_flag("--shade", shade, "also write a shaded grayscale image");

  auto* clean = app.add_subcommand("clean-mesh", "remove faces hidden from all six axis views");
  std::string clean_in, clean_out;
  int resolution = 512;
  clean->add_option("--in", clean_in, "input mesh")->required();
  clean->add_option("--out", clean_out, "output mesh")->required();
  clean->add_option("--resolution", resolution, "render resolution")->check(CLI::PositiveNumber);

  auto* patches = app.add_subcommand("export-patches", "crop handle patches with oracle labels");
  std::string patch_in, patch_out, level = "joint";
  patches->add_option("--annotation", patch_in, "annotation JSON")->required();
  patches->add_option("--level", level, "joint or anchor")->check(CLI::IsMember({"joint", "anchor"}));
  patches->add_option("--out", patch_out, "output directory")->required();
  patches->add_option("--config", config_entries, "config file or key=value");

  auto* tmpl = app.add_subcommand("make-template", "write the built-in body template and its metadata");
  std::string tmpl_mesh, tmpl_meta;
  tmpl->add_option("--mesh", tmpl_mesh, "output mesh")->required();
  tmpl->add_option("--metadata", tmpl_meta, "output metadata JSON")->required();

  try {
    std::vector<std::string> rest(args.rbegin(), args.rend());
    if (!rest.empty()) rest.pop_back();  // program name
    app.parse(rest);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: usage: " << e.what() << "\n" << app.help();
    return 2;
  }

  try {
    if (fit->parsed()) return run_fit(fit_in, fit_out, build_config(config_entries), jobs, keep_filtered);
    if (eval->parsed()) return run_eval(pred, gt, camera, eval_out, csv);
    if (gen->parsed()) return run_gen_views(gen_mesh, gen_out, count, seed, size, all, shade);
    if (clean->parsed()) return run_clean_mesh(clean_in, clean_out, resolution);
    if (patches->parsed()) return run_export_patches(patch_in, level, patch_out, build_config(config_entries));
    if (tmpl->parsed()) return run_make_template(tmpl_mesh, tmpl_meta);
  } catch (const UsageError& e) {
    std::cerr << "error: usage: " << e.what() << "\n" << app.help();
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.kind()) << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace bodyfit
