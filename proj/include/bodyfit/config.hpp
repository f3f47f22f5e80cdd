#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace bodyfit {

/// Flat settings read from `key = value` lines. Every key has a default.
struct Config {
  bool joint_enabled = true;
  bool anchor_enabled = true;
  bool vertex_enabled = true;

  double joint_weight = 10.0;

  int anchor_iters = 3;
  double anchor_margin_px = 20.0;
  double anchor_weight = 1.0;
  int anchor_count = 200;
  double anchor_min_improvement = 1e-3;

  double shading_lambda_photo = 1.0;
  double shading_lambda_depth = 2.0;
  double shading_lambda_smooth = 4.0;
  int shading_gn_iters = 10;
  double shading_magnify_factor = 10.0;
  double shading_albedo = 0.6;

  std::uint64_t seed = 0;
  std::string template_mesh;      // empty: the annotation's initial mesh as-is
  std::string template_metadata;  // empty: built-in metadata when the vertex count matches

  /// Sets one key from its text form. Throws ErrorKind::Config for an
  /// unknown key or a value that does not parse.
  void set(std::string_view key, std::string_view value);
  /// Applies "key=value".
  void apply_override(std::string_view assignment);

  nlohmann::json to_json() const;
};

/// Keys with their default values, in documentation order.
std::vector<std::pair<std::string, std::string>> config_defaults();

/// Reads a config file: one `key = value` per line, `#` starts a comment.
/// Errors carry the line number.
void load_config_file(Config& config, const std::filesystem::path& path);

}  // namespace bodyfit
