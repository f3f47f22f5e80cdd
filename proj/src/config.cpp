#include "bodyfit/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>

#include "bodyfit/error.hpp"

namespace bodyfit {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  throw Error(ErrorKind::Config, "bad value '" + std::string(value) + "' for key '" + std::string(key) + "'");
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(key, v);
}

template <typename T>
T parse_number(std::string_view key, std::string_view v) {
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad_value(key, v);
  return out;
}

double parse_positive(std::string_view key, std::string_view v) {
  const double d = parse_number<double>(key, v);
  if (!(d > 0.0)) bad_value(key, v);
  return d;
}

double parse_non_negative(std::string_view key, std::string_view v) {
  const double d = parse_number<double>(key, v);
  if (!(d >= 0.0)) bad_value(key, v);
  return d;
}

int parse_count(std::string_view key, std::string_view v, int min) {
  const int n = parse_number<int>(key, v);
  if (n < min) bad_value(key, v);
  return n;
}

using Setter = std::function<void(Config&, std::string_view, std::string_view)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"stages.joint.enabled", [](Config& c, auto k, auto v) { c.joint_enabled = parse_bool(k, v); }},
      {"stages.anchor.enabled", [](Config& c, auto k, auto v) { c.anchor_enabled = parse_bool(k, v); }},
      {"stages.vertex.enabled", [](Config& c, auto k, auto v) { c.vertex_enabled = parse_bool(k, v); }},
      {"joint.weight", [](Config& c, auto k, auto v) { c.joint_weight = parse_positive(k, v); }},
      {"anchor.iters", [](Config& c, auto k, auto v) { c.anchor_iters = parse_count(k, v, 0); }},
      {"anchor.margin_px", [](Config& c, auto k, auto v) { c.anchor_margin_px = parse_non_negative(k, v); }},
      {"anchor.weight", [](Config& c, auto k, auto v) { c.anchor_weight = parse_positive(k, v); }},
      {"anchor.count", [](Config& c, auto k, auto v) { c.anchor_count = parse_count(k, v, 1); }},
      {"anchor.min_improvement",
       [](Config& c, auto k, auto v) { c.anchor_min_improvement = parse_non_negative(k, v); }},
      {"shading.lambda_photo", [](Config& c, auto k, auto v) { c.shading_lambda_photo = parse_positive(k, v); }},
      {"shading.lambda_depth", [](Config& c, auto k, auto v) { c.shading_lambda_depth = parse_positive(k, v); }},
      {"shading.lambda_smooth", [](Config& c, auto k, auto v) { c.shading_lambda_smooth = parse_positive(k, v); }},
      {"shading.gn_iters", [](Config& c, auto k, auto v) { c.shading_gn_iters = parse_count(k, v, 0); }},
      {"shading.magnify_factor",
       [](Config& c, auto k, auto v) { c.shading_magnify_factor = parse_number<double>(k, v); }},
      {"shading.albedo",
       [](Config& c, auto k, auto v) {
         const double a = parse_positive(k, v);
         if (a > 1.0) bad_value(k, v);
         c.shading_albedo = a;
       }},
      {"seed", [](Config& c, auto k, auto v) { c.seed = parse_number<std::uint64_t>(k, v); }},
      {"template.mesh", [](Config& c, auto, auto v) { c.template_mesh = std::string(v); }},
      {"template.metadata", [](Config& c, auto, auto v) { c.template_metadata = std::string(v); }},
  };
  return table;
}

std::string format_double(double d) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, d);
  return std::string(buf, res.ptr);
}

}  // namespace

void Config::set(std::string_view key, std::string_view value) {
  const auto& table = setters();
  const auto it = table.find(key);
  if (it == table.end()) throw Error(ErrorKind::Config, "unknown config key '" + std::string(key) + "'");
  it->second(*this, key, trim(value));
}

void Config::apply_override(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw Error(ErrorKind::Config, "expected key=value, got '" + std::string(assignment) + "'");
  }
  set(trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

nlohmann::json Config::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [key, value] : config_defaults()) j[key] = value;
  // Overwrite with the current values.
  j["stages.joint.enabled"] = joint_enabled;
  j["stages.anchor.enabled"] = anchor_enabled;
  j["stages.vertex.enabled"] = vertex_enabled;
  j["joint.weight"] = joint_weight;
  j["anchor.iters"] = anchor_iters;
  j["anchor.margin_px"] = anchor_margin_px;
  j["anchor.weight"] = anchor_weight;
  j["anchor.count"] = anchor_count;
  j["anchor.min_improvement"] = anchor_min_improvement;
  j["shading.lambda_photo"] = shading_lambda_photo;
  j["shading.lambda_depth"] = shading_lambda_depth;
  j["shading.lambda_smooth"] = shading_lambda_smooth;
  j["shading.gn_iters"] = shading_gn_iters;
  j["shading.magnify_factor"] = shading_magnify_factor;
  j["shading.albedo"] = shading_albedo;
  j["seed"] = seed;
  j["template.mesh"] = template_mesh;
  j["template.metadata"] = template_metadata;
  return j;
}

std::vector<std::pair<std::string, std::string>> config_defaults() {
  const Config c;
  return {
      {"stages.joint.enabled", "true"},
      {"stages.anchor.enabled", "true"},
      {"stages.vertex.enabled", "true"},
      {"joint.weight", format_double(c.joint_weight)},
      {"anchor.iters", std::to_string(c.anchor_iters)},
      {"anchor.margin_px", format_double(c.anchor_margin_px)},
      {"anchor.weight", format_double(c.anchor_weight)},
      {"anchor.count", std::to_string(c.anchor_count)},
      {"anchor.min_improvement", format_double(c.anchor_min_improvement)},
      {"shading.lambda_photo", format_double(c.shading_lambda_photo)},
      {"shading.lambda_depth", format_double(c.shading_lambda_depth)},
      {"shading.lambda_smooth", format_double(c.shading_lambda_smooth)},
      {"shading.gn_iters", std::to_string(c.shading_gn_iters)},
      {"shading.magnify_factor", format_double(c.shading_magnify_factor)},
      {"shading.albedo", format_double(c.shading_albedo)},
      {"seed", std::to_string(c.seed)},
      {"template.mesh", ""},
      {"template.metadata", ""},
  };
}

void load_config_file(Config& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open config file " + path.string());
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view(line);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    try {
      config.apply_override(view);
    } catch (const Error& e) {
      throw Error(ErrorKind::Config, path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

}  // namespace bodyfit
