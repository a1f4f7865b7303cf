#include "terrapath/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "terrapath/errors.hpp"

namespace terrapath {

namespace {

double to_double(const std::string& v) {
  std::size_t pos = 0;
  const double d = std::stod(v, &pos);
  if (pos != v.size()) throw FormatError("trailing characters in '" + v + "'");
  return d;
}

bool to_bool(const std::string& v) {
  if (v == "1" || v == "true" || v == "on") return true;
  if (v == "0" || v == "false" || v == "off") return false;
  throw FormatError("expected boolean, got '" + v + "'");
}

}  // namespace

bool ToolConfig::apply(const std::string& key, const std::string& value) {
  try {
    if (key == "robot_length") spec.robot_length = to_double(value);
    else if (key == "robot_width") spec.robot_width = to_double(value);
    else if (key == "rho_max") spec.rho_max = to_double(value);
    else if (key == "h_max") spec.h_max = to_double(value);
    else if (key == "weight_roughness") spec.weight_roughness = to_double(value);
    else if (key == "weight_slope") spec.weight_slope = to_double(value);
    else if (key == "w_roughness") spec.w_roughness = to_double(value);
    else if (key == "w_roll") spec.w_roll = to_double(value);
    else if (key == "w_pitch") spec.w_pitch = to_double(value);
    else if (key == "roll_max") spec.roll_max = to_double(value);
    else if (key == "pitch_min") spec.pitch_min = to_double(value);
    else if (key == "pitch_max") spec.pitch_max = to_double(value);
    else if (key == "k_turn") spec.k_turn = to_double(value);
    else if (key == "k_trav") spec.k_trav = to_double(value);
    else if (key == "r_max") spec.r_max = to_double(value);
    else if (key == "fine_resolution") assess.fine_resolution = to_double(value);
    else if (key == "jobs") assess.jobs = static_cast<int>(to_double(value));
    else if (key == "z_ground_percentile")
      segment.z_ground_percentile = to_double(value);
    else if (key == "dynamic_window") segment.dynamic_window = to_bool(value);
    else if (key == "primitive_count")
      search.primitive_count = static_cast<int>(to_double(value));
    else if (key == "kappa_max") search.kappa_max = to_double(value);
    else if (key == "heading_buckets")
      search.heading_buckets = static_cast<int>(to_double(value));
    else if (key == "goal_pos_tol") search.goal_pos_tol = to_double(value);
    else if (key == "goal_heading_tol")
      search.goal_heading_tol = to_double(value);
    else if (key == "paper_literal_cost")
      search.paper_literal_cost = to_bool(value);
    else if (key == "unknown_passable") search.unknown_passable = to_bool(value);
    else if (key == "tau_unknown") search.tau_unknown = to_double(value);
    else if (key == "max_expansions")
      search.max_expansions = static_cast<long>(to_double(value));
    else if (key == "timeout_s") search.timeout_s = to_double(value);
    else return false;
  } catch (const std::invalid_argument&) {
    throw FormatError("invalid value for '" + key + "': " + value);
  }
  return true;
}

void apply_config_text(ToolConfig& config, const std::string& text,
                       const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto eq = line.find('=');
    std::string key, value;
    if (eq == std::string::npos) {
      std::istringstream ls(line);
      ls >> key;
      if (key.empty()) continue;
      throw FormatError("expected key = value in " + origin, line_no);
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    key = trim(line.substr(0, eq));
    value = trim(line.substr(eq + 1));
    if (key.empty() && value.empty()) continue;
    if (!config.apply(key, value))
      throw FormatError("unknown config key '" + key + "' in " + origin,
                        line_no);
  }
}

ToolConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileNotFoundError(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  ToolConfig config;
  apply_config_text(config, ss.str(), path);
  config.spec.validate();
  return config;
}

}  // namespace terrapath
