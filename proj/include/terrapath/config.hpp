#pragma once

#include <string>

#include "terrapath/planner.hpp"
#include "terrapath/robot_spec.hpp"
#include "terrapath/terrain_assessment.hpp"
#include "terrapath/voxel_grid.hpp"

namespace terrapath {

// Everything the CLI can configure, defaulting to the reference parameter
// set. Config files are `key = value` lines with # comments; flags override.
struct ToolConfig {
  RobotSpec spec;
  SegmentOptions segment;
  AssessOptions assess;
  SearchParams search;

  // Returns false for unknown keys; throws FormatError on bad values.
  bool apply(const std::string& key, const std::string& value);
};

ToolConfig load_config(const std::string& path);
void apply_config_text(ToolConfig& config, const std::string& text,
                       const std::string& origin = "<string>");

}  // namespace terrapath
