#pragma once

#include <array>
#include <string>
#include <vector>

#include "terrapath/hybrid_map.hpp"
#include "terrapath/planner.hpp"

namespace terrapath {

struct PathOverlay {
  std::string label;
  std::vector<Pose2> poses;
};

struct RenderOptions {
  int cell_pixels = 0;  // <= 0 picks a size targeting ~800 px on the long edge
};

// Traversability colormap: warm at tau = 0 through to cool at tau = 1.
// Obstacle cells render pure red, Unknown cells gray.
std::array<std::uint8_t, 3> traversability_color(double tau);

// Binary PPM (P6), one pixel block per cell, y axis pointing up (row 0 of the
// image is the map's top edge). Overlay polylines are drawn with Bresenham.
void render_ppm(const HybridMap& map, const std::string& path,
                const std::vector<PathOverlay>& overlays = {},
                const RenderOptions& options = {});

// SVG with per-cell rects, overlay polylines and a legend.
void render_svg(const HybridMap& map, const std::string& path,
                const std::vector<PathOverlay>& overlays = {},
                const RenderOptions& options = {});

// World-to-pixel mapping shared by both backends (and their tests).
struct PixelMapping {
  int cell_pixels = 1;
  int image_width = 0;
  int image_height = 0;
  double px_x(const HybridMap& map, double x) const;
  double px_y(const HybridMap& map, double y) const;
};
PixelMapping pixel_mapping(const HybridMap& map, const RenderOptions& options);

}  // namespace terrapath
