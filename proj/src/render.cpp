#include "terrapath/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "terrapath/errors.hpp"

namespace terrapath {

namespace {

constexpr std::array<std::uint8_t, 3> kObstacleColor = {255, 0, 0};
constexpr std::array<std::uint8_t, 3> kUnknownColor = {128, 128, 128};

// overlay palette (first entry black, matching the usual "ours in black")
constexpr std::array<std::array<std::uint8_t, 3>, 5> kPathColors = {{
    {0, 0, 0},
    {240, 200, 0},
    {0, 160, 0},
    {170, 0, 170},
    {0, 170, 200},
}};

}  // namespace

std::array<std::uint8_t, 3> traversability_color(double tau) {
  // warm -> cool anchors
  static constexpr std::array<std::array<double, 3>, 5> anchors = {{
      {215, 25, 28},
      {253, 174, 97},
      {255, 255, 191},
      {171, 217, 233},
      {44, 123, 182},
  }};
  tau = std::clamp(tau, 0.0, 1.0);
  const double t = tau * (anchors.size() - 1);
  const int i = std::min(static_cast<int>(t), static_cast<int>(anchors.size()) - 2);
  const double w = t - i;
  std::array<std::uint8_t, 3> c;
  for (int k = 0; k < 3; ++k)
    c[k] = static_cast<std::uint8_t>(
        std::lround(anchors[i][k] * (1.0 - w) + anchors[i + 1][k] * w));
  return c;
}

PixelMapping pixel_mapping(const HybridMap& map, const RenderOptions& options) {
  PixelMapping m;
  if (options.cell_pixels > 0) {
    m.cell_pixels = options.cell_pixels;
  } else {
    const int long_edge = std::max(map.width(), map.height());
    m.cell_pixels = std::max(1, 800 / std::max(1, long_edge));
  }
  m.image_width = map.width() * m.cell_pixels;
  m.image_height = map.height() * m.cell_pixels;
  return m;
}

double PixelMapping::px_x(const HybridMap& map, double x) const {
  return (x - map.origin_x()) / map.resolution() * cell_pixels;
}

// image y grows downward while map y grows upward
double PixelMapping::px_y(const HybridMap& map, double y) const {
  return image_height - (y - map.origin_y()) / map.resolution() * cell_pixels;
}

namespace {

std::array<std::uint8_t, 3> cell_color(const HybridMap& map, int row, int col) {
  switch (map.cls(row, col)) {
    case CellClass::Obstacle: return kObstacleColor;
    case CellClass::Unknown: return kUnknownColor;
    case CellClass::Terrain: return traversability_color(map.cell(row, col).tau);
  }
  return kUnknownColor;
}

void draw_line(std::vector<std::uint8_t>& img, int w, int h, int x0, int y0,
               int x1, int y1, const std::array<std::uint8_t, 3>& color) {
  const int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
  const int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  int x = x0, y = y0;
  while (true) {
    if (x >= 0 && y >= 0 && x < w && y < h) {
      auto* p = &img[3 * (static_cast<std::size_t>(y) * w + x)];
      p[0] = color[0];
      p[1] = color[1];
      p[2] = color[2];
    }
    if (x == x1 && y == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y += sy;
    }
  }
}

}  // namespace

void render_ppm(const HybridMap& map, const std::string& path,
                const std::vector<PathOverlay>& overlays,
                const RenderOptions& options) {
  const PixelMapping m = pixel_mapping(map, options);
  std::vector<std::uint8_t> img(
      3 * static_cast<std::size_t>(m.image_width) * m.image_height);

  for (int row = 0; row < map.height(); ++row) {
    for (int col = 0; col < map.width(); ++col) {
      const auto color = cell_color(map, row, col);
      for (int py = 0; py < m.cell_pixels; ++py) {
        // cell row 0 sits at the bottom of the image
        const int iy = m.image_height - 1 - (row * m.cell_pixels + py);
        auto* line = &img[3 * (static_cast<std::size_t>(iy) * m.image_width +
                               col * m.cell_pixels)];
        for (int px = 0; px < m.cell_pixels; ++px) {
          line[3 * px] = color[0];
          line[3 * px + 1] = color[1];
          line[3 * px + 2] = color[2];
        }
      }
    }
  }

  for (std::size_t k = 0; k < overlays.size(); ++k) {
    const auto& color = kPathColors[k % kPathColors.size()];
    const auto& poses = overlays[k].poses;
    for (std::size_t i = 1; i < poses.size(); ++i) {
      const int x0 = static_cast<int>(std::lround(m.px_x(map, poses[i - 1].x)));
      const int y0 = static_cast<int>(std::lround(m.px_y(map, poses[i - 1].y)));
      const int x1 = static_cast<int>(std::lround(m.px_x(map, poses[i].x)));
      const int y1 = static_cast<int>(std::lround(m.px_y(map, poses[i].y)));
      draw_line(img, m.image_width, m.image_height, x0, y0, x1, y1, color);
    }
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "P6\n" << m.image_width << " " << m.image_height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.data()),
            static_cast<std::streamsize>(img.size()));
  if (!out) throw IoError("write failed: " + path);
}

void render_svg(const HybridMap& map, const std::string& path,
                const std::vector<PathOverlay>& overlays,
                const RenderOptions& options) {
  const PixelMapping m = pixel_mapping(map, options);
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  char buf[256];

  const int legend_height = overlays.empty() ? 0 : 18 * (int)overlays.size() + 8;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << m.image_width
      << "\" height=\"" << m.image_height + legend_height << "\">\n";

  for (int row = 0; row < map.height(); ++row) {
    for (int col = 0; col < map.width(); ++col) {
      const auto c = cell_color(map, row, col);
      const int x = col * m.cell_pixels;
      const int y = m.image_height - (row + 1) * m.cell_pixels;
      std::snprintf(buf, sizeof(buf),
                    "<rect x=\"%d\" y=\"%d\" width=\"%d\" height=\"%d\" "
                    "fill=\"rgb(%d,%d,%d)\"/>\n",
                    x, y, m.cell_pixels, m.cell_pixels, c[0], c[1], c[2]);
      out << buf;
    }
  }

  for (std::size_t k = 0; k < overlays.size(); ++k) {
    const auto& c = kPathColors[k % kPathColors.size()];
    out << "<polyline fill=\"none\" stroke=\"rgb(" << int(c[0]) << ","
        << int(c[1]) << "," << int(c[2]) << ")\" stroke-width=\"2\" points=\"";
    for (const auto& p : overlays[k].poses) {
      std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", m.px_x(map, p.x),
                    m.px_y(map, p.y));
      out << buf;
    }
    out << "\"/>\n";
  }

  for (std::size_t k = 0; k < overlays.size(); ++k) {
    const auto& c = kPathColors[k % kPathColors.size()];
    const int y = m.image_height + 16 + 18 * static_cast<int>(k);
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"8\" y1=\"%d\" x2=\"36\" y2=\"%d\" "
                  "stroke=\"rgb(%d,%d,%d)\" stroke-width=\"2\"/>"
                  "<text x=\"42\" y=\"%d\" font-size=\"12\">%s</text>\n",
                  y - 4, y - 4, c[0], c[1], c[2], y,
                  overlays[k].label.c_str());
    out << buf;
  }
  out << "</svg>\n";
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace terrapath
