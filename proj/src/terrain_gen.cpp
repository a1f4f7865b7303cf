#include "terrapath/terrain_gen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "terrapath/errors.hpp"

namespace terrapath {

namespace {

// splitmix64 counter hash; the whole generator is built on it so clouds are
// bit-identical across platforms and thread counts
std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

double uniform01(std::uint64_t seed, std::uint64_t counter, std::uint64_t lane) {
  const std::uint64_t h = mix64(mix64(seed ^ mix64(counter)) ^ lane);
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double gaussian(std::uint64_t seed, std::uint64_t counter, std::uint64_t lane) {
  // Box-Muller; clamp u1 away from zero to keep log finite
  const double u1 = std::max(uniform01(seed, counter, lane), 0x1.0p-53);
  const double u2 = uniform01(seed, counter, lane + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

double sq(double v) { return v * v; }

}  // namespace

void ScenarioSpec::validate() const {
  if (!(extent_x > 0.0) || !(extent_y > 0.0))
    throw InvalidSpecError("scenario extent must be positive");
  if (!(density > 0.0)) throw InvalidSpecError("density must be positive");
  if (noise_sigma < 0.0) throw InvalidSpecError("noise_sigma must be >= 0");
  for (const auto& f : features) {
    const bool radial = f.type == Feature::Type::Bump ||
                        f.type == Feature::Type::Pit ||
                        f.type == Feature::Type::Boulder;
    if (radial) {
      if (!(f.radius > 0.0)) throw InvalidSpecError("feature radius must be > 0");
      if (f.cx < 0 || f.cy < 0 || f.cx > extent_x || f.cy > extent_y)
        throw InvalidSpecError("feature center outside extent");
    } else {
      if (f.x0 > f.x1 || f.y0 > f.y1)
        throw InvalidSpecError("feature region must have x0<=x1, y0<=y1");
      if (f.x0 < 0 || f.y0 < 0 || f.x1 > extent_x || f.y1 > extent_y)
        throw InvalidSpecError("feature region outside extent");
    }
  }
}

// --- analytic surface -------------------------------------------------------

namespace {

bool in_region(const Feature& f, double x, double y) {
  return x >= f.x0 && x <= f.x1 && y >= f.y0 && y <= f.y1;
}

double wall_distance(const Feature& f, double x, double y) {
  // distance to the segment (x0,y0)-(x1,y1)
  const double vx = f.x1 - f.x0, vy = f.y1 - f.y0;
  const double len2 = vx * vx + vy * vy;
  double t = len2 > 0.0 ? ((x - f.x0) * vx + (y - f.y0) * vy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(x - (f.x0 + t * vx), y - (f.y0 + t * vy));
}

// ground surface height (canopy excluded)
double surface_z(const ScenarioSpec& spec, double x, double y) {
  double z = 0.0;
  for (const auto& f : spec.features) {
    switch (f.type) {
      case Feature::Type::Ramp:
        if (y >= f.y0 && y <= f.y1)
          z += std::tan(f.alpha) * std::clamp(x - f.x0, 0.0, f.x1 - f.x0);
        break;
      case Feature::Type::Bump: {
        const double d = std::hypot(x - f.cx, y - f.cy);
        if (d < f.radius) z += f.height * sq(std::cos(M_PI * d / (2.0 * f.radius)));
        break;
      }
      case Feature::Type::Pit: {
        const double d = std::hypot(x - f.cx, y - f.cy);
        if (d < f.radius) z -= f.height * sq(std::cos(M_PI * d / (2.0 * f.radius)));
        break;
      }
      case Feature::Type::Boulder:
        if (std::hypot(x - f.cx, y - f.cy) <= f.radius) z += f.height;
        break;
      case Feature::Type::Wall:
        if (wall_distance(f, x, y) <= 0.5 * f.thickness) z += f.height;
        break;
      case Feature::Type::Canopy:
        break;  // overhanging, not part of the ground surface
    }
  }
  return z;
}

Eigen::Vector2d surface_gradient(const ScenarioSpec& spec, double x, double y) {
  Eigen::Vector2d g = Eigen::Vector2d::Zero();
  for (const auto& f : spec.features) {
    switch (f.type) {
      case Feature::Type::Ramp:
        if (y >= f.y0 && y <= f.y1 && x > f.x0 && x < f.x1)
          g.x() += std::tan(f.alpha);
        break;
      case Feature::Type::Bump:
      case Feature::Type::Pit: {
        const double d = std::hypot(x - f.cx, y - f.cy);
        if (d > 1e-12 && d < f.radius) {
          // d/dd of h*cos^2(pi d / 2r) = -h * pi/(2r) * sin(pi d / r)
          double dz = -f.height * M_PI / (2.0 * f.radius) *
                      std::sin(M_PI * d / f.radius);
          if (f.type == Feature::Type::Pit) dz = -dz;
          g.x() += dz * (x - f.cx) / d;
          g.y() += dz * (y - f.cy) / d;
        }
        break;
      }
      default:
        break;  // discontinuous features carry no smooth gradient
    }
  }
  return g;
}

}  // namespace

GroundTruth::GroundTruth(const ScenarioSpec& spec, double rho_max, double h_max)
    : spec_(spec), rho_max_(rho_max), h_max_(h_max) {}

double GroundTruth::elevation(double x, double y) const {
  return surface_z(spec_, x, y);
}

double GroundTruth::inclination(double x, double y) const {
  return std::atan(surface_gradient(spec_, x, y).norm());
}

CellClass GroundTruth::classify(double x, double y) const {
  for (const auto& f : spec_.features) {
    switch (f.type) {
      case Feature::Type::Wall:
        if (wall_distance(f, x, y) <= 0.5 * f.thickness + 0.4)
          return CellClass::Obstacle;
        break;
      case Feature::Type::Boulder: {
        // sharp rim: any cell straddling the edge sees a step > h_max
        const double d = std::hypot(x - f.cx, y - f.cy);
        if (f.height > h_max_ && std::abs(d - f.radius) <= 0.4)
          return CellClass::Obstacle;
        break;
      }
      case Feature::Type::Ramp:
        if (in_region(f, x, y) && f.alpha > rho_max_) return CellClass::Obstacle;
        break;
      default:
        break;
    }
  }
  if (inclination(x, y) > rho_max_) return CellClass::Obstacle;
  return CellClass::Terrain;
}

bool GroundTruth::near_feature_edge(double x, double y, double margin) const {
  for (const auto& f : spec_.features) {
    switch (f.type) {
      case Feature::Type::Ramp: {
        // fold lines at x0 and x1 within the region's y band (plus margin)
        if (y >= f.y0 - margin && y <= f.y1 + margin) {
          if (std::abs(x - f.x0) <= margin || std::abs(x - f.x1) <= margin)
            return true;
          // region y edges are cliffs when the ramp is not full width
          if ((std::abs(y - f.y0) <= margin || std::abs(y - f.y1) <= margin) &&
              x >= f.x0 - margin)
            return true;
        }
        break;
      }
      case Feature::Type::Bump:
      case Feature::Type::Pit:
      case Feature::Type::Boulder: {
        // the feature edge is the rim circle d = radius
        const double d = std::hypot(x - f.cx, y - f.cy);
        if (std::abs(d - f.radius) <= margin) return true;
        break;
      }
      case Feature::Type::Wall:
        if (wall_distance(f, x, y) <= 0.5 * f.thickness + margin) return true;
        break;
      case Feature::Type::Canopy:
        break;  // no ground-surface edge
    }
  }
  return false;
}

// --- sampling ---------------------------------------------------------------

GeneratedScenario generate(const ScenarioSpec& spec) {
  spec.validate();
  GeneratedScenario out;
  out.spec = spec;

  const auto n_base = static_cast<std::uint64_t>(
      std::llround(spec.density * spec.extent_x * spec.extent_y));
  out.cloud.points.reserve(n_base);
  for (std::uint64_t k = 0; k < n_base; ++k) {
    Point3 p;
    p.x = uniform01(spec.seed, k, 0) * spec.extent_x;
    p.y = uniform01(spec.seed, k, 2) * spec.extent_y;
    p.z = surface_z(spec, p.x, p.y);
    if (spec.noise_sigma > 0.0)
      p.z += spec.noise_sigma * gaussian(spec.seed, k, 4);
    out.cloud.points.push_back(p);
  }

  // canopy points are appended after the base surface so the base sampling
  // stream is identical with and without canopy features
  std::uint64_t stream = 1;
  for (const auto& f : spec.features) {
    if (f.type != Feature::Type::Canopy) continue;
    const double area = (f.x1 - f.x0) * (f.y1 - f.y0);
    const auto n = static_cast<std::uint64_t>(std::llround(spec.density * area));
    const std::uint64_t canopy_seed = mix64(spec.seed ^ mix64(0xC0FFEEull + stream));
    for (std::uint64_t k = 0; k < n; ++k) {
      Point3 p;
      p.x = f.x0 + uniform01(canopy_seed, k, 0) * (f.x1 - f.x0);
      p.y = f.y0 + uniform01(canopy_seed, k, 2) * (f.y1 - f.y0);
      p.z = surface_z(spec, p.x, p.y) + f.height;
      if (spec.noise_sigma > 0.0)
        p.z += spec.noise_sigma * gaussian(canopy_seed, k, 4);
      out.cloud.points.push_back(p);
    }
    ++stream;
  }

  out.cloud.recompute_bounds();
  return out;
}

// --- scenario config --------------------------------------------------------

namespace {

std::map<std::string, double> parse_kv(const std::vector<std::string>& toks,
                                       std::size_t from, std::size_t line_no) {
  std::map<std::string, double> kv;
  for (std::size_t i = from; i < toks.size(); ++i) {
    const auto eq = toks[i].find('=');
    if (eq == std::string::npos)
      throw FormatError("expected key=value, got '" + toks[i] + "'", line_no);
    try {
      kv[toks[i].substr(0, eq)] = std::stod(toks[i].substr(eq + 1));
    } catch (const std::exception&) {
      throw FormatError("invalid number in '" + toks[i] + "'", line_no);
    }
  }
  return kv;
}

double take(std::map<std::string, double>& kv, const std::string& key,
            std::size_t line_no) {
  const auto it = kv.find(key);
  if (it == kv.end())
    throw FormatError("missing feature parameter '" + key + "'", line_no);
  const double v = it->second;
  kv.erase(it);
  return v;
}

double take_or(std::map<std::string, double>& kv, const std::string& key,
               double fallback) {
  const auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  const double v = it->second;
  kv.erase(it);
  return v;
}

}  // namespace

ScenarioSpec parse_scenario_text(const std::string& text,
                                 const std::string& origin) {
  ScenarioSpec spec;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::istringstream ls(line);
    std::vector<std::string> toks;
    std::string tok;
    while (ls >> tok) toks.push_back(tok);
    if (toks.empty()) continue;

    const std::string& key = toks[0];
    if (key == "extent") {
      if (toks.size() != 3) throw FormatError("extent needs two values", line_no);
      spec.extent_x = std::stod(toks[1]);
      spec.extent_y = std::stod(toks[2]);
    } else if (key == "density") {
      spec.density = std::stod(toks.at(1));
    } else if (key == "seed") {
      spec.seed = std::stoull(toks.at(1));
    } else if (key == "noise_sigma") {
      spec.noise_sigma = std::stod(toks.at(1));
    } else if (key == "feature") {
      if (toks.size() < 2) throw FormatError("feature needs a type", line_no);
      auto kv = parse_kv(toks, 2, line_no);
      Feature f;
      const std::string& type = toks[1];
      if (type == "ramp") {
        f.type = Feature::Type::Ramp;
        f.x0 = take(kv, "x0", line_no);
        f.y0 = take(kv, "y0", line_no);
        f.x1 = take(kv, "x1", line_no);
        f.y1 = take(kv, "y1", line_no);
        f.alpha = take(kv, "alpha", line_no);
      } else if (type == "bump" || type == "pit" || type == "boulder") {
        f.type = type == "bump" ? Feature::Type::Bump
                 : type == "pit" ? Feature::Type::Pit
                                 : Feature::Type::Boulder;
        f.cx = take(kv, "cx", line_no);
        f.cy = take(kv, "cy", line_no);
        f.radius = take(kv, "radius", line_no);
        f.height = take(kv, type == "pit" ? "depth" : "height", line_no);
      } else if (type == "wall") {
        f.type = Feature::Type::Wall;
        f.x0 = take(kv, "x0", line_no);
        f.y0 = take(kv, "y0", line_no);
        f.x1 = take(kv, "x1", line_no);
        f.y1 = take(kv, "y1", line_no);
        f.height = take_or(kv, "height", 2.0);
        f.thickness = take_or(kv, "thickness", 0.2);
      } else if (type == "canopy") {
        f.type = Feature::Type::Canopy;
        f.x0 = take(kv, "x0", line_no);
        f.y0 = take(kv, "y0", line_no);
        f.x1 = take(kv, "x1", line_no);
        f.y1 = take(kv, "y1", line_no);
        f.height = take(kv, "height", line_no);
      } else {
        throw FormatError("unknown feature type '" + type + "'", line_no);
      }
      if (!kv.empty())
        throw FormatError("unknown feature parameter '" + kv.begin()->first + "'",
                          line_no);
      spec.features.push_back(f);
    } else {
      throw FormatError("unknown scenario key '" + key + "' in " + origin,
                        line_no);
    }
  }
  spec.validate();
  return spec;
}

ScenarioSpec parse_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileNotFoundError(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario_text(ss.str(), path);
}

}  // namespace terrapath
