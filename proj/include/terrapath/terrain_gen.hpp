#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "terrapath/hybrid_map.hpp"
#include "terrapath/point_cloud.hpp"

namespace terrapath {

// Analytic surface features. Ramps rise along +x from their region's low
// edge and plateau past the high edge; bumps and pits are smooth cosine
// profiles; boulders are flat-topped cylinders with a sharp rim; walls are
// thin tall ribbons; canopy adds overhanging points above the local ground.
struct Feature {
  enum class Type { Ramp, Bump, Pit, Boulder, Wall, Canopy };
  Type type = Type::Ramp;
  // region features (ramp, wall, canopy)
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  // radial features (bump, pit, boulder)
  double cx = 0, cy = 0, radius = 0;
  double height = 0;     // bump/boulder/canopy height, pit depth, wall height
  double alpha = 0;      // ramp inclination [rad]
  double thickness = 0.2;  // wall
};

struct ScenarioSpec {
  double extent_x = 20.0;
  double extent_y = 20.0;
  double density = 100.0;  // points per m^2
  std::uint64_t seed = 1;
  double noise_sigma = 0.0;  // vertical Gaussian noise
  std::vector<Feature> features;

  void validate() const;
};

// Analytic per-(x, y) reference used by oracle tests.
class GroundTruth {
 public:
  explicit GroundTruth(const ScenarioSpec& spec, double rho_max, double h_max);

  double elevation(double x, double y) const;    // ground surface, no canopy
  double inclination(double x, double y) const;  // [rad]
  CellClass classify(double x, double y) const;  // Obstacle or Terrain
  // within one coarse cell of any feature edge (fits there mix surfaces)
  bool near_feature_edge(double x, double y, double margin) const;

 private:
  ScenarioSpec spec_;
  double rho_max_, h_max_;
};

struct GeneratedScenario {
  PointCloud cloud;
  ScenarioSpec spec;
};

// Deterministic under seed: counter-based RNG streams, one per point, so the
// point order never depends on threading or feature evaluation order.
GeneratedScenario generate(const ScenarioSpec& spec);

// Key-value text config with one `feature <type> k=v ...` line per feature.
ScenarioSpec parse_scenario(const std::string& path);
ScenarioSpec parse_scenario_text(const std::string& text,
                                 const std::string& origin = "<string>");

}  // namespace terrapath
