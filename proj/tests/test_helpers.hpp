#pragma once

#include <cstdint>
#include <map>
#include <queue>
#include <tuple>

#include "terrapath/hybrid_map.hpp"
#include "terrapath/planner.hpp"
#include "terrapath/robot_spec.hpp"

namespace terrapath::testing {

inline RobotSpec table_spec(double r_max = 1.0) {
  RobotSpec spec;
  spec.r_max = r_max;
  return spec;
}

// all-terrain flat map, tau = 1, unit-z normals
inline HybridMap flat_map(int width, int height, double resolution = 0.5,
                          double r_max = 1.0) {
  HybridMap map(0.0, 0.0, resolution, width, height);
  for (int row = 0; row < height; ++row)
    for (int col = 0; col < width; ++col)
      map.set_terrain(row, col, Eigen::Vector3d::UnitZ(), 0.0, 1.0, 0.0);
  map.set_spec(table_spec(r_max));
  return map;
}

// deterministic counter RNG for property tests
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline double u01(std::uint64_t seed, std::uint64_t k, std::uint64_t lane) {
  return static_cast<double>(mix64(mix64(seed ^ mix64(k)) ^ lane) >> 11) *
         0x1.0p-53;
}

// Exhaustive uniform-cost search over the planner's primitive graph.
// Independent of the A* machinery: own queue, own duplicate table, run to
// exhaustion; goal arrivals are recorded at generation time.
struct OracleOutcome {
  bool found = false;
  double goal_g = std::numeric_limits<double>::infinity();
  long expansions = 0;
};

inline OracleOutcome exhaustive_dijkstra(const HybridMap& map,
                                         const Pose2& start, const Pose2& goal,
                                         PlanMode mode,
                                         const SearchParams& params,
                                         long max_pops = 20000000) {
  const RobotSpec& spec = map.spec();
  OracleOutcome out;

  struct State {
    double g;
    Pose2 pose;
  };
  std::map<std::tuple<int, int, int>, State> best;
  using Entry = std::tuple<double, int, int, int, long>;  // g, row, col, hb, seq
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  long seq = 0;

  auto key_of = [&](const Pose2& p) {
    return std::make_tuple(map.row_of(p.y), map.col_of(p.x),
                           heading_bucket(p.theta, params.heading_buckets));
  };
  auto offer = [&](const Pose2& pose, double g) {
    if (in_goal_region(pose, goal, params, map.resolution()))
      if (g < out.goal_g) {
        out.goal_g = g;
        out.found = true;
      }
    const auto key = key_of(pose);
    auto it = best.find(key);
    if (it != best.end() && it->second.g <= g) return;
    best[key] = {g, pose};
    open.emplace(g, std::get<0>(key), std::get<1>(key), std::get<2>(key),
                 seq++);
  };

  offer(start, 0.0);
  while (!open.empty() && out.expansions < max_pops) {
    const auto [g, row, col, hb, s] = open.top();
    open.pop();
    const auto it = best.find({row, col, hb});
    if (it == best.end() || it->second.g < g) continue;  // stale
    ++out.expansions;
    const Pose2 pose = it->second.pose;
    for (const auto& c : expand_candidates(pose, map, spec, mode, params))
      offer(c.pose, g + cost_increment(c, spec, mode, params));
  }
  return out;
}

}  // namespace terrapath::testing
