#pragma once

#include <optional>
#include <string>
#include <vector>

#include "terrapath/geometry.hpp"
#include "terrapath/hybrid_map.hpp"
#include "terrapath/pose_projection.hpp"
#include "terrapath/robot_spec.hpp"

namespace terrapath {

enum class PlanMode { THybrid, Baseline2D, BaselineDEM };

const char* plan_mode_name(PlanMode mode);
std::optional<PlanMode> plan_mode_from_name(const std::string& name);

enum class PlanStatus {
  Success,
  NoPath,
  LimitExceeded,
  InvalidStart,
  InvalidGoal
};

const char* plan_status_name(PlanStatus status);

struct SearchParams {
  int primitive_count = 5;  // odd; curvatures evenly spaced in [-kappa_max, kappa_max]
  double kappa_max = 1.0;   // [1/m]
  int heading_buckets = 16;
  double goal_pos_tol = 0.0;  // <= 0 selects the map resolution
  double goal_heading_tol = 2.0 * M_PI / 16.0;
  bool paper_literal_cost = false;  // charge k_trav*tau instead of k_trav*(1-tau)
  bool unknown_passable = false;
  double tau_unknown = 0.5;
  long max_expansions = 200000;
  double timeout_s = 60.0;
};

struct PlanRequest {
  Pose2 start;
  Pose2 goal;
  const HybridMap* map = nullptr;
  PlanMode mode = PlanMode::THybrid;
  SearchParams params;
};

struct Waypoint {
  Pose2 pose;
  int primitive = -1;  // curvature index of the arc that reached this pose
  double g = 0.0;
  double cumulative_length = 0.0;
  double roll = 0.0;
  double pitch = 0.0;
  double tau_real = 1.0;
};

struct PlanResult {
  PlanStatus status = PlanStatus::NoPath;
  std::vector<Waypoint> waypoints;
  double length = 0.0;
  double goal_g = std::numeric_limits<double>::infinity();
  long expansions = 0;
  long reopens = 0;
  double wall_time = 0.0;  // seconds
};

// A fully checked child reached by one forward arc. tau_real/roll/pitch are
// only meaningful for modes that evaluate terrain (THybrid, BaselineDEM).
struct Candidate {
  Pose2 pose;
  int primitive = 0;
  double arc_length = 0.0;
  double turn = 0.0;  // |heading change| along the arc
  double tau_real = 1.0;
  double roll = 0.0;
  double pitch = 0.0;
};

// Forward Ackermann arc: constant curvature kappa over length s from `from`.
Pose2 integrate_arc(const Pose2& from, double kappa, double s);

// Node expansion with all pruning applied (map bounds, obstacle/unknown
// cells, inflation radius at end and mid arc, zero traversability). The
// returned list is the outgoing edge set of the search graph.
std::vector<Candidate> expand_candidates(const Pose2& from,
                                         const HybridMap& map,
                                         const RobotSpec& spec, PlanMode mode,
                                         const SearchParams& params);

// Finite edge cost for a surviving candidate (the pruned cases are the
// infinite-cost ones and never reach here).
double cost_increment(const Candidate& candidate, const RobotSpec& spec,
                      PlanMode mode, const SearchParams& params);

bool in_goal_region(const Pose2& pose, const Pose2& goal,
                    const SearchParams& params, double resolution);

int heading_bucket(double theta, int buckets);

// Admissible cost-to-go: max of the Euclidean distance and an obstacle-aware
// 8-connected grid distance (single reverse Dijkstra per goal), with slack
// subtracted for cell-center offsets and the goal tolerance region so the
// estimate never exceeds the true remaining cost.
class GoalHeuristic {
 public:
  GoalHeuristic(const HybridMap& map, const Pose2& goal,
                const SearchParams& params);
  double operator()(double x, double y) const;
  // grid distance (meters) from the cell containing (x, y) to the goal cell
  double grid_distance(double x, double y) const;

 private:
  const HybridMap& map_;
  double goal_x_, goal_y_;
  double slack_, pos_tol_;
  std::vector<double> grid_;
};

PlanResult plan(const PlanRequest& request);

// Pose validity as used for start/goal checks; returns a reason when invalid.
std::optional<std::string> pose_invalid_reason(const Pose2& pose,
                                               const HybridMap& map,
                                               const RobotSpec& spec,
                                               PlanMode mode,
                                               const SearchParams& params);

void write_path_csv(const PlanResult& result, const std::string& path);
void write_plan_summary_json(const PlanResult& result, const PlanRequest& req,
                             const std::string& path, bool include_timing);

}  // namespace terrapath
