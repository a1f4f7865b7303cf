#include "terrapath/planner.hpp"

#include <algorithm>
#include <cassert>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <queue>

#include <nlohmann/json.hpp>

#include "terrapath/errors.hpp"

namespace terrapath {

const char* plan_mode_name(PlanMode mode) {
  switch (mode) {
    case PlanMode::THybrid: return "t-hybrid";
    case PlanMode::Baseline2D: return "2d-baseline";
    case PlanMode::BaselineDEM: return "dem-baseline";
  }
  return "?";
}

std::optional<PlanMode> plan_mode_from_name(const std::string& name) {
  if (name == "t-hybrid") return PlanMode::THybrid;
  if (name == "2d-baseline") return PlanMode::Baseline2D;
  if (name == "dem-baseline") return PlanMode::BaselineDEM;
  return std::nullopt;
}

const char* plan_status_name(PlanStatus status) {
  switch (status) {
    case PlanStatus::Success: return "success";
    case PlanStatus::NoPath: return "no-path";
    case PlanStatus::LimitExceeded: return "limit-exceeded";
    case PlanStatus::InvalidStart: return "invalid-start";
    case PlanStatus::InvalidGoal: return "invalid-goal";
  }
  return "?";
}

Pose2 integrate_arc(const Pose2& from, double kappa, double s) {
  Pose2 out;
  if (std::abs(kappa) < 1e-12) {
    out.x = from.x + s * std::cos(from.theta);
    out.y = from.y - s * std::sin(from.theta);
    out.theta = from.theta;
    return out;
  }
  const double t1 = from.theta + kappa * s;
  out.x = from.x + (std::sin(t1) - std::sin(from.theta)) / kappa;
  out.y = from.y + (std::cos(t1) - std::cos(from.theta)) / kappa;
  out.theta = wrap_angle(t1);
  return out;
}

int heading_bucket(double theta, int buckets) {
  const double sector = 2.0 * M_PI / buckets;
  int b = static_cast<int>(std::floor((wrap_angle(theta) + M_PI) / sector));
  if (b >= buckets) b -= buckets;
  if (b < 0) b += buckets;
  return b;
}

bool in_goal_region(const Pose2& pose, const Pose2& goal,
                    const SearchParams& params, double resolution) {
  const double pos_tol =
      params.goal_pos_tol > 0.0 ? params.goal_pos_tol : resolution;
  const double dx = pose.x - goal.x, dy = pose.y - goal.y;
  if (dx * dx + dy * dy > pos_tol * pos_tol) return false;
  return std::abs(angle_diff(pose.theta, goal.theta)) <=
         params.goal_heading_tol + 1e-12;
}

namespace {

struct TerrainEval {
  double tau_real = 0.0;
  double roll = 0.0;
  double pitch = 0.0;
};

// Full projection + Eq.-style traversability at one pose. For non-terrain
// cells the flat-ground normal is used; callers discard those children on the
// class checks, this only models the evaluation cost.
TerrainEval evaluate_pose(const CellState& cell, double theta,
                          const RobotSpec& spec, const SearchParams& params) {
  TerrainEval ev;
  const Eigen::Vector3d normal =
      cell.cls == CellClass::Terrain ? cell.normal : Eigen::Vector3d::UnitZ();
  const double r_sum = cell.cls == CellClass::Terrain ? cell.r_sum : 0.0;
  ProjectedAttitude att;
  try {
    att = project(theta, normal);
  } catch (const DegenerateProjectionError&) {
    return ev;  // tau 0
  }
  ev.roll = att.roll;
  ev.pitch = att.pitch;
  if (cell.cls == CellClass::Unknown) {
    ev.tau_real = params.unknown_passable ? params.tau_unknown : 0.0;
  } else {
    ev.tau_real = real_traversability(r_sum, att, spec);
  }
  return ev;
}

bool cheap_cell_passable(const HybridMap& map, double x, double y,
                         PlanMode mode, const SearchParams& params) {
  const int col = map.col_of(x), row = map.row_of(y);
  if (!map.in_bounds(row, col)) return false;
  const CellClass cls = map.cls(row, col);
  if (cls == CellClass::Obstacle) return false;
  if (cls == CellClass::Unknown && !params.unknown_passable) return false;
  if (mode == PlanMode::THybrid && cls == CellClass::Terrain) {
    // static layer short-circuit: zero static traversability is impassable
    // in any orientation
    if (map.cell(row, col).tau <= 0.0) return false;
  }
  return true;
}

bool inflation_clear(const HybridMap& map, double x, double y,
                     const RobotSpec& spec) {
  return map.distance_to_obstacle(x, y) > spec.robot_radius();
}

}  // namespace

std::vector<Candidate> expand_candidates(const Pose2& from,
                                         const HybridMap& map,
                                         const RobotSpec& spec, PlanMode mode,
                                         const SearchParams& params) {
  const double arc_len = map.resolution() * std::numbers::sqrt2;
  const int k = std::max(1, params.primitive_count | 1);  // force odd
  std::vector<Candidate> out;
  out.reserve(k);

  for (int i = 0; i < k; ++i) {
    const double kappa =
        k == 1 ? 0.0
               : -params.kappa_max + 2.0 * params.kappa_max * i / (k - 1);
    Candidate c;
    c.pose = integrate_arc(from, kappa, arc_len);
    c.primitive = i;
    c.arc_length = arc_len;
    c.turn = std::abs(kappa) * arc_len;

    const Pose2 mid = integrate_arc(from, kappa, 0.5 * arc_len);

    if (mode == PlanMode::BaselineDEM) {
      // full evaluation happens before any short-circuit pruning, and the
      // 2.5D pipeline assesses the whole robot footprint rather than the
      // center cell alone; the footprint minimum gates the child
      const TerrainEval ev =
          evaluate_pose(map.query(c.pose.x, c.pose.y), c.pose.theta, spec,
                        params);
      double footprint_tau = ev.tau_real;
      const double half_l = 0.5 * spec.robot_length;
      const double half_w = 0.5 * spec.robot_width;
      const double ct = std::cos(c.pose.theta), st = -std::sin(c.pose.theta);
      for (const auto& [fwd, lat] :
           {std::pair{half_l, half_w}, {half_l, -half_w}, {-half_l, half_w},
            {-half_l, -half_w}}) {
        const double px = c.pose.x + fwd * ct - lat * st;
        const double py = c.pose.y + fwd * st + lat * ct;
        if (!map.in_bounds(map.row_of(py), map.col_of(px))) continue;
        const TerrainEval corner =
            evaluate_pose(map.query(px, py), c.pose.theta, spec, params);
        footprint_tau = std::min(footprint_tau, corner.tau_real);
      }
      c.tau_real = ev.tau_real;
      c.roll = ev.roll;
      c.pitch = ev.pitch;
      if (!cheap_cell_passable(map, c.pose.x, c.pose.y, mode, params)) continue;
      if (!cheap_cell_passable(map, mid.x, mid.y, mode, params)) continue;
      if (!inflation_clear(map, c.pose.x, c.pose.y, spec)) continue;
      if (!inflation_clear(map, mid.x, mid.y, spec)) continue;
      const CellClass cls = map.cls_at(c.pose.x, c.pose.y);
      if (cls == CellClass::Terrain &&
          map.query(c.pose.x, c.pose.y).tau <= 0.0)
        continue;
      if (c.tau_real <= 0.0 || footprint_tau <= 0.0) continue;
      out.push_back(c);
      continue;
    }

    if (!cheap_cell_passable(map, c.pose.x, c.pose.y, mode, params)) continue;
    if (!cheap_cell_passable(map, mid.x, mid.y, mode, params)) continue;
    if (!inflation_clear(map, c.pose.x, c.pose.y, spec)) continue;
    if (!inflation_clear(map, mid.x, mid.y, spec)) continue;

    if (mode == PlanMode::THybrid) {
      const TerrainEval ev =
          evaluate_pose(map.query(c.pose.x, c.pose.y), c.pose.theta, spec,
                        params);
      if (ev.tau_real <= 0.0) continue;
      c.tau_real = ev.tau_real;
      c.roll = ev.roll;
      c.pitch = ev.pitch;
    }
    out.push_back(c);
  }
  return out;
}

double cost_increment(const Candidate& candidate, const RobotSpec& spec,
                      PlanMode mode, const SearchParams& params) {
  double cost = candidate.arc_length + spec.k_turn * candidate.turn;
  if (mode != PlanMode::Baseline2D) {
    cost += spec.k_trav * (params.paper_literal_cost
                               ? candidate.tau_real
                               : 1.0 - candidate.tau_real);
  }
  return cost;
}

// --- heuristic --------------------------------------------------------------

GoalHeuristic::GoalHeuristic(const HybridMap& map, const Pose2& goal,
                             const SearchParams& params)
    : map_(map), goal_x_(goal.x), goal_y_(goal.y) {
  const double res = map.resolution();
  pos_tol_ = params.goal_pos_tol > 0.0 ? params.goal_pos_tol : res;
  slack_ = std::numbers::sqrt2 * res;

  const double inf = std::numeric_limits<double>::infinity();
  grid_.assign(map.cell_count(), inf);
  const int gr = map.row_of(goal.y), gc = map.col_of(goal.x);
  if (!map.in_bounds(gr, gc)) return;

  using Entry = std::pair<double, std::size_t>;  // (dist, cell index)
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  grid_[map.index(gr, gc)] = 0.0;
  open.emplace(0.0, map.index(gr, gc));
  const double diag = res * std::numbers::sqrt2;
  while (!open.empty()) {
    const auto [d, idx] = open.top();
    open.pop();
    if (d > grid_[idx]) continue;
    const int row = static_cast<int>(idx) / map.width();
    const int col = static_cast<int>(idx) % map.width();
    for (int dr = -1; dr <= 1; ++dr) {
      for (int dc = -1; dc <= 1; ++dc) {
        if (dr == 0 && dc == 0) continue;
        const int nr = row + dr, nc = col + dc;
        if (!map.in_bounds(nr, nc)) continue;
        if (map.cls(nr, nc) == CellClass::Obstacle) continue;
        const double nd = d + (dr != 0 && dc != 0 ? diag : res);
        const std::size_t ni = map.index(nr, nc);
        if (nd < grid_[ni]) {
          grid_[ni] = nd;
          open.emplace(nd, ni);
        }
      }
    }
  }
}

double GoalHeuristic::grid_distance(double x, double y) const {
  const int row = map_.row_of(y), col = map_.col_of(x);
  if (!map_.in_bounds(row, col))
    return std::numeric_limits<double>::infinity();
  return grid_[map_.index(row, col)];
}

double GoalHeuristic::operator()(double x, double y) const {
  const double dx = x - goal_x_, dy = y - goal_y_;
  const double euclid = std::sqrt(dx * dx + dy * dy);
  const double grid = grid_distance(x, y);
  // the 8-connected metric overestimates free-space distance by up to
  // 1/cos(pi/8); deflating by that ratio keeps the grid term a lower bound
  // of the true remaining path length
  constexpr double octile_deflation = 0.923879532511287;  // cos(pi/8)
  const double h = std::max(euclid, grid * octile_deflation - slack_) - pos_tol_;
  return std::max(0.0, h);
}

// --- search -----------------------------------------------------------------

std::optional<std::string> pose_invalid_reason(const Pose2& pose,
                                               const HybridMap& map,
                                               const RobotSpec& spec,
                                               PlanMode mode,
                                               const SearchParams& params) {
  const int col = map.col_of(pose.x), row = map.row_of(pose.y);
  if (!map.in_bounds(row, col)) return "outside map bounds";
  const CellClass cls = map.cls(row, col);
  if (cls == CellClass::Obstacle) return "on an obstacle cell";
  if (cls == CellClass::Unknown && !params.unknown_passable)
    return "on an unknown cell";
  if (!inflation_clear(map, pose.x, pose.y, spec))
    return "within the robot inflation radius of an obstacle";
  if (mode != PlanMode::Baseline2D) {
    if (cls == CellClass::Terrain && map.cell(row, col).tau <= 0.0)
      return "zero static traversability";
    const TerrainEval ev =
        evaluate_pose(map.cell(row, col), pose.theta, spec, params);
    if (ev.tau_real <= 0.0) return "zero real traversability at this heading";
  }
  return std::nullopt;
}

namespace {

struct Node {
  Pose2 pose;
  double g = 0.0;
  std::int32_t parent = -1;
  std::int32_t primitive = -1;
  float tau_real = 1.0f;
  float roll = 0.0f;
  float pitch = 0.0f;
};

struct OpenEntry {
  double f;
  double g;
  std::int32_t row, col, hb;
  std::int32_t node;
};

// min-f; ties: larger g, then cell/heading lexicographic, then insertion order
struct OpenOrder {
  bool operator()(const OpenEntry& a, const OpenEntry& b) const {
    if (a.f != b.f) return a.f > b.f;
    if (a.g != b.g) return a.g < b.g;
    if (a.row != b.row) return a.row > b.row;
    if (a.col != b.col) return a.col > b.col;
    if (a.hb != b.hb) return a.hb > b.hb;
    return a.node > b.node;
  }
};

void annotate_waypoints(PlanResult& result, const HybridMap& map,
                        const RobotSpec& spec, const SearchParams& params) {
  for (auto& wp : result.waypoints) {
    const CellState cell = map.query(wp.pose.x, wp.pose.y);
    const TerrainEval ev = evaluate_pose(cell, wp.pose.theta, spec, params);
    wp.roll = ev.roll;
    wp.pitch = ev.pitch;
    wp.tau_real = ev.tau_real;
  }
}

}  // namespace

PlanResult plan(const PlanRequest& request) {
  const auto t0 = std::chrono::steady_clock::now();
  PlanResult result;
  if (!request.map) throw InvalidSpecError("plan request has no map");
  const HybridMap& map = *request.map;
  const RobotSpec& spec = map.spec();
  if (!(spec.r_max > 0.0))
    throw InvalidSpecError(
        "map spec has no resolved r_max; assess the map first or set r_max");
  const SearchParams& params = request.params;
  const PlanMode mode = request.mode;

  auto finish = [&](PlanStatus status) {
    result.status = status;
    result.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return result;
  };

  if (pose_invalid_reason(request.start, map, spec, mode, params))
    return finish(PlanStatus::InvalidStart);
  if (pose_invalid_reason(request.goal, map, spec, mode, params))
    return finish(PlanStatus::InvalidGoal);

  const GoalHeuristic heuristic(map, request.goal, params);

  std::vector<Node> nodes;
  nodes.reserve(4096);
  const int hb_count = params.heading_buckets;
  std::vector<std::int32_t> bucket_best(map.cell_count() * hb_count, -1);
  auto bucket_of = [&](const Pose2& p) -> std::int64_t {
    const int row = map.row_of(p.y), col = map.col_of(p.x);
    const int hb = heading_bucket(p.theta, hb_count);
    return (static_cast<std::int64_t>(map.index(row, col))) * hb_count + hb;
  };

  std::priority_queue<OpenEntry, std::vector<OpenEntry>, OpenOrder> open;
  auto push_node = [&](const Pose2& pose, double g, std::int32_t parent,
                       std::int32_t primitive, const Candidate* cand) {
    const std::int64_t bucket = bucket_of(pose);
    const std::int32_t incumbent = bucket_best[bucket];
    if (incumbent >= 0 && nodes[incumbent].g <= g) return;
    Node n;
    n.pose = pose;
    n.g = g;
    n.parent = parent;
    n.primitive = primitive;
    if (cand) {
      n.tau_real = static_cast<float>(cand->tau_real);
      n.roll = static_cast<float>(cand->roll);
      n.pitch = static_cast<float>(cand->pitch);
    }
    const auto id = static_cast<std::int32_t>(nodes.size());
    nodes.push_back(n);
    if (incumbent >= 0) ++result.reopens;
    bucket_best[bucket] = id;
    OpenEntry e;
    e.f = g + heuristic(pose.x, pose.y);
    e.g = g;
    e.row = map.row_of(pose.y);
    e.col = map.col_of(pose.x);
    e.hb = heading_bucket(pose.theta, hb_count);
    e.node = id;
    open.push(e);
  };

  // Goal arrivals are recorded at generation time, before duplicate pruning,
  // so a cheaper pose inside the goal region can never be shadowed by a
  // same-bucket incumbent outside it. Goal chain nodes live in the pool but
  // are not registered in any bucket.
  double best_goal_g = std::numeric_limits<double>::infinity();
  std::int32_t best_goal_node = -1;
  auto offer_goal = [&](const Pose2& pose, double g, std::int32_t parent,
                        std::int32_t primitive, const Candidate* cand) {
    if (!in_goal_region(pose, request.goal, params, map.resolution())) return;
    if (g >= best_goal_g) return;
    Node n;
    n.pose = pose;
    n.g = g;
    n.parent = parent;
    n.primitive = primitive;
    if (cand) {
      n.tau_real = static_cast<float>(cand->tau_real);
      n.roll = static_cast<float>(cand->roll);
      n.pitch = static_cast<float>(cand->pitch);
    }
    best_goal_g = g;
    best_goal_node = static_cast<std::int32_t>(nodes.size());
    nodes.push_back(n);
  };

  push_node(request.start, 0.0, -1, -1, nullptr);
  offer_goal(request.start, 0.0, -1, -1, nullptr);

  const auto deadline =
      t0 + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
               std::chrono::duration<double>(params.timeout_s));
  bool limit_hit = false;
#ifndef NDEBUG
  double last_f = -std::numeric_limits<double>::infinity();
#endif

  while (!open.empty()) {
    const OpenEntry e = open.top();
    open.pop();
    const std::int64_t bucket = bucket_of(nodes[e.node].pose);
    if (bucket_best[bucket] != e.node) continue;  // superseded
    if (e.f >= best_goal_g - 1e-15) break;        // admissible h: done
#ifndef NDEBUG
    // popped f is monotone up to the grid term's cell-level lumpiness (the
    // 8-connected distance can drop by up to two diagonal cells across one
    // arc); reopened entries legitimately carry lower f
    if (result.reopens == 0)
      assert(e.f >= last_f - 2.0 * std::numbers::sqrt2 * map.resolution());
    last_f = e.f;
#endif

    ++result.expansions;
    if (result.expansions > params.max_expansions) {
      limit_hit = true;
      break;
    }
    if ((result.expansions & 0xFF) == 0 &&
        std::chrono::steady_clock::now() > deadline) {
      limit_hit = true;
      break;
    }

    const Pose2 pose = nodes[e.node].pose;
    for (const Candidate& c : expand_candidates(pose, map, spec, mode, params)) {
      const double g = nodes[e.node].g + cost_increment(c, spec, mode, params);
      offer_goal(c.pose, g, e.node, c.primitive, &c);
      push_node(c.pose, g, e.node, c.primitive, &c);
    }
  }

  if (best_goal_node < 0)
    return finish(limit_hit ? PlanStatus::LimitExceeded : PlanStatus::NoPath);

  // walk the parent chain
  std::vector<std::int32_t> chain;
  for (std::int32_t id = best_goal_node; id >= 0; id = nodes[id].parent)
    chain.push_back(id);
  std::reverse(chain.begin(), chain.end());
  double cum = 0.0;
  const double arc_len = map.resolution() * std::numbers::sqrt2;
  for (std::size_t i = 0; i < chain.size(); ++i) {
    const Node& n = nodes[chain[i]];
    Waypoint wp;
    wp.pose = n.pose;
    wp.primitive = n.primitive;
    wp.g = n.g;
    if (i > 0) cum += arc_len;
    wp.cumulative_length = cum;
    result.waypoints.push_back(wp);
  }
  result.length = cum;
  result.goal_g = best_goal_g;
  annotate_waypoints(result, map, spec, params);
  return finish(PlanStatus::Success);
}

void write_path_csv(const PlanResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "x,y,theta,roll,pitch,tau_real,cumulative_length\n";
  char buf[256];
  for (const auto& wp : result.waypoints) {
    std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n",
                  wp.pose.x, wp.pose.y, wp.pose.theta, wp.roll, wp.pitch,
                  wp.tau_real, wp.cumulative_length);
    out << buf;
  }
  if (!out) throw IoError("write failed: " + path);
}

void write_plan_summary_json(const PlanResult& result, const PlanRequest& req,
                             const std::string& path, bool include_timing) {
  nlohmann::ordered_json j;
  j["status"] = plan_status_name(result.status);
  j["mode"] = plan_mode_name(req.mode);
  j["start"] = {req.start.x, req.start.y, req.start.theta};
  j["goal"] = {req.goal.x, req.goal.y, req.goal.theta};
  j["length"] = result.length;
  j["goal_g"] = result.goal_g == std::numeric_limits<double>::infinity()
                    ? nlohmann::ordered_json(nullptr)
                    : nlohmann::ordered_json(result.goal_g);
  j["waypoints"] = result.waypoints.size();
  j["expansions"] = result.expansions;
  double min_tau = 1.0;
  for (const auto& wp : result.waypoints) min_tau = std::min(min_tau, wp.tau_real);
  j["min_tau_real"] = result.waypoints.empty() ? 0.0 : min_tau;
  if (include_timing) j["wall_time"] = result.wall_time;
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace terrapath
