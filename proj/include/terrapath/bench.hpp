#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "terrapath/errors.hpp"
#include "terrapath/hybrid_map.hpp"
#include "terrapath/planner.hpp"

namespace terrapath {

struct SamplingExhaustedError : Error {
  using Error::Error;
};

// Per-path safety metrics, recomputed waypoint by waypoint from the map
// (planner-cached values are never trusted).
struct PathMetrics {
  double length = 0.0;
  double roll_cost = 0.0;       // sum |roll| / roll_max
  double pitch_cost = 0.0;      // sum max(pitch/pitch_min, pitch/pitch_max)
  double roughness_cost = 0.0;  // sum r_sum / r_max
  double hazard = 0.0;          // roll_cost + pitch_cost + roughness_cost
  double failure_rate = 0.0;
  double min_tau_real = 1.0;
  std::size_t waypoints = 0;
  std::size_t failure_points = 0;
};

PathMetrics evaluate(const PlanResult& result, const HybridMap& map,
                     const RobotSpec& spec);

struct TrialRecord {
  int trial = 0;
  Pose2 start, goal;
  PlanMode mode = PlanMode::THybrid;
  PlanStatus status = PlanStatus::NoPath;
  double length = 0.0;
  long expansions = 0;
  double wall_time = 0.0;
  PathMetrics metrics;
};

struct BenchOptions {
  int trials = 20;
  double min_separation = 15.0;
  std::uint64_t seed = 1;
  std::vector<PlanMode> modes = {PlanMode::THybrid, PlanMode::Baseline2D,
                                 PlanMode::BaselineDEM};
  SearchParams params;
  int jobs = 1;  // > 1 parallelizes trials; wall times then overlap
  int max_attempts_per_trial = 4000;
};

struct BenchReport {
  BenchOptions options;
  std::vector<TrialRecord> records;  // trials * modes, trial-major

  double mean(PlanMode mode, double TrialRecord::* field) const;
  double mean_metric(PlanMode mode, double PathMetrics::* field) const;
  double median_wall_time(PlanMode mode) const;
  std::size_t success_count(PlanMode mode) const;
};

// Rejection-samples endpoint pairs (deterministic per-trial RNG streams),
// runs every mode on identical endpoints, evaluates, and assembles the
// report. Throws SamplingExhaustedError when a trial cannot find a valid
// pair within the attempt budget.
BenchReport run_suite(const HybridMap& map, const BenchOptions& options);

// trials.csv: deterministic per-trial rows, no timing columns.
void write_trials_csv(const BenchReport& report, const std::string& path);
// timings.csv: wall times per (trial, mode).
void write_timings_csv(const BenchReport& report, const std::string& path);
nlohmann::ordered_json bench_summary(const BenchReport& report,
                                     bool include_timing);
// hazard histograms per mode + paired timing scatter
void write_bench_svgs(const BenchReport& report, const std::string& dir);

}  // namespace terrapath
