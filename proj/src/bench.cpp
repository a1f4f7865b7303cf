#include "terrapath/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include "terrapath/errors.hpp"
#include "terrapath/pose_projection.hpp"

namespace terrapath {

PathMetrics evaluate(const PlanResult& result, const HybridMap& map,
                     const RobotSpec& spec) {
  PathMetrics m;
  m.length = result.length;
  m.waypoints = result.waypoints.size();
  if (result.waypoints.empty()) return m;

  for (const auto& wp : result.waypoints) {
    const CellState cell = map.query(wp.pose.x, wp.pose.y);
    bool failure = false;
    if (cell.cls != CellClass::Terrain) {
      failure = true;
      m.min_tau_real = 0.0;
    } else {
      ProjectedAttitude att;
      try {
        att = project(wp.pose.theta, cell.normal);
      } catch (const DegenerateProjectionError&) {
        m.failure_points += 1;
        m.min_tau_real = 0.0;
        continue;
      }
      const double roll_n = std::abs(att.roll) / spec.roll_max;
      const double pitch_n =
          std::max(att.pitch / spec.pitch_min, att.pitch / spec.pitch_max);
      const double rough_n = cell.r_sum / spec.r_max;
      m.roll_cost += roll_n;
      m.pitch_cost += pitch_n;
      m.roughness_cost += rough_n;
      m.min_tau_real =
          std::min(m.min_tau_real, real_traversability(cell.r_sum, att, spec));
      failure = roll_n > 1.0 || att.pitch < spec.pitch_min ||
                att.pitch > spec.pitch_max || rough_n > 1.0;
    }
    if (failure) m.failure_points += 1;
  }
  m.failure_rate =
      static_cast<double>(m.failure_points) / static_cast<double>(m.waypoints);
  m.hazard = m.roll_cost + m.pitch_cost + m.roughness_cost;
  return m;
}

namespace {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

double uniform01(std::uint64_t seed, std::uint64_t counter, std::uint64_t lane) {
  return static_cast<double>(mix64(mix64(seed ^ mix64(counter)) ^ lane) >> 11) *
         0x1.0p-53;
}

// heading that points the forward axis (cos t, -sin t) at (dx, dy)
double face(double dx, double dy) { return std::atan2(-dy, dx); }

struct EndpointPair {
  Pose2 start, goal;
};

EndpointPair sample_endpoints(const HybridMap& map, const BenchOptions& options,
                              int trial) {
  const RobotSpec& spec = map.spec();
  const double margin = map.resolution();
  const double w = map.width() * map.resolution() - 2.0 * margin;
  const double h = map.height() * map.resolution() - 2.0 * margin;
  if (w <= 0 || h <= 0) throw SamplingExhaustedError("map too small to sample");

  SearchParams params = options.params;
  for (int attempt = 0; attempt < options.max_attempts_per_trial; ++attempt) {
    const std::uint64_t ctr =
        static_cast<std::uint64_t>(trial) * options.max_attempts_per_trial +
        attempt;
    EndpointPair p;
    p.start.x = map.origin_x() + margin + uniform01(options.seed, ctr, 0) * w;
    p.start.y = map.origin_y() + margin + uniform01(options.seed, ctr, 1) * h;
    p.goal.x = map.origin_x() + margin + uniform01(options.seed, ctr, 2) * w;
    p.goal.y = map.origin_y() + margin + uniform01(options.seed, ctr, 3) * h;
    const double dx = p.goal.x - p.start.x, dy = p.goal.y - p.start.y;
    if (std::hypot(dx, dy) < options.min_separation) continue;
    p.start.theta = face(dx, dy);
    p.goal.theta = p.start.theta;
    // impassable endpoints are discarded; the strictest mode's validity is
    // used so all modes share the same endpoint set
    if (pose_invalid_reason(p.start, map, spec, PlanMode::THybrid, params))
      continue;
    if (pose_invalid_reason(p.goal, map, spec, PlanMode::THybrid, params))
      continue;
    return p;
  }
  throw SamplingExhaustedError("no valid endpoint pair for trial " +
                               std::to_string(trial));
}

}  // namespace

BenchReport run_suite(const HybridMap& map, const BenchOptions& options) {
  map.spec().validate();
  BenchReport report;
  report.options = options;
  report.records.resize(static_cast<std::size_t>(options.trials) *
                        options.modes.size());

  // force the lazy distance field before timing anything
  if (options.trials > 0) map.distance_to_obstacle(map.origin_x(), map.origin_y());

  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::string failure_msg;
  std::mutex failure_mutex;

  auto run_trial = [&](int trial) {
    try {
      const EndpointPair pair = sample_endpoints(map, options, trial);
      for (std::size_t mi = 0; mi < options.modes.size(); ++mi) {
        PlanRequest req;
        req.start = pair.start;
        req.goal = pair.goal;
        req.map = &map;
        req.mode = options.modes[mi];
        req.params = options.params;
        const PlanResult res = plan(req);

        TrialRecord rec;
        rec.trial = trial;
        rec.start = pair.start;
        rec.goal = pair.goal;
        rec.mode = req.mode;
        rec.status = res.status;
        rec.length = res.length;
        rec.expansions = res.expansions;
        rec.wall_time = res.wall_time;
        if (res.status == PlanStatus::Success)
          rec.metrics = evaluate(res, map, map.spec());
        report.records[trial * options.modes.size() + mi] = rec;
      }
    } catch (const std::exception& e) {
      std::lock_guard<std::mutex> lock(failure_mutex);
      failed = true;
      failure_msg = e.what();
    }
  };

  const int jobs = std::max(1, options.jobs);
  if (jobs == 1) {
    for (int t = 0; t < options.trials && !failed; ++t) run_trial(t);
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j)
      pool.emplace_back([&] {
        for (int t = next.fetch_add(1); t < options.trials && !failed;
             t = next.fetch_add(1))
          run_trial(t);
      });
    for (auto& th : pool) th.join();
  }
  if (failed) throw SamplingExhaustedError(failure_msg);
  return report;
}

double BenchReport::mean(PlanMode mode, double TrialRecord::* field) const {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& r : records)
    if (r.mode == mode && r.status == PlanStatus::Success) {
      sum += r.*field;
      ++n;
    }
  return n ? sum / static_cast<double>(n) : 0.0;
}

double BenchReport::mean_metric(PlanMode mode,
                                double PathMetrics::* field) const {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& r : records)
    if (r.mode == mode && r.status == PlanStatus::Success) {
      sum += r.metrics.*field;
      ++n;
    }
  return n ? sum / static_cast<double>(n) : 0.0;
}

double BenchReport::median_wall_time(PlanMode mode) const {
  std::vector<double> times;
  for (const auto& r : records)
    if (r.mode == mode && r.status == PlanStatus::Success)
      times.push_back(r.wall_time);
  if (times.empty()) return 0.0;
  std::sort(times.begin(), times.end());
  const std::size_t n = times.size();
  return n % 2 ? times[n / 2] : 0.5 * (times[n / 2 - 1] + times[n / 2]);
}

std::size_t BenchReport::success_count(PlanMode mode) const {
  std::size_t n = 0;
  for (const auto& r : records)
    if (r.mode == mode && r.status == PlanStatus::Success) ++n;
  return n;
}

void write_trials_csv(const BenchReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "trial,mode,status,start_x,start_y,start_theta,goal_x,goal_y,"
         "goal_theta,length,expansions,waypoints,roll_cost,pitch_cost,"
         "roughness_cost,hazard,failure_rate,min_tau_real\n";
  char buf[512];
  for (const auto& r : report.records) {
    std::snprintf(buf, sizeof(buf),
                  "%d,%s,%s,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%ld,%zu,%.9g,"
                  "%.9g,%.9g,%.9g,%.9g,%.9g\n",
                  r.trial, plan_mode_name(r.mode), plan_status_name(r.status),
                  r.start.x, r.start.y, r.start.theta, r.goal.x, r.goal.y,
                  r.goal.theta, r.length, r.expansions, r.metrics.waypoints,
                  r.metrics.roll_cost, r.metrics.pitch_cost,
                  r.metrics.roughness_cost, r.metrics.hazard,
                  r.metrics.failure_rate, r.metrics.min_tau_real);
    out << buf;
  }
  if (!out) throw IoError("write failed: " + path);
}

void write_timings_csv(const BenchReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "trial,mode,status,wall_time\n";
  char buf[160];
  for (const auto& r : report.records) {
    std::snprintf(buf, sizeof(buf), "%d,%s,%s,%.9g\n", r.trial,
                  plan_mode_name(r.mode), plan_status_name(r.status),
                  r.wall_time);
    out << buf;
  }
}

nlohmann::ordered_json bench_summary(const BenchReport& report,
                                     bool include_timing) {
  nlohmann::ordered_json j;
  j["trials"] = report.options.trials;
  j["seed"] = report.options.seed;
  j["min_separation"] = report.options.min_separation;
  j["hazard_definition"] = "roll_cost + pitch_cost + sum(r_sum / r_max)";
  nlohmann::ordered_json modes;
  for (const PlanMode mode : report.options.modes) {
    nlohmann::ordered_json m;
    m["success"] = report.success_count(mode);
    m["mean_length"] = report.mean(mode, &TrialRecord::length);
    double expansions = 0.0;
    std::size_t n = 0;
    for (const auto& r : report.records)
      if (r.mode == mode && r.status == PlanStatus::Success) {
        expansions += static_cast<double>(r.expansions);
        ++n;
      }
    m["mean_expansions"] = n ? expansions / static_cast<double>(n) : 0.0;
    m["mean_hazard"] = report.mean_metric(mode, &PathMetrics::hazard);
    m["mean_roll_cost"] = report.mean_metric(mode, &PathMetrics::roll_cost);
    m["mean_pitch_cost"] = report.mean_metric(mode, &PathMetrics::pitch_cost);
    m["mean_failure_rate"] =
        report.mean_metric(mode, &PathMetrics::failure_rate);
    m["min_tau_real"] = report.mean_metric(mode, &PathMetrics::min_tau_real);
    if (include_timing) m["median_wall_time"] = report.median_wall_time(mode);
    modes[plan_mode_name(mode)] = m;
  }
  j["modes"] = modes;
  return j;
}

namespace {

void write_histogram_svg(const std::string& path, const std::string& title,
                         const std::vector<std::pair<std::string, std::vector<double>>>& series) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  const int w = 520, h = 300, ml = 50, mb = 40;
  double vmax = 1e-9;
  for (const auto& [name, vals] : series)
    for (double v : vals) vmax = std::max(vmax, v);
  const int bins = 12;
  const char* colors[] = {"#000000", "#f0c800", "#00a000", "#aa00aa"};

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w
      << "\" height=\"" << h << "\">\n";
  out << "<text x=\"" << w / 2 << "\" y=\"16\" text-anchor=\"middle\" "
      << "font-size=\"13\">" << title << "</text>\n";
  const double bw = static_cast<double>(w - ml - 10) / bins;
  for (std::size_t s = 0; s < series.size(); ++s) {
    std::vector<int> hist(bins, 0);
    int hmax = 1;
    for (double v : series[s].second) {
      int b = std::min(bins - 1, static_cast<int>(v / vmax * bins));
      hmax = std::max(hmax, ++hist[b]);
    }
    for (int b = 0; b < bins; ++b) {
      if (!hist[b]) continue;
      const double bh = static_cast<double>(hist[b]) / hmax * (h - mb - 30);
      const double x = ml + b * bw + s * (bw / series.size());
      char buf[256];
      std::snprintf(buf, sizeof(buf),
                    "<rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\""
                    " fill=\"%s\" fill-opacity=\"0.65\"/>\n",
                    x, h - mb - bh, bw / series.size() - 1.0, bh,
                    colors[s % 4]);
      out << buf;
    }
    out << "<text x=\"" << ml + 10 << "\" y=\"" << 30 + 14 * s
        << "\" font-size=\"11\" fill=\"" << colors[s % 4] << "\">"
        << series[s].first << "</text>\n";
  }
  char axis[256];
  std::snprintf(axis, sizeof(axis),
                "<line x1=\"%d\" y1=\"%d\" x2=\"%d\" y2=\"%d\" stroke=\"black\"/>"
                "<text x=\"%d\" y=\"%d\" font-size=\"11\">0</text>"
                "<text x=\"%d\" y=\"%d\" font-size=\"11\" text-anchor=\"end\">%.3g</text>\n",
                ml, h - mb, w - 10, h - mb, ml, h - mb + 14, w - 10, h - mb + 14,
                vmax);
  out << axis << "</svg>\n";
}

}  // namespace

void write_bench_svgs(const BenchReport& report, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  std::vector<std::pair<std::string, std::vector<double>>> hazard_series;
  for (const PlanMode mode : report.options.modes) {
    std::vector<double> vals;
    for (const auto& r : report.records)
      if (r.mode == mode && r.status == PlanStatus::Success)
        vals.push_back(r.metrics.hazard);
    hazard_series.emplace_back(plan_mode_name(mode), std::move(vals));
  }
  write_histogram_svg((fs::path(dir) / "hazard_hist.svg").string(),
                      "path hazard distribution", hazard_series);

  std::vector<std::pair<std::string, std::vector<double>>> length_series;
  for (const PlanMode mode : report.options.modes) {
    std::vector<double> vals;
    for (const auto& r : report.records)
      if (r.mode == mode && r.status == PlanStatus::Success)
        vals.push_back(r.length);
    length_series.emplace_back(plan_mode_name(mode), std::move(vals));
  }
  write_histogram_svg((fs::path(dir) / "length_hist.svg").string(),
                      "path length distribution", length_series);

  // paired timing scatter: t-hybrid vs dem-baseline
  std::vector<std::pair<double, double>> pts;
  for (int t = 0; t < report.options.trials; ++t) {
    double th = -1, dem = -1;
    for (const auto& r : report.records) {
      if (r.trial != t || r.status != PlanStatus::Success) continue;
      if (r.mode == PlanMode::THybrid) th = r.wall_time;
      if (r.mode == PlanMode::BaselineDEM) dem = r.wall_time;
    }
    if (th >= 0 && dem >= 0) pts.emplace_back(th, dem);
  }
  if (!pts.empty()) {
    std::ofstream out((fs::path(dir) / "timing_scatter.svg").string());
    const int w = 360, h = 360, m = 45;
    double vmax = 1e-9;
    for (auto& [a, b] : pts) vmax = std::max({vmax, a, b});
    vmax *= 1.05;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w
        << "\" height=\"" << h << "\">\n";
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%d\" y1=\"%d\" x2=\"%d\" y2=\"%d\" stroke=\"black\"/>"
                  "<line x1=\"%d\" y1=\"%d\" x2=\"%d\" y2=\"%d\" stroke=\"black\"/>"
                  "<line x1=\"%d\" y1=\"%d\" x2=\"%d\" y2=\"%d\" "
                  "stroke=\"gray\" stroke-dasharray=\"5,4\"/>\n",
                  m, h - m, w - 10, h - m, m, h - m, m, 10, m, h - m, w - 10,
                  10 + (h - m - 10) - (w - 10 - m));
    out << buf;
    for (auto& [a, b] : pts) {
      const double x = m + a / vmax * (w - m - 10);
      const double y = h - m - b / vmax * (h - m - 10);
      std::snprintf(buf, sizeof(buf),
                    "<circle cx=\"%.1f\" cy=\"%.1f\" r=\"3\" fill=\"red\"/>\n",
                    x, y);
      out << buf;
    }
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%d\" y=\"%d\" font-size=\"11\">t-hybrid time [s]</text>"
                  "<text x=\"12\" y=\"%d\" font-size=\"11\" transform=\"rotate(-90 12 %d)\">"
                  "dem-baseline time [s]</text>\n",
                  w / 2 - 40, h - 8, h / 2, h / 2);
    out << buf << "</svg>\n";
  }
}

}  // namespace terrapath
