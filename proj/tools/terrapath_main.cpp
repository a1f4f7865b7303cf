#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include "terrapath/bench.hpp"
#include "terrapath/config.hpp"
#include "terrapath/errors.hpp"
#include "terrapath/hybrid_map.hpp"
#include "terrapath/planner.hpp"
#include "terrapath/point_cloud.hpp"
#include "terrapath/render.hpp"
#include "terrapath/terrain_assessment.hpp"
#include "terrapath/terrain_gen.hpp"
#include "terrapath/voxel_grid.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitBadArgs = 2;
constexpr int kExitIo = 3;
constexpr int kExitNoPath = 4;
constexpr int kExitLimit = 5;

void log_line(const std::string& msg) {
  std::fprintf(stderr, "[terrapath] %s\n", msg.c_str());
}

// bad command-line values map to the usage exit code
terrapath::Pose2 parse_pose(const std::string& s) {
  terrapath::Pose2 p;
  if (std::sscanf(s.c_str(), "%lf,%lf,%lf", &p.x, &p.y, &p.theta) != 3)
    throw terrapath::InvalidSpecError("pose must be x,y,theta: '" + s + "'");
  return p;
}

terrapath::CloudFormat parse_format(const std::string& s) {
  if (s == "xyz-csv") return terrapath::CloudFormat::XyzCsv;
  if (s == "pcd-ascii") return terrapath::CloudFormat::PcdAscii;
  if (s == "ply-ascii") return terrapath::CloudFormat::PlyAscii;
  if (s == "auto") return terrapath::CloudFormat::Auto;
  throw terrapath::InvalidSpecError("unknown cloud format '" + s + "'");
}

struct CommonConfig {
  std::string config_path;
  std::vector<std::string> sets;

  terrapath::ToolConfig resolve() const {
    terrapath::ToolConfig cfg;
    if (!config_path.empty()) cfg = terrapath::load_config(config_path);
    for (const auto& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos)
        throw terrapath::InvalidSpecError("--set expects key=value, got '" + kv +
                                          "'");
      if (!cfg.apply(kv.substr(0, eq), kv.substr(eq + 1)))
        throw terrapath::InvalidSpecError("unknown config key '" +
                                          kv.substr(0, eq) + "'");
    }
    cfg.spec.validate();
    return cfg;
  }

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "key = value config file");
    app->add_option("--set", sets, "override a config key (key=value)")
        ->take_all();
  }
};

std::vector<terrapath::Pose2> read_overlay_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw terrapath::FileNotFoundError(path);
  std::vector<terrapath::Pose2> poses;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || !(std::isdigit(line[0]) || line[0] == '-')) continue;
    terrapath::Pose2 p;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &p.x, &p.y, &p.theta) < 2)
      throw terrapath::FormatError("bad path row", line_no);
    poses.push_back(p);
  }
  return poses;
}

terrapath::HybridMap assess_cloud(const terrapath::PointCloud& cloud,
                                  const terrapath::ToolConfig& cfg,
                                  terrapath::AssessStats* stats) {
  const auto dims = terrapath::voxel_dims(cfg.spec);
  const auto grid = terrapath::segment(cloud, dims, cfg.segment);
  return terrapath::assess(cloud, grid, cfg.spec, cfg.assess, stats);
}

int run(int argc, char** argv) {
  CLI::App app{"terrain-aware hybrid-map path planning toolkit"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  // --- gen -------------------------------------------------------------
  auto* gen = app.add_subcommand("gen", "generate a synthetic scenario cloud");
  std::string gen_scenario, gen_out, gen_format = "xyz-csv";
  gen->add_option("scenario", gen_scenario, "scenario spec file")->required();
  gen->add_option("-o,--output", gen_out, "output cloud path")->required();
  gen->add_option("--format", gen_format, "xyz-csv | pcd-ascii | ply-ascii");
  std::optional<std::uint64_t> gen_seed;
  gen->add_option("--seed", gen_seed, "override the scenario seed");

  // --- assess ----------------------------------------------------------
  auto* assess = app.add_subcommand("assess", "build a hybrid map from a cloud");
  std::string assess_cloud_path, assess_out, assess_cloud_format = "auto";
  bool assess_strict = false, assess_no_window = false, assess_zmin = false;
  CommonConfig assess_cfg;
  assess->add_option("cloud", assess_cloud_path, "input point cloud")->required();
  assess->add_option("-o,--output", assess_out, "output map path")->required();
  assess->add_option("--cloud-format", assess_cloud_format,
                     "xyz-csv | pcd-ascii | ply-ascii | auto");
  assess->add_flag("--strict", assess_strict,
                   "fail on non-finite rows instead of dropping them");
  assess->add_flag("--no-dynamic-window", assess_no_window,
                   "retain whole columns (disables overhang exclusion)");
  assess->add_flag("--zground-min", assess_zmin,
                   "use the strict column minimum for z_ground");
  double assess_fine_res = -1.0;
  int assess_jobs = 0;
  assess->add_option("--fine-res", assess_fine_res, "fine raster resolution [m]");
  assess->add_option("--jobs", assess_jobs, "worker threads");
  assess_cfg.attach(assess);

  // --- plan ------------------------------------------------------------
  auto* plan_cmd = app.add_subcommand("plan", "plan a path on a hybrid map");
  std::string plan_map, plan_start, plan_goal, plan_out, plan_summary,
      plan_mode = "t-hybrid";
  bool plan_no_timing = false, plan_paper_literal = false;
  double plan_unknown_tau = -1.0;
  CommonConfig plan_cfg;
  plan_cmd->add_option("map", plan_map, "hybrid map file")->required();
  plan_cmd->add_option("--start", plan_start, "start pose x,y,theta")->required();
  plan_cmd->add_option("--goal", plan_goal, "goal pose x,y,theta")->required();
  plan_cmd->add_option("--mode", plan_mode,
                       "t-hybrid | 2d-baseline | dem-baseline");
  plan_cmd->add_option("-o,--output", plan_out, "path CSV output")->required();
  plan_cmd->add_option("--summary", plan_summary, "summary JSON output");
  plan_cmd->add_flag("--no-timing", plan_no_timing,
                     "omit wall-time from the summary");
  plan_cmd->add_flag("--paper-literal-cost", plan_paper_literal,
                     "charge k_trav*tau instead of k_trav*(1-tau)");
  plan_cmd->add_option("--unknown-tau", plan_unknown_tau,
                       "treat unknown cells as passable with this tau");
  plan_cfg.attach(plan_cmd);

  // --- bench -----------------------------------------------------------
  auto* bench_cmd = app.add_subcommand("bench", "randomized planner comparison");
  std::string bench_input, bench_out;
  int bench_trials = 20, bench_jobs = 1;
  double bench_min_sep = 15.0;
  std::uint64_t bench_seed = 1;
  bool bench_no_timing = false, bench_no_plots = false;
  CommonConfig bench_cfg;
  bench_cmd->add_option("input", bench_input, "hybrid map or scenario file")
      ->required();
  bench_cmd->add_option("-o,--output", bench_out, "output directory")->required();
  bench_cmd->add_option("--trials", bench_trials, "number of endpoint pairs");
  bench_cmd->add_option("--min-separation", bench_min_sep,
                        "minimum start/goal distance [m]");
  bench_cmd->add_option("--seed", bench_seed, "sampling seed");
  bench_cmd->add_option("--jobs", bench_jobs, "parallel trials");
  bench_cmd->add_flag("--no-timing", bench_no_timing,
                      "omit timing outputs (deterministic reports)");
  bench_cmd->add_flag("--no-plots", bench_no_plots, "skip SVG plots");
  bench_cfg.attach(bench_cmd);

  // --- render ----------------------------------------------------------
  auto* render_cmd = app.add_subcommand("render", "render a map to PPM/SVG");
  std::string render_map, render_out, render_svg_out;
  std::vector<std::string> render_overlays;
  int render_cell_px = 0;
  render_cmd->add_option("map", render_map, "hybrid map file")->required();
  render_cmd->add_option("-o,--output", render_out, "PPM output path");
  render_cmd->add_option("--svg", render_svg_out, "SVG output path");
  render_cmd->add_option("--overlay", render_overlays,
                         "path CSV to draw (repeatable)")
      ->take_all();
  render_cmd->add_option("--cell-pixels", render_cell_px, "pixels per cell");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitBadArgs;
  }

  if (gen->parsed()) {
    auto spec = terrapath::parse_scenario(gen_scenario);
    if (gen_seed) spec.seed = *gen_seed;
    const auto scenario = terrapath::generate(spec);
    terrapath::save_cloud(scenario.cloud, gen_out, parse_format(gen_format));
    log_line("generated " + std::to_string(scenario.cloud.size()) +
             " points -> " + gen_out);
    return kExitOk;
  }

  if (assess->parsed()) {
    auto cfg = assess_cfg.resolve();
    if (assess_fine_res > 0.0) cfg.assess.fine_resolution = assess_fine_res;
    if (assess_jobs > 0) cfg.assess.jobs = assess_jobs;
    if (assess_no_window) cfg.segment.dynamic_window = false;
    if (assess_zmin) cfg.segment.z_ground_percentile = 0.0;

    const auto loaded = terrapath::load_cloud(
        assess_cloud_path, parse_format(assess_cloud_format), assess_strict);
    if (loaded.report.dropped_non_finite)
      log_line("dropped " + std::to_string(loaded.report.dropped_non_finite) +
               " non-finite rows");
    if (loaded.report.empty_cloud) {
      log_line("warning: input cloud is empty");
      return kExitIo;
    }
    terrapath::AssessStats stats;
    const auto map = assess_cloud(loaded.cloud, cfg, &stats);
    terrapath::save_map(map, assess_out);
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "cells: terrain=%zu obstacle=%zu unknown=%zu "
                  "(steep coarse=%zu, degenerate coarse=%zu, r_max=%.4g)",
                  stats.terrain_cells, stats.obstacle_cells,
                  stats.unknown_cells, stats.steep_coarse_cells,
                  stats.degenerate_coarse_cells, stats.resolved_r_max);
    log_line(buf);
    log_line("map " + std::to_string(map.width()) + "x" +
             std::to_string(map.height()) + " -> " + assess_out);
    return kExitOk;
  }

  if (plan_cmd->parsed()) {
    auto cfg = plan_cfg.resolve();
    const auto map = terrapath::load_map(plan_map);
    terrapath::PlanRequest req;
    req.start = parse_pose(plan_start);
    req.goal = parse_pose(plan_goal);
    req.map = &map;
    const auto mode = terrapath::plan_mode_from_name(plan_mode);
    if (!mode)
      throw terrapath::InvalidSpecError("unknown mode '" + plan_mode + "'");
    req.mode = *mode;
    req.params = cfg.search;
    if (plan_paper_literal) req.params.paper_literal_cost = true;
    if (plan_unknown_tau >= 0.0) {
      req.params.unknown_passable = true;
      req.params.tau_unknown = plan_unknown_tau;
    }

    const auto result = terrapath::plan(req);
    terrapath::write_path_csv(result, plan_out);
    if (!plan_summary.empty())
      terrapath::write_plan_summary_json(result, req, plan_summary,
                                         !plan_no_timing);
    log_line(std::string("plan: ") + terrapath::plan_status_name(result.status) +
             ", length " + std::to_string(result.length) + " m, " +
             std::to_string(result.expansions) + " expansions");
    switch (result.status) {
      case terrapath::PlanStatus::Success: return kExitOk;
      case terrapath::PlanStatus::LimitExceeded: return kExitLimit;
      default: return kExitNoPath;
    }
  }

  if (bench_cmd->parsed()) {
    auto cfg = bench_cfg.resolve();
    namespace fs = std::filesystem;
    terrapath::HybridMap map;
    if (bench_input.size() > 4 &&
        bench_input.substr(bench_input.size() - 4) == ".scn") {
      const auto scenario = terrapath::generate(terrapath::parse_scenario(bench_input));
      map = assess_cloud(scenario.cloud, cfg, nullptr);
    } else {
      map = terrapath::load_map(bench_input);
    }
    terrapath::BenchOptions options;
    options.trials = bench_trials;
    options.min_separation = bench_min_sep;
    options.seed = bench_seed;
    options.jobs = bench_jobs;
    options.params = cfg.search;
    const auto report = terrapath::run_suite(map, options);

    fs::create_directories(bench_out);
    terrapath::write_trials_csv(report, (fs::path(bench_out) / "trials.csv").string());
    {
      std::ofstream out((fs::path(bench_out) / "summary.json").string());
      out << terrapath::bench_summary(report, !bench_no_timing).dump(2) << "\n";
    }
    if (!bench_no_timing)
      terrapath::write_timings_csv(report,
                                   (fs::path(bench_out) / "timings.csv").string());
    if (!bench_no_plots) terrapath::write_bench_svgs(report, bench_out);
    log_line("bench: " + std::to_string(bench_trials) + " trials -> " + bench_out);
    return kExitOk;
  }

  if (render_cmd->parsed()) {
    const auto map = terrapath::load_map(render_map);
    std::vector<terrapath::PathOverlay> overlays;
    for (const auto& p : render_overlays)
      overlays.push_back({std::filesystem::path(p).stem().string(),
                          read_overlay_csv(p)});
    terrapath::RenderOptions options;
    options.cell_pixels = render_cell_px;
    if (render_out.empty() && render_svg_out.empty())
      throw terrapath::InvalidSpecError("render needs -o and/or --svg");
    if (!render_out.empty())
      terrapath::render_ppm(map, render_out, overlays, options);
    if (!render_svg_out.empty())
      terrapath::render_svg(map, render_svg_out, overlays, options);
    log_line("rendered " + render_out + (render_svg_out.empty() ? "" : " " + render_svg_out));
    return kExitOk;
  }

  return kExitBadArgs;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const terrapath::FileNotFoundError& e) {
    log_line(std::string("error: ") + e.what());
    return kExitIo;
  } catch (const terrapath::FormatError& e) {
    log_line(std::string("error: ") + e.what());
    return kExitIo;
  } catch (const terrapath::CorruptFileError& e) {
    log_line(std::string("error: ") + e.what());
    return kExitIo;
  } catch (const terrapath::VersionMismatchError& e) {
    log_line(std::string("error: ") + e.what());
    return kExitIo;
  } catch (const terrapath::IoError& e) {
    log_line(std::string("error: ") + e.what());
    return kExitIo;
  } catch (const terrapath::EmptyCloudError& e) {
    log_line(std::string("error: ") + e.what());
    return kExitIo;
  } catch (const terrapath::InvalidSpecError& e) {
    log_line(std::string("config error: ") + e.what());
    return kExitBadArgs;
  } catch (const terrapath::SamplingExhaustedError& e) {
    log_line(std::string("error: ") + e.what());
    return kExitNoPath;
  } catch (const std::exception& e) {
    log_line(std::string("internal error: ") + e.what());
    return 1;
  }
}
