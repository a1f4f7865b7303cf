#include <doctest.h>

#include "terrapath/config.hpp"
#include "terrapath/errors.hpp"

using namespace terrapath;

TEST_CASE("defaults match the reference parameter set") {
  const ToolConfig cfg;
  CHECK(cfg.spec.robot_length == 0.7);
  CHECK(cfg.spec.robot_width == 0.5);
  CHECK(cfg.spec.rho_max == 0.3);
  CHECK(cfg.spec.h_max == 0.1);
  CHECK(cfg.spec.weight_roughness == 0.5);
  CHECK(cfg.spec.weight_slope == 0.5);
  CHECK(cfg.spec.w_roughness == 0.3);
  CHECK(cfg.spec.w_roll == 0.4);
  CHECK(cfg.spec.w_pitch == 0.4);
  CHECK(cfg.spec.roll_max == 0.18);
  CHECK(cfg.spec.pitch_min == -0.3);
  CHECK(cfg.spec.pitch_max == 0.25);
  CHECK(cfg.spec.k_turn == 1.1);
  CHECK(cfg.spec.k_trav == 2.0);
  CHECK(cfg.assess.fine_resolution == 0.5);
  CHECK_NOTHROW(cfg.spec.validate());
}

TEST_CASE("config text overrides and unknown keys") {
  ToolConfig cfg;
  apply_config_text(cfg,
                    "rho_max = 0.4  # steeper robot\n"
                    "fine_resolution = 0.25\n"
                    "dynamic_window = off\n"
                    "primitive_count = 7\n");
  CHECK(cfg.spec.rho_max == 0.4);
  CHECK(cfg.assess.fine_resolution == 0.25);
  CHECK(cfg.segment.dynamic_window == false);
  CHECK(cfg.search.primitive_count == 7);

  CHECK_THROWS_AS(apply_config_text(cfg, "nonsense = 1\n"), FormatError);
  CHECK_THROWS_AS(apply_config_text(cfg, "rho_max = banana\n"), FormatError);
  CHECK_THROWS_AS(apply_config_text(cfg, "just a line\n"), FormatError);
}

TEST_CASE("invalid spec values fail validation") {
  ToolConfig cfg;
  apply_config_text(cfg, "pitch_min = 0.2\n");  // must be negative
  CHECK_THROWS_AS(cfg.spec.validate(), InvalidSpecError);
}
