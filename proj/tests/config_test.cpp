#include <fstream>
#include <string>

#include <gtest/gtest.h>

#include "camsel/config.hpp"

namespace camsel {
namespace {

const char* kMinimal = R"({
  "world": { "trajectory_length_m": 400, "region_length_m": 100, "landmarks_per_region": 800 },
  "rig": { "preset": "default" }
})";

std::string field_of(const std::string& text) {
  try {
    parse_run_config(text);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<no error>";
}

std::string with(const std::string& extra) {
  std::string s = kMinimal;
  s.insert(s.rfind('}'), "," + extra);
  return s;
}

TEST(Config, ParsesShippedConfigs) {
  for (const char* name : {"minimal.json", "worst_case.json"}) {
    const std::string path = std::string(CAMSEL_SOURCE_DIR) + "/configs/" + name;
    EXPECT_NO_THROW(load_run_config(path)) << path;
  }
  const RunConfig cfg = load_run_config(std::string(CAMSEL_SOURCE_DIR) + "/configs/minimal.json");
  EXPECT_EQ(cfg.seed, 7u);
  EXPECT_EQ(cfg.log, "minimal");
  EXPECT_EQ(cfg.slice_length_frames, 200);
  ASSERT_EQ(cfg.profile.overrides.size(), 1u);
  EXPECT_EQ(cfg.profile.overrides[0].cameras, std::vector<int>{0});
}

TEST(Config, DefaultsWhenSectionsOmitted) {
  const RunConfig cfg = parse_run_config(kMinimal);
  EXPECT_EQ(cfg.rig.size(), 4u);
  EXPECT_EQ(cfg.selectors.size(), kAllSelectors.size());
  EXPECT_EQ(cfg.bins.size(), 3u);
  EXPECT_EQ(cfg.place_width_images, 40);
  EXPECT_EQ(cfg.world.trajectory_length_m, 400.0);
}

TEST(Config, MissingRequiredSectionNamesIt) {
  EXPECT_EQ(field_of(R"({"world": {}})"), "rig");
  EXPECT_EQ(field_of(R"({"rig": {"preset": "default"}})"), "world");
}

TEST(Config, UnknownKeysReportFullPath) {
  EXPECT_EQ(field_of(with(R"("bogus": 1)")), "bogus");
  EXPECT_EQ(field_of(R"({"world": {"bogus": 1}, "rig": {"preset": "default"}})"), "world.bogus");
  EXPECT_EQ(field_of(with(R"("profile": {"overrides": [{"cameras": [1], "regions": [0, 1], "foo": 2}]})")),
            "profile.overrides[0].foo");
}

TEST(Config, InvalidJsonReportsLine) {
  try {
    parse_run_config("{\n  \"seed\": 3,\n  \"world\": {,\n}", "bad.json");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("bad.json:3: invalid JSON"), std::string::npos) << e.what();
  }
}

TEST(Config, OverrideInheritsUnsetFieldsFromDefault) {
  const RunConfig cfg = parse_run_config(with(R"("profile": {
      "default": {"visible_landmark_fraction": 0.6, "pixel_noise_sigma_px": 0.7, "outlier_fraction": 0.2},
      "overrides": [{"cameras": [2, 3], "regions": [1, 4], "pixel_noise_sigma_px": 3.0}]})"));
  const QualityOverride& o = cfg.profile.overrides.at(0);
  EXPECT_EQ(o.cameras, (std::vector<int>{2, 3}));
  EXPECT_EQ(o.region_begin, 1);
  EXPECT_EQ(o.region_end, 4);
  EXPECT_EQ(o.quality.pixel_noise_sigma_px, 3.0);
  EXPECT_EQ(o.quality.visible_landmark_fraction, 0.6);
  EXPECT_EQ(o.quality.outlier_fraction, 0.2);
  EXPECT_EQ(cfg.profile.quality(2, 2).pixel_noise_sigma_px, 3.0);
  EXPECT_EQ(cfg.profile.quality(0, 2).pixel_noise_sigma_px, 0.7);
}

TEST(Config, OverrideCameraOutsideRigRejected) {
  EXPECT_EQ(field_of(with(R"("profile": {"overrides": [{"cameras": [4], "regions": [0, 1]}]})")),
            "profile.overrides[0].cameras");
}

TEST(Config, SeedDerivesSubSeeds) {
  const RunConfig a = parse_run_config(with(R"("seed": 11)"));
  RunConfig b = parse_run_config(kMinimal);
  EXPECT_NE(a.world.rng_seed, b.world.rng_seed);
  b.apply_seed(11);
  EXPECT_EQ(a.world.rng_seed, b.world.rng_seed);
  EXPECT_EQ(a.ransac.rng_seed, b.ransac.rng_seed);
  EXPECT_EQ(a.kde.rng_seed, b.kde.rng_seed);
  EXPECT_EQ(a.traverse_seed(TraverseRole::Query), b.traverse_seed(TraverseRole::Query));
  EXPECT_NE(a.traverse_seed(TraverseRole::Query), a.traverse_seed(TraverseRole::Training));
  EXPECT_NE(a.world.rng_seed, a.ransac.rng_seed);
}

TEST(Config, SelectorList) {
  const RunConfig cfg = parse_run_config(with(R"("selectors": ["dynamic", "static", "oracle"])"));
  EXPECT_EQ(cfg.selectors,
            (std::vector<SelectorKind>{SelectorKind::DynamicCam, SelectorKind::StaticCam, SelectorKind::OracleCam}));
  EXPECT_EQ(field_of(with(R"("selectors": ["dynamic", "dynamic"])")), "selectors[1]");
  EXPECT_EQ(field_of(with(R"("selectors": ["dynamic", "best"])")), "selectors[1]");
  EXPECT_EQ(field_of(with(R"("selectors": [])")), "selectors");
}

TEST(Config, CustomCameraList) {
  const RunConfig cfg = parse_run_config(R"({
    "world": {"trajectory_length_m": 400},
    "rig": {"cameras": [
      {"id": 0, "fx": 500, "fy": 500, "cx": 320, "cy": 240, "width": 640, "height": 480, "yaw_deg": 0, "position": [1, 0, 1.5]},
      {"id": 1, "fx": 400, "fy": 400, "cx": 320, "cy": 240, "width": 640, "height": 480, "yaw_deg": 180, "position": [-1, 0, 1.5]}
    ]}})");
  ASSERT_EQ(cfg.rig.size(), 2u);
  EXPECT_EQ(cfg.rig.camera(1).intrinsics().fx, 400.0);
  const Eigen::Vector3d forward = cfg.rig.camera(1).extrinsic().rotation().col(2);
  EXPECT_NEAR(forward.x(), -1.0, 1e-12);
  EXPECT_EQ(field_of(R"({"world": {}, "rig": {"cameras": [
      {"id": 1, "fx": 500, "fy": 500, "cx": 320, "cy": 240, "width": 640, "height": 480, "position": [0, 0, 0]}]}})"),
            "rig.cameras[0].id");
}

TEST(Config, ValidationErrors) {
  EXPECT_EQ(field_of(with(R"("places": {"width_images": 10, "stride_images": 20})")), "places.stride_images");
  EXPECT_EQ(field_of(with(R"("evaluation": {"failure_thresholds": [50, 30, 70]})")), "evaluation.failure_thresholds");
  EXPECT_EQ(field_of(with(R"("evaluation": {"bins": [{"t_tol_m": -1, "r_tol_deg": 2}], "failure_thresholds": [30]})")),
            "evaluation.bins[0]");
  EXPECT_EQ(field_of(with(R"("traverses": {"query": {"condition_shift": 1.5}})")), "traverses.query.condition_shift");
  EXPECT_EQ(field_of(with(R"("kde": {"kernel": "epanechnikov"})")), "kde.kernel");
  EXPECT_EQ(field_of(with(R"("seed": -3)")), "seed");
  EXPECT_EQ(field_of(with(R"("ransac": {"confidence": 1.5})")).rfind("ransac", 0), 0u);
}

TEST(Config, MissingFileIsConfigError) { EXPECT_THROW(load_run_config("/nonexistent/camsel.json"), ConfigError); }

}  // namespace
}  // namespace camsel
