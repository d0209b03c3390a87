#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "camsel/baselines.hpp"
#include "camsel/detail/seed.hpp"
#include "camsel/errors.hpp"
#include "camsel/evaluation.hpp"
#include "camsel/geometry.hpp"
#include "camsel/localizer.hpp"
#include "camsel/selection.hpp"
#include "camsel/simulator.hpp"

namespace camsel {

// Everything a run needs. Sub-seeds are derived from `seed` so one number
// (or --seed) pins the whole pipeline.
struct RunConfig {
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  WorldConfig world;
  Rig rig = default_rig();
  CameraQualityProfile profile;
  int place_width_images = 40;
  int place_stride_images = 10;
  CostFunction cost;
  KdeConfig kde;
  RansacConfig ransac;
  std::vector<SelectorKind> selectors{kAllSelectors.begin(), kAllSelectors.end()};
  std::vector<ToleranceBin> bins = default_bins();
  FailureThresholds thresholds;
  int slice_length_frames = 1000;
  std::string log = "synthetic";
  std::array<double, 3> condition_shift{0.0, 0.0, 0.0};  // map, training, query

  // Re-derives world, KDE and RANSAC seeds from `master`.
  void apply_seed(std::uint64_t master) {
    seed = master;
    world.rng_seed = detail::mix_seed(master, {1});
    ransac.rng_seed = detail::mix_seed(master, {3});
    kde.rng_seed = detail::mix_seed(master, {4});
  }

  std::uint64_t traverse_seed(TraverseRole role) const {
    return detail::mix_seed(seed, {2, static_cast<std::uint64_t>(role)});
  }

  std::uint64_t random_selector_seed() const { return detail::mix_seed(seed, {5}); }

  double shift(TraverseRole role) const { return condition_shift[static_cast<std::size_t>(role)]; }

  void validate() const {
    world.validate();
    profile.validate();
    if (place_width_images <= 0) throw ConfigError("places.width_images", "must be > 0");
    if (place_stride_images <= 0 || place_stride_images > place_width_images)
      throw ConfigError("places.stride_images", "must satisfy 0 < stride <= width");
    if (world.num_frames() < place_width_images)
      throw ConfigError("world.trajectory_length_m", "trajectory has fewer images than one place width");
    cost.validate();
    kde.validate();
    ransac.validate();
    if (selectors.empty()) throw ConfigError("selectors", "list at least one selector");
    if (bins.empty()) throw ConfigError("evaluation.bins", "list at least one bin");
    for (std::size_t i = 0; i < bins.size(); ++i) bins[i].validate("evaluation.bins[" + std::to_string(i) + "]");
    thresholds.validate(bins.size());
    if (slice_length_frames <= 0) throw ConfigError("evaluation.slice_length_frames", "must be > 0");
    if (log.empty() || log.find_first_of(", \t\n\r") != std::string::npos)
      throw ConfigError("evaluation.log", "must be non-empty without commas or whitespace");
    for (std::size_t i = 0; i < condition_shift.size(); ++i)
      if (!(condition_shift[i] >= 0.0 && condition_shift[i] <= 1.0))
        throw ConfigError(std::string("traverses.") + to_string(static_cast<TraverseRole>(i)) + ".condition_shift",
                          "must be in [0, 1]");
    if (output_dir.empty()) throw ConfigError("output_dir", "must be non-empty");
  }
};

namespace detail {

using nlohmann::json;

// Typed, path-aware view of one JSON object that rejects unknown keys.
class JsonSection {
 public:
  JsonSection(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_, "expected an object");
  }

  void allow_only(std::initializer_list<const char*> keys) const {
    for (const auto& item : j_.items()) {
      const bool known = std::any_of(keys.begin(), keys.end(), [&](const char* k) { return item.key() == k; });
      if (!known) throw ConfigError(field(item.key()), "unknown key");
    }
  }

  bool has(const char* key) const { return j_.contains(key); }
  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  const std::string& path() const { return path_; }

  const json& raw(const char* key) const {
    if (!has(key)) throw ConfigError(field(key), "required key missing");
    return j_.at(key);
  }

  double number(const char* key, double fallback) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number()) throw ConfigError(field(key), "expected a number");
    return v.get<double>();
  }

  template <typename Int>
  Int integer(const char* key, Int fallback) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number_integer()) throw ConfigError(field(key), "expected an integer");
    if constexpr (std::is_unsigned_v<Int>) {
      if (v.is_number_unsigned()) return v.get<Int>();
      if (v.get<long long>() < 0) throw ConfigError(field(key), "must be non-negative");
    }
    return v.get<Int>();
  }

  std::string string(const char* key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_string()) throw ConfigError(field(key), "expected a string");
    return v.get<std::string>();
  }

  JsonSection object(const char* key) const { return JsonSection(raw(key), field(key)); }

  std::vector<double> numbers(const char* key) const {
    const json& v = raw(key);
    if (!v.is_array()) throw ConfigError(field(key), "expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) throw ConfigError(field(key), "expected an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  std::vector<int> integers(const char* key) const {
    const json& v = raw(key);
    if (!v.is_array()) throw ConfigError(field(key), "expected an array of integers");
    std::vector<int> out;
    for (const auto& e : v) {
      if (!e.is_number_integer()) throw ConfigError(field(key), "expected an array of integers");
      out.push_back(e.get<int>());
    }
    return out;
  }

 private:
  const json& j_;
  std::string path_;
};

inline WorldConfig parse_world(const JsonSection& s) {
  s.allow_only({"trajectory_length_m", "image_spacing_m", "landmarks_per_region", "region_length_m",
                "lateral_amplitude_m", "lateral_period_m", "map_point_sigma_m", "band_inner_m", "band_outer_m",
                "min_height_m", "max_height_m", "max_visible_depth_m"});
  WorldConfig w;
  w.trajectory_length_m = s.number("trajectory_length_m", w.trajectory_length_m);
  w.image_spacing_m = s.number("image_spacing_m", w.image_spacing_m);
  w.landmarks_per_region = s.integer<int>("landmarks_per_region", w.landmarks_per_region);
  w.region_length_m = s.number("region_length_m", w.region_length_m);
  w.lateral_amplitude_m = s.number("lateral_amplitude_m", w.lateral_amplitude_m);
  w.lateral_period_m = s.number("lateral_period_m", w.lateral_period_m);
  w.map_point_sigma_m = s.number("map_point_sigma_m", w.map_point_sigma_m);
  w.band_inner_m = s.number("band_inner_m", w.band_inner_m);
  w.band_outer_m = s.number("band_outer_m", w.band_outer_m);
  w.min_height_m = s.number("min_height_m", w.min_height_m);
  w.max_height_m = s.number("max_height_m", w.max_height_m);
  w.max_visible_depth_m = s.number("max_visible_depth_m", w.max_visible_depth_m);
  return w;
}

inline CameraModel parse_camera(const JsonSection& s, int expected_id) {
  s.allow_only({"id", "fx", "fy", "cx", "cy", "width", "height", "yaw_deg", "position", "body_from_camera"});
  const int id = s.integer<int>("id", expected_id);
  if (id != expected_id) throw ConfigError(s.field("id"), "camera ids must be 0, 1, 2, ... in list order");
  const Intrinsics k{s.number("fx", 0.0), s.number("fy", 0.0), s.number("cx", -1.0), s.number("cy", -1.0)};
  const int width = s.integer<int>("width", 0);
  const int height = s.integer<int>("height", 0);
  Pose extrinsic;
  try {
    if (s.has("body_from_camera")) {
      if (s.has("yaw_deg") || s.has("position"))
        throw ConfigError(s.field("body_from_camera"), "give either body_from_camera or yaw_deg/position");
      extrinsic = pose_from_numbers(s.numbers("body_from_camera"));
    } else {
      const auto pos = s.numbers("position");
      if (pos.size() != 3) throw ConfigError(s.field("position"), "expected 3 numbers");
      extrinsic = camera_mount(s.number("yaw_deg", 0.0), {pos[0], pos[1], pos[2]});
    }
    return CameraModel(id, k, width, height, extrinsic);
  } catch (const DomainError& e) {
    throw ConfigError(s.path(), e.what());
  }
}

inline Rig parse_rig(const JsonSection& s) {
  s.allow_only({"preset", "cameras"});
  if (s.has("preset") == s.has("cameras")) throw ConfigError(s.path(), "give exactly one of 'preset' or 'cameras'");
  if (s.has("preset")) {
    const std::string preset = s.string("preset", "");
    if (preset != "default") throw ConfigError(s.field("preset"), "unknown preset '" + preset + "' (expected default)");
    return default_rig();
  }
  const json& list = s.raw("cameras");
  if (!list.is_array() || list.empty()) throw ConfigError(s.field("cameras"), "expected a non-empty array");
  std::vector<CameraModel> cams;
  for (std::size_t i = 0; i < list.size(); ++i)
    cams.push_back(parse_camera(JsonSection(list[i], s.field("cameras") + "[" + std::to_string(i) + "]"),
                                static_cast<int>(i)));
  return Rig(std::move(cams));
}

inline CameraQuality parse_quality_fields(const JsonSection& s, CameraQuality q) {
  q.visible_landmark_fraction = s.number("visible_landmark_fraction", q.visible_landmark_fraction);
  q.pixel_noise_sigma_px = s.number("pixel_noise_sigma_px", q.pixel_noise_sigma_px);
  q.outlier_fraction = s.number("outlier_fraction", q.outlier_fraction);
  q.dropout_probability = s.number("dropout_probability", q.dropout_probability);
  return q;
}

inline CameraQualityProfile parse_profile(const JsonSection& s, const Rig& rig) {
  s.allow_only({"default", "overrides"});
  CameraQualityProfile p;
  if (s.has("default")) {
    const JsonSection d = s.object("default");
    d.allow_only({"visible_landmark_fraction", "pixel_noise_sigma_px", "outlier_fraction", "dropout_probability"});
    p.base = parse_quality_fields(d, p.base);
  }
  if (s.has("overrides")) {
    const json& list = s.raw("overrides");
    if (!list.is_array()) throw ConfigError(s.field("overrides"), "expected an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const JsonSection o(list[i], s.field("overrides") + "[" + std::to_string(i) + "]");
      o.allow_only({"cameras", "regions", "visible_landmark_fraction", "pixel_noise_sigma_px", "outlier_fraction",
                    "dropout_probability"});
      QualityOverride ov;
      ov.cameras = o.integers("cameras");
      for (const int c : ov.cameras)
        if (c < 0 || c >= static_cast<int>(rig.size()))
          throw ConfigError(o.field("cameras"), "camera " + std::to_string(c) + " is not in the rig");
      const auto regions = o.integers("regions");
      if (regions.size() != 2) throw ConfigError(o.field("regions"), "expected [begin, end)");
      ov.region_begin = regions[0];
      ov.region_end = regions[1];
      ov.quality = parse_quality_fields(o, p.base);
      p.overrides.push_back(std::move(ov));
    }
  }
  return p;
}

inline std::size_t line_of_offset(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

}  // namespace detail

// Parses a JSON run configuration. Missing optional sections keep their
// defaults; `world` and `rig` are required.
inline RunConfig parse_run_config(std::string_view text, const std::string& source = "config") {
  using detail::json;
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError("", source + ":" + std::to_string(detail::line_of_offset(text, e.byte > 0 ? e.byte - 1 : 0)) +
                              ": invalid JSON (byte " + std::to_string(e.byte) + ")");
  }
  const detail::JsonSection top(root, "");
  top.allow_only({"seed", "output_dir", "world", "rig", "profile", "places", "cost", "kde", "ransac", "selectors",
                  "evaluation", "traverses"});

  RunConfig cfg;
  cfg.output_dir = top.string("output_dir", cfg.output_dir);
  cfg.world = detail::parse_world(top.object("world"));
  cfg.rig = detail::parse_rig(top.object("rig"));
  if (top.has("profile")) cfg.profile = detail::parse_profile(top.object("profile"), cfg.rig);

  if (top.has("places")) {
    const auto s = top.object("places");
    s.allow_only({"width_images", "stride_images"});
    cfg.place_width_images = s.integer<int>("width_images", cfg.place_width_images);
    cfg.place_stride_images = s.integer<int>("stride_images", cfg.place_stride_images);
  }
  if (top.has("cost")) {
    const auto s = top.object("cost");
    s.allow_only({"p", "x_max"});
    cfg.cost.p = s.number("p", cfg.cost.p);
    cfg.cost.x_max = s.number("x_max", cfg.cost.x_max);
  }
  if (top.has("kde")) {
    const auto s = top.object("kde");
    s.allow_only({"kernel", "bandwidth", "mc_samples"});
    const std::string kernel = s.string("kernel", "gaussian");
    if (kernel != "gaussian") throw ConfigError(s.field("kernel"), "only 'gaussian' is supported");
    cfg.kde.bandwidth = s.number("bandwidth", cfg.kde.bandwidth);
    cfg.kde.mc_samples = s.integer<int>("mc_samples", cfg.kde.mc_samples);
  }
  if (top.has("ransac")) {
    const auto s = top.object("ransac");
    s.allow_only({"inlier_threshold_px", "max_iterations", "confidence", "min_inliers"});
    cfg.ransac.inlier_threshold_px = s.number("inlier_threshold_px", cfg.ransac.inlier_threshold_px);
    cfg.ransac.max_iterations = s.integer<int>("max_iterations", cfg.ransac.max_iterations);
    cfg.ransac.confidence = s.number("confidence", cfg.ransac.confidence);
    cfg.ransac.min_inliers = s.integer<int>("min_inliers", cfg.ransac.min_inliers);
  }
  if (top.has("selectors")) {
    const json& list = top.raw("selectors");
    if (!list.is_array()) throw ConfigError("selectors", "expected an array of selector names");
    cfg.selectors.clear();
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string field = "selectors[" + std::to_string(i) + "]";
      if (!list[i].is_string()) throw ConfigError(field, "expected a selector name");
      const SelectorKind k = parse_selector(list[i].get<std::string>(), field);
      if (std::find(cfg.selectors.begin(), cfg.selectors.end(), k) != cfg.selectors.end())
        throw ConfigError(field, "duplicate selector");
      cfg.selectors.push_back(k);
    }
  }
  if (top.has("evaluation")) {
    const auto s = top.object("evaluation");
    s.allow_only({"bins", "failure_thresholds", "slice_length_frames", "log"});
    if (s.has("bins")) {
      const json& list = s.raw("bins");
      if (!list.is_array()) throw ConfigError(s.field("bins"), "expected an array");
      cfg.bins.clear();
      for (std::size_t i = 0; i < list.size(); ++i) {
        const detail::JsonSection b(list[i], s.field("bins") + "[" + std::to_string(i) + "]");
        b.allow_only({"t_tol_m", "r_tol_deg"});
        cfg.bins.push_back({b.number("t_tol_m", 0.0), b.number("r_tol_deg", 0.0)});
      }
    }
    if (s.has("failure_thresholds")) cfg.thresholds.min_recall_pct = s.numbers("failure_thresholds");
    cfg.slice_length_frames = s.integer<int>("slice_length_frames", cfg.slice_length_frames);
    cfg.log = s.string("log", cfg.log);
  }
  if (top.has("traverses")) {
    const auto s = top.object("traverses");
    s.allow_only({"map", "training", "query"});
    for (const TraverseRole role : {TraverseRole::Map, TraverseRole::Training, TraverseRole::Query}) {
      if (!s.has(to_string(role))) continue;
      const auto t = s.object(to_string(role));
      t.allow_only({"condition_shift"});
      cfg.condition_shift[static_cast<std::size_t>(role)] = t.number("condition_shift", 0.0);
    }
  }
  cfg.apply_seed(top.integer<std::uint64_t>("seed", cfg.seed));
  cfg.validate();
  return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", "cannot open config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str(), path);
}

}  // namespace camsel
