#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "camsel/detail/seed.hpp"
#include "camsel/detail/text_io.hpp"
#include "camsel/errors.hpp"
#include "camsel/geometry.hpp"
#include "camsel/localizer.hpp"

namespace camsel {

// Condition shift multiplies pixel noise and outlier fraction by (1 + shift * kConditionShiftGain).
inline constexpr double kConditionShiftGain = 2.0;

// A dropped-out frame keeps this many correspondences: too few for the
// default minimum inlier count of 4.
inline constexpr int kDropoutKeep = 3;

struct WorldConfig {
  double trajectory_length_m = 1000.0;
  double image_spacing_m = 1.0;
  int landmarks_per_region = 200;
  double region_length_m = 50.0;
  std::uint64_t rng_seed = 0;

  // Optional sinusoidal lateral offset of the trajectory.
  double lateral_amplitude_m = 0.0;
  double lateral_period_m = 200.0;

  // Map points carry this much reconstruction error (per axis, meters).
  double map_point_sigma_m = 0.02;

  // Landmark bands on both sides of the road.
  double band_inner_m = 4.0;
  double band_outer_m = 16.0;
  double min_height_m = -1.0;
  double max_height_m = 6.0;
  double max_visible_depth_m = 40.0;

  int num_frames() const {
    return static_cast<int>(std::floor(trajectory_length_m / image_spacing_m + 1e-9));
  }

  void validate() const {
    const auto positive = [](double v, const char* field) {
      if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(field, "must be > 0");
    };
    positive(trajectory_length_m, "world.trajectory_length_m");
    positive(image_spacing_m, "world.image_spacing_m");
    positive(region_length_m, "world.region_length_m");
    positive(lateral_period_m, "world.lateral_period_m");
    positive(max_visible_depth_m, "world.max_visible_depth_m");
    positive(band_outer_m, "world.band_outer_m");
    if (landmarks_per_region <= 0) throw ConfigError("world.landmarks_per_region", "must be > 0");
    if (!(band_inner_m >= 0.0 && band_inner_m < band_outer_m))
      throw ConfigError("world.band_inner_m", "must satisfy 0 <= band_inner_m < band_outer_m");
    if (!(min_height_m < max_height_m)) throw ConfigError("world.min_height_m", "must be below max_height_m");
    if (!(map_point_sigma_m >= 0.0)) throw ConfigError("world.map_point_sigma_m", "must be >= 0");
    if (!(lateral_amplitude_m >= 0.0)) throw ConfigError("world.lateral_amplitude_m", "must be >= 0");
    if (num_frames() < 1) throw ConfigError("world.trajectory_length_m", "shorter than one image spacing");
  }
};

struct CameraQuality {
  double visible_landmark_fraction = 1.0;
  double pixel_noise_sigma_px = 0.0;
  double outlier_fraction = 0.0;
  double dropout_probability = 0.0;

  void validate(const std::string& field) const {
    const auto unit = [&](double v, const char* name) {
      if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(field + "." + name, "must be in [0, 1]");
    };
    unit(visible_landmark_fraction, "visible_landmark_fraction");
    unit(outlier_fraction, "outlier_fraction");
    unit(dropout_probability, "dropout_probability");
    if (!(pixel_noise_sigma_px >= 0.0) || !std::isfinite(pixel_noise_sigma_px))
      throw ConfigError(field + ".pixel_noise_sigma_px", "must be >= 0");
  }

  bool operator==(const CameraQuality&) const = default;
};

// Quality applied to `cameras` in regions [region_begin, region_end).
struct QualityOverride {
  std::vector<int> cameras;
  int region_begin = 0;
  int region_end = 0;
  CameraQuality quality;
};

// Per (region, camera) observation quality: a base value plus overrides,
// the last matching override winning.
struct CameraQualityProfile {
  CameraQuality base;
  std::vector<QualityOverride> overrides;

  CameraQuality quality(int region, int camera) const {
    CameraQuality q = base;
    for (const auto& o : overrides)
      if (region >= o.region_begin && region < o.region_end &&
          std::find(o.cameras.begin(), o.cameras.end(), camera) != o.cameras.end())
        q = o.quality;
    return q;
  }

  void validate() const {
    base.validate("profile.default");
    for (std::size_t i = 0; i < overrides.size(); ++i) {
      const std::string field = "profile.overrides[" + std::to_string(i) + "]";
      overrides[i].quality.validate(field);
      if (overrides[i].region_begin < 0 || overrides[i].region_end < overrides[i].region_begin)
        throw ConfigError(field + ".regions", "must be an increasing [begin, end) range");
    }
  }
};

inline CameraQuality apply_condition_shift(CameraQuality q, double shift) {
  const double gain = 1.0 + shift * kConditionShiftGain;
  q.pixel_noise_sigma_px *= gain;
  q.outlier_fraction = std::min(1.0, q.outlier_fraction * gain);
  return q;
}

// Four cameras in the usual AV arrangement: front-left, front-right,
// side-left, side-right. Camera frames are x right, y down, z forward; the
// body frame is x forward, y left, z up.
inline Pose camera_mount(double yaw_deg, const Eigen::Vector3d& position) {
  const double yaw = yaw_deg * M_PI / 180.0;
  Eigen::Matrix3d r;
  r.col(0) = Eigen::Vector3d(std::sin(yaw), -std::cos(yaw), 0.0);
  r.col(1) = Eigen::Vector3d(0.0, 0.0, -1.0);
  r.col(2) = Eigen::Vector3d(std::cos(yaw), std::sin(yaw), 0.0);
  return Pose(r, position);
}

inline Rig default_rig() {
  const Intrinsics k{400.0, 400.0, 320.0, 240.0};
  return Rig({CameraModel(0, k, 640, 480, camera_mount(20.0, {1.8, 0.5, 1.5})),
              CameraModel(1, k, 640, 480, camera_mount(-20.0, {1.8, -0.5, 1.5})),
              CameraModel(2, k, 640, 480, camera_mount(90.0, {0.5, 0.9, 1.5})),
              CameraModel(3, k, 640, 480, camera_mount(-90.0, {0.5, -0.9, 1.5}))});
}

struct World {
  WorldConfig config;
  Rig rig;
  CameraQualityProfile profile;
  int num_regions = 1;
  std::vector<Eigen::Vector3d> landmarks;   // sorted by x
  std::vector<Eigen::Vector3d> map_points;  // landmarks with reconstruction error
  std::vector<bool> mapped;                 // seen by some camera during the map pass

  int num_frames() const { return config.num_frames(); }

  double lateral_offset(double x) const {
    return config.lateral_amplitude_m * std::sin(2.0 * M_PI * x / config.lateral_period_m);
  }

  Pose frame_pose(int index) const {
    const double x = index * config.image_spacing_m;
    const double slope = config.lateral_amplitude_m * 2.0 * M_PI / config.lateral_period_m *
                         std::cos(2.0 * M_PI * x / config.lateral_period_m);
    const Eigen::Matrix3d r = Eigen::AngleAxisd(std::atan(slope), Eigen::Vector3d::UnitZ()).toRotationMatrix();
    return Pose(r, Eigen::Vector3d(x, lateral_offset(x), 0.0));
  }

  int region_of_x(double x) const {
    const int r = static_cast<int>(std::floor(x / config.region_length_m));
    return std::clamp(r, 0, num_regions - 1);
  }

  int region_of_frame(int index) const { return region_of_x(index * config.image_spacing_m); }
};

namespace detail {

// Calls fn(landmark_index, pixel) for every landmark in front of `cam`
// within the visibility range that projects inside the image.
template <typename Fn>
void for_each_visible(const World& world, const CameraModel& cam, const Pose& body, Fn&& fn) {
  const Pose cfw = inverse(compose(body, cam.extrinsic()));
  const double range = world.config.max_visible_depth_m;
  const double x0 = body.translation().x();
  const auto lo = std::lower_bound(world.landmarks.begin(), world.landmarks.end(), x0 - range - 5.0,
                                   [](const Eigen::Vector3d& p, double x) { return p.x() < x; });
  const auto& k = cam.intrinsics();
  for (auto it = lo; it != world.landmarks.end() && it->x() <= x0 + range + 5.0; ++it) {
    const Eigen::Vector3d pc = cfw.rotation() * *it + cfw.translation();
    if (!(pc.z() > 0.0) || pc.z() > range) continue;
    const Eigen::Vector2d px(k.fx * pc.x() / pc.z() + k.cx, k.fy * pc.y() / pc.z() + k.cy);
    if (!cam.in_bounds(px)) continue;
    fn(static_cast<std::size_t>(it - world.landmarks.begin()), px);
  }
}

}  // namespace detail

inline World generate_world(const WorldConfig& cfg, const Rig& rig, const CameraQualityProfile& profile) {
  cfg.validate();
  profile.validate();
  World world{cfg, rig, profile, 1, {}, {}, {}};
  world.num_regions = std::max(1, static_cast<int>(std::floor(cfg.trajectory_length_m / cfg.region_length_m + 1e-9)));

  std::mt19937_64 rng(cfg.rng_seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int r = 0; r < world.num_regions; ++r) {
    // Edge regions reach one visibility range past the trajectory ends so
    // forward and rearward views at the ends still see landmarks.
    const double x_begin = r == 0 ? -cfg.max_visible_depth_m : r * cfg.region_length_m;
    const double x_end = r + 1 == world.num_regions ? cfg.trajectory_length_m + cfg.max_visible_depth_m
                                                    : (r + 1) * cfg.region_length_m;
    for (int i = 0; i < cfg.landmarks_per_region; ++i) {
      const double x = x_begin + unit(rng) * (x_end - x_begin);
      const double side = unit(rng) < 0.5 ? 1.0 : -1.0;
      const double lateral = cfg.band_inner_m + unit(rng) * (cfg.band_outer_m - cfg.band_inner_m);
      const double z = cfg.min_height_m + unit(rng) * (cfg.max_height_m - cfg.min_height_m);
      world.landmarks.emplace_back(x, world.lateral_offset(x) + side * lateral, z);
    }
  }
  std::stable_sort(world.landmarks.begin(), world.landmarks.end(),
                   [](const Eigen::Vector3d& a, const Eigen::Vector3d& b) { return a.x() < b.x(); });
  for (const auto& p : world.landmarks)
    world.map_points.push_back(
        p + cfg.map_point_sigma_m * Eigen::Vector3d(gauss(rng), gauss(rng), gauss(rng)));

  // Map pass: landmarks any camera sees from the trajectory become matchable.
  world.mapped.assign(world.landmarks.size(), false);
  for (int f = 0; f < world.num_frames(); ++f) {
    const Pose body = world.frame_pose(f);
    for (const auto& cam : rig.cameras())
      detail::for_each_visible(world, cam, body, [&](std::size_t i, const Eigen::Vector2d&) { world.mapped[i] = true; });
  }
  return world;
}

enum class TraverseRole { Map, Training, Query };

inline const char* to_string(TraverseRole role) {
  switch (role) {
    case TraverseRole::Map: return "map";
    case TraverseRole::Training: return "training";
    case TraverseRole::Query: return "query";
  }
  return "?";
}

struct Frame {
  int index = 0;
  int region = 0;
  Pose truth;  // world-from-body
  std::vector<std::vector<Correspondence>> per_camera;
};

struct Traverse {
  TraverseRole role = TraverseRole::Query;
  std::uint64_t world_seed = 0;
  std::uint64_t seed = 0;
  double condition_shift = 0.0;
  Rig rig = default_rig();
  // quality[region][camera] before the condition shift is applied.
  std::vector<std::vector<CameraQuality>> quality;
  std::vector<Frame> frames;

  std::vector<Pose> trajectory() const {
    std::vector<Pose> out;
    out.reserve(frames.size());
    for (const auto& f : frames) out.push_back(f.truth);
    return out;
  }
};

// Correspondences for every (frame, camera). Each pair draws from its own RNG
// stream derived from (seed, frame, camera), so changing the quality of one
// camera in one region leaves every other pair bit-identical.
inline Traverse generate_traverse(const World& world, TraverseRole role, std::uint64_t seed, double condition_shift) {
  if (!(condition_shift >= 0.0 && condition_shift <= 1.0))
    throw ConfigError("condition_shift", "must be in [0, 1]");
  Traverse tr;
  tr.role = role;
  tr.world_seed = world.config.rng_seed;
  tr.seed = seed;
  tr.condition_shift = condition_shift;
  tr.rig = world.rig;
  const int nc = static_cast<int>(world.rig.size());
  for (int r = 0; r < world.num_regions; ++r) {
    std::vector<CameraQuality> row;
    for (int c = 0; c < nc; ++c) row.push_back(world.profile.quality(r, c));
    tr.quality.push_back(row);
  }

  for (int f = 0; f < world.num_frames(); ++f) {
    Frame frame;
    frame.index = f;
    frame.region = world.region_of_frame(f);
    frame.truth = world.frame_pose(f);
    frame.per_camera.resize(static_cast<std::size_t>(nc));
    for (int c = 0; c < nc; ++c) {
      const CameraModel& cam = world.rig.camera(c);
      const CameraQuality q = apply_condition_shift(tr.quality[static_cast<std::size_t>(frame.region)][static_cast<std::size_t>(c)],
                                                    condition_shift);
      std::mt19937_64 rng(detail::mix_seed(seed, {static_cast<std::uint64_t>(f), static_cast<std::uint64_t>(c)}));
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      std::normal_distribution<double> noise(0.0, 1.0);

      auto& out = frame.per_camera[static_cast<std::size_t>(c)];
      detail::for_each_visible(world, cam, frame.truth, [&](std::size_t i, const Eigen::Vector2d& px) {
        if (!world.mapped[i]) return;
        if (unit(rng) >= q.visible_landmark_fraction) return;
        Eigen::Vector2d obs;
        if (unit(rng) < q.outlier_fraction) {
          obs = {unit(rng) * cam.width(), unit(rng) * cam.height()};
        } else {
          obs = px + q.pixel_noise_sigma_px * Eigen::Vector2d(noise(rng), noise(rng));
          if (!cam.in_bounds(obs)) return;
        }
        out.push_back({obs, world.map_points[i], static_cast<std::int64_t>(i)});
      });
      if (unit(rng) < q.dropout_probability && static_cast<int>(out.size()) > kDropoutKeep) {
        std::shuffle(out.begin(), out.end(), rng);
        out.resize(kDropoutKeep);
      }
    }
    tr.frames.push_back(std::move(frame));
  }
  return tr;
}

struct FrameCameraOutcome {
  LocalizationResult result;
  PoseError error;  // infinite translation error when localization failed
};

// outcomes[frame][camera]
using BatchResult = std::vector<std::vector<FrameCameraOutcome>>;

inline PoseError failed_pose_error() { return {std::numeric_limits<double>::infinity(), 180.0}; }

inline std::uint64_t frame_camera_seed(std::uint64_t base, int frame, int camera) {
  return detail::mix_seed(base, {static_cast<std::uint64_t>(frame), static_cast<std::uint64_t>(camera)});
}

inline FrameCameraOutcome localize_frame_camera(const Frame& frame, const Rig& rig, int camera,
                                                const RansacConfig& cfg) {
  RansacConfig local = cfg;
  local.rng_seed = frame_camera_seed(cfg.rng_seed, frame.index, camera);
  FrameCameraOutcome out;
  out.result = localize_pnp_ransac(frame.per_camera[static_cast<std::size_t>(camera)], rig.camera(camera), local);
  out.error = out.result.ok() ? pose_error(*out.result.pose, frame.truth) : failed_pose_error();
  return out;
}

inline BatchResult run_localization_batch(const Traverse& traverse, const Rig& rig, const RansacConfig& cfg) {
  cfg.validate();
  BatchResult batch;
  batch.reserve(traverse.frames.size());
  for (const auto& frame : traverse.frames) {
    std::vector<FrameCameraOutcome> row;
    for (int c = 0; c < static_cast<int>(rig.size()); ++c) {
      row.push_back(localize_frame_camera(frame, rig, c, cfg));
      row.back().result.inliers.clear();
      row.back().result.inliers.shrink_to_fit();
    }
    batch.push_back(std::move(row));
  }
  return batch;
}

// ---------------------------------------------------------------------------
// Traverse text format
//
//   camsel-traverse 1
//   role map|training|query
//   world_seed <n>
//   traverse_seed <n>
//   condition_shift <x>
//   cameras <n>
//   camera <id> <fx> <fy> <cx> <cy> <width> <height> <body_from_camera: 12 numbers>
//   regions <r>
//   quality <region> <camera> <visible_fraction> <sigma_px> <outlier_fraction> <dropout_probability>
//   frames <f>
//   frame <index> <region> <world_from_body: 12 numbers>
//   obs <frame> <camera> <landmark_id> <u> <v> <X> <Y> <Z>

inline void write_traverse(std::ostream& out, const Traverse& tr) {
  using detail::format_double;
  out << "camsel-traverse 1\n";
  out << "role " << to_string(tr.role) << '\n';
  out << "world_seed " << tr.world_seed << '\n';
  out << "traverse_seed " << tr.seed << '\n';
  out << "condition_shift " << format_double(tr.condition_shift) << '\n';
  out << "cameras " << tr.rig.size() << '\n';
  for (const auto& cam : tr.rig.cameras()) {
    const auto& k = cam.intrinsics();
    out << "camera " << cam.id() << ' ' << format_double(k.fx) << ' ' << format_double(k.fy) << ' '
        << format_double(k.cx) << ' ' << format_double(k.cy) << ' ' << cam.width() << ' ' << cam.height() << ' ';
    write_pose(out, cam.extrinsic());
    out << '\n';
  }
  out << "regions " << tr.quality.size() << '\n';
  for (std::size_t r = 0; r < tr.quality.size(); ++r)
    for (std::size_t c = 0; c < tr.quality[r].size(); ++c) {
      const auto& q = tr.quality[r][c];
      out << "quality " << r << ' ' << c << ' ' << format_double(q.visible_landmark_fraction) << ' '
          << format_double(q.pixel_noise_sigma_px) << ' ' << format_double(q.outlier_fraction) << ' '
          << format_double(q.dropout_probability) << '\n';
    }
  out << "frames " << tr.frames.size() << '\n';
  for (const auto& f : tr.frames) {
    out << "frame " << f.index << ' ' << f.region << ' ';
    write_pose(out, f.truth);
    out << '\n';
    for (std::size_t c = 0; c < f.per_camera.size(); ++c)
      for (const auto& o : f.per_camera[c])
        out << "obs " << f.index << ' ' << c << ' ' << o.landmark_id << ' ' << format_double(o.pixel.x()) << ' '
            << format_double(o.pixel.y()) << ' ' << format_double(o.world_point.x()) << ' '
            << format_double(o.world_point.y()) << ' ' << format_double(o.world_point.z()) << '\n';
  }
}

inline Traverse read_traverse(std::istream& in, const std::string& source = "traverse") {
  detail::LineReader reader(in, source);
  Traverse tr;
  auto tok = reader.expect("header");
  if (tok.size() != 2 || tok[0] != "camsel-traverse") reader.fail("not a traverse file");
  if (tok[1] != "1") reader.fail("unsupported traverse version " + std::string(tok[1]));

  tok = reader.expect("role");
  reader.expect_keyword(tok, "role", 2);
  if (tok[1] == "map")
    tr.role = TraverseRole::Map;
  else if (tok[1] == "training")
    tr.role = TraverseRole::Training;
  else if (tok[1] == "query")
    tr.role = TraverseRole::Query;
  else
    reader.fail("unknown role " + std::string(tok[1]));

  tok = reader.expect("world_seed");
  reader.expect_keyword(tok, "world_seed", 2);
  tr.world_seed = reader.integer<std::uint64_t>(tok[1]);
  tok = reader.expect("traverse_seed");
  reader.expect_keyword(tok, "traverse_seed", 2);
  tr.seed = reader.integer<std::uint64_t>(tok[1]);
  tok = reader.expect("condition_shift");
  reader.expect_keyword(tok, "condition_shift", 2);
  tr.condition_shift = reader.number(tok[1]);

  const auto read_numbers = [&](const std::vector<std::string_view>& t, std::size_t from, std::size_t count) {
    std::vector<double> v;
    for (std::size_t i = 0; i < count; ++i) v.push_back(reader.number(t[from + i]));
    return v;
  };

  tok = reader.expect("cameras");
  reader.expect_keyword(tok, "cameras", 2);
  const auto nc = reader.integer<std::size_t>(tok[1]);
  std::vector<CameraModel> cams;
  for (std::size_t c = 0; c < nc; ++c) {
    tok = reader.expect("camera");
    reader.expect_keyword(tok, "camera", 20);
    try {
      const auto k = read_numbers(tok, 2, 4);
      cams.emplace_back(reader.integer<int>(tok[1]), Intrinsics{k[0], k[1], k[2], k[3]}, reader.integer<int>(tok[6]),
                        reader.integer<int>(tok[7]), pose_from_numbers(read_numbers(tok, 8, 12)));
    } catch (const DomainError& e) {
      reader.fail(e.what());
    }
  }
  try {
    tr.rig = Rig(cams);
  } catch (const DomainError& e) {
    reader.fail(e.what());
  }

  tok = reader.expect("regions");
  reader.expect_keyword(tok, "regions", 2);
  const auto nr = reader.integer<std::size_t>(tok[1]);
  tr.quality.assign(nr, std::vector<CameraQuality>(nc));
  for (std::size_t i = 0; i < nr * nc; ++i) {
    tok = reader.expect("quality");
    reader.expect_keyword(tok, "quality", 7);
    const auto r = reader.integer<std::size_t>(tok[1]);
    const auto c = reader.integer<std::size_t>(tok[2]);
    if (r >= nr || c >= nc) reader.fail("quality entry out of range");
    tr.quality[r][c] = {reader.number(tok[3]), reader.number(tok[4]), reader.number(tok[5]), reader.number(tok[6])};
  }

  tok = reader.expect("frames");
  reader.expect_keyword(tok, "frames", 2);
  const auto nf = reader.integer<std::size_t>(tok[1]);
  tr.frames.reserve(nf);
  while (reader.next(tok)) {
    if (tok[0] == "frame") {
      reader.expect_keyword(tok, "frame", 15);
      Frame f;
      f.index = reader.integer<int>(tok[1]);
      if (f.index != static_cast<int>(tr.frames.size())) reader.fail("frame indices must be contiguous from 0");
      f.region = reader.integer<int>(tok[2]);
      try {
        f.truth = pose_from_numbers(read_numbers(tok, 3, 12));
      } catch (const DomainError& e) {
        reader.fail(e.what());
      }
      f.per_camera.resize(nc);
      tr.frames.push_back(std::move(f));
    } else if (tok[0] == "obs") {
      reader.expect_keyword(tok, "obs", 9);
      if (tr.frames.empty()) reader.fail("observation before any frame");
      const int frame = reader.integer<int>(tok[1]);
      if (frame != tr.frames.back().index) reader.fail("observation does not belong to the current frame");
      const auto c = reader.integer<std::size_t>(tok[2]);
      if (c >= nc) reader.fail("observation camera out of range");
      Correspondence o;
      o.landmark_id = reader.integer<std::int64_t>(tok[3]);
      o.pixel = {reader.number(tok[4]), reader.number(tok[5])};
      o.world_point = {reader.number(tok[6]), reader.number(tok[7]), reader.number(tok[8])};
      tr.frames.back().per_camera[c].push_back(o);
    } else {
      reader.fail("unexpected record '" + std::string(tok[0]) + "'");
    }
  }
  if (tr.frames.size() != nf) reader.fail("expected " + std::to_string(nf) + " frames, found " + std::to_string(tr.frames.size()));
  return tr;
}

}  // namespace camsel
