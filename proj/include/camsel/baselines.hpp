#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "camsel/errors.hpp"
#include "camsel/geometry.hpp"
#include "camsel/localizer.hpp"
#include "camsel/selection.hpp"

namespace camsel {

enum class SelectorKind { RandomCam, StaticCam, Num3DPoints, InlierCount, InlierRatio, MultiCamRigPnP, DynamicCam, OracleCam };

inline constexpr std::array<SelectorKind, 8> kAllSelectors{
    SelectorKind::RandomCam,   SelectorKind::StaticCam,      SelectorKind::Num3DPoints, SelectorKind::InlierCount,
    SelectorKind::InlierRatio, SelectorKind::MultiCamRigPnP, SelectorKind::DynamicCam,  SelectorKind::OracleCam};

inline const char* to_string(SelectorKind kind) {
  switch (kind) {
    case SelectorKind::RandomCam: return "random";
    case SelectorKind::StaticCam: return "static";
    case SelectorKind::Num3DPoints: return "num3d";
    case SelectorKind::InlierCount: return "inliers";
    case SelectorKind::InlierRatio: return "ratio";
    case SelectorKind::MultiCamRigPnP: return "rigpnp";
    case SelectorKind::DynamicCam: return "dynamic";
    case SelectorKind::OracleCam: return "oracle";
  }
  return "?";
}

inline SelectorKind parse_selector(std::string_view name, const std::string& field = "selector") {
  for (const SelectorKind k : kAllSelectors)
    if (name == to_string(k)) return k;
  throw ConfigError(field, "unknown selector '" + std::string(name) +
                               "' (expected random, static, num3d, inliers, ratio, rigpnp, dynamic or oracle)");
}

// Selectors that localize with every camera and then pick by a statistic.
inline bool is_statistic_selector(SelectorKind kind) {
  return kind == SelectorKind::Num3DPoints || kind == SelectorKind::InlierCount || kind == SelectorKind::InlierRatio;
}

// Uniform over the rig's cameras.
inline int select_random(const Rig& rig, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick(0, static_cast<int>(rig.size()) - 1);
  return pick(rng);
}

// Per-frame stream so that a frame's draw does not depend on which other
// frames were queried.
inline std::uint64_t random_selector_seed(std::uint64_t base, int frame) {
  return detail::mix_seed(base, {static_cast<std::uint64_t>(frame), 0x72616e646f6dULL});
}

// Best camera for a whole slice: every training sample in the slice pooled
// per camera, then the same expected-cost argmin as a single place.
// samples[c] holds camera c's samples.
inline PlaceSelection select_static(int slice_id, int start_index, int end_index,
                                    const std::vector<std::vector<double>>& samples, const CostFunction& cf,
                                    const KdeConfig& cfg, ExpectationMode mode = ExpectationMode::MonteCarlo,
                                    const Eigen::Vector3d& center = Eigen::Vector3d::Zero()) {
  PlacePartition part;
  part.width_images = end_index - start_index;
  part.stride_images = end_index - start_index;
  Place slice;
  slice.place_id = slice_id;
  slice.start_index = start_index;
  slice.end_index = end_index;
  slice.center_pose = Pose(Eigen::Matrix3d::Identity(), center);
  part.places.push_back(slice);

  std::vector<PoseErrorSampleSet> sets;
  for (std::size_t c = 0; c < samples.size(); ++c) sets.push_back({static_cast<int>(c), slice_id, samples[c]});
  return select_cameras(part, {sets}, cf, cfg, mode).places.front();
}

struct StatisticChoice {
  int camera = 0;
  bool all_failed = false;
};

// Argmax of the named statistic over one frame's per-camera results. Failed
// results rank below every Success; ties go to the lowest camera id. When
// every camera failed the choice is camera 0, flagged.
inline StatisticChoice select_by_statistic(std::span<const LocalizationResult> results, SelectorKind kind) {
  if (!is_statistic_selector(kind)) throw DomainError(std::string("not a statistic selector: ") + to_string(kind));
  if (results.empty()) throw DomainError("no camera results to select from");
  const auto statistic = [kind](const LocalizationResult& r) {
    switch (kind) {
      case SelectorKind::Num3DPoints: return static_cast<double>(r.num_matched_points);
      case SelectorKind::InlierCount: return static_cast<double>(r.inlier_count);
      default: return r.inlier_ratio;
    }
  };
  StatisticChoice choice{0, true};
  double best = 0.0;
  for (std::size_t c = 0; c < results.size(); ++c) {
    if (!results[c].ok()) continue;
    const double v = statistic(results[c]);
    if (choice.all_failed || v > best) {
      choice = {static_cast<int>(c), false};
      best = v;
    }
  }
  return choice;
}

// Ground-truth-best camera of one frame: minimum translation error, lowest id on ties.
inline int select_oracle(std::span<const PoseError> errors) {
  if (errors.empty()) throw DomainError("no camera errors to select from");
  int best = 0;
  for (std::size_t c = 1; c < errors.size(); ++c)
    if (errors[c].translation_err < errors[static_cast<std::size_t>(best)].translation_err) best = static_cast<int>(c);
  return best;
}

}  // namespace camsel
