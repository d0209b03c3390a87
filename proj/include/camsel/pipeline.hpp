#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "camsel/baselines.hpp"
#include "camsel/config.hpp"
#include "camsel/evaluation.hpp"
#include "camsel/localizer.hpp"
#include "camsel/selection.hpp"
#include "camsel/simulator.hpp"

namespace camsel {

inline World build_world(const RunConfig& cfg) { return generate_world(cfg.world, cfg.rig, cfg.profile); }

inline Traverse simulate_traverse(const World& world, const RunConfig& cfg, TraverseRole role) {
  return generate_traverse(world, role, cfg.traverse_seed(role), cfg.shift(role));
}

// Slices are fixed-length frame ranges; a trailing remainder joins the last slice.
inline int num_slices(int num_frames, int slice_length) { return std::max(1, num_frames / slice_length); }

inline int slice_of_frame(int frame, int num_frames, int slice_length) {
  return std::min(frame / slice_length, num_slices(num_frames, slice_length) - 1);
}

inline std::pair<int, int> slice_range(int slice, int num_frames, int slice_length) {
  const int last = num_slices(num_frames, slice_length) - 1;
  return {slice * slice_length, slice == last ? num_frames : (slice + 1) * slice_length};
}

// ---------------------------------------------------------------------------
// Training

// Translation-error sample for one (frame, camera); a failed localization
// enters as x_max so it saturates the cost.
inline double training_sample(const FrameCameraOutcome& o, const CostFunction& cf) {
  return o.result.ok() ? o.error.translation_err : cf.x_max;
}

inline std::vector<double> camera_samples(const BatchResult& batch, int camera, int begin, int end,
                                          const CostFunction& cf) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(end - begin));
  for (int f = begin; f < end; ++f)
    out.push_back(training_sample(batch[static_cast<std::size_t>(f)][static_cast<std::size_t>(camera)], cf));
  return out;
}

struct TrainingResult {
  PlacePartition partition;
  BatchResult batch;
  SelectionTable dynamic;       // one row per place
  SelectionTable static_table;  // one row per slice
};

inline TrainingResult train(const Traverse& training, const RunConfig& cfg,
                            ExpectationMode mode = ExpectationMode::MonteCarlo) {
  if (training.rig.size() != cfg.rig.size()) throw DomainError("training traverse rig does not match the config");
  TrainingResult out;
  const int n = static_cast<int>(training.frames.size());
  const auto trajectory = training.trajectory();
  out.partition = partition_places(n, cfg.place_width_images, cfg.place_stride_images, trajectory);
  out.batch = run_localization_batch(training, training.rig, cfg.ransac);
  const int nc = static_cast<int>(training.rig.size());

  std::vector<std::vector<PoseErrorSampleSet>> sets;
  for (const auto& place : out.partition.places) {
    std::vector<PoseErrorSampleSet> row;
    for (int c = 0; c < nc; ++c)
      row.push_back({c, place.place_id, camera_samples(out.batch, c, place.start_index, place.end_index, cfg.cost)});
    sets.push_back(std::move(row));
  }
  out.dynamic = select_cameras(out.partition, sets, cfg.cost, cfg.kde, mode);

  out.static_table.cost = cfg.cost;
  out.static_table.kde = cfg.kde;
  out.static_table.mode = mode;
  out.static_table.num_cameras = nc;
  for (int s = 0; s < num_slices(n, cfg.slice_length_frames); ++s) {
    const auto [begin, end] = slice_range(s, n, cfg.slice_length_frames);
    std::vector<std::vector<double>> pooled;
    for (int c = 0; c < nc; ++c) pooled.push_back(camera_samples(out.batch, c, begin, end, cfg.cost));
    const Eigen::Vector3d center = trajectory[static_cast<std::size_t>(begin + (end - begin) / 2)].translation();
    out.static_table.places.push_back(select_static(s, begin, end, pooled, cfg.cost, cfg.kde, mode, center));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Query

// Per-frame cache of single-camera localizations shared by every selector.
// Requests are counted per selector so each selector's localization cost is
// audited independently of the sharing.
class FrameLocalizations {
 public:
  FrameLocalizations(const Frame& frame, const Rig& rig, const RansacConfig& cfg)
      : frame_(frame), rig_(rig), cfg_(cfg), cache_(rig.size()) {}

  const FrameCameraOutcome& get(int camera, int& request_counter) {
    ++request_counter;
    auto& slot = cache_[static_cast<std::size_t>(camera)];
    if (!slot) {
      slot = localize_frame_camera(frame_, rig_, camera, cfg_);
      ++computed_;
    }
    return *slot;
  }

  int computed() const { return computed_; }

 private:
  const Frame& frame_;
  const Rig& rig_;
  const RansacConfig& cfg_;
  std::vector<std::optional<FrameCameraOutcome>> cache_;
  int computed_ = 0;
};

struct QueryInputs {
  const SelectionTable* dynamic = nullptr;       // required by the dynamic selector
  const SelectionTable* static_table = nullptr;  // required by the static selector
};

struct QueryRun {
  std::vector<FrameRecord> records;  // selector-major, frames ascending
  std::map<SelectorKind, long long> requests;
  long long computed = 0;  // single-camera localizations actually executed
  long long rig_solves = 0;
};

inline std::uint64_t rig_pnp_seed(std::uint64_t base, int frame) {
  return detail::mix_seed(base, {static_cast<std::uint64_t>(frame), 0xffffULL});
}

inline FrameRecord record_from(const std::string& selector, const std::string& log, const Frame& frame, int slice,
                               int place, int camera, const FrameCameraOutcome& o, int localizations) {
  FrameRecord r;
  r.selector = selector;
  r.log = log;
  r.frame = frame.index;
  r.slice = slice;
  r.place = place;
  r.camera = camera;
  r.status = o.result.status;
  r.error = o.error;
  r.inliers = o.result.inlier_count;
  r.inlier_ratio = o.result.inlier_ratio;
  r.matched = o.result.num_matched_points;
  r.localizations = localizations;
  return r;
}

// Runs every requested selector over the query traverse. The coarse place of
// a frame (simulated GPS) is the nearest training place center to its
// ground-truth position.
inline QueryRun run_query(const Traverse& query, const RunConfig& cfg, std::span<const SelectorKind> selectors,
                          const QueryInputs& inputs) {
  cfg.ransac.validate();
  const Rig& rig = query.rig;
  const int nc = static_cast<int>(rig.size());
  const int n = static_cast<int>(query.frames.size());
  for (const SelectorKind k : selectors) {
    if (k == SelectorKind::DynamicCam && !inputs.dynamic)
      throw ConfigError("selector", "the dynamic selector needs a selection table");
    if (k == SelectorKind::StaticCam && !inputs.static_table)
      throw ConfigError("selector", "the static selector needs a static table");
  }
  for (const SelectionTable* t : {inputs.dynamic, inputs.static_table})
    if (t && t->num_cameras != nc) throw DomainError("table camera count does not match the query rig");

  const PlacePartition partition =
      partition_places(n, cfg.place_width_images, cfg.place_stride_images, query.trajectory());
  SelectionTable place_index;
  place_index.num_cameras = nc;
  for (const auto& p : partition.places)
    place_index.places.push_back({p.place_id, p.start_index, p.end_index, p.center_pose.translation(), 0, {}, {}});

  QueryRun run;
  std::vector<std::vector<FrameRecord>> per_selector(selectors.size());
  for (auto& v : per_selector) v.reserve(static_cast<std::size_t>(n));

  for (const Frame& frame : query.frames) {
    FrameLocalizations cache(frame, rig, cfg.ransac);
    const int slice = slice_of_frame(frame.index, n, cfg.slice_length_frames);
    const int place = place_index.places[nearest_place(place_index, frame.truth.translation())].place_id;

    for (std::size_t si = 0; si < selectors.size(); ++si) {
      const SelectorKind kind = selectors[si];
      const std::string name = to_string(kind);
      int requests = 0;
      FrameRecord rec;
      switch (kind) {
        case SelectorKind::RandomCam: {
          std::mt19937_64 rng(random_selector_seed(cfg.random_selector_seed(), frame.index));
          const int cam = select_random(rig, rng);
          rec = record_from(name, cfg.log, frame, slice, place, cam, cache.get(cam, requests), 0);
          break;
        }
        case SelectorKind::StaticCam: {
          const auto& rows = inputs.static_table->places;
          const auto row = std::find_if(rows.begin(), rows.end(), [&](const PlaceSelection& p) {
            return frame.index >= p.start_index && frame.index < p.end_index;
          });
          const int cam = row != rows.end() ? row->chosen_camera : rows.back().chosen_camera;
          rec = record_from(name, cfg.log, frame, slice, place, cam, cache.get(cam, requests), 0);
          break;
        }
        case SelectorKind::DynamicCam: {
          const int cam = lookup_camera(*inputs.dynamic, frame.truth);
          rec = record_from(name, cfg.log, frame, slice, place, cam, cache.get(cam, requests), 0);
          break;
        }
        case SelectorKind::Num3DPoints:
        case SelectorKind::InlierCount:
        case SelectorKind::InlierRatio: {
          std::vector<LocalizationResult> results;
          for (int c = 0; c < nc; ++c) results.push_back(cache.get(c, requests).result);
          const StatisticChoice choice = select_by_statistic(results, kind);
          rec = record_from(name, cfg.log, frame, slice, place, choice.camera, cache.get(choice.camera, requests), 0);
          --requests;  // the chosen camera's result is reused, not recomputed
          break;
        }
        case SelectorKind::OracleCam: {
          std::vector<PoseError> errors;
          for (int c = 0; c < nc; ++c) errors.push_back(cache.get(c, requests).error);
          const int cam = select_oracle(errors);
          rec = record_from(name, cfg.log, frame, slice, place, cam, cache.get(cam, requests), 0);
          --requests;
          break;
        }
        case SelectorKind::MultiCamRigPnP: {
          std::vector<CameraView> views;
          for (int c = 0; c < nc; ++c) views.push_back({rig.camera(c), frame.per_camera[static_cast<std::size_t>(c)]});
          RansacConfig local = cfg.ransac;
          local.rng_seed = rig_pnp_seed(cfg.ransac.rng_seed, frame.index);
          FrameCameraOutcome o;
          o.result = localize_rig_pnp(views, rig, local);
          o.result.inliers.clear();
          o.error = o.result.ok() ? pose_error(*o.result.pose, frame.truth) : failed_pose_error();
          // Every camera's correspondences feed the joint solve.
          requests = nc;
          ++run.rig_solves;
          rec = record_from(name, cfg.log, frame, slice, place, -1, o, 0);
          break;
        }
      }
      rec.localizations = requests;
      run.requests[kind] += requests;
      per_selector[si].push_back(std::move(rec));
    }
    run.computed += cache.computed();
  }
  for (auto& v : per_selector)
    for (auto& r : v) run.records.push_back(std::move(r));
  return run;
}

}  // namespace camsel
