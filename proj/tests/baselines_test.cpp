#include <array>
#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "camsel/baselines.hpp"
#include "camsel/simulator.hpp"

namespace camsel {
namespace {

LocalizationResult success(int matched, int inliers) {
  LocalizationResult r;
  r.status = LocalizationStatus::Success;
  r.pose = Pose::identity();
  r.num_matched_points = matched;
  r.inlier_count = inliers;
  r.inlier_ratio = static_cast<double>(inliers) / std::max(matched, 1);
  return r;
}

LocalizationResult failure(int matched, int inliers) {
  LocalizationResult r = success(matched, inliers);
  r.status = LocalizationStatus::Failed;
  r.pose.reset();
  return r;
}

TEST(SelectorKind, NamesRoundTrip) {
  for (const SelectorKind k : kAllSelectors) EXPECT_EQ(parse_selector(to_string(k)), k);
  EXPECT_EQ(parse_selector("num3d"), SelectorKind::Num3DPoints);
  EXPECT_EQ(parse_selector("rigpnp"), SelectorKind::MultiCamRigPnP);
  try {
    parse_selector("best", "selectors[2]");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "selectors[2]");
  }
}

TEST(RandomSelector, SingleCameraAlwaysZero) {
  const Rig rig({default_rig().camera(0)});
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(select_random(rig, rng), 0);
}

TEST(RandomSelector, SeededSequenceIsReproducible) {
  const Rig rig = default_rig();
  std::mt19937_64 a(99);
  std::mt19937_64 b(99);
  for (int i = 0; i < 200; ++i) EXPECT_EQ(select_random(rig, a), select_random(rig, b));
}

TEST(RandomSelector, FrequenciesWithinThreeSigma) {
  const Rig rig = default_rig();
  std::mt19937_64 rng(2024);
  constexpr int kDraws = 10000;
  std::array<int, 4> counts{};
  for (int i = 0; i < kDraws; ++i) {
    const int c = select_random(rig, rng);
    ASSERT_GE(c, 0);
    ASSERT_LT(c, 4);
    ++counts[static_cast<std::size_t>(c)];
  }
  const double sigma = std::sqrt(kDraws * 0.25 * 0.75);
  for (const int n : counts) EXPECT_LE(std::abs(n - kDraws * 0.25), 3.0 * sigma);
}

TEST(RandomSelector, PerFrameSeedsDiffer) {
  EXPECT_NE(random_selector_seed(1, 0), random_selector_seed(1, 1));
  EXPECT_EQ(random_selector_seed(1, 5), random_selector_seed(1, 5));
}

TEST(StaticSelector, UniformlyBetterCameraWins) {
  std::vector<std::vector<double>> samples{{0.4, 0.5, 0.6, 0.45}, {0.05, 0.1, 0.08, 0.02}, {1.0, 3.0, 2.0, 0.9}};
  const PlaceSelection s = select_static(0, 0, 4, samples, {}, {});
  EXPECT_EQ(s.chosen_camera, 1);
  EXPECT_EQ(s.sample_counts, (std::vector<int>{4, 4, 4}));
}

TEST(StaticSelector, TiesGoToLowestId) {
  const std::vector<std::vector<double>> samples{{1.0, 1.2}, {0.3, 0.4}, {0.3, 0.4}};
  const PlaceSelection s = select_static(0, 0, 2, samples, {}, {}, ExpectationMode::Quadrature);
  EXPECT_EQ(s.expected_costs[1], s.expected_costs[2]);
  EXPECT_EQ(s.chosen_camera, 1);
}

TEST(StaticSelector, EmptyCameraScoredAtCeiling) {
  const std::vector<std::vector<double>> samples{{}, {1.9, 1.8}};
  const PlaceSelection s = select_static(4, 0, 2, samples, {}, {});
  EXPECT_EQ(s.expected_costs[0], 4.0);
  EXPECT_EQ(s.chosen_camera, 1);
  EXPECT_EQ(s.place_id, 4);
}

TEST(StaticSelector, NoDataAnywhereThrows) {
  const std::vector<std::vector<double>> samples{{}, {}};
  EXPECT_THROW(select_static(2, 0, 10, samples, {}, {}), NoDataForPlace);
}

TEST(StaticSelector, MatchesSinglePlaceSelection) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.5);
  std::vector<std::vector<double>> samples(4);
  for (auto& s : samples)
    for (int i = 0; i < 30; ++i) s.push_back(u(rng));
  PlacePartition part;
  part.places.push_back({0, 0, 30, Pose::identity()});
  std::vector<PoseErrorSampleSet> sets;
  for (int c = 0; c < 4; ++c) sets.push_back({c, 0, samples[static_cast<std::size_t>(c)]});
  const SelectionTable dyn = select_cameras(part, {sets}, {}, {});
  const PlaceSelection stat = select_static(0, 0, 30, samples, {}, {});
  EXPECT_EQ(stat.chosen_camera, dyn.places[0].chosen_camera);
  EXPECT_EQ(stat.expected_costs, dyn.places[0].expected_costs);
}

TEST(StatisticSelector, Num3DPointsArgmax) {
  const std::vector<LocalizationResult> r{success(120, 10), success(80, 70), success(200, 20), success(50, 40)};
  const auto c = select_by_statistic(r, SelectorKind::Num3DPoints);
  EXPECT_EQ(c.camera, 2);
  EXPECT_FALSE(c.all_failed);
  EXPECT_EQ(select_by_statistic(r, SelectorKind::InlierCount).camera, 1);
  EXPECT_EQ(select_by_statistic(r, SelectorKind::InlierRatio).camera, 1);
}

TEST(StatisticSelector, EqualInliersHigherRatioWins) {
  const std::vector<LocalizationResult> r{success(100, 40), success(50, 40)};
  EXPECT_EQ(select_by_statistic(r, SelectorKind::InlierCount).camera, 0);
  EXPECT_EQ(select_by_statistic(r, SelectorKind::InlierRatio).camera, 1);
}

TEST(StatisticSelector, FailedRanksBelowSuccess) {
  const std::vector<LocalizationResult> r{failure(500, 3), success(10, 5), failure(400, 2)};
  for (const SelectorKind k : {SelectorKind::Num3DPoints, SelectorKind::InlierCount, SelectorKind::InlierRatio})
    EXPECT_EQ(select_by_statistic(r, k).camera, 1);
}

TEST(StatisticSelector, AllFailedPicksZeroAndFlags) {
  const std::vector<LocalizationResult> r{failure(3, 3), failure(500, 2)};
  const auto c = select_by_statistic(r, SelectorKind::Num3DPoints);
  EXPECT_EQ(c.camera, 0);
  EXPECT_TRUE(c.all_failed);
}

TEST(StatisticSelector, TiesGoToLowestId) {
  const std::vector<LocalizationResult> r{success(10, 5), success(30, 9), success(30, 9)};
  EXPECT_EQ(select_by_statistic(r, SelectorKind::Num3DPoints).camera, 1);
  EXPECT_EQ(select_by_statistic(r, SelectorKind::InlierCount).camera, 1);
}

TEST(StatisticSelector, RejectsNonStatisticKinds) {
  const std::vector<LocalizationResult> r{success(10, 5)};
  EXPECT_THROW(select_by_statistic(r, SelectorKind::DynamicCam), DomainError);
  EXPECT_THROW(select_by_statistic({}, SelectorKind::InlierCount), DomainError);
}

TEST(StatisticSelector, AvoidsDroppedCameraInDropoutFrames) {
  WorldConfig cfg;
  cfg.trajectory_length_m = 200.0;
  cfg.region_length_m = 50.0;
  cfg.landmarks_per_region = 600;
  cfg.rng_seed = 12;
  CameraQualityProfile profile;
  profile.base = {0.8, 0.5, 0.1, 0.0};
  profile.overrides.push_back({{1}, 1, 3, {0.8, 0.5, 0.1, 0.7}});
  const World w = generate_world(cfg, default_rig(), profile);
  const Traverse tr = generate_traverse(w, TraverseRole::Query, 4, 0.0);
  const BatchResult batch = run_localization_batch(tr, w.rig, {});

  for (const SelectorKind k : {SelectorKind::Num3DPoints, SelectorKind::InlierCount, SelectorKind::InlierRatio}) {
    int dropout_frames = 0;
    int avoided = 0;
    for (std::size_t f = 0; f < tr.frames.size(); ++f) {
      if (tr.frames[f].per_camera[1].size() > static_cast<std::size_t>(kDropoutKeep)) continue;
      ++dropout_frames;
      std::vector<LocalizationResult> r;
      for (const auto& o : batch[f]) r.push_back(o.result);
      avoided += select_by_statistic(r, k).camera != 1 ? 1 : 0;
    }
    ASSERT_GT(dropout_frames, 40);
    EXPECT_GE(avoided, 0.99 * dropout_frames) << to_string(k);
  }
}

TEST(OracleSelector, MinimumTranslationError) {
  const std::vector<PoseError> e{{0.1, 1.0}, {0.05, 3.0}, {0.3, 0.1}, {0.2, 0.0}};
  EXPECT_EQ(select_oracle(e), 1);
}

TEST(OracleSelector, AllEqualPicksZero) {
  const std::vector<PoseError> e(4, PoseError{0.2, 1.0});
  EXPECT_EQ(select_oracle(e), 0);
  const double inf = std::numeric_limits<double>::infinity();
  const std::vector<PoseError> failed(3, PoseError{inf, 180.0});
  EXPECT_EQ(select_oracle(failed), 0);
}

TEST(OracleSelector, SkipsFailedCameras) {
  const double inf = std::numeric_limits<double>::infinity();
  const std::vector<PoseError> e{{inf, 180.0}, {3.0, 2.0}, {inf, 180.0}};
  EXPECT_EQ(select_oracle(e), 1);
}

}  // namespace
}  // namespace camsel
