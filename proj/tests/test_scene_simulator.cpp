#include <cmath>
#include <functional>

#include <gtest/gtest.h>

#include "dip3d/candidate_detection.hpp"
#include "dip3d/errors.hpp"
#include "dip3d/pointing_resolver.hpp"
#include "dip3d/scene_simulator.hpp"
#include "support/oracles.hpp"

namespace dip3d {
namespace {

Error expect_error(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e;
  }
  ADD_FAILURE() << "expected an Error";
  return Error(ErrorCode::kIo, "");
}

TEST(GenerateScene, DeterministicForSeed) {
  SceneSpec spec = default_pool_scene();
  spec.noise.pixel_sigma = 1.0;
  spec.noise.descriptor_sigma = 0.05;
  const SimulatedScene a = generate_scene(spec);
  const SimulatedScene b = generate_scene(spec);
  EXPECT_EQ(a.frame, b.frame);
  EXPECT_EQ(a.truth, b.truth);
  EXPECT_EQ(serialize_frame(a.frame), serialize_frame(b.frame));
  spec.seed = 43;
  EXPECT_NE(generate_scene(spec).frame, a.frame);
}

TEST(GenerateScene, FeatureCountsAndTruthLayout) {
  const SceneSpec spec = default_pool_scene();
  const SimulatedScene s = generate_scene(spec);
  const std::size_t expected = spec.objects.size() + static_cast<std::size_t>(spec.distractors);
  EXPECT_EQ(s.frame.features_left.size(), expected);
  EXPECT_EQ(s.frame.features_right.size(), expected);
  EXPECT_EQ(s.frame.descriptor_dim, spec.descriptor_dim);
  EXPECT_EQ(s.truth.true_left_pixels.size(), spec.objects.size());
  EXPECT_EQ(s.truth.intended_target, spec.intended_target);
  EXPECT_EQ(s.frame.frame_id, s.truth.frame_id);
}

TEST(GenerateScene, DefaultArmAimsAtTarget) {
  const SceneSpec spec = default_pool_scene();
  const SimulatedScene s = generate_scene(spec);
  EXPECT_EQ(s.truth.true_selection, spec.intended_target);
  EXPECT_NEAR(s.truth.true_distances[static_cast<std::size_t>(spec.intended_target)], 0.0,
              1e-12);
  EXPECT_GT(s.truth.selection_margin, 0.0);
}

TEST(GenerateScene, TruthPixelsMatchMatrixProjection) {
  const SceneSpec spec = default_pool_scene(4.0);
  const SimulatedScene s = generate_scene(spec);
  for (std::size_t k = 0; k < spec.objects.size(); ++k) {
    const auto [l, r] = oracle::project_with_matrices(spec.rig, spec.objects[k]);
    EXPECT_NEAR(s.truth.true_left_pixels[k].x, l.x(), 1e-9);
    EXPECT_NEAR(s.truth.true_left_pixels[k].y, l.y(), 1e-9);
  }
}

TEST(GenerateScene, TruthDistancesAgreeWithResolverGeometry) {
  for (double depth : {2.0, 3.0, 5.0}) {
    const SceneSpec spec = default_pool_scene(depth);
    const SimulatedScene s = generate_scene(spec);
    const CameraPoint3D ext = extend_pointing(spec.arm.wrist, spec.arm.elbow, 3.0);
    for (std::size_t k = 0; k < spec.objects.size(); ++k) {
      EXPECT_NEAR(s.truth.true_distances[k],
                  perpendicular_distance(spec.objects[k], spec.arm.wrist, ext), 1e-9);
      EXPECT_NEAR(s.truth.true_distances[k],
                  oracle::point_line_distance(spec.objects[k], spec.arm.wrist, ext), 1e-9);
    }
  }
}

TEST(GenerateScene, NoiseFreeFeaturesReprojectExactly) {
  const SceneSpec spec = default_pool_scene(3.0);
  const SimulatedScene s = generate_scene(spec);
  const auto matches = match_stereo(s.frame.features_left, s.frame.features_right,
                                    MatchConfig{});
  int recovered = 0;
  for (const MatchedCandidate& m : matches) {
    const CameraPoint3D p = reproject(spec.rig, m.left, m.left.x - m.right.x);
    for (const CameraPoint3D& o : spec.objects) {
      if ((p - o).norm() < 1e-6) ++recovered;
    }
  }
  EXPECT_EQ(recovered, static_cast<int>(spec.objects.size()));
}

TEST(GenerateScene, DistantObjectFallsBelowMinimumDisparity) {
  SceneSpec spec = default_pool_scene();
  spec.objects.push_back({0.0, 0.3, 200.0});
  const SimulatedScene s = generate_scene(spec);
  const PixelPoint far = s.truth.true_left_pixels.back();
  const auto matches = match_stereo(s.frame.features_left, s.frame.features_right,
                                    MatchConfig{});
  for (const MatchedCandidate& m : matches) {
    EXPECT_FALSE(std::abs(m.left.x - far.x) < 1e-9 && std::abs(m.left.y - far.y) < 1e-9);
  }
}

TEST(GenerateScene, OutOfFrustumNamesTheObject) {
  SceneSpec spec = default_pool_scene();
  spec.objects[2] = {50.0, 0.0, 3.0};
  const Error err = expect_error([&] { generate_scene(spec); });
  EXPECT_EQ(err.code(), ErrorCode::kOutOfFrustum);
  EXPECT_EQ(err.detail(), "objects[2]");
}

TEST(SceneSpecValidation, RejectsBadValues) {
  SceneSpec spec = default_pool_scene();
  spec.intended_target = 7;
  EXPECT_EQ(expect_error([&] { spec.validate(); }).code(), ErrorCode::kValidation);
  spec = default_pool_scene();
  spec.noise.pixel_sigma = -1.0;
  EXPECT_EQ(expect_error([&] { spec.validate(); }).code(), ErrorCode::kValidation);
}

TEST(AimArmAt, PlacesWristOnTargetLine) {
  const CameraPoint3D target(0.3, -0.2, 5.0);
  const ArmTriplet arm = aim_arm_at(target, 3.0, 0.3);
  EXPECT_NEAR(arm.wrist.z(), 3.0, 1e-12);
  EXPECT_NEAR((arm.wrist - arm.elbow).norm(), 0.3, 1e-12);
  EXPECT_NEAR((arm.elbow - arm.shoulder).norm(), 0.3, 1e-12);
  const CameraPoint3D ext = extend_pointing(arm.wrist, arm.elbow, 3.0);
  EXPECT_NEAR(line_distance(target, arm.wrist, arm.wrist - arm.elbow), 0.0, 1e-12);
  EXPECT_NEAR(oracle::point_line_distance(target, arm.wrist, ext), 0.0, 1e-12);
}

TEST(AimArmAt, InfeasibleRequests) {
  EXPECT_EQ(expect_error([] { aim_arm_at({0, 0, 5}, 3.0, 0.0); }).code(),
            ErrorCode::kInfeasibleGeometry);
  EXPECT_EQ(expect_error([] { aim_arm_at({0, 0, 2}, 3.0, 0.3); }).code(),
            ErrorCode::kInfeasibleGeometry);
  EXPECT_EQ(expect_error([] { aim_arm_at({1, 0, 0}, 3.0, 0.3, {0, 0, 0}); }).code(),
            ErrorCode::kInfeasibleGeometry);
}

TEST(LineDistance, MatchesOracle) {
  const CameraPoint3D p(1, 3, 4), a(0, 0, 0), dir(2, 0, 0);
  EXPECT_DOUBLE_EQ(line_distance(p, a, dir), 5.0);
  EXPECT_NEAR(line_distance(p, a, dir), oracle::point_line_distance(p, a, a + dir), 1e-12);
}

TEST(GenerateBatch, ReproducibleAndSeedSensitive) {
  const SceneSpec spec = default_pool_scene();
  const auto a = generate_batch(spec, 1000, 7);
  const auto b = generate_batch(spec, 1000, 7);
  ASSERT_EQ(a.size(), 1000u);
  ASSERT_EQ(b.size(), 1000u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    ASSERT_EQ(a[i].frame, b[i].frame);
    ASSERT_EQ(a[i].truth, b[i].truth);
  }
  EXPECT_EQ(a.front().frame.frame_id, spec.frame_id + "_000000");
  const auto c = generate_batch(spec, 3, 8);
  EXPECT_NE(c[0].frame, a[0].frame);
}

TEST(GenerateBatch, NonPositiveCount) {
  EXPECT_EQ(expect_error([] { generate_batch(default_pool_scene(), 0, 7); }).code(),
            ErrorCode::kInvalidArgument);
}

TEST(GenerateBatch, TruthMatchesIndependentGeometry) {
  const auto scenes = generate_batch(default_pool_scene(), 50, 3);
  for (const SimulatedScene& s : scenes) {
    const Pose3D pose = triangulate_pose(s.frame, default_rig());
    EXPECT_GE(s.truth.true_selection, 0);
    EXPECT_EQ(s.truth.true_distances.size(), 3u);
    EXPECT_TRUE(pose.shoulder.has_value());
  }
}

TEST(SceneDocuments, RoundTrip) {
  SceneSpec spec = default_pool_scene(4.0);
  spec.noise.pixel_sigma = 1.5;
  BatchOptions batch;
  batch.object_jitter_m = 0.2;
  batch.randomize_target = false;
  BatchOptions parsed_batch;
  const SceneSpec back = parse_scene_spec(serialize_scene_spec(spec, batch), &parsed_batch);
  EXPECT_EQ(serialize_scene_spec(back, parsed_batch), serialize_scene_spec(spec, batch));
  EXPECT_EQ(parsed_batch.randomize_target, false);

  const SimulatedScene s = generate_scene(spec);
  EXPECT_EQ(parse_truth(serialize_truth(s.truth)), s.truth);

  SceneSpec single = spec;
  single.objects.resize(1);
  single.intended_target = 0;
  single.arm = aim_arm_at(single.objects[0], single.arm.shoulder.z() - 0.4, 0.3,
                          single.arm.shoulder);
  const SimulatedScene one = generate_scene(single);
  EXPECT_TRUE(std::isinf(one.truth.selection_margin));
  EXPECT_EQ(parse_truth(serialize_truth(one.truth)), one.truth);
}

}  // namespace
}  // namespace dip3d
