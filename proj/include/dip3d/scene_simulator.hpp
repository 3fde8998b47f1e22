#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "dip3d/frame_model.hpp"
#include "dip3d/stereo_camera.hpp"

namespace dip3d {

struct NoiseSpec {
  double pixel_sigma = 0.0;       // px, per coordinate per image
  double descriptor_sigma = 0.0;  // per descriptor entry per image

  void validate() const;
};

struct ArmTriplet {
  CameraPoint3D shoulder = CameraPoint3D::Zero();
  CameraPoint3D elbow = CameraPoint3D::Zero();
  CameraPoint3D wrist = CameraPoint3D::Zero();
};

struct SceneSpec {
  std::string frame_id = "scene";
  CalibratedStereoRig rig;
  Arm arm_side = Arm::kRight;
  ArmTriplet arm;
  std::vector<CameraPoint3D> objects;
  int intended_target = 0;
  int distractors = 0;  // random background features per image
  int descriptor_dim = 32;
  NoiseSpec noise;
  std::uint64_t seed = 0;
  double z_gap_max = 0.5;

  // Target index, arm z gaps, counts and noise. Frustum membership is
  // checked by generate_scene (OutOfFrustum).
  void validate() const;
};

struct GroundTruth {
  std::string frame_id;
  int true_selection = -1;
  int intended_target = -1;
  std::vector<PixelPoint> true_left_pixels;
  std::vector<double> true_distances;
  // Second-smallest minus smallest true distance; +inf with one object.
  double selection_margin = 0.0;

  friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

struct SimulatedScene {
  Frame frame;
  GroundTruth truth;
};

struct BatchOptions {
  double object_jitter_m = 0.15;
  double arm_jitter_m = 0.1;
  bool randomize_target = true;
};

// 1600x1200, f = 1000 px, principal point at the centre, 10 cm baseline.
CalibratedStereoRig default_rig();

// Pool-like layout: three objects 1 m apart in depth around `diver_depth`
// near the optical axis, a right-arm diver standing 1 m to the right at
// `diver_depth` and aiming at the middle object, ten distractors.
SceneSpec default_pool_scene(double diver_depth = 3.0,
                             const CalibratedStereoRig& rig = default_rig());

// Rigidly shifts the whole scene along the optical axis so the shoulder
// sits at `shoulder_depth`.
SceneSpec place_at_depth(const SceneSpec& spec, double shoulder_depth);

/// Builds a straight arm whose elbow->wrist ray passes through `target`.
/// The wrist is the point at depth `wrist_depth` on the line from
/// `pointing_from` to `target`; elbow and shoulder follow behind it at
/// `arm_length` spacing. Throws InfeasibleGeometry for a non-positive arm
/// length, a target that is not ahead of the wrist, a line parallel to the
/// image plane, z gaps above 0.5 m or any point behind the camera.
ArmTriplet aim_arm_at(const CameraPoint3D& target, double wrist_depth,
                      double arm_length,
                      const CameraPoint3D& pointing_from = CameraPoint3D::Zero());

/// Projects the scene through the rig, attaches descriptors, adds noise.
/// Ground truth is computed on the noise-free 3D geometry.
SimulatedScene generate_scene(const SceneSpec& spec);

/// `count` perturbed copies of `base`; scene i depends only on (seed, i).
std::vector<SimulatedScene> generate_batch(const SceneSpec& base, int count,
                                           std::uint64_t seed,
                                           const BatchOptions& options = {});

// Point-to-line distance via orthogonal projection onto the line direction.
double line_distance(const CameraPoint3D& point, const CameraPoint3D& on_line,
                     const CameraPoint3D& direction);

std::string serialize_truth(const GroundTruth& truth);
GroundTruth parse_truth(std::string_view document);

std::string serialize_scene_spec(const SceneSpec& spec,
                                 const BatchOptions& batch = {});
// Returns the spec and fills `batch` from the optional "batch" section.
SceneSpec parse_scene_spec(std::string_view document,
                           BatchOptions* batch = nullptr);

}  // namespace dip3d
