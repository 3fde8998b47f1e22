#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dip3d/stereo_camera.hpp"

namespace dip3d {

inline constexpr int kSchemaVersion = 1;

enum class Arm { kRight, kLeft };

std::string_view to_string(Arm arm);

// Wrist, elbow and shoulder of the pointing arm in one image. The shoulder
// may only be absent when the shoulder feasibility filter is disabled.
struct Pose2D {
  PixelPoint wrist;
  PixelPoint elbow;
  std::optional<PixelPoint> shoulder;

  friend bool operator==(const Pose2D&, const Pose2D&) = default;
};

struct FeatureCandidate {
  PixelPoint point;
  std::vector<double> descriptor;

  friend bool operator==(const FeatureCandidate&,
                         const FeatureCandidate&) = default;
};

struct FrameMeta {
  int image_width_px = 0;
  int image_height_px = 0;

  static FrameMeta from_rig(const CalibratedStereoRig& rig) {
    return {rig.image_width_px, rig.image_height_px};
  }

  friend bool operator==(const FrameMeta&, const FrameMeta&) = default;
};

// One stereo observation.
struct Frame {
  std::string frame_id;
  Arm arm = Arm::kRight;
  FrameMeta meta;
  Pose2D pose_left;
  Pose2D pose_right;
  int descriptor_dim = 0;
  std::vector<FeatureCandidate> features_left;
  std::vector<FeatureCandidate> features_right;

  friend bool operator==(const Frame&, const Frame&) = default;
};

struct ParseOptions {
  // Off only when the shoulder feasibility filter is disabled.
  bool require_shoulder = true;
};

CalibratedStereoRig parse_calibration(std::string_view document);
std::string serialize_calibration(const CalibratedStereoRig& rig);

// Parses one frame document. Keypoints are [x, y] or [x, y, confidence];
// confidence values are accepted and discarded. Coordinates are range
// checked against `meta`.
Frame parse_frame(std::string_view document, const FrameMeta& meta,
                  const ParseOptions& options = {});
std::string serialize_frame(const Frame& frame);

// Non-fatal advisories: left/right keypoint rows that disagree by more than
// `epipolar_tolerance_px`, empty candidate lists, image size mismatch.
std::vector<std::string> validate_frame(const Frame& frame,
                                        const CalibratedStereoRig& rig,
                                        double epipolar_tolerance_px = 2.0);

}  // namespace dip3d
