#pragma once

#include <vector>

#include "dip3d/frame_model.hpp"

namespace dip3d {

enum class MaskSide { kAutoFromArm, kKeepLeftOfWrist, kKeepRightOfWrist };

struct MaskConfig {
  double offset_px = 20.0;
  MaskSide side_rule = MaskSide::kAutoFromArm;

  void validate() const;
};

struct MatchConfig {
  double ratio_threshold = 0.3;
  double epipolar_tolerance_px = 2.0;
  double min_disparity_px = 1.0;

  void validate() const;
};

// Closed interval of image columns that survive masking. Spans the full
// image height.
struct ColumnInterval {
  double x_min = 0.0;
  double x_max = 0.0;

  bool contains(double x) const { return x >= x_min && x <= x_max; }
  friend bool operator==(const ColumnInterval&, const ColumnInterval&) = default;
};

struct MatchedCandidate {
  PixelPoint left;
  PixelPoint right;
  double match_distance = 0.0;
  int index = 0;
  // Positions in the (filtered) input lists the match came from.
  int left_source = 0;
  int right_source = 0;

  friend bool operator==(const MatchedCandidate&,
                         const MatchedCandidate&) = default;
};

/// Columns to keep given the pointing arm. Under kAutoFromArm the kept side
/// is the one the image-plane forearm points toward; a vertical forearm
/// falls back to the arm flag (right arm keeps the right of the wrist).
/// Throws EmptyMask if nothing is left.
ColumnInterval compute_mask(const Pose2D& pose, const FrameMeta& meta,
                            const MaskConfig& cfg, Arm arm = Arm::kRight);

std::vector<FeatureCandidate> filter_candidates(
    const std::vector<FeatureCandidate>& features, const ColumnInterval& keep);

/// Brute-force two-nearest-neighbour matching (L2) from left to right with
/// the ratio test, then the epipolar and minimum-disparity checks. Right
/// candidates are assigned greedily by ascending best distance, each at
/// most once. Fewer than two right candidates yields no matches.
std::vector<MatchedCandidate> match_stereo(
    const std::vector<FeatureCandidate>& left,
    const std::vector<FeatureCandidate>& right, const MatchConfig& cfg);

}  // namespace dip3d
