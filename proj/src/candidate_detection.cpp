#include "dip3d/candidate_detection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dip3d/errors.hpp"

namespace dip3d {

void MaskConfig::validate() const {
  if (!std::isfinite(offset_px) || offset_px < 0.0) {
    throw Error(ErrorCode::kValidation, "mask.offset_px", "must be >= 0");
  }
}

void MatchConfig::validate() const {
  if (!(ratio_threshold > 0.0 && ratio_threshold <= 1.0)) {
    throw Error(ErrorCode::kValidation, "match.ratio_threshold",
                "must lie in (0, 1]");
  }
  if (!std::isfinite(epipolar_tolerance_px) || epipolar_tolerance_px < 0.0) {
    throw Error(ErrorCode::kValidation, "match.epipolar_tolerance_px",
                "must be >= 0");
  }
  if (!std::isfinite(min_disparity_px) || min_disparity_px <= 0.0) {
    throw Error(ErrorCode::kValidation, "match.min_disparity_px",
                "must be > 0");
  }
}

ColumnInterval compute_mask(const Pose2D& pose, const FrameMeta& meta,
                            const MaskConfig& cfg, Arm arm) {
  bool keep_left = false;
  switch (cfg.side_rule) {
    case MaskSide::kKeepLeftOfWrist: keep_left = true; break;
    case MaskSide::kKeepRightOfWrist: keep_left = false; break;
    case MaskSide::kAutoFromArm:
      if (pose.wrist.x < pose.elbow.x) {
        keep_left = true;
      } else if (pose.wrist.x > pose.elbow.x) {
        keep_left = false;
      } else {
        keep_left = arm == Arm::kLeft;
      }
      break;
  }
  const ColumnInterval keep =
      keep_left ? ColumnInterval{0.0, pose.wrist.x - cfg.offset_px}
                : ColumnInterval{pose.wrist.x + cfg.offset_px,
                                 static_cast<double>(meta.image_width_px)};
  if (keep.x_max < keep.x_min) {
    throw Error(ErrorCode::kEmptyMask, "", "no columns left after masking");
  }
  return keep;
}

std::vector<FeatureCandidate> filter_candidates(
    const std::vector<FeatureCandidate>& features, const ColumnInterval& keep) {
  std::vector<FeatureCandidate> out;
  std::copy_if(features.begin(), features.end(), std::back_inserter(out),
               [&](const FeatureCandidate& f) { return keep.contains(f.point.x); });
  return out;
}

namespace {

double squared_l2(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}

struct Tentative {
  int left;
  int right;
  double distance;
};

}  // namespace

std::vector<MatchedCandidate> match_stereo(
    const std::vector<FeatureCandidate>& left,
    const std::vector<FeatureCandidate>& right, const MatchConfig& cfg) {
  std::size_t dim = 0;
  bool have_dim = false;
  for (const auto* list : {&left, &right}) {
    for (const auto& f : *list) {
      if (!have_dim) {
        dim = f.descriptor.size();
        have_dim = true;
      } else if (f.descriptor.size() != dim) {
        throw Error(ErrorCode::kDimensionMismatch, "descriptor",
                    "descriptor lengths differ");
      }
    }
  }
  if (right.size() < 2) return {};

  std::vector<Tentative> tentative;
  for (std::size_t i = 0; i < left.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    double second = std::numeric_limits<double>::infinity();
    int best_j = -1;
    for (std::size_t j = 0; j < right.size(); ++j) {
      const double d = squared_l2(left[i].descriptor, right[j].descriptor);
      if (d < best) {
        second = best;
        best = d;
        best_j = static_cast<int>(j);
      } else if (d < second) {
        second = d;
      }
    }
    const double d1 = std::sqrt(best);
    const double d2 = std::sqrt(second);
    // d2 == 0 means two identical nearest neighbours: ambiguous.
    if (!(d2 > 0.0) || d1 / d2 > cfg.ratio_threshold) continue;

    const PixelPoint& l = left[i].point;
    const PixelPoint& r = right[static_cast<std::size_t>(best_j)].point;
    if (std::abs(l.y - r.y) > cfg.epipolar_tolerance_px) continue;
    if (disparity(l.x, r.x) < cfg.min_disparity_px) continue;
    tentative.push_back({static_cast<int>(i), best_j, d1});
  }

  std::stable_sort(tentative.begin(), tentative.end(),
                   [](const Tentative& a, const Tentative& b) {
                     return a.distance < b.distance;
                   });
  std::vector<bool> used(right.size(), false);
  std::vector<MatchedCandidate> out;
  for (const Tentative& t : tentative) {
    if (used[static_cast<std::size_t>(t.right)]) continue;
    used[static_cast<std::size_t>(t.right)] = true;
    MatchedCandidate m;
    m.left = left[static_cast<std::size_t>(t.left)].point;
    m.right = right[static_cast<std::size_t>(t.right)].point;
    m.match_distance = t.distance;
    m.index = static_cast<int>(out.size());
    m.left_source = t.left;
    m.right_source = t.right;
    out.push_back(m);
  }
  return out;
}

}  // namespace dip3d
