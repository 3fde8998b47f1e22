#include "dip3d/pointing_resolver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include <Eigen/Geometry>

#include "dip3d/errors.hpp"

namespace dip3d {

void PointingConfig::validate() const {
  if (!std::isfinite(scale_factor) || scale_factor <= 0.0) {
    throw Error(ErrorCode::kValidation, "pointing.scale_factor", "must be > 0");
  }
  if (!std::isfinite(z_gap_max) || z_gap_max <= 0.0) {
    throw Error(ErrorCode::kValidation, "pointing.z_gap_max", "must be > 0");
  }
}

void ResolverConfig::validate() const {
  mask.validate();
  match.validate();
  pointing.validate();
}

namespace {

CameraPoint3D triangulate_keypoint(const CalibratedStereoRig& rig,
                                   const PixelPoint& left,
                                   const PixelPoint& right, const char* name) {
  CameraPoint3D p;
  try {
    p = reproject(rig, left, disparity(left.x, right.x));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kInvalidDisparity) throw;
    throw Error(ErrorCode::kPoseRejected, name, e.message());
  }
  if (!p.allFinite() || !(p.z() > 0.0)) {
    throw Error(ErrorCode::kPoseRejected, name, "non-finite or behind camera");
  }
  return p;
}

void check_gap(const CameraPoint3D& a, const CameraPoint3D& b, double max_gap,
               const char* which) {
  const double gap = std::abs(a.z() - b.z());
  if (gap > max_gap) {
    throw Error(ErrorCode::kInfeasiblePose, which,
                "z gap " + std::to_string(gap) + " m exceeds " +
                    std::to_string(max_gap) + " m");
  }
}

}  // namespace

Pose3D triangulate_pose(const Frame& frame, const CalibratedStereoRig& rig,
                        const PointingConfig& cfg) {
  const Pose2D& l = frame.pose_left;
  const Pose2D& r = frame.pose_right;
  Pose3D pose;
  pose.wrist = triangulate_keypoint(rig, l.wrist, r.wrist, "wrist");
  pose.elbow = triangulate_keypoint(rig, l.elbow, r.elbow, "elbow");
  if (cfg.shoulder_filter) {
    if (!l.shoulder || !r.shoulder) {
      throw Error(ErrorCode::kPoseRejected, "shoulder", "keypoint missing");
    }
    pose.shoulder =
        triangulate_keypoint(rig, *l.shoulder, *r.shoulder, "shoulder");
  } else if (l.shoulder && r.shoulder) {
    try {
      pose.shoulder =
          triangulate_keypoint(rig, *l.shoulder, *r.shoulder, "shoulder");
    } catch (const Error&) {
      pose.shoulder.reset();
    }
  }

  check_gap(pose.wrist, pose.elbow, cfg.z_gap_max, "wrist-elbow");
  if (cfg.shoulder_filter) {
    check_gap(pose.elbow, *pose.shoulder, cfg.z_gap_max, "elbow-shoulder");
  }
  return pose;
}

TriangulatedCandidates triangulate_candidates(
    const std::vector<MatchedCandidate>& matches,
    const CalibratedStereoRig& rig) {
  TriangulatedCandidates out;
  for (const MatchedCandidate& m : matches) {
    const std::string tag = "candidate " + std::to_string(m.index);
    try {
      const CameraPoint3D p = reproject(rig, m.left, disparity(m.left.x, m.right.x));
      if (!p.allFinite() || !(p.z() > 0.0)) {
        out.warnings.push_back(tag + " dropped: non-finite or behind camera");
        continue;
      }
      out.objects.push_back({p, m});
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kInvalidDisparity) throw;
      out.warnings.push_back(tag + " dropped: invalid disparity");
    }
  }
  return out;
}

CameraPoint3D extend_pointing(const CameraPoint3D& wrist,
                              const CameraPoint3D& elbow, double scale_factor) {
  const CameraPoint3D forearm = wrist - elbow;
  if (!(forearm.norm() >= 1e-6)) {
    throw Error(ErrorCode::kDegeneratePointing, "", "wrist and elbow coincide");
  }
  return wrist + scale_factor * forearm;
}

double perpendicular_distance(const CameraPoint3D& object,
                              const CameraPoint3D& wrist,
                              const CameraPoint3D& extension) {
  const CameraPoint3D axis = wrist - extension;
  const double length = axis.norm();
  if (!(length >= 1e-9)) {
    throw Error(ErrorCode::kDegeneratePointing, "",
                "wrist and extension point coincide");
  }
  return (object - extension).cross(axis).norm() / length;
}

SelectionResult select_object(const std::vector<Object3D>& objects,
                              const CameraPoint3D& wrist,
                              const CameraPoint3D& extension,
                              const PointingConfig& cfg) {
  if (objects.empty()) {
    throw Error(ErrorCode::kNoCandidates, "", "no candidate objects");
  }
  SelectionResult result;
  result.extension_point = extension;
  result.distances.reserve(objects.size());
  double min_distance = std::numeric_limits<double>::infinity();
  for (const Object3D& o : objects) {
    const double d = perpendicular_distance(o.point, wrist, extension);
    result.distances.push_back(d);
    min_distance = std::min(min_distance, d);
  }

  constexpr double kTieTolerance = 1e-9;
  int best = -1;
  for (std::size_t i = 0; i < objects.size(); ++i) {
    if (result.distances[i] - min_distance > kTieTolerance) continue;
    if (best < 0) {
      best = static_cast<int>(i);
    } else if (cfg.tie_break == TieBreak::kClosestZ &&
               objects[i].point.z() < objects[static_cast<std::size_t>(best)].point.z()) {
      best = static_cast<int>(i);
    }
  }

  const Object3D& chosen = objects[static_cast<std::size_t>(best)];
  result.selected_index = best;
  result.object_3d = chosen.point;
  result.object_2d_left = chosen.source.left;
  return result;
}

SelectionResult resolve(const Frame& frame, const CalibratedStereoRig& rig,
                        const ResolverConfig& cfg) {
  std::string stage;
  try {
    stage = "mask";
    std::vector<FeatureCandidate> left;
    std::vector<FeatureCandidate> right;
    try {
      left = filter_candidates(
          frame.features_left,
          compute_mask(frame.pose_left, frame.meta, cfg.mask, frame.arm));
      right = filter_candidates(
          frame.features_right,
          compute_mask(frame.pose_right, frame.meta, cfg.mask, frame.arm));
    } catch (const Error& e) {
      // An empty mask only means there is nothing to detect in this frame;
      // the pose is still checked before reporting NoCandidates.
      if (e.code() != ErrorCode::kEmptyMask) throw;
      left.clear();
      right.clear();
    }

    stage = "match";
    const std::vector<MatchedCandidate> matches =
        match_stereo(left, right, cfg.match);

    stage = "triangulate_pose";
    const Pose3D pose = triangulate_pose(frame, rig, cfg.pointing);

    stage = "triangulate_candidates";
    TriangulatedCandidates candidates = triangulate_candidates(matches, rig);

    stage = "extend";
    const CameraPoint3D extension =
        extend_pointing(pose.wrist, pose.elbow, cfg.pointing.scale_factor);

    stage = "select";
    SelectionResult result =
        select_object(candidates.objects, pose.wrist, extension, cfg.pointing);
    result.frame_id = frame.frame_id;
    result.warnings = std::move(candidates.warnings);
    return result;
  } catch (const Error& e) {
    if (!e.stage().empty()) throw;
    throw e.with_stage(stage);
  }
}

}  // namespace dip3d
