#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dip3d/candidate_detection.hpp"
#include "dip3d/errors.hpp"
#include "dip3d/frame_model.hpp"
#include "dip3d/stereo_camera.hpp"

namespace dip3d {

// Mean observed z gaps for a pointing arm, kept for reference only; the
// filter uses PointingConfig::z_gap_max.
inline constexpr double kObservedWristElbowGapM = 0.254;
inline constexpr double kObservedElbowShoulderGapM = 0.377;

enum class TieBreak { kClosestZ, kLowestIndex };

struct PointingConfig {
  double scale_factor = 3.0;
  double z_gap_max = 0.5;
  TieBreak tie_break = TieBreak::kClosestZ;
  // When false the shoulder is optional and its z-gap is not checked.
  bool shoulder_filter = true;

  void validate() const;
};

struct Pose3D {
  CameraPoint3D wrist = CameraPoint3D::Zero();
  CameraPoint3D elbow = CameraPoint3D::Zero();
  std::optional<CameraPoint3D> shoulder;
};

struct Object3D {
  CameraPoint3D point = CameraPoint3D::Zero();
  MatchedCandidate source;
};

struct TriangulatedCandidates {
  std::vector<Object3D> objects;
  std::vector<std::string> warnings;
};

struct SelectionResult {
  std::string frame_id;
  int selected_index = -1;
  CameraPoint3D object_3d = CameraPoint3D::Zero();
  PixelPoint object_2d_left;
  std::vector<double> distances;
  CameraPoint3D extension_point = CameraPoint3D::Zero();
  std::vector<std::string> warnings;
};

/// Triangulates wrist, elbow and (if present) shoulder from their left/right
/// columns, using the left pixel for x and y. A keypoint with invalid
/// disparity throws PoseRejected(<keypoint>); a z gap above z_gap_max
/// throws InfeasiblePose("wrist-elbow" | "elbow-shoulder").
Pose3D triangulate_pose(const Frame& frame, const CalibratedStereoRig& rig,
                        const PointingConfig& cfg = {});

// Matches with invalid disparity or a non-positive depth are dropped with a
// warning; each surviving object keeps its source match.
TriangulatedCandidates triangulate_candidates(
    const std::vector<MatchedCandidate>& matches,
    const CalibratedStereoRig& rig);

/// w + s_f (w - e). Throws DegeneratePointing when |w - e| < 1e-6 m.
CameraPoint3D extend_pointing(const CameraPoint3D& wrist,
                              const CameraPoint3D& elbow, double scale_factor);

/// Distance from `object` to the infinite line through `wrist` and
/// `extension`. Throws DegeneratePointing when |w - ext| < 1e-9 m.
double perpendicular_distance(const CameraPoint3D& object,
                              const CameraPoint3D& wrist,
                              const CameraPoint3D& extension);

/// Arg-min over perpendicular distances. Distances within 1e-9 m of the
/// minimum are ties, resolved by cfg.tie_break (closest z, then lowest
/// index). Throws NoCandidates on an empty list.
SelectionResult select_object(const std::vector<Object3D>& objects,
                              const CameraPoint3D& wrist,
                              const CameraPoint3D& extension,
                              const PointingConfig& cfg = {});

struct ResolverConfig {
  MaskConfig mask;
  MatchConfig match;
  PointingConfig pointing;

  void validate() const;
};

/// Full chain: mask both images, match, triangulate pose and candidates,
/// extend the pointing ray and select. Errors carry the stage name
/// ("mask", "match", "triangulate_pose", "triangulate_candidates",
/// "extend", "select").
SelectionResult resolve(const Frame& frame, const CalibratedStereoRig& rig,
                        const ResolverConfig& cfg = {});

// A frame the pipeline refused, with the error that stopped it.
struct Rejection {
  std::string frame_id;
  ErrorCode code = ErrorCode::kNoCandidates;
  std::string stage;
  std::string detail;
  std::string message;
  std::vector<std::string> warnings;
};

using ResolveOutcome = std::variant<SelectionResult, Rejection>;

Rejection make_rejection(const std::string& frame_id, const Error& error);

// resolve() with pipeline errors folded into a Rejection.
ResolveOutcome try_resolve(const Frame& frame, const CalibratedStereoRig& rig,
                           const ResolverConfig& cfg = {});

// Result documents: {frame_id, status, selected_index, object_2d_left,
// object_3d, distances, extension_point, warnings} for resolved frames and
// {frame_id, status, error, stage, detail, message, warnings} for rejected
// ones.
std::string serialize_outcome(const ResolveOutcome& outcome);
ResolveOutcome parse_outcome(std::string_view document);

const std::string& outcome_frame_id(const ResolveOutcome& outcome);

}  // namespace dip3d
