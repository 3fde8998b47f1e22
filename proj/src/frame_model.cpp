#include "dip3d/frame_model.hpp"

#include <cmath>

#include "dip3d/errors.hpp"
#include "json_util.hpp"

namespace dip3d {

using detail::Json;

std::string_view to_string(Arm arm) {
  return arm == Arm::kLeft ? "left" : "right";
}

namespace {

constexpr const char* kCalibrationFields[] = {
    "focal_length_px", "principal_x_px", "principal_y_px",
    "principal_x_right_px", "baseline_m", "image_width_px", "image_height_px"};

PixelPoint checked_pixel(const Json& v, const std::string& path,
                         const FrameMeta& meta) {
  const PixelPoint p = detail::as_pixel(v, path);
  if (!std::isfinite(p.x) || !std::isfinite(p.y) || p.x < 0.0 ||
      p.x > meta.image_width_px || p.y < 0.0 || p.y > meta.image_height_px) {
    throw Error(ErrorCode::kValidation, path, "pixel outside the image");
  }
  return p;
}

Pose2D parse_pose(const Json& doc, const char* key, const FrameMeta& meta,
                  const ParseOptions& options) {
  auto it = doc.find(key);
  if (it == doc.end() || it->is_null()) {
    throw Error(ErrorCode::kValidation, key, "pose missing");
  }
  if (!it->is_object()) {
    throw Error(ErrorCode::kParse, key, "expected an object");
  }
  auto keypoint = [&](const char* name) -> std::optional<PixelPoint> {
    auto kp = it->find(name);
    if (kp == it->end() || kp->is_null()) return std::nullopt;
    return checked_pixel(*kp, detail::join_path(key, name), meta);
  };
  auto required = [&](const char* name) {
    auto p = keypoint(name);
    if (!p) {
      throw Error(ErrorCode::kValidation, detail::join_path(key, name),
                  "keypoint missing");
    }
    return *p;
  };
  Pose2D pose;
  pose.wrist = required("wrist");
  pose.elbow = required("elbow");
  pose.shoulder = options.require_shoulder ? required("shoulder")
                                           : keypoint("shoulder");
  return pose;
}

std::vector<FeatureCandidate> parse_features(const Json& doc, const char* key,
                                             int dim, const FrameMeta& meta) {
  const Json& arr = detail::get_array(doc, key);
  std::vector<FeatureCandidate> out;
  out.reserve(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string path = std::string(key) + "[" + std::to_string(i) + "]";
    const Json& f = arr[i];
    if (!f.is_object()) {
      throw Error(ErrorCode::kParse, path, "expected an object");
    }
    FeatureCandidate c;
    c.point = checked_pixel(
        Json::array({detail::get_number(f, "x", path),
                     detail::get_number(f, "y", path)}),
        path, meta);
    const Json& desc = detail::get_array(f, "desc", path);
    if (static_cast<int>(desc.size()) != dim) {
      throw Error(ErrorCode::kValidation, path + ".desc",
                  "descriptor length " + std::to_string(desc.size()) +
                      " != descriptor_dim " + std::to_string(dim));
    }
    c.descriptor.reserve(desc.size());
    for (const Json& v : desc) {
      const double x = detail::as_number(v, path + ".desc");
      if (!std::isfinite(x)) {
        throw Error(ErrorCode::kValidation, path + ".desc", "non-finite");
      }
      c.descriptor.push_back(x);
    }
    out.push_back(std::move(c));
  }
  return out;
}

Json pose_to_json(const Pose2D& pose) {
  Json j;
  j["wrist"] = detail::to_json(pose.wrist);
  j["elbow"] = detail::to_json(pose.elbow);
  if (pose.shoulder) j["shoulder"] = detail::to_json(*pose.shoulder);
  return j;
}

Json features_to_json(const std::vector<FeatureCandidate>& features) {
  Json arr = Json::array();
  for (const auto& f : features) {
    Json j;
    j["x"] = f.point.x;
    j["y"] = f.point.y;
    j["desc"] = f.descriptor;
    arr.push_back(std::move(j));
  }
  return arr;
}

}  // namespace

CalibratedStereoRig parse_calibration(std::string_view document) {
  const Json doc = detail::parse_document(document);
  for (const char* field : kCalibrationFields) detail::require(doc, field);
  detail::check_schema_version(doc, kSchemaVersion);

  CalibratedStereoRig rig;
  rig.focal_length_px = detail::get_number(doc, "focal_length_px");
  rig.principal_x_px = detail::get_number(doc, "principal_x_px");
  rig.principal_y_px = detail::get_number(doc, "principal_y_px");
  rig.principal_x_right_px = detail::get_number(doc, "principal_x_right_px");
  rig.baseline_m = detail::get_number(doc, "baseline_m");
  rig.image_width_px = static_cast<int>(detail::get_integer(doc, "image_width_px"));
  rig.image_height_px =
      static_cast<int>(detail::get_integer(doc, "image_height_px"));
  rig.validate();
  return rig;
}

std::string serialize_calibration(const CalibratedStereoRig& rig) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["focal_length_px"] = rig.focal_length_px;
  j["principal_x_px"] = rig.principal_x_px;
  j["principal_y_px"] = rig.principal_y_px;
  j["principal_x_right_px"] = rig.principal_x_right_px;
  j["baseline_m"] = rig.baseline_m;
  j["image_width_px"] = rig.image_width_px;
  j["image_height_px"] = rig.image_height_px;
  return j.dump(2) + "\n";
}

Frame parse_frame(std::string_view document, const FrameMeta& meta,
                  const ParseOptions& options) {
  const Json doc = detail::parse_document(document);
  detail::check_schema_version(doc, kSchemaVersion);

  Frame frame;
  frame.frame_id = detail::get_string(doc, "frame_id");

  frame.arm = Arm::kRight;
  if (auto it = doc.find("arm"); it != doc.end() && !it->is_null()) {
    const std::string arm = detail::get_string(doc, "arm");
    if (arm == "left") {
      frame.arm = Arm::kLeft;
    } else if (arm != "right") {
      throw Error(ErrorCode::kValidation, "arm", "expected 'right' or 'left'");
    }
  }

  frame.meta.image_width_px =
      static_cast<int>(detail::get_integer(doc, "image_width_px"));
  frame.meta.image_height_px =
      static_cast<int>(detail::get_integer(doc, "image_height_px"));
  if (frame.meta.image_width_px != meta.image_width_px) {
    throw Error(ErrorCode::kValidation, "image_width_px",
                "does not match the calibration");
  }
  if (frame.meta.image_height_px != meta.image_height_px) {
    throw Error(ErrorCode::kValidation, "image_height_px",
                "does not match the calibration");
  }

  frame.pose_left = parse_pose(doc, "pose_left", meta, options);
  frame.pose_right = parse_pose(doc, "pose_right", meta, options);

  const long long dim = detail::get_integer(doc, "descriptor_dim");
  if (dim <= 0) {
    throw Error(ErrorCode::kValidation, "descriptor_dim", "must be positive");
  }
  frame.descriptor_dim = static_cast<int>(dim);
  frame.features_left =
      parse_features(doc, "features_left", frame.descriptor_dim, meta);
  frame.features_right =
      parse_features(doc, "features_right", frame.descriptor_dim, meta);
  return frame;
}

std::string serialize_frame(const Frame& frame) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["frame_id"] = frame.frame_id;
  j["arm"] = std::string(to_string(frame.arm));
  j["image_width_px"] = frame.meta.image_width_px;
  j["image_height_px"] = frame.meta.image_height_px;
  j["pose_left"] = pose_to_json(frame.pose_left);
  j["pose_right"] = pose_to_json(frame.pose_right);
  j["descriptor_dim"] = frame.descriptor_dim;
  j["features_left"] = features_to_json(frame.features_left);
  j["features_right"] = features_to_json(frame.features_right);
  return j.dump() + "\n";
}

std::vector<std::string> validate_frame(const Frame& frame,
                                        const CalibratedStereoRig& rig,
                                        double epipolar_tolerance_px) {
  std::vector<std::string> warnings;
  if (frame.meta != FrameMeta::from_rig(rig)) {
    warnings.emplace_back("image size does not match calibration");
  }
  auto check_row = [&](const char* name, const PixelPoint& l,
                       const PixelPoint& r) {
    if (std::abs(l.y - r.y) > epipolar_tolerance_px) {
      warnings.push_back(std::string("epipolar inconsistency: ") + name);
    }
  };
  check_row("wrist", frame.pose_left.wrist, frame.pose_right.wrist);
  check_row("elbow", frame.pose_left.elbow, frame.pose_right.elbow);
  if (frame.pose_left.shoulder && frame.pose_right.shoulder) {
    check_row("shoulder", *frame.pose_left.shoulder, *frame.pose_right.shoulder);
  }
  if (frame.features_left.empty() || frame.features_right.empty()) {
    warnings.emplace_back("no candidates");
  }
  return warnings;
}

}  // namespace dip3d
