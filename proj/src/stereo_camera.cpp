#include "dip3d/stereo_camera.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "dip3d/errors.hpp"

namespace dip3d {

void CalibratedStereoRig::validate() const {
  auto require = [](bool ok, const char* field, const char* what) {
    if (!ok) throw Error(ErrorCode::kValidation, field, what);
  };
  require(std::isfinite(focal_length_px) && focal_length_px > 0.0,
          "focal_length_px", "must be positive");
  require(std::isfinite(baseline_m) && baseline_m > 0.0, "baseline_m",
          "must be positive");
  require(image_width_px > 0, "image_width_px", "must be positive");
  require(image_height_px > 0, "image_height_px", "must be positive");
  require(std::isfinite(principal_x_px) && principal_x_px >= 0.0 &&
              principal_x_px < image_width_px,
          "principal_x_px", "must lie in [0, image_width_px)");
  require(std::isfinite(principal_y_px) && principal_y_px >= 0.0 &&
              principal_y_px < image_height_px,
          "principal_y_px", "must lie in [0, image_height_px)");
  require(std::isfinite(principal_x_right_px), "principal_x_right_px",
          "must be finite");
}

double depth_from_disparity(const CalibratedStereoRig& rig, double d) {
  if (!std::isfinite(d) || d <= 0.0) {
    throw Error(ErrorCode::kInvalidDisparity, "",
                "disparity " + std::to_string(d) + " px is not positive");
  }
  return rig.focal_length_px * rig.baseline_m / d;
}

Eigen::Matrix4d reprojection_matrix(const CalibratedStereoRig& rig) {
  const double f = rig.focal_length_px;
  const double b = rig.baseline_m;
  Eigen::Matrix4d q;
  // clang-format off
  q << 1.0, 0.0, 0.0,     -rig.principal_x_px,
       0.0, 1.0, 0.0,     -rig.principal_y_px,
       0.0, 0.0, 0.0,     f,
       0.0, 0.0, 1.0 / b, -(rig.principal_x_px - rig.principal_x_right_px) / b;
  // clang-format on
  return q;
}

CameraPoint3D reproject(const CalibratedStereoRig& rig, const PixelPoint& left,
                        double d) {
  // Validity is judged on the principal-point corrected disparity, i.e. on
  // the sign of W.
  const double corrected = d - (rig.principal_x_px - rig.principal_x_right_px);
  const double z = depth_from_disparity(rig, corrected);
  const Eigen::Vector4d h =
      reprojection_matrix(rig) * Eigen::Vector4d(left.x, left.y, d, 1.0);
  CameraPoint3D p = h.head<3>() / h.w();
  // Take z from depth_from_disparity so the two routes agree
  // bit for bit.
  p.z() = z;
  return p;
}

std::pair<PixelPoint, PixelPoint> project_stereo(const CalibratedStereoRig& rig,
                                                 const CameraPoint3D& p) {
  if (!(p.z() > 0.0) || !p.allFinite()) {
    throw Error(ErrorCode::kBehindCamera, "", "z must be positive");
  }
  const double f = rig.focal_length_px;
  const double y = f * p.y() / p.z() + rig.principal_y_px;
  const PixelPoint left{f * p.x() / p.z() + rig.principal_x_px, y};
  const PixelPoint right{f * (p.x() - rig.baseline_m) / p.z() +
                             rig.principal_x_right_px,
                         y};
  return {left, right};
}

}  // namespace dip3d
