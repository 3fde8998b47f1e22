#pragma once

#include <utility>

#include <Eigen/Core>

namespace dip3d {

// Image coordinates in pixels, origin at the top-left corner.
struct PixelPoint {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const PixelPoint&, const PixelPoint&) = default;
};

// Left-camera frame: x right, y down, z forward, meters.
using CameraPoint3D = Eigen::Vector3d;

// Rectified pinhole stereo pair. Both images share the focal length and
// the principal row; the right camera sits `baseline_m` along +x.
struct CalibratedStereoRig {
  double focal_length_px = 0.0;
  double principal_x_px = 0.0;
  double principal_y_px = 0.0;
  double principal_x_right_px = 0.0;
  double baseline_m = 0.0;
  int image_width_px = 0;
  int image_height_px = 0;

  // Throws Error(kValidation, <field>) on the first violated invariant.
  void validate() const;

  bool contains(const PixelPoint& p) const {
    return p.x >= 0.0 && p.x <= image_width_px && p.y >= 0.0 &&
           p.y <= image_height_px;
  }

  friend bool operator==(const CalibratedStereoRig&,
                         const CalibratedStereoRig&) = default;
};

/// Horizontal offset x_left - x_right. Sign is not checked here.
inline double disparity(double x_left, double x_right) {
  return x_left - x_right;
}

/// Depth f*B/d. Throws InvalidDisparity for d <= 0 or non-finite d, which
/// covers both the z<0 and z=inf cases of the validity filter.
double depth_from_disparity(const CalibratedStereoRig& rig, double d);

/// The 4x4 matrix taking (x_left, y_left, d, 1) to homogeneous camera
/// coordinates (X, Y, Z, W). Third row carries +f and the last row uses
/// 1/B, so a positive disparity always yields a positive depth. When the
/// principal points differ, W absorbs the offset c_x - c_x^right.
Eigen::Matrix4d reprojection_matrix(const CalibratedStereoRig& rig);

/// Back-projects a left-image pixel with disparity `d` into the left
/// camera frame. Equivalent to Z = fB/d', X = (x - c_x) Z / f,
/// Y = (y - c_y) Z / f with d' = d - (c_x - c_x^right).
CameraPoint3D reproject(const CalibratedStereoRig& rig, const PixelPoint& left,
                        double d);

/// Forward model: (left pixel, right pixel). Throws BehindCamera for z <= 0.
std::pair<PixelPoint, PixelPoint> project_stereo(const CalibratedStereoRig& rig,
                                                 const CameraPoint3D& p);

}  // namespace dip3d
