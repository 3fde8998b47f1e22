#pragma once

// Test-only reference implementations. Nothing here calls into the library's
// geometry or matching code paths.

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dip3d/candidate_detection.hpp"
#include "dip3d/stereo_camera.hpp"

namespace dip3d::oracle {

// Projects through explicit 3x4 camera matrices K [I | t].
inline std::pair<Eigen::Vector2d, Eigen::Vector2d> project_with_matrices(
    const CalibratedStereoRig& rig, const Eigen::Vector3d& p) {
  Eigen::Matrix3d k_left;
  k_left << rig.focal_length_px, 0, rig.principal_x_px, 0, rig.focal_length_px,
      rig.principal_y_px, 0, 0, 1;
  Eigen::Matrix3d k_right = k_left;
  k_right(0, 2) = rig.principal_x_right_px;
  Eigen::Matrix<double, 3, 4> rt_left = Eigen::Matrix<double, 3, 4>::Zero();
  rt_left.leftCols<3>().setIdentity();
  Eigen::Matrix<double, 3, 4> rt_right = rt_left;
  rt_right(0, 3) = -rig.baseline_m;
  const Eigen::Vector4d h(p.x(), p.y(), p.z(), 1.0);
  const Eigen::Vector3d l = k_left * rt_left * h;
  const Eigen::Vector3d r = k_right * rt_right * h;
  return {l.hnormalized(), r.hnormalized()};
}

// Distance from `o` to the line through a and b: minimise |a + t (b - a) - o|
// over t in closed form.
inline double point_line_distance(const Eigen::Vector3d& o,
                                  const Eigen::Vector3d& a,
                                  const Eigen::Vector3d& b) {
  const Eigen::Vector3d d = b - a;
  const double t = (o - a).dot(d) / d.squaredNorm();
  return (a + t * d - o).norm();
}

// Exhaustive matcher: full distance table, per-left sort of every right
// candidate, then repeated extraction of the globally smallest accepted
// distance whose right candidate is still free.
inline std::vector<std::pair<PixelPoint, PixelPoint>> exhaustive_match(
    const std::vector<FeatureCandidate>& left,
    const std::vector<FeatureCandidate>& right, const MatchConfig& cfg) {
  std::vector<std::pair<PixelPoint, PixelPoint>> out;
  if (right.size() < 2) return out;
  struct Accepted {
    std::size_t left;
    std::size_t right;
    double distance;
  };
  std::vector<Accepted> accepted;
  for (std::size_t i = 0; i < left.size(); ++i) {
    std::vector<std::pair<double, std::size_t>> row;
    for (std::size_t j = 0; j < right.size(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < left[i].descriptor.size(); ++k) {
        s += std::pow(left[i].descriptor[k] - right[j].descriptor[k], 2);
      }
      row.emplace_back(std::sqrt(s), j);
    }
    std::sort(row.begin(), row.end());
    const double d1 = row[0].first;
    const double d2 = row[1].first;
    if (d2 <= 0.0 || d1 / d2 > cfg.ratio_threshold) continue;
    const PixelPoint& l = left[i].point;
    const PixelPoint& r = right[row[0].second].point;
    if (std::fabs(l.y - r.y) > cfg.epipolar_tolerance_px) continue;
    if (l.x - r.x < cfg.min_disparity_px) continue;
    accepted.push_back({i, row[0].second, d1});
  }
  std::vector<bool> taken(right.size(), false);
  std::vector<bool> done(accepted.size(), false);
  for (std::size_t round = 0; round < accepted.size(); ++round) {
    std::size_t pick = accepted.size();
    for (std::size_t a = 0; a < accepted.size(); ++a) {
      if (done[a]) continue;
      if (pick == accepted.size() || accepted[a].distance < accepted[pick].distance ||
          (accepted[a].distance == accepted[pick].distance &&
           accepted[a].left < accepted[pick].left)) {
        pick = a;
      }
    }
    done[pick] = true;
    if (taken[accepted[pick].right]) continue;
    taken[accepted[pick].right] = true;
    out.emplace_back(left[accepted[pick].left].point,
                     right[accepted[pick].right].point);
  }
  return out;
}

inline CalibratedStereoRig random_rig(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> f(300.0, 2500.0);
  std::uniform_real_distribution<double> b(0.03, 0.6);
  std::uniform_int_distribution<int> w(320, 4000);
  std::uniform_int_distribution<int> h(240, 3000);
  CalibratedStereoRig rig;
  rig.focal_length_px = f(rng);
  rig.baseline_m = b(rng);
  rig.image_width_px = w(rng);
  rig.image_height_px = h(rng);
  std::uniform_real_distribution<double> cx(0.35 * rig.image_width_px,
                                            0.65 * rig.image_width_px);
  std::uniform_real_distribution<double> cy(0.35 * rig.image_height_px,
                                            0.65 * rig.image_height_px);
  std::uniform_real_distribution<double> dcx(-15.0, 15.0);
  rig.principal_x_px = cx(rng);
  rig.principal_y_px = cy(rng);
  rig.principal_x_right_px = rig.principal_x_px + dcx(rng);
  return rig;
}

// A point with z in [0.5, 20] m that lands inside both images.
inline Eigen::Vector3d random_visible_point(const CalibratedStereoRig& rig,
                                            std::mt19937_64& rng) {
  std::uniform_real_distribution<double> z(0.5, 20.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  while (true) {
    const double depth = z(rng);
    const double px = u(rng) * rig.image_width_px;
    const double py = u(rng) * rig.image_height_px;
    const Eigen::Vector3d p((px - rig.principal_x_px) * depth / rig.focal_length_px,
                            (py - rig.principal_y_px) * depth / rig.focal_length_px,
                            depth);
    const auto [l, r] = project_with_matrices(rig, p);
    if (r.x() >= 0.0 && r.x() <= rig.image_width_px && l.x() >= 0.0 &&
        l.x() <= rig.image_width_px) {
      return p;
    }
  }
}

inline std::vector<double> random_descriptor(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> v(static_cast<std::size_t>(dim));
  double s = 0.0;
  for (double& x : v) {
    x = n(rng);
    s += x * x;
  }
  for (double& x : v) x /= std::sqrt(s);
  return v;
}

// Small random stereo matching instance: some true correspondences sharing a
// noisy descriptor, plus independent clutter on both sides.
struct MatchInstance {
  std::vector<FeatureCandidate> left;
  std::vector<FeatureCandidate> right;
};

inline MatchInstance random_match_instance(std::mt19937_64& rng, int dim = 32,
                                           int max_per_side = 20) {
  std::uniform_int_distribution<int> count(0, max_per_side);
  std::uniform_real_distribution<double> x(0.0, 1600.0);
  std::uniform_real_distribution<double> y(0.0, 1200.0);
  std::uniform_real_distribution<double> disp(-5.0, 60.0);
  std::normal_distribution<double> row_noise(0.0, 1.5);
  std::normal_distribution<double> desc_noise(0.0, 0.05);
  MatchInstance inst;
  const int shared = count(rng) / 2;
  for (int k = 0; k < shared; ++k) {
    const auto desc = random_descriptor(rng, dim);
    const PixelPoint l{x(rng), y(rng)};
    const PixelPoint r{l.x - disp(rng), l.y + row_noise(rng)};
    auto noisy = desc;
    for (double& v : noisy) v += desc_noise(rng);
    inst.left.push_back({l, desc});
    inst.right.push_back({r, noisy});
  }
  const int extra_left = count(rng) - shared;
  const int extra_right = count(rng) - shared;
  for (int k = 0; k < std::max(0, extra_left); ++k) {
    inst.left.push_back({{x(rng), y(rng)}, random_descriptor(rng, dim)});
  }
  for (int k = 0; k < std::max(0, extra_right); ++k) {
    inst.right.push_back({{x(rng), y(rng)}, random_descriptor(rng, dim)});
  }
  std::shuffle(inst.left.begin(), inst.left.end(), rng);
  std::shuffle(inst.right.begin(), inst.right.end(), rng);
  return inst;
}

inline std::vector<std::pair<PixelPoint, PixelPoint>> as_pairs(
    const std::vector<MatchedCandidate>& matches) {
  std::vector<std::pair<PixelPoint, PixelPoint>> out;
  for (const auto& m : matches) out.emplace_back(m.left, m.right);
  return out;
}

}  // namespace dip3d::oracle
