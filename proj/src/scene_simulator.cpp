#include "dip3d/scene_simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <random>

#include "dip3d/errors.hpp"
#include "json_util.hpp"

namespace dip3d {

using detail::Json;

namespace {

constexpr double kMaxArmGapM = 0.5;

void require(bool ok, const char* field, const char* what) {
  if (!ok) throw Error(ErrorCode::kValidation, field, what);
}

// Straight arm along unit direction `u`, wrist first.
ArmTriplet straight_arm(const CameraPoint3D& wrist, const CameraPoint3D& u,
                        double arm_length) {
  ArmTriplet arm;
  arm.wrist = wrist;
  arm.elbow = wrist - arm_length * u;
  arm.shoulder = wrist - 2.0 * arm_length * u;
  for (const CameraPoint3D* p : {&arm.wrist, &arm.elbow, &arm.shoulder}) {
    if (!p->allFinite() || !(p->z() > 0.0)) {
      throw Error(ErrorCode::kInfeasibleGeometry, "arm",
                  "arm keypoint behind the camera");
    }
  }
  if (std::abs(arm.wrist.z() - arm.elbow.z()) > kMaxArmGapM ||
      std::abs(arm.elbow.z() - arm.shoulder.z()) > kMaxArmGapM) {
    throw Error(ErrorCode::kInfeasibleGeometry, "arm", "z gap above 0.5 m");
  }
  return arm;
}

// Arm hanging off `shoulder`, aimed at `target`.
ArmTriplet aim_from_shoulder(const CameraPoint3D& shoulder,
                             const CameraPoint3D& target, double arm_length) {
  const CameraPoint3D dir = target - shoulder;
  if (!(arm_length > 0.0) || !(dir.norm() > 2.0 * arm_length)) {
    throw Error(ErrorCode::kInfeasibleGeometry, "target",
                "target closer to the shoulder than the arm reaches");
  }
  const CameraPoint3D u = dir.normalized();
  return straight_arm(shoulder + 2.0 * arm_length * u, u, arm_length);
}

std::vector<double> random_descriptor(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> v(static_cast<std::size_t>(dim));
  double norm = 0.0;
  while (norm == 0.0) {
    for (double& x : v) x = normal(rng);
    norm = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
  }
  for (double& x : v) x /= norm;
  return v;
}

std::vector<double> perturb(const std::vector<double>& desc, double sigma,
                            std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> out = desc;
  for (double& x : out) x += sigma * normal(rng);
  return out;
}

PixelPoint noisy(const PixelPoint& p, double sigma, const FrameMeta& meta,
                 std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const double nx = sigma * normal(rng);
  const double ny = sigma * normal(rng);
  if (sigma == 0.0) return p;
  return {std::clamp(p.x + nx, 0.0, static_cast<double>(meta.image_width_px)),
          std::clamp(p.y + ny, 0.0, static_cast<double>(meta.image_height_px))};
}

std::pair<PixelPoint, PixelPoint> project_checked(const CalibratedStereoRig& rig,
                                                  const CameraPoint3D& p,
                                                  const std::string& name) {
  if (!p.allFinite() || !(p.z() > 0.0)) {
    throw Error(ErrorCode::kOutOfFrustum, name, "behind the camera");
  }
  auto views = project_stereo(rig, p);
  if (!rig.contains(views.first) || !rig.contains(views.second)) {
    throw Error(ErrorCode::kOutOfFrustum, name, "projects outside the image");
  }
  return views;
}

Json arm_to_json(const ArmTriplet& arm) {
  Json j;
  j["shoulder"] = detail::to_json(arm.shoulder);
  j["elbow"] = detail::to_json(arm.elbow);
  j["wrist"] = detail::to_json(arm.wrist);
  return j;
}

}  // namespace

void NoiseSpec::validate() const {
  require(std::isfinite(pixel_sigma) && pixel_sigma >= 0.0, "noise.pixel_sigma",
          "must be >= 0");
  require(std::isfinite(descriptor_sigma) && descriptor_sigma >= 0.0,
          "noise.descriptor_sigma", "must be >= 0");
}

void SceneSpec::validate() const {
  rig.validate();
  noise.validate();
  require(!objects.empty(), "objects", "at least one object required");
  require(intended_target >= 0 &&
              intended_target < static_cast<int>(objects.size()),
          "intended_target", "index out of range");
  require(distractors >= 0, "distractors", "must be >= 0");
  require(descriptor_dim > 0, "descriptor_dim", "must be positive");
  require(z_gap_max > 0.0, "z_gap_max", "must be positive");
  require(std::abs(arm.wrist.z() - arm.elbow.z()) <= z_gap_max, "arm",
          "wrist-elbow z gap too large");
  require(std::abs(arm.elbow.z() - arm.shoulder.z()) <= z_gap_max, "arm",
          "elbow-shoulder z gap too large");
  require((arm.wrist - arm.elbow).norm() > 1e-6, "arm",
          "wrist and elbow coincide");
}

CalibratedStereoRig default_rig() {
  CalibratedStereoRig rig;
  rig.focal_length_px = 1000.0;
  rig.principal_x_px = 800.0;
  rig.principal_y_px = 600.0;
  rig.principal_x_right_px = 800.0;
  rig.baseline_m = 0.1;
  rig.image_width_px = 1600;
  rig.image_height_px = 1200;
  return rig;
}

SceneSpec default_pool_scene(double diver_depth,
                             const CalibratedStereoRig& rig) {
  SceneSpec spec;
  spec.rig = rig;
  spec.objects = {{0.0, 0.3, diver_depth - 1.0},
                  {0.0, 0.3, diver_depth},
                  {0.0, 0.3, diver_depth + 1.0}};
  spec.intended_target = 1;
  spec.distractors = 10;
  spec.seed = 42;
  spec.arm = aim_from_shoulder({1.0, 0.0, diver_depth},
                               spec.objects[static_cast<std::size_t>(spec.intended_target)],
                               0.3);
  return spec;
}

SceneSpec place_at_depth(const SceneSpec& spec, double shoulder_depth) {
  SceneSpec out = spec;
  const CameraPoint3D shift(0.0, 0.0, shoulder_depth - spec.arm.shoulder.z());
  out.arm.shoulder += shift;
  out.arm.elbow += shift;
  out.arm.wrist += shift;
  for (CameraPoint3D& o : out.objects) o += shift;
  return out;
}

ArmTriplet aim_arm_at(const CameraPoint3D& target, double wrist_depth,
                      double arm_length, const CameraPoint3D& pointing_from) {
  if (!(arm_length > 0.0) || !std::isfinite(arm_length)) {
    throw Error(ErrorCode::kInfeasibleGeometry, "arm_length", "must be > 0");
  }
  const CameraPoint3D dir = target - pointing_from;
  if (std::abs(dir.z()) < 1e-12) {
    throw Error(ErrorCode::kInfeasibleGeometry, "target",
                "pointing line parallel to the image plane");
  }
  const double t = (wrist_depth - pointing_from.z()) / dir.z();
  if (!(t < 1.0)) {
    throw Error(ErrorCode::kInfeasibleGeometry, "target",
                "target is not ahead of the wrist");
  }
  return straight_arm(pointing_from + t * dir, dir.normalized(), arm_length);
}

double line_distance(const CameraPoint3D& point, const CameraPoint3D& on_line,
                     const CameraPoint3D& direction) {
  const CameraPoint3D u = direction / direction.norm();
  const CameraPoint3D v = point - on_line;
  return (v - v.dot(u) * u).norm();
}

SimulatedScene generate_scene(const SceneSpec& spec) {
  spec.validate();
  const CalibratedStereoRig& rig = spec.rig;
  const FrameMeta meta = FrameMeta::from_rig(rig);
  std::mt19937_64 rng(spec.seed);
  const double sigma = spec.noise.pixel_sigma;
  const double dsigma = spec.noise.descriptor_sigma;

  const auto wrist = project_checked(rig, spec.arm.wrist, "wrist");
  const auto elbow = project_checked(rig, spec.arm.elbow, "elbow");
  const auto shoulder = project_checked(rig, spec.arm.shoulder, "shoulder");

  SimulatedScene scene;
  Frame& frame = scene.frame;
  frame.frame_id = spec.frame_id;
  frame.arm = spec.arm_side;
  frame.meta = meta;
  frame.descriptor_dim = spec.descriptor_dim;
  frame.pose_left = {noisy(wrist.first, sigma, meta, rng),
                     noisy(elbow.first, sigma, meta, rng),
                     noisy(shoulder.first, sigma, meta, rng)};
  frame.pose_right = {noisy(wrist.second, sigma, meta, rng),
                      noisy(elbow.second, sigma, meta, rng),
                      noisy(shoulder.second, sigma, meta, rng)};

  for (std::size_t k = 0; k < spec.objects.size(); ++k) {
    const auto views = project_checked(rig, spec.objects[k],
                                       "objects[" + std::to_string(k) + "]");
    const std::vector<double> desc = random_descriptor(rng, spec.descriptor_dim);
    frame.features_left.push_back(
        {noisy(views.first, sigma, meta, rng), perturb(desc, dsigma, rng)});
    frame.features_right.push_back(
        {noisy(views.second, sigma, meta, rng), perturb(desc, dsigma, rng)});
  }
  std::uniform_real_distribution<double> ux(0.0, meta.image_width_px);
  std::uniform_real_distribution<double> uy(0.0, meta.image_height_px);
  for (auto* list : {&frame.features_left, &frame.features_right}) {
    for (int k = 0; k < spec.distractors; ++k) {
      const PixelPoint p{ux(rng), uy(rng)};
      list->push_back({p, random_descriptor(rng, spec.descriptor_dim)});
    }
  }
  std::shuffle(frame.features_left.begin(), frame.features_left.end(), rng);
  std::shuffle(frame.features_right.begin(), frame.features_right.end(), rng);

  // Ground truth straight from the 3D layout, with its own projection and
  // distance arithmetic.
  GroundTruth& truth = scene.truth;
  truth.frame_id = spec.frame_id;
  truth.intended_target = spec.intended_target;
  const CameraPoint3D pointing = spec.arm.wrist - spec.arm.elbow;
  for (const CameraPoint3D& o : spec.objects) {
    truth.true_left_pixels.push_back(
        {rig.focal_length_px * o.x() / o.z() + rig.principal_x_px,
         rig.focal_length_px * o.y() / o.z() + rig.principal_y_px});
    truth.true_distances.push_back(line_distance(o, spec.arm.wrist, pointing));
  }
  double best = std::numeric_limits<double>::infinity();
  double second = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < truth.true_distances.size(); ++k) {
    const double d = truth.true_distances[k];
    if (d < best) {
      second = best;
      best = d;
      truth.true_selection = static_cast<int>(k);
    } else if (d < second) {
      second = d;
    }
  }
  truth.selection_margin = second - best;
  return scene;
}

std::vector<SimulatedScene> generate_batch(const SceneSpec& base, int count,
                                           std::uint64_t seed,
                                           const BatchOptions& options) {
  if (count <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "count", "must be positive");
  }
  base.validate();
  const double arm_length = (base.arm.wrist - base.arm.elbow).norm();

  std::vector<SimulatedScene> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed),
                      static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(i)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> jitter(-1.0, 1.0);
    auto offset = [&](double scale) -> CameraPoint3D {
      const double x = jitter(rng);
      const double y = jitter(rng);
      const double z = jitter(rng);
      return CameraPoint3D(x, y, z) * scale;
    };

    SceneSpec spec = base;
    char suffix[16];
    std::snprintf(suffix, sizeof(suffix), "_%06d", i);
    spec.frame_id = base.frame_id + suffix;
    spec.seed = rng();
    for (CameraPoint3D& o : spec.objects) o += offset(options.object_jitter_m);
    if (options.randomize_target) {
      std::uniform_int_distribution<int> pick(
          0, static_cast<int>(spec.objects.size()) - 1);
      spec.intended_target = pick(rng);
    }
    const CameraPoint3D shoulder =
        base.arm.shoulder + offset(options.arm_jitter_m);
    try {
      spec.arm = aim_from_shoulder(
          shoulder, spec.objects[static_cast<std::size_t>(spec.intended_target)],
          arm_length);
      out.push_back(generate_scene(spec));
    } catch (const Error& e) {
      throw Error(e.code(), "scene " + std::to_string(i),
                  std::string(e.what()));
    }
  }
  return out;
}

std::string serialize_truth(const GroundTruth& truth) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["frame_id"] = truth.frame_id;
  j["true_selection"] = truth.true_selection;
  j["intended_target"] = truth.intended_target;
  Json pixels = Json::array();
  for (const PixelPoint& p : truth.true_left_pixels) {
    pixels.push_back(detail::to_json(p));
  }
  j["true_left_pixels"] = std::move(pixels);
  j["true_distances"] = truth.true_distances;
  if (std::isfinite(truth.selection_margin)) {
    j["selection_margin"] = truth.selection_margin;
  } else {
    j["selection_margin"] = nullptr;
  }
  return j.dump(2) + "\n";
}

GroundTruth parse_truth(std::string_view document) {
  const Json doc = detail::parse_document(document);
  detail::check_schema_version(doc, kSchemaVersion);
  GroundTruth truth;
  truth.frame_id = detail::get_string(doc, "frame_id");
  truth.true_selection = static_cast<int>(detail::get_integer(doc, "true_selection"));
  truth.intended_target =
      static_cast<int>(detail::get_integer(doc, "intended_target"));
  const Json& pixels = detail::get_array(doc, "true_left_pixels");
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    truth.true_left_pixels.push_back(detail::as_pixel(
        pixels[i], "true_left_pixels[" + std::to_string(i) + "]"));
  }
  for (const Json& v : detail::get_array(doc, "true_distances")) {
    truth.true_distances.push_back(detail::as_number(v, "true_distances"));
  }
  auto margin = doc.find("selection_margin");
  truth.selection_margin =
      (margin == doc.end() || margin->is_null())
          ? std::numeric_limits<double>::infinity()
          : detail::as_number(*margin, "selection_margin");
  if (truth.true_selection < 0 ||
      truth.true_selection >= static_cast<int>(truth.true_left_pixels.size()) ||
      truth.true_left_pixels.size() != truth.true_distances.size()) {
    throw Error(ErrorCode::kValidation, "true_selection",
                "inconsistent with the per-object lists");
  }
  return truth;
}

std::string serialize_scene_spec(const SceneSpec& spec,
                                 const BatchOptions& batch) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["frame_id"] = spec.frame_id;
  j["rig"] = Json::parse(serialize_calibration(spec.rig));
  j["arm_side"] = std::string(to_string(spec.arm_side));
  j["arm"] = arm_to_json(spec.arm);
  Json objects = Json::array();
  for (const CameraPoint3D& o : spec.objects) objects.push_back(detail::to_json(o));
  j["objects"] = std::move(objects);
  j["intended_target"] = spec.intended_target;
  j["distractors"] = spec.distractors;
  j["descriptor_dim"] = spec.descriptor_dim;
  j["noise"] = {{"pixel_sigma", spec.noise.pixel_sigma},
                {"descriptor_sigma", spec.noise.descriptor_sigma}};
  j["seed"] = spec.seed;
  j["z_gap_max"] = spec.z_gap_max;
  j["batch"] = {{"object_jitter_m", batch.object_jitter_m},
                {"arm_jitter_m", batch.arm_jitter_m},
                {"randomize_target", batch.randomize_target}};
  return j.dump(2) + "\n";
}

SceneSpec parse_scene_spec(std::string_view document, BatchOptions* batch) {
  const Json doc = detail::parse_document(document);
  detail::check_schema_version(doc, kSchemaVersion);
  SceneSpec spec;
  if (doc.contains("frame_id")) spec.frame_id = detail::get_string(doc, "frame_id");
  const Json& rig = detail::require(doc, "rig");
  spec.rig = parse_calibration(rig.dump());
  if (doc.contains("arm_side")) {
    const std::string side = detail::get_string(doc, "arm_side");
    if (side != "left" && side != "right") {
      throw Error(ErrorCode::kValidation, "arm_side", "expected right|left");
    }
    spec.arm_side = side == "left" ? Arm::kLeft : Arm::kRight;
  }
  const Json& arm = detail::require(doc, "arm");
  spec.arm.shoulder = detail::as_vec3(detail::require(arm, "shoulder", "arm"), "arm.shoulder");
  spec.arm.elbow = detail::as_vec3(detail::require(arm, "elbow", "arm"), "arm.elbow");
  spec.arm.wrist = detail::as_vec3(detail::require(arm, "wrist", "arm"), "arm.wrist");
  const Json& objects = detail::get_array(doc, "objects");
  for (std::size_t i = 0; i < objects.size(); ++i) {
    spec.objects.push_back(
        detail::as_vec3(objects[i], "objects[" + std::to_string(i) + "]"));
  }
  spec.intended_target =
      static_cast<int>(detail::get_integer(doc, "intended_target"));
  if (doc.contains("distractors")) {
    spec.distractors = static_cast<int>(detail::get_integer(doc, "distractors"));
  }
  if (doc.contains("descriptor_dim")) {
    spec.descriptor_dim =
        static_cast<int>(detail::get_integer(doc, "descriptor_dim"));
  }
  if (auto it = doc.find("noise"); it != doc.end()) {
    if (it->contains("pixel_sigma")) {
      spec.noise.pixel_sigma = detail::get_number(*it, "pixel_sigma", "noise");
    }
    if (it->contains("descriptor_sigma")) {
      spec.noise.descriptor_sigma =
          detail::get_number(*it, "descriptor_sigma", "noise");
    }
  }
  if (doc.contains("seed")) {
    const Json& seed = doc["seed"];
    if (!seed.is_number_unsigned() && !seed.is_number_integer()) {
      throw Error(ErrorCode::kParse, "seed", "expected an integer");
    }
    spec.seed = seed.get<std::uint64_t>();
  }
  if (doc.contains("z_gap_max")) spec.z_gap_max = detail::get_number(doc, "z_gap_max");
  if (batch != nullptr) {
    *batch = BatchOptions{};
    if (auto it = doc.find("batch"); it != doc.end()) {
      if (it->contains("object_jitter_m")) {
        batch->object_jitter_m = detail::get_number(*it, "object_jitter_m", "batch");
      }
      if (it->contains("arm_jitter_m")) {
        batch->arm_jitter_m = detail::get_number(*it, "arm_jitter_m", "batch");
      }
      if (it->contains("randomize_target")) {
        const Json& v = (*it)["randomize_target"];
        if (!v.is_boolean()) {
          throw Error(ErrorCode::kParse, "batch.randomize_target",
                      "expected a boolean");
        }
        batch->randomize_target = v.get<bool>();
      }
    }
  }
  spec.validate();
  return spec;
}

}  // namespace dip3d
