#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "dip3d/errors.hpp"
#include "dip3d/stereo_camera.hpp"

namespace dip3d::detail {

using Json = nlohmann::ordered_json;

inline std::string join_path(std::string_view parent, std::string_view key) {
  if (parent.empty()) return std::string(key);
  return std::string(parent) + "." + std::string(key);
}

inline Json parse_document(std::string_view document) {
  Json j = Json::parse(document, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) {
    throw Error(ErrorCode::kParse, "document", "malformed JSON");
  }
  if (!j.is_object()) {
    throw Error(ErrorCode::kParse, "document", "expected an object");
  }
  return j;
}

inline const Json& require(const Json& obj, std::string_view key,
                           std::string_view parent = {}) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    throw Error(ErrorCode::kParse, join_path(parent, key), "missing field");
  }
  return *it;
}

inline double as_number(const Json& v, const std::string& path) {
  if (!v.is_number()) throw Error(ErrorCode::kParse, path, "expected a number");
  return v.get<double>();
}

inline double get_number(const Json& obj, std::string_view key,
                         std::string_view parent = {}) {
  return as_number(require(obj, key, parent), join_path(parent, key));
}

inline long long get_integer(const Json& obj, std::string_view key,
                             std::string_view parent = {}) {
  const Json& v = require(obj, key, parent);
  if (!v.is_number_integer()) {
    throw Error(ErrorCode::kParse, join_path(parent, key),
                "expected an integer");
  }
  return v.get<long long>();
}

inline std::string get_string(const Json& obj, std::string_view key,
                              std::string_view parent = {}) {
  const Json& v = require(obj, key, parent);
  if (!v.is_string()) {
    throw Error(ErrorCode::kParse, join_path(parent, key), "expected a string");
  }
  return v.get<std::string>();
}

inline const Json& get_array(const Json& obj, std::string_view key,
                             std::string_view parent = {}) {
  const Json& v = require(obj, key, parent);
  if (!v.is_array()) {
    throw Error(ErrorCode::kParse, join_path(parent, key), "expected an array");
  }
  return v;
}

inline void check_schema_version(const Json& obj, int expected) {
  const long long v = get_integer(obj, "schema_version");
  if (v != expected) {
    throw Error(ErrorCode::kParse, "schema_version",
                "unsupported version " + std::to_string(v));
  }
}

// [x, y] with an optional trailing confidence.
inline PixelPoint as_pixel(const Json& v, const std::string& path) {
  if (!v.is_array() || v.size() < 2 || v.size() > 3) {
    throw Error(ErrorCode::kParse, path, "expected [x, y] or [x, y, conf]");
  }
  return {as_number(v[0], path), as_number(v[1], path)};
}

inline Eigen::Vector3d as_vec3(const Json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 3) {
    throw Error(ErrorCode::kParse, path, "expected [x, y, z]");
  }
  return {as_number(v[0], path), as_number(v[1], path),
          as_number(v[2], path)};
}

inline Json to_json(const PixelPoint& p) { return Json::array({p.x, p.y}); }

inline Json to_json(const Eigen::Vector3d& p) {
  return Json::array({p.x(), p.y(), p.z()});
}

}  // namespace dip3d::detail
