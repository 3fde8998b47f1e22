#include <optional>

#include "dip3d/errors.hpp"
#include "dip3d/frame_model.hpp"
#include "dip3d/pointing_resolver.hpp"
#include "json_util.hpp"

namespace dip3d {

using detail::Json;

namespace {

std::optional<ErrorCode> code_from_name(std::string_view name) {
  for (int c = 0; c <= static_cast<int>(ErrorCode::kIo); ++c) {
    const auto code = static_cast<ErrorCode>(c);
    if (to_string(code) == name) return code;
  }
  return std::nullopt;
}

std::vector<std::string> parse_warnings(const Json& doc) {
  std::vector<std::string> out;
  auto it = doc.find("warnings");
  if (it == doc.end() || it->is_null()) return out;
  if (!it->is_array()) throw Error(ErrorCode::kParse, "warnings", "expected an array");
  for (const Json& w : *it) {
    if (!w.is_string()) throw Error(ErrorCode::kParse, "warnings", "expected strings");
    out.push_back(w.get<std::string>());
  }
  return out;
}

}  // namespace

Rejection make_rejection(const std::string& frame_id, const Error& error) {
  return {frame_id, error.code(), error.stage(), error.detail(),
          error.message(), {}};
}

ResolveOutcome try_resolve(const Frame& frame, const CalibratedStereoRig& rig,
                           const ResolverConfig& cfg) {
  try {
    return resolve(frame, rig, cfg);
  } catch (const Error& e) {
    return make_rejection(frame.frame_id, e);
  }
}

const std::string& outcome_frame_id(const ResolveOutcome& outcome) {
  return std::visit([](const auto& o) -> const std::string& { return o.frame_id; },
                    outcome);
}

std::string serialize_outcome(const ResolveOutcome& outcome) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  if (const auto* r = std::get_if<SelectionResult>(&outcome)) {
    j["frame_id"] = r->frame_id;
    j["status"] = "resolved";
    j["selected_index"] = r->selected_index;
    j["object_2d_left"] = detail::to_json(r->object_2d_left);
    j["object_3d"] = detail::to_json(r->object_3d);
    j["distances"] = r->distances;
    j["extension_point"] = detail::to_json(r->extension_point);
    j["warnings"] = r->warnings;
  } else {
    const auto& rej = std::get<Rejection>(outcome);
    j["frame_id"] = rej.frame_id;
    j["status"] = "rejected";
    j["error"] = std::string(to_string(rej.code));
    j["stage"] = rej.stage;
    j["detail"] = rej.detail;
    j["message"] = rej.message;
    j["warnings"] = rej.warnings;
  }
  return j.dump(2) + "\n";
}

ResolveOutcome parse_outcome(std::string_view document) {
  const Json doc = detail::parse_document(document);
  detail::check_schema_version(doc, kSchemaVersion);
  const std::string frame_id = detail::get_string(doc, "frame_id");
  const std::string status = detail::get_string(doc, "status");
  if (status == "resolved") {
    SelectionResult r;
    r.frame_id = frame_id;
    r.selected_index = static_cast<int>(detail::get_integer(doc, "selected_index"));
    r.object_2d_left =
        detail::as_pixel(detail::require(doc, "object_2d_left"), "object_2d_left");
    r.object_3d = detail::as_vec3(detail::require(doc, "object_3d"), "object_3d");
    for (const Json& v : detail::get_array(doc, "distances")) {
      r.distances.push_back(detail::as_number(v, "distances"));
    }
    r.extension_point =
        detail::as_vec3(detail::require(doc, "extension_point"), "extension_point");
    r.warnings = parse_warnings(doc);
    return r;
  }
  if (status == "rejected") {
    Rejection rej;
    rej.frame_id = frame_id;
    const std::string name = detail::get_string(doc, "error");
    const auto code = code_from_name(name);
    if (!code) throw Error(ErrorCode::kParse, "error", "unknown error " + name);
    rej.code = *code;
    rej.stage = doc.contains("stage") ? detail::get_string(doc, "stage") : "";
    rej.detail = doc.contains("detail") ? detail::get_string(doc, "detail") : "";
    rej.message = doc.contains("message") ? detail::get_string(doc, "message") : "";
    rej.warnings = parse_warnings(doc);
    return rej;
  }
  throw Error(ErrorCode::kParse, "status", "expected resolved|rejected");
}

}  // namespace dip3d
